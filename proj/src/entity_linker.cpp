#include "hetqa/entity_linker.hpp"

#include <algorithm>
#include <set>

#include "hetqa/errors.hpp"
#include "hetqa/text_util.hpp"

namespace hetqa {

namespace {

std::string fold_tokens(const std::string& s) { return join(tokenize(s), " "); }

double cosine(const Vector& a, const Vector& b) {
  double dot = 0.0;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) dot += a[i] * b[i];
  return dot;
}

double coverage(const std::set<std::string>& words, const std::vector<std::string>& phrase) {
  std::set<std::string> ps(phrase.begin(), phrase.end());
  if (ps.empty()) return 0.0;
  std::size_t hit = 0;
  for (const auto& t : ps) hit += words.count(t);
  return static_cast<double>(hit) / static_cast<double>(ps.size());
}

}  // namespace

std::string_view to_string(LinkMethod m) {
  switch (m) {
    case LinkMethod::exact_label: return "exact_label";
    case LinkMethod::alias: return "alias";
    case LinkMethod::fuzzy: return "fuzzy";
    case LinkMethod::none: break;
  }
  return "none";
}

LinkMethod link_method_from_string(std::string_view s) {
  if (s == "exact_label") return LinkMethod::exact_label;
  if (s == "alias") return LinkMethod::alias;
  if (s == "fuzzy") return LinkMethod::fuzzy;
  return LinkMethod::none;
}

LinkResult link(const std::string& mention, const std::string& context_query, const TripleStore& store,
                EmbeddingProvider* provider, const LinkerOptions& opts) {
  if (trim(mention).empty()) throw PreconditionViolation("mention must be non-empty");
  LinkResult result;
  const auto key = fold_tokens(mention);
  const auto mention_tokens = tokenize(mention);

  std::vector<LinkCandidate> cands;
  for (const auto& [id, e] : store.entities())
    if (fold_tokens(e.label) == key) cands.push_back({id, e.label, 1.0});
  result.method = LinkMethod::exact_label;

  if (cands.empty()) {
    for (const auto& [id, e] : store.entities())
      for (const auto& a : e.aliases)
        if (fold_tokens(a) == key) {
          cands.push_back({id, e.label, 1.0});
          break;
        }
    result.method = LinkMethod::alias;
  }

  if (cands.empty()) {
    for (const auto& [id, e] : store.entities()) {
      double best = jaccard(mention_tokens, tokenize(e.label));
      for (const auto& a : e.aliases) best = std::max(best, jaccard(mention_tokens, tokenize(a)));
      if (best >= opts.fuzzy_threshold) cands.push_back({id, e.label, best});
    }
    result.method = LinkMethod::fuzzy;
  }

  if (cands.empty()) {
    result.method = LinkMethod::none;
    return result;
  }

  if (provider) {
    std::vector<std::string> texts{context_query};
    for (const auto& c : cands) texts.push_back(store.entity(c.entity)->description);
    auto vecs = provider->embed(texts);
    for (auto& v : vecs) normalize_in_place(v);
    for (std::size_t i = 0; i < cands.size(); ++i) {
      cands[i].description_score = cosine(vecs[0], vecs[i + 1]);
      cands[i].score = cands[i].description_score;
    }
  } else {
    for (auto& c : cands) c.score = c.lexical_score;
  }

  std::stable_sort(cands.begin(), cands.end(), [](const LinkCandidate& a, const LinkCandidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.entity < b.entity;
  });
  if (cands.size() > opts.max_candidates) cands.resize(opts.max_candidates);
  result.chosen = cands.front().entity;
  result.candidates = std::move(cands);
  return result;
}

std::optional<RelationId> match_relation(const std::string& words, const TripleStore& store) {
  auto wt = tokenize(words);
  std::set<std::string> ws(wt.begin(), wt.end());
  std::optional<RelationId> best;
  double best_cov = 0.0;
  std::size_t best_len = 0;
  for (const auto& [id, r] : store.relations()) {
    std::vector<std::vector<std::string>> phrases{tokenize(r.label)};
    for (const auto& a : r.aliases) phrases.push_back(tokenize(a));
    for (const auto& ph : phrases) {
      double cov = coverage(ws, ph);
      // prefer higher coverage, then longer phrases; ids iterate ascending
      if (cov > best_cov || (cov == best_cov && cov > 0.0 && ph.size() > best_len)) {
        best_cov = cov;
        best_len = ph.size();
        best = id;
      }
    }
  }
  if (best_cov < 0.5) return std::nullopt;
  return best;
}

sparql::Query repair_sparql(const sparql::Query& query, const LinkResult& link, const TripleStore& store,
                            const std::string& relation_words) {
  if (!link.chosen) throw NoEntityMatch();
  sparql::Query out = query;
  std::optional<std::optional<RelationId>> relation_match;  // computed lazily
  for (auto& p : out.patterns) {
    if (std::holds_alternative<EntityId>(p.subject)) p.subject = *link.chosen;
    if (const auto* rel = std::get_if<RelationId>(&p.predicate); rel && !store.relation(*rel)) {
      if (!relation_match) relation_match = match_relation(relation_words, store);
      if (*relation_match) p.predicate = **relation_match;
    }
  }
  return out;
}

}  // namespace hetqa
