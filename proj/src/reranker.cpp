#include "hetqa/reranker.hpp"

#include <algorithm>
#include <map>

#include <spdlog/spdlog.h>

#include "hetqa/errors.hpp"

namespace hetqa {

std::string_view to_string(EvidenceSource s) {
  switch (s) {
    case EvidenceSource::sparql: return "sparql";
    case EvidenceSource::sparse_kb: return "sparse_kb";
    case EvidenceSource::dense_kb: return "dense_kb";
    case EvidenceSource::sparse_text: return "sparse_text";
    case EvidenceSource::dense_text: return "dense_text";
    case EvidenceSource::oracle: return "oracle";
  }
  return "unknown";
}

EvidenceSource evidence_source_from_string(std::string_view s) {
  for (auto src : {EvidenceSource::sparql, EvidenceSource::sparse_kb, EvidenceSource::dense_kb,
                   EvidenceSource::sparse_text, EvidenceSource::dense_text, EvidenceSource::oracle})
    if (to_string(src) == s) return src;
  throw std::invalid_argument("unknown evidence source '" + std::string(s) + "'");
}

RankedContext fuse_and_rank(const std::string& question, std::vector<EvidenceCandidate> pool,
                            std::size_t k, RelevanceScorer& scorer) {
  if (k == 0) throw PreconditionViolation("k must be >= 1");
  RankedContext ctx{question, {}};

  std::map<std::string, std::size_t> by_key;
  std::vector<EvidenceCandidate> unique;
  for (auto& c : pool) {
    auto [it, inserted] = by_key.emplace(c.key, unique.size());
    if (inserted) {
      unique.push_back(std::move(c));
      continue;
    }
    auto& kept = unique[it->second];
    if (c.relevance && (!kept.relevance || *c.relevance > *kept.relevance)) kept = std::move(c);
  }
  if (unique.empty()) return ctx;

  std::vector<std::string> texts;
  texts.reserve(unique.size());
  for (const auto& c : unique) texts.push_back(c.text);

  std::vector<double> scores;
  try {
    scores = scorer.score(question, texts);
    if (scores.size() != texts.size()) throw ProviderUnavailable("scorer returned a misaligned score list");
  } catch (const ProviderUnavailable& e) {
    spdlog::warn("relevance scorer {} unavailable ({}); using lexical overlap", scorer.name(), e.what());
    LexicalOverlapScorer fallback;
    scores = fallback.score(question, texts);
  }
  for (std::size_t i = 0; i < unique.size(); ++i) unique[i].relevance = scores[i];

  std::sort(unique.begin(), unique.end(), [](const EvidenceCandidate& a, const EvidenceCandidate& b) {
    if (*a.relevance != *b.relevance) return *a.relevance > *b.relevance;
    if (a.source != b.source) return a.source < b.source;
    return a.key < b.key;
  });
  if (unique.size() > k) unique.resize(k);
  ctx.items = std::move(unique);
  return ctx;
}

}  // namespace hetqa
