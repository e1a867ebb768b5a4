#include "hetqa/text_index.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <set>
#include <unordered_set>

#include "hetqa/errors.hpp"
#include "hetqa/text_util.hpp"

namespace hetqa {

using nlohmann::json;

namespace {

void check_unique_ids(const std::vector<Passage>& corpus) {
  std::unordered_set<std::string> seen;
  for (const auto& p : corpus)
    if (!seen.insert(p.id).second) throw DuplicateId(p.id);
}

void sort_hits(std::vector<ScoredHit>& hits) {
  std::sort(hits.begin(), hits.end(), [](const ScoredHit& a, const ScoredHit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.passage_id < b.passage_id;
  });
}

constexpr std::size_t kEmbedBatch = 64;

}  // namespace

std::string_view to_string(Retriever r) { return r == Retriever::sparse ? "sparse" : "dense"; }

Retriever retriever_from_string(std::string_view s) {
  if (s == "sparse" || s == "bm25") return Retriever::sparse;
  if (s == "dense") return Retriever::dense;
  throw std::invalid_argument("unknown retriever '" + std::string(s) + "'");
}

std::string linearized_id(const Triple& t) {
  return "kb:" + t.subject.str() + "|" + t.predicate.str() + "|" + to_string(t.object);
}

Passage linearize(const Triple& t, const TripleStore& store) {
  Passage p;
  p.id = linearized_id(t);
  p.title = store.label_of(t.subject);
  p.body = store.label_of(t.subject) + " " + store.label_of(t.predicate) + " " + store.label_of(t.object);
  p.origin = PassageOrigin::linearized_triple;
  p.source_triple = t;
  return p;
}

std::vector<Passage> linearize_all(const TripleStore& store) {
  std::vector<Passage> out;
  std::set<std::string> seen;  // the store is a multiset; passages are unique
  for (const auto& t : store.triples()) {
    auto p = linearize(t, store);
    if (seen.insert(p.id).second) out.push_back(std::move(p));
  }
  return out;
}

std::vector<Passage> load_passages(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MalformedRecord(path.string(), 0, "cannot open file");
  std::vector<Passage> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      auto j = json::parse(line);
      Passage p;
      p.id = j.at("id").get<std::string>();
      p.title = j.value("title", "");
      p.body = j.at("text").get<std::string>();
      out.push_back(std::move(p));
    } catch (const json::exception& e) {
      throw MalformedRecord(path.string(), lineno, e.what());
    }
  }
  return out;
}

// ----- sparse ------------------------------------------------------------

SparseIndex SparseIndex::build(const std::vector<Passage>& corpus) {
  check_unique_ids(corpus);
  SparseIndex idx;
  idx.ids_.reserve(corpus.size());
  idx.lengths_.reserve(corpus.size());
  std::uint64_t total = 0;
  for (std::uint32_t d = 0; d < corpus.size(); ++d) {
    idx.ids_.push_back(corpus[d].id);
    auto toks = tokenize(corpus[d].body);
    idx.lengths_.push_back(static_cast<std::uint32_t>(toks.size()));
    total += toks.size();
    std::map<std::string, std::uint32_t> tf;
    for (auto& t : toks) ++tf[t];
    for (auto& [term, n] : tf) {
      auto& post = idx.postings_[term];
      post.docs.push_back(d);
      post.tfs.push_back(n);
    }
  }
  idx.avg_len_ = corpus.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(corpus.size());
  return idx;
}

const SparseIndex::Posting* SparseIndex::postings(const std::string& term) const {
  auto it = postings_.find(term);
  return it == postings_.end() ? nullptr : &it->second;
}

double SparseIndex::idf(const std::string& term) const {
  const auto* p = postings(term);
  double df = p ? static_cast<double>(p->docs.size()) : 0.0;
  double n = static_cast<double>(ids_.size());
  return std::max(0.0, std::log((n - df + 0.5) / (df + 0.5)));
}

std::vector<ScoredHit> SparseIndex::search(std::string_view query, std::size_t k,
                                           kernels::Exec exec) const {
  if (k == 0) throw PreconditionViolation("k must be >= 1");
  if (ids_.empty()) return {};
  auto toks = tokenize(query);
  std::set<std::string> unique(toks.begin(), toks.end());
  std::vector<kernels::TermPostings> terms;
  for (const auto& t : unique) {
    const auto* p = postings(t);
    if (!p) continue;
    terms.push_back({idf(t), p->docs, p->tfs});
  }
  if (terms.empty()) return {};

  std::vector<double> scores(ids_.size());
  kernels::bm25(exec, terms, lengths_, avg_len_, params_, scores);

  std::vector<ScoredHit> hits;
  for (std::size_t d = 0; d < scores.size(); ++d)
    if (scores[d] > 0.0) hits.push_back({ids_[d], scores[d], Retriever::sparse});
  sort_hits(hits);
  if (hits.size() > k) hits.resize(k);
  return hits;
}

json SparseIndex::to_json() const {
  json post = json::object();
  for (const auto& [term, p] : postings_) post[term] = {{"docs", p.docs}, {"tfs", p.tfs}};
  return json{{"kind", "bm25"},
              {"k1", params_.k1},
              {"b", params_.b},
              {"ids", ids_},
              {"lengths", lengths_},
              {"postings", post}};
}

SparseIndex SparseIndex::from_json(const json& j) {
  SparseIndex idx;
  idx.params_.k1 = j.at("k1").get<double>();
  idx.params_.b = j.at("b").get<double>();
  idx.ids_ = j.at("ids").get<std::vector<std::string>>();
  idx.lengths_ = j.at("lengths").get<std::vector<std::uint32_t>>();
  std::uint64_t total = 0;
  for (auto l : idx.lengths_) total += l;
  idx.avg_len_ = idx.ids_.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(idx.ids_.size());
  for (const auto& [term, p] : j.at("postings").items())
    idx.postings_[term] = {p.at("docs").get<std::vector<std::uint32_t>>(),
                           p.at("tfs").get<std::vector<std::uint32_t>>()};
  return idx;
}

// ----- dense -------------------------------------------------------------

DenseIndex DenseIndex::build(const std::vector<Passage>& corpus, EmbeddingProvider& provider,
                             std::size_t in_flight) {
  check_unique_ids(corpus);
  DenseIndex idx;
  if (corpus.empty()) return idx;

  std::vector<std::string> bodies;
  bodies.reserve(corpus.size());
  for (const auto& p : corpus) bodies.push_back(p.body);

  std::vector<std::vector<Vector>> batches((bodies.size() + kEmbedBatch - 1) / kEmbedBatch);
  in_flight = std::max<std::size_t>(1, in_flight);
  for (std::size_t wave = 0; wave < batches.size(); wave += in_flight) {
    std::vector<std::future<std::vector<Vector>>> pending;
    for (std::size_t b = wave; b < std::min(batches.size(), wave + in_flight); ++b) {
      auto first = b * kEmbedBatch;
      auto span = std::span<const std::string>(bodies).subspan(first, std::min(kEmbedBatch, bodies.size() - first));
      pending.push_back(std::async(in_flight > 1 ? std::launch::async : std::launch::deferred,
                                   [&provider, span] { return provider.embed(span); }));
    }
    for (std::size_t i = 0; i < pending.size(); ++i) batches[wave + i] = pending[i].get();
  }

  for (std::size_t b = 0; b < batches.size(); ++b) {
    auto expected = std::min(kEmbedBatch, bodies.size() - b * kEmbedBatch);
    if (batches[b].size() != expected) throw DimensionMismatch("provider returned the wrong number of vectors");
    for (auto& v : batches[b]) {
      if (idx.dim_ == 0) idx.dim_ = v.size();
      if (v.empty() || v.size() != idx.dim_) throw DimensionMismatch("embedding dimensions differ");
      if (normalize_in_place(v) == 0.0) throw DimensionMismatch("provider returned a zero vector");
      idx.matrix_.insert(idx.matrix_.end(), v.begin(), v.end());
    }
  }
  for (const auto& p : corpus) idx.ids_.push_back(p.id);
  return idx;
}

std::vector<ScoredHit> DenseIndex::search(std::string_view query, std::size_t k,
                                          EmbeddingProvider& provider, kernels::Exec exec) const {
  if (k == 0) throw PreconditionViolation("k must be >= 1");
  if (ids_.empty()) return {};
  std::string q(query);
  auto vecs = provider.embed(std::span<const std::string>(&q, 1));
  if (vecs.size() != 1) throw DimensionMismatch("provider returned no query vector");
  return search_vector(std::move(vecs.front()), k, exec);
}

std::vector<ScoredHit> DenseIndex::search_vector(Vector query, std::size_t k, kernels::Exec exec) const {
  if (k == 0) throw PreconditionViolation("k must be >= 1");
  if (ids_.empty()) return {};
  if (query.size() != dim_) throw DimensionMismatch("query dimension differs from index dimension");
  normalize_in_place(query);
  std::vector<double> scores(ids_.size());
  kernels::dot_scan(exec, matrix_, dim_, query, scores);
  std::vector<ScoredHit> hits;
  hits.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i)
    hits.push_back({ids_[i], std::clamp(scores[i], -1.0, 1.0), Retriever::dense});
  sort_hits(hits);
  if (hits.size() > k) hits.resize(k);
  return hits;
}

json DenseIndex::to_json() const {
  return json{{"kind", "dense"}, {"dim", dim_}, {"ids", ids_}, {"matrix", matrix_}};
}

DenseIndex DenseIndex::from_json(const json& j) {
  DenseIndex idx;
  idx.dim_ = j.at("dim").get<std::size_t>();
  idx.ids_ = j.at("ids").get<std::vector<std::string>>();
  idx.matrix_ = j.at("matrix").get<std::vector<double>>();
  if (idx.matrix_.size() != idx.ids_.size() * idx.dim_) throw DimensionMismatch("dense index matrix size mismatch");
  return idx;
}

}  // namespace hetqa
