#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hetqa/kb.hpp"
#include "hetqa/kernels.hpp"
#include "hetqa/providers.hpp"

namespace hetqa {

enum class PassageOrigin { wiki_text, linearized_triple };

struct Passage {
  std::string id;
  std::string title;
  std::string body;
  PassageOrigin origin = PassageOrigin::wiki_text;
  std::optional<Triple> source_triple;
};

enum class Retriever { sparse, dense };

std::string_view to_string(Retriever r);
Retriever retriever_from_string(std::string_view s);

struct ScoredHit {
  std::string passage_id;
  double score = 0.0;
  Retriever retriever = Retriever::sparse;
};

// "kb:<S>|<P>|<O>" with literal objects quoted; stable across runs.
std::string linearized_id(const Triple& t);

// Renders "<subject label> <relation label> <object label-or-literal>".
Passage linearize(const Triple& t, const TripleStore& store);
std::vector<Passage> linearize_all(const TripleStore& store);

// Reads {"id","title","text"} lines.
std::vector<Passage> load_passages(const std::filesystem::path& path);

// Okapi BM25 over case-folded tokens, k1=1.2, b=0.75,
// idf = max(0, ln((N - df + 0.5) / (df + 0.5))).
class SparseIndex {
 public:
  struct Posting {
    std::vector<std::uint32_t> docs;
    std::vector<std::uint32_t> tfs;
  };

  static SparseIndex build(const std::vector<Passage>& corpus);

  // Top-k docs with score > 0, score descending then id ascending.
  std::vector<ScoredHit> search(std::string_view query, std::size_t k,
                                kernels::Exec exec = kernels::Exec::parallel) const;

  double idf(const std::string& term) const;

  std::size_t doc_count() const { return ids_.size(); }
  double avg_doc_length() const { return avg_len_; }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::vector<std::uint32_t>& doc_lengths() const { return lengths_; }
  const Posting* postings(const std::string& term) const;
  kernels::Bm25Params params() const { return params_; }

  nlohmann::json to_json() const;
  static SparseIndex from_json(const nlohmann::json& j);

 private:
  kernels::Bm25Params params_{};
  std::vector<std::string> ids_;
  std::vector<std::uint32_t> lengths_;
  double avg_len_ = 0.0;
  std::map<std::string, Posting> postings_;
};

// Exact-scan cosine retriever over unit-norm vectors.
class DenseIndex {
 public:
  // Embeds every passage body (batched, up to `in_flight` batches of 64 at
  // once). Throws ProviderUnavailable or DimensionMismatch.
  static DenseIndex build(const std::vector<Passage>& corpus, EmbeddingProvider& provider,
                          std::size_t in_flight = 1);

  std::vector<ScoredHit> search(std::string_view query, std::size_t k, EmbeddingProvider& provider,
                                kernels::Exec exec = kernels::Exec::parallel) const;
  // Same scan for an already-embedded query.
  std::vector<ScoredHit> search_vector(Vector query, std::size_t k,
                                       kernels::Exec exec = kernels::Exec::parallel) const;

  std::size_t size() const { return ids_.size(); }
  std::size_t dimension() const { return dim_; }
  const std::vector<std::string>& ids() const { return ids_; }
  std::span<const double> vector(std::size_t i) const {
    return {matrix_.data() + i * dim_, dim_};
  }

  nlohmann::json to_json() const;
  static DenseIndex from_json(const nlohmann::json& j);

 private:
  std::vector<std::string> ids_;
  std::size_t dim_ = 0;
  std::vector<double> matrix_;
};

}  // namespace hetqa
