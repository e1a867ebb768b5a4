#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace hetqa {

using Vector = std::vector<double>;

// Sentence-embedding backend. Implementations may be remote; they signal
// outages with ProviderUnavailable.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::vector<Vector> embed(std::span<const std::string> texts) = 0;
  virtual std::string name() const = 0;
};

// Cross-encoder style relevance: one score per candidate, higher is better.
class RelevanceScorer {
 public:
  virtual ~RelevanceScorer() = default;
  virtual std::vector<double> score(const std::string& query,
                                    std::span<const std::string> candidates) = 0;
  virtual std::string name() const = 0;
};

// Offline embedder: signed feature hashing of case-folded tokens into a
// fixed-dimension vector, L2-normalized. Deterministic and dependency-free.
class HashingEmbedder final : public EmbeddingProvider {
 public:
  explicit HashingEmbedder(std::size_t dim = 256) : dim_(dim) {}
  std::vector<Vector> embed(std::span<const std::string> texts) override;
  std::string name() const override { return "hashing-" + std::to_string(dim_); }
  std::size_t dimension() const { return dim_; }

 private:
  std::size_t dim_;
};

// |tokens(query) ∩ tokens(candidate)| / |tokens(query)| over token sets.
class LexicalOverlapScorer final : public RelevanceScorer {
 public:
  std::vector<double> score(const std::string& query, std::span<const std::string> candidates) override;
  std::string name() const override { return "lexical-overlap"; }
};

struct HttpEndpoint {
  std::string origin;       // scheme://host[:port]
  std::string path_prefix;  // "" or "/v1" style, no trailing slash
};

// Splits "http://host:port/prefix" into origin and path prefix.
HttpEndpoint parse_base_url(const std::string& url);

struct ShimOptions {
  std::string base_url = "http://127.0.0.1:8088";
  std::size_t batch_cap = 64;
  std::chrono::milliseconds timeout{10000};
};

// Client for the model service's POST /embed:
//   request  {"texts": [str, ...]}
//   response {"vectors": [[float, ...], ...]}
// Splits requests into batches of at most batch_cap texts.
class HttpEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit HttpEmbeddingProvider(ShimOptions opts) : opts_(std::move(opts)) {}
  std::vector<Vector> embed(std::span<const std::string> texts) override;
  std::string name() const override { return "shim-embed@" + opts_.base_url; }

 private:
  ShimOptions opts_;
};

// Client for POST /rerank:
//   request  {"query": str, "candidates": [str, ...]}
//   response {"scores": [float, ...]}
class HttpRelevanceScorer final : public RelevanceScorer {
 public:
  explicit HttpRelevanceScorer(ShimOptions opts) : opts_(std::move(opts)) {}
  std::vector<double> score(const std::string& query, std::span<const std::string> candidates) override;
  std::string name() const override { return "shim-rerank@" + opts_.base_url; }

 private:
  ShimOptions opts_;
};

// GET /healthz; returns the parsed body. Throws ProviderUnavailable.
nlohmann::json shim_health(const ShimOptions& opts);

// In-place L2 normalization; returns the original norm.
double normalize_in_place(Vector& v);

}  // namespace hetqa
