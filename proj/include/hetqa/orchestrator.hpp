#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hetqa/benchmark.hpp"
#include "hetqa/entity_linker.hpp"
#include "hetqa/kb.hpp"
#include "hetqa/llm.hpp"
#include "hetqa/reranker.hpp"
#include "hetqa/text_index.hpp"

namespace hetqa {

enum class Mode { detllm, vanilla, closed_book, oracle };
enum class Routing { separate, unified };

std::string_view to_string(Mode m);
Mode mode_from_string(std::string_view s);
std::string_view to_string(Routing r);
Routing routing_from_string(std::string_view s);

struct RunConfig {
  int n_hops = 2;
  int diverse_queries = 3;          // t samples per hop prompt
  std::size_t k = 3;                // retained context per hop
  std::size_t retrieval_depth = 5;  // hits requested per retriever call
  double query_temperature = 0.7;
  double answer_temperature = 0.0;
  int max_tokens = 256;
  Mode mode = Mode::detllm;

  Routing routing = Routing::separate;
  Retriever text_retriever = Retriever::dense;
  Retriever kb_retriever = Retriever::sparse;
  Retriever unified_retriever = Retriever::sparse;
  bool use_sparql = true;
  bool describe_links = true;  // disambiguate links with the embedder

  // Throws PreconditionViolation.
  void validate() const;
};

struct ToolHit {
  std::string key;
  double score = 0.0;
};

struct ToolInvocation {
  int id = 0;
  int hop = 0;
  std::string tool;    // sparse | dense | sparql | oracle
  std::string corpus;  // text | kb | unified | store | gold
  std::string query;
  std::vector<ToolHit> hits;
  std::optional<std::string> error;
};

struct HopState {
  int index = 1;
  std::string rationale;
  std::vector<std::string> search_queries;
  std::optional<std::string> query_entity;
  std::optional<std::string> sparql_text;      // as generated
  std::optional<std::string> executed_sparql;  // after repair, as run
  std::optional<LinkResult> link;
  RankedContext context;
  std::vector<std::string> errors;
};

struct PipelineTrace {
  std::string record_id;
  std::string question;
  Mode mode = Mode::detllm;
  std::vector<HopState> hops;
  int llm_call_count = 0;
  std::vector<std::string> prompt_digests;
  std::vector<ToolInvocation> invocations;
  std::string final_rationale;
  std::string answer;
  std::vector<std::string> errors;
};

// Retrieval resources for one run. Corpora and indexes are owned; the
// providers are borrowed and must outlive the toolset.
class Toolset {
 public:
  struct Providers {
    EmbeddingProvider* embedder = nullptr;
    RelevanceScorer* scorer = nullptr;
    llm::Provider* llm = nullptr;
  };

  // Indexes loaded ahead of time, keyed by corpus name.
  struct Prebuilt {
    std::map<std::string, SparseIndex> sparse;
    std::map<std::string, DenseIndex> dense;
  };

  // Builds only the indexes the routing in `config` needs and that
  // `prebuilt` does not already supply.
  static Toolset assemble(const TripleStore& store, std::vector<Passage> text_corpus, Providers providers,
                          const RunConfig& config, Prebuilt prebuilt = {});

  // All three corpora: "text", "kb" (linearized triples) and "unified".
  const std::vector<Passage>& corpus(const std::string& name) const { return corpora_.at(name).passages; }

  const TripleStore& store() const { return *store_; }
  const Providers& providers() const { return providers_; }
  const Passage* passage(const std::string& id) const;

  // Runs one query against the routed retrievers, appending invocations.
  std::vector<EvidenceCandidate> retrieve(const std::string& query, int hop, const RunConfig& config,
                                          std::vector<ToolInvocation>& log) const;

 private:
  struct Corpus {
    std::vector<Passage> passages;
    std::optional<SparseIndex> sparse;
    std::optional<DenseIndex> dense;
  };

  void search_corpus(const std::string& name, const Corpus& corpus, Retriever r, const std::string& query,
                     int hop, std::size_t depth, std::vector<ToolInvocation>& log,
                     std::vector<EvidenceCandidate>& out) const;

  const TripleStore* store_ = nullptr;
  Providers providers_;
  std::map<std::string, Corpus> corpora_;  // text, kb, unified
  std::map<std::string, const Passage*> by_id_;
};

struct AnswerResult {
  std::string answer;
  PipelineTrace trace;
};

// Answers one question under config.mode. Oracle mode needs `gold`.
// Tool failures are recorded in the trace; a hop whose retrieval fails
// continues with an empty context.
AnswerResult answer_question(const std::string& question, const RunConfig& config, const Toolset& tools,
                             const BenchmarkRecord* gold = nullptr);

// Gold evidence for one hop as it would appear in an oracle context.
std::vector<EvidenceCandidate> gold_evidence(const HopGold& hop, const Toolset& tools);

}  // namespace hetqa
