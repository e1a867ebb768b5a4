#pragma once

#include <memory>
#include <ostream>
#include <vector>

#include "hetqa/benchmark.hpp"
#include "hetqa/config.hpp"
#include "hetqa/kb.hpp"
#include "hetqa/llm.hpp"
#include "hetqa/orchestrator.hpp"
#include "hetqa/providers.hpp"

namespace hetqa {

// Store, providers and toolset wired from a config.
class Runtime {
 public:
  explicit Runtime(const AppConfig& cfg, bool need_llm = true);
  Runtime(const Runtime&) = delete;
  Runtime& operator=(const Runtime&) = delete;

  const AppConfig& config() const { return cfg_; }
  const TripleStore& store() const { return store_; }
  Toolset::Providers providers() const;
  llm::Provider& llm() const { return *llm_; }

  // Builds (or loads from index_dir) what the run config needs.
  Toolset toolset() const;

 private:
  AppConfig cfg_;
  TripleStore store_;
  std::unique_ptr<EmbeddingProvider> embedder_;
  std::unique_ptr<RelevanceScorer> scorer_;
  std::unique_ptr<llm::Provider> base_llm_;
  std::unique_ptr<llm::Provider> recorder_;
  llm::Provider* llm_ = nullptr;
};

// Answers every record; `threads` > 1 runs records concurrently. A record
// whose pipeline throws gets a trace carrying the error and no answer.
std::vector<PipelineTrace> run_benchmark(const std::vector<BenchmarkRecord>& records, const RunConfig& config,
                                         const Toolset& tools, int threads = 1);

// Entry point behind the hetqa executable. Usage errors return 2, data
// errors 1.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hetqa
