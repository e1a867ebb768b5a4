#pragma once

// Independent reference implementations and generators shared by the unit
// tests and the acceptance runner.

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "hetqa/benchmark.hpp"
#include "hetqa/datagen.hpp"
#include "hetqa/kb.hpp"
#include "hetqa/llm.hpp"
#include "hetqa/orchestrator.hpp"
#include "hetqa/sparql.hpp"

namespace hetqa::testing {

std::filesystem::path data_dir();
std::filesystem::path fresh_temp_dir(const std::string& tag);

// Store over a small id universe so brute force stays cheap.
struct RandomStoreSpec {
  std::size_t entities = 12;
  std::size_t relations = 4;
  std::size_t literals = 4;
  std::size_t max_triples = 200;
};
TripleStore random_store(std::mt19937_64& rng, const RandomStoreSpec& spec = {});

// Up to `max_patterns` patterns over up to three variables; ids are drawn
// from the store's catalogs plus one id the store does not know.
sparql::Query random_query(std::mt19937_64& rng, const TripleStore& store, std::size_t max_patterns = 3);

// Tries every assignment of the query variables to every entity, relation
// and literal in the store.
sparql::ResultSet brute_force_evaluate(const sparql::Query& q, const TripleStore& store);

// Random well-formed AST (not tied to a store).
sparql::Query random_ast(std::mt19937_64& rng);

// Textbook Okapi BM25 straight from the definition, one document at a time.
struct Bm25Doc {
  std::string id;
  std::string text;
};
std::vector<double> bm25_reference(const std::vector<Bm25Doc>& docs, const std::string& query, double k1 = 1.2,
                                   double b = 0.75);
std::vector<std::string> reference_tokens(const std::string& text);

// Canned LLM for datagen: follows each prompt's instructions but, on a
// fixed fraction of calls, leaks the answer, echoes it as the distractor,
// or breaks the required form.
class RuleBasedLlm final : public llm::Provider {
 public:
  explicit RuleBasedLlm(std::uint64_t seed, double fault_rate = 0.3) : rng_(seed), fault_rate_(fault_rate) {}
  llm::GenerationResponse generate(const llm::GenerationRequest& request) override;
  std::string name() const override { return "rule-based"; }
  std::size_t calls() const { return calls_; }
  std::size_t faults() const { return faults_; }

 private:
  std::string complete(const std::string& prompt);
  bool fault();

  std::mt19937_64 rng_;
  double fault_rate_;
  std::size_t calls_ = 0;
  std::size_t faults_ = 0;
};

// Ten KB-hop records with traces built to give qid 7/10, qid_rel 5/10 and
// qid_star 9/10.
struct DiagnosticsFixture {
  std::vector<BenchmarkRecord> records;
  std::vector<PipelineTrace> traces;
};
DiagnosticsFixture diagnostics_fixture();
DiagnosticsFixture random_diagnostics_batch(std::mt19937_64& rng, std::size_t n);

// One hand-computed metric case.
struct MetricCase {
  std::string prediction;
  std::vector<std::string> answers;
  int em;
  double f1;
  int recall;
};
const std::vector<MetricCase>& metric_table();

std::string random_text(std::mt19937_64& rng, std::size_t max_words);

// Anchors derived from the fixture catalog: one answer-side anchor per
// entity with outgoing triples and one title-side anchor per entity that
// appears as an object.
std::vector<datagen::AnchorQA> catalog_anchors(const TripleStore& store);

}  // namespace hetqa::testing
