#include <doctest.h>

#include "hetqa/benchmark.hpp"
#include "hetqa/errors.hpp"
#include "hetqa/evaluator.hpp"
#include "hetqa/orchestrator.hpp"
#include "oracles.hpp"

using namespace hetqa;
using namespace hetqa::testing;

namespace {

struct Rig {
  TripleStore store;
  std::vector<Passage> passages;
  std::vector<BenchmarkRecord> records;
  HashingEmbedder embedder;
  LexicalOverlapScorer scorer;
  std::unique_ptr<llm::ScriptedProvider> llm;

  Rig() {
    auto d = data_dir() / "fixture";
    store = ingest(d / "entities.jsonl", d / "relations.jsonl", d / "triples.jsonl");
    passages = load_passages(d / "passages.jsonl");
    records = load_benchmark(data_dir() / "benchmark" / "mini.jsonl");
    reset_llm();
  }
  void reset_llm() {
    llm = std::make_unique<llm::ScriptedProvider>(
        llm::load_scripted_entries(data_dir() / "llm" / "mini_benchmark.jsonl"));
  }
  Toolset tools(const RunConfig& cfg) {
    return Toolset::assemble(store, passages, {&embedder, &scorer, llm.get()}, cfg);
  }
  const BenchmarkRecord& record(const std::string& id) {
    return *std::find_if(records.begin(), records.end(), [&](const auto& r) { return r.id == id; });
  }
};

bool any_sparql_evidence(const PipelineTrace& t) {
  for (const auto& h : t.hops)
    for (const auto& c : h.context.items)
      if (c.source == EvidenceSource::sparql) return true;
  for (const auto& inv : t.invocations)
    if (inv.tool == "sparql") return true;
  return false;
}

}  // namespace

TEST_CASE("full pipeline answers the 26th-president question") {
  Rig rig;
  RunConfig cfg;
  auto tools = rig.tools(cfg);
  const auto& rec = rig.record("B01");
  auto res = answer_question(rec.question, cfg, tools);
  CHECK(res.answer == "5");
  CHECK(res.trace.llm_call_count == 3);
  CHECK(res.trace.prompt_digests.size() == 3);
  REQUIRE(res.trace.hops.size() == 2);
  CHECK(res.trace.hops[0].search_queries.size() >= 1);
  CHECK(res.trace.hops[1].executed_sparql);
  CHECK(any_sparql_evidence(res.trace));
  CHECK(hop_retrieval_hit(res.trace, rec.hops[0], 1) == 1);
  CHECK(hop_retrieval_hit(res.trace, rec.hops[1], 2) == 1);
  for (const auto& h : res.trace.hops) CHECK(h.context.items.size() <= cfg.k);
  for (const auto& inv : res.trace.invocations) {
    if (inv.tool == "sparql" || inv.tool == "oracle") continue;
    CHECK(inv.hits.size() <= cfg.retrieval_depth);
    // separate routing: text goes to the dense retriever, kb to sparse
    if (inv.corpus == "text") CHECK(inv.tool == "dense");
    if (inv.corpus == "kb") CHECK(inv.tool == "sparse");
  }
}

TEST_CASE("sparql ablation leaves no sparql evidence") {
  Rig rig;
  RunConfig cfg;
  cfg.use_sparql = false;
  auto tools = rig.tools(cfg);
  for (const auto& rec : rig.records) {
    auto res = answer_question(rec.question, cfg, tools);
    CHECK_FALSE(any_sparql_evidence(res.trace));
  }
}

TEST_CASE("unified routing searches one merged corpus with the chosen retriever") {
  Rig rig;
  RunConfig cfg;
  cfg.routing = Routing::unified;
  cfg.unified_retriever = Retriever::dense;
  auto tools = rig.tools(cfg);
  auto res = answer_question(rig.record("B02").question, cfg, tools);
  bool saw = false;
  for (const auto& inv : res.trace.invocations) {
    if (inv.tool == "sparql") continue;
    CHECK(inv.corpus == "unified");
    CHECK(inv.tool == "dense");
    saw = true;
  }
  CHECK(saw);
  CHECK(tools.corpus("unified").size() == tools.corpus("text").size() + tools.corpus("kb").size());
}

TEST_CASE("closed-book mode makes one call and no tool calls") {
  Rig rig;
  RunConfig cfg;
  cfg.mode = Mode::closed_book;
  auto tools = rig.tools(cfg);
  auto res = answer_question(rig.record("B02").question, cfg, tools);
  CHECK(res.trace.llm_call_count == 1);
  CHECK(res.trace.invocations.empty());
  CHECK(res.trace.hops.empty());
  CHECK(res.answer == "Guanabara Bay");
}

TEST_CASE("vanilla mode retrieves once on the question") {
  Rig rig;
  RunConfig cfg;
  cfg.mode = Mode::vanilla;
  auto tools = rig.tools(cfg);
  const auto& rec = rig.record("B02");
  auto res = answer_question(rec.question, cfg, tools);
  CHECK(res.trace.llm_call_count == 1);
  REQUIRE(res.trace.hops.size() == 1);
  CHECK(res.trace.hops[0].search_queries == std::vector<std::string>{rec.question});
  CHECK_FALSE(res.trace.invocations.empty());
  for (const auto& inv : res.trace.invocations) CHECK(inv.query == rec.question);
}

TEST_CASE("oracle mode feeds gold evidence") {
  Rig rig;
  RunConfig cfg;
  cfg.mode = Mode::oracle;
  auto tools = rig.tools(cfg);
  const auto& rec = rig.record("B03");
  CHECK_THROWS_AS(answer_question(rec.question, cfg, tools), PreconditionViolation);
  auto res = answer_question(rec.question, cfg, tools, &rec);
  REQUIRE(res.trace.hops.size() == 2);
  for (int j = 1; j <= 2; ++j) CHECK(hop_retrieval_hit(res.trace, rec.hops[j - 1], j) == 1);
  for (const auto& inv : res.trace.invocations) {
    CHECK(inv.tool == "oracle");
    CHECK(inv.corpus == "gold");
  }
  CHECK(res.trace.llm_call_count == 1);
}

TEST_CASE("gold evidence renders passages, triples and queries") {
  Rig rig;
  RunConfig cfg;
  auto tools = rig.tools(cfg);
  const auto& rec = rig.record("B01");
  auto text = gold_evidence(rec.hops[0], tools);
  REQUIRE(text.size() == 1);
  CHECK(text[0].key == "Theodore Roosevelt#0");
  auto kb = gold_evidence(rec.hops[1], tools);
  CHECK(std::any_of(kb.begin(), kb.end(), [](const auto& c) { return c.text == "count = 5"; }));
  for (const auto& c : kb) CHECK(c.source == EvidenceSource::oracle);
}

TEST_CASE("failing tools are recorded, not fatal") {
  Rig rig;
  RunConfig cfg;
  auto tools = Toolset::assemble(rig.store, rig.passages, {nullptr, &rig.scorer, rig.llm.get()},
                                 [] {
                                   RunConfig c;
                                   c.text_retriever = Retriever::sparse;
                                   return c;
                                 }());
  // the toolset has no dense index, so the default config's text searches fail
  auto res = answer_question(rig.record("B01").question, cfg, tools);
  bool errored = false;
  for (const auto& inv : res.trace.invocations) errored |= inv.error.has_value();
  CHECK(errored);
  CHECK(res.trace.llm_call_count == 3);
}

TEST_CASE("missing llm and bad configs") {
  Rig rig;
  RunConfig cfg;
  auto tools = Toolset::assemble(rig.store, rig.passages, {&rig.embedder, &rig.scorer, nullptr}, cfg);
  CHECK_THROWS_AS(answer_question("q", cfg, tools), ProviderUnavailable);
  RunConfig bad;
  bad.k = 0;
  CHECK_THROWS_AS(bad.validate(), PreconditionViolation);
  bad = {};
  bad.n_hops = 0;
  CHECK_THROWS_AS(bad.validate(), PreconditionViolation);
  bad = {};
  bad.diverse_queries = 0;
  CHECK_THROWS_AS(bad.validate(), PreconditionViolation);
  for (auto m : {Mode::detllm, Mode::vanilla, Mode::closed_book, Mode::oracle}) CHECK(mode_from_string(to_string(m)) == m);
  CHECK(routing_from_string("unified") == Routing::unified);
}
