// Acceptance runner: one PASS/FAIL line per primary criterion. Exit status
// is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <deque>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "hetqa/cli.hpp"
#include "hetqa/datagen.hpp"
#include "hetqa/entity_linker.hpp"
#include "hetqa/evaluator.hpp"
#include "hetqa/orchestrator.hpp"
#include "hetqa/sparql.hpp"
#include "hetqa/trace_io.hpp"
#include "oracles.hpp"

using namespace hetqa;
using namespace hetqa::testing;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const TripleStore& fixture_store() {
  static const TripleStore s = [] {
    auto d = data_dir() / "fixture";
    return ingest(d / "entities.jsonl", d / "relations.jsonl", d / "triples.jsonl");
  }();
  return s;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", x);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome sparql_oracle() {
  Outcome o;
  auto t0 = Clock::now();
  std::mt19937_64 rng(1001);
  std::size_t rows = 0, counts = 0;
  TripleStore store;
  for (int i = 0; i < 1000; ++i) {
    if (i % 10 == 0) store = random_store(rng);
    auto q = random_query(rng, store, 3);
    auto got = sparql::evaluate(q, store);
    if (got != brute_force_evaluate(q, store)) o.fail("mismatch on " + sparql::print(q));
    if (const auto* r = std::get_if<sparql::Rows>(&got)) rows += r->rows.size();
    else ++counts;
  }
  double secs = seconds_since(t0);
  if (secs >= 10.0) o.fail("took " + fmt(secs) + " s");
  if (o.pass)
    o.detail = "1000 queries (" + std::to_string(counts) + " COUNT, " + std::to_string(rows) + " rows) in " +
               fmt(secs) + " s";
  return o;
}

Outcome parser_goldens() {
  Outcome o;
  using namespace sparql;
  auto one = [](Projection p, std::uint64_t s, std::uint64_t r, const std::string& v) {
    return Query{std::move(p), {TriplePattern{EntityId(s), RelationId(r), Variable{v}}}};
  };
  const std::vector<std::pair<std::string, Query>> goldens{
      {"SELECT ?place WHERE {wd:Q962183 wdt:P19 ?place.}", one(SelectVar{"place"}, 962183, 19, "place")},
      {"SELECT ?name WHERE {wd:Q26698156 wdt:P57 ?name.}", one(SelectVar{"name"}, 26698156, 57, "name")},
      {"SELECT ?name WHERE {wd:Q54545 wdt:P106 ?name.}", one(SelectVar{"name"}, 54545, 106, "name")},
      {"SELECT ?name WHERE {wd:Q219124 wdt:P463 ?name.}", one(SelectVar{"name"}, 219124, 463, "name")},
      {"SELECT (COUNT(?organization) as ?count) WHERE { wd:Q33866 wdt:P463 ?organization. }",
       one(Count{"organization", "count"}, 33866, 463, "organization")},
  };
  for (const auto& [text, expect] : goldens) {
    try {
      if (parse(text) != expect) o.fail("wrong tree for " + text);
    } catch (const std::exception& e) {
      o.fail(text + ": " + e.what());
    }
  }
  std::mt19937_64 rng(2002);
  for (int i = 0; i < 1000; ++i) {
    auto q = random_ast(rng);
    try {
      auto once = parse(print(q));
      if (once != q || parse(print(once)) != once) o.fail("fixpoint broken for " + print(q));
    } catch (const std::exception& e) {
      o.fail(print(q) + ": " + e.what());
    }
  }
  if (o.pass) o.detail = "5 goldens, 1000 generated trees";
  return o;
}

Outcome bm25_correctness() {
  Outcome o;
  const std::vector<Bm25Doc> docs{{"d1", "emily blunt sibling felicity blunt"},
                                  {"d2", "emily blunt spouse john krasinski"},
                                  {"d3", "milton friedman award received nobel"}};
  std::vector<Passage> corpus;
  for (const auto& d : docs) corpus.push_back(Passage{d.id, "", d.text});
  auto idx = SparseIndex::build(corpus);
  double worst = 0.0;
  auto check = [&](const SparseIndex& index, const std::vector<Bm25Doc>& ds, const std::string& query) {
    auto ref = bm25_reference(ds, query);
    auto hits = index.search(query, ds.size());
    std::set<std::string> returned;
    for (const auto& h : hits) {
      returned.insert(h.passage_id);
      std::size_t d = 0;
      while (ds[d].id != h.passage_id) ++d;
      worst = std::max(worst, std::abs(h.score - ref[d]));
      if (std::abs(h.score - ref[d]) > 1e-9) o.fail("score off for " + h.passage_id + " on '" + query + "'");
    }
    auto qt = reference_tokens(query);
    for (std::size_t d = 0; d < ds.size(); ++d) {
      auto dt = reference_tokens(ds[d].text);
      bool shares = std::any_of(qt.begin(), qt.end(),
                                [&](const std::string& t) { return std::find(dt.begin(), dt.end(), t) != dt.end(); });
      if (!shares && returned.count(ds[d].id)) o.fail(ds[d].id + " returned without a query term");
      if (ref[d] > 0 && !returned.count(ds[d].id)) o.fail(ds[d].id + " has a positive score but was not returned");
    }
  };
  for (const char* q : {"sibling of emily blunt", "john krasinski", "nobel award", "blunt blunt felicity",
                        "unrelated words"})
    check(idx, docs, q);
  auto top = idx.search("sibling of emily blunt", 2);
  if (top.empty() || top[0].passage_id != "d1") o.fail("d1 not ranked first");

  std::mt19937_64 rng(3003);
  for (int round = 0; round < 500; ++round) {
    std::vector<Bm25Doc> ds;
    std::vector<Passage> ps;
    auto n = 1 + rng() % 20;
    for (std::size_t i = 0; i < n; ++i) {
      ds.push_back({"p" + std::to_string(i), random_text(rng, 12)});
      ps.push_back(Passage{ds.back().id, "", ds.back().text});
    }
    check(SparseIndex::build(ps), ds, random_text(rng, 4));
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1e", worst);
  if (o.pass) o.detail = std::string("max |delta| ") + buf + " over fixture + 500 random corpora";
  return o;
}

Outcome end_to_end() {
  Outcome o;
  auto dir = fresh_temp_dir("acceptance-e2e");
  auto conf = (data_dir() / "config" / "mini.conf").string();
  auto bench = (data_dir() / "benchmark" / "mini.jsonl").string();
  auto t0 = Clock::now();
  std::ostringstream out, err;
  std::vector<std::string> args{"hetqa", "eval", "--config", conf, "-b", bench, "--out", dir.string()};
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  int code = dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  double secs = seconds_since(t0);
  if (code != 0) {
    o.fail("eval exited " + std::to_string(code) + ": " + err.str());
    return o;
  }
  for (const char* f : {"report.txt", "report.jsonl"}) {
    auto golden = data_dir() / "golden" / f;
    if (!std::filesystem::exists(golden)) o.fail(std::string("no golden ") + f);
    else if (slurp(dir / f) != slurp(golden)) o.fail(std::string(f) + " differs from the golden copy");
  }

  auto records = load_benchmark(bench);
  auto traces = load_traces(dir / "traces.jsonl");
  auto report = evaluate_run(records, traces);
  for (const auto& v : report.verdicts) {
    if (v.llm_calls != 3) o.fail(v.id + " made " + std::to_string(v.llm_calls) + " LLM calls");
    if (v.id == "B01" && v.prediction != "5") o.fail("B01 answered '" + v.prediction + "'");
    if ((v.id == "B01" || v.id == "B02" || v.id == "B03" || v.id == "B04") && (v.h1 != 1 || v.h2 != 1))
      o.fail(v.id + " missed gold evidence (H1 " + std::to_string(v.h1) + ", H2 " + std::to_string(v.h2) + ")");
  }
  if (secs >= 5.0) o.fail("took " + fmt(secs) + " s");
  if (o.pass) o.detail = "golden report reproduced in " + fmt(secs) + " s";
  std::filesystem::remove_all(dir);
  return o;
}

Outcome metric_oracles() {
  Outcome o;
  for (const auto& c : metric_table()) {
    if (exact_match(c.prediction, c.answers) != c.em) o.fail("EM wrong for '" + c.prediction + "'");
    if (std::abs(f1(c.prediction, c.answers) - c.f1) > 1e-12) o.fail("F1 wrong for '" + c.prediction + "'");
    if (recall_substring(c.prediction, c.answers) != c.recall) o.fail("Recall wrong for '" + c.prediction + "'");
  }
  if (metric_table().size() != 30) o.fail("table has " + std::to_string(metric_table().size()) + " cases");
  std::mt19937_64 rng(4004);
  std::size_t em_hits = 0;
  for (int i = 0; i < 10000; ++i) {
    auto p = random_text(rng, 5);
    std::vector<std::string> golds{random_text(rng, 3)};
    if (i % 3 == 0) golds.push_back(p);  // force some exact matches
    int em = exact_match(p, golds);
    em_hits += em;
    double f = f1(p, golds);
    int r = recall_substring(p, golds);
    if (em == 1 && (f != 1.0 || r != 1)) o.fail("EM without F1/Recall for '" + p + "'");
    auto n = normalize(p);
    if (normalize(n) != n) o.fail("normalize not idempotent on '" + p + "'");
  }
  if (o.pass) o.detail = "30 cases, 10000 pairs (" + std::to_string(em_hits) + " exact)";
  return o;
}

Outcome diagnostics_ordering() {
  Outcome o;
  std::mt19937_64 rng(5005);
  for (int i = 0; i < 1000; ++i) {
    auto b = random_diagnostics_batch(rng, 20);
    auto d = sparql_diagnostics(b.traces, b.records);
    if (!(d.qid_rel <= d.qid && d.qid <= d.qid_star)) o.fail("ordering broken on batch " + std::to_string(i));
  }
  auto f = diagnostics_fixture();
  auto d = sparql_diagnostics(f.traces, f.records);
  if (std::abs(d.qid - 0.7) > 1e-12 || std::abs(d.qid_rel - 0.5) > 1e-12 || std::abs(d.qid_star - 0.9) > 1e-12)
    o.fail("fixture gave (" + fmt(d.qid) + ", " + fmt(d.qid_rel) + ", " + fmt(d.qid_star) + ")");
  if (o.pass) o.detail = "1000 batches; fixture (0.7, 0.5, 0.9)";
  return o;
}

Outcome datagen_validators() {
  Outcome o;
  // Candidate pairs from the fixture, topped up with random catalogs until
  // there are 200. Each pair remembers the store it was linked against.
  std::deque<TripleStore> stores{fixture_store()};
  std::vector<std::pair<const TripleStore*, datagen::CandidatePair>> pairs;
  auto collect = [&](const TripleStore& store, const datagen::WikiPages& pages) {
    for (const auto& anchor : datagen::filter_anchors(catalog_anchors(store))) {
      for (auto dir : {datagen::Direction::text_to_kb, datagen::Direction::kb_to_text}) {
        std::set<std::pair<EntityId, RelationId>> seen;
        for (auto& p : datagen::retain_triples(datagen::link_bridge(anchor, store, dir), store, pages))
          if (seen.insert({p.triple.subject, p.triple.predicate}).second) pairs.emplace_back(&store, std::move(p));
      }
    }
  };
  collect(stores.front(), datagen::load_wiki_pages(data_dir() / "fixture" / "wiki_pages.json"));
  const std::size_t from_fixture = pairs.size();
  std::mt19937_64 store_rng(6006);
  while (pairs.size() < 200) {
    stores.push_back(random_store(store_rng, RandomStoreSpec{20, 5, 4, 60}));
    collect(stores.back(), {});
  }
  pairs.resize(200);

  RuleBasedLlm llm(6006, 0.3);
  std::mt19937_64 rng(6006);
  std::vector<datagen::Rejection> rejections;
  std::map<QuestionType, int> by_type;
  std::size_t emitted = 0;
  for (const auto& [store_ptr, pair] : pairs) {
    const auto& store = *store_ptr;
    auto q = datagen::generate_from_pair(pair, store, llm, rng, rejections);
    if (!q) continue;
    ++emitted;
    ++by_type[q->qtype];
    const auto& bridge = q->hop1.sub_answer;
    if (datagen::leaks(q->composed_text, bridge)) o.fail("bridge leak: " + q->composed_text);
    for (const auto& a : q->answers)
      if (datagen::leaks(q->composed_text, a)) o.fail("answer leak: " + q->composed_text);
    if (pair.direction == datagen::Direction::kb_to_text) {
      const auto& t = *q->hop1.gold_triple;
      if (store.object_count(t.subject, t.predicate) != 1) o.fail("kb_to_text pair with several objects");
    }
    if (q->qtype == QuestionType::aggregate_text_kb) {
      auto c = sparql::evaluate(sparql::parse(*q->gold_sparql), store);
      if (std::to_string(std::get<sparql::CountValue>(c).value) != q->answers.front())
        o.fail("aggregate count mismatch for " + q->composed_text);
    }
  }
  if (by_type.size() != 5) o.fail("only " + std::to_string(by_type.size()) + " question types emitted");
  if (o.pass)
    o.detail = "200 pairs (" + std::to_string(from_fixture) + " from the fixture), " + std::to_string(emitted) + " emitted, " + std::to_string(rejections.size()) +
               " rejected, " + std::to_string(llm.faults()) + " injected faults";
  return o;
}

Outcome ablation_wiring() {
  Outcome o;
  auto d = data_dir() / "fixture";
  auto passages = load_passages(d / "passages.jsonl");
  auto records = load_benchmark(data_dir() / "benchmark" / "mini.jsonl");
  HashingEmbedder embedder;
  LexicalOverlapScorer scorer;

  auto run = [&](const RunConfig& cfg) {
    llm::ScriptedProvider llm(llm::load_scripted_entries(data_dir() / "llm" / "mini_benchmark.jsonl"));
    auto tools = Toolset::assemble(fixture_store(), passages, {&embedder, &scorer, &llm}, cfg);
    return run_benchmark(records, cfg, tools, 1);
  };

  RunConfig no_sparql;
  no_sparql.use_sparql = false;
  std::size_t sparql_items = 0;
  for (const auto& t : run(no_sparql)) {
    for (const auto& h : t.hops)
      for (const auto& c : h.context.items) sparql_items += c.source == EvidenceSource::sparql;
    for (const auto& inv : t.invocations) sparql_items += inv.tool == "sparql";
  }
  if (sparql_items) o.fail(std::to_string(sparql_items) + " sparql items with the flag off");

  RunConfig baseline;
  std::size_t baseline_sparql = 0;
  for (const auto& t : run(baseline))
    for (const auto& inv : t.invocations) baseline_sparql += inv.tool == "sparql";
  if (baseline_sparql == 0) o.fail("baseline never ran a sparql query");

  for (auto retriever : {Retriever::sparse, Retriever::dense}) {
    RunConfig unified;
    unified.routing = Routing::unified;
    unified.unified_retriever = retriever;
    std::size_t searches = 0, kb_hits = 0, text_hits = 0;
    for (const auto& t : run(unified)) {
      for (const auto& inv : t.invocations) {
        if (inv.tool == "sparql") continue;
        ++searches;
        if (inv.corpus != "unified" || inv.tool != to_string(retriever))
          o.fail("unified run searched " + inv.corpus + " with " + inv.tool);
        for (const auto& h : inv.hits) (h.key.rfind("kb:", 0) == 0 ? kb_hits : text_hits)++;
      }
    }
    if (searches == 0) o.fail("unified run made no searches");
    if (kb_hits == 0 || text_hits == 0)
      o.fail(std::string(to_string(retriever)) + " unified search did not surface both corpora");
  }
  if (o.pass) o.detail = "flag off: 0 sparql items; unified sparse and dense each cover text and kb";
  return o;
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::err);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"sparql-oracle-equivalence", sparql_oracle}, {"sparql-parser-goldens", parser_goldens},
      {"bm25-correctness", bm25_correctness},       {"end-to-end-determinism", end_to_end},
      {"metric-oracles", metric_oracles},           {"diagnostics-ordering", diagnostics_ordering},
      {"datagen-validators", datagen_validators},   {"ablation-wiring", ablation_wiring},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.fail(std::string("threw: ") + e.what());
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << "  " << o.detail << std::endl;
    failed += !o.pass;
  }
  return failed;
}
