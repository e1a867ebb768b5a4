#include "hetqa/orchestrator.hpp"

#include <algorithm>
#include <set>

#include <spdlog/spdlog.h>

#include "hetqa/errors.hpp"
#include "hetqa/prompts.hpp"
#include "hetqa/sparql.hpp"

namespace hetqa {

namespace {

EvidenceSource source_for(PassageOrigin origin, Retriever r) {
  if (origin == PassageOrigin::linearized_triple)
    return r == Retriever::sparse ? EvidenceSource::sparse_kb : EvidenceSource::dense_kb;
  return r == Retriever::sparse ? EvidenceSource::sparse_text : EvidenceSource::dense_text;
}

struct RunState {
  const RunConfig& config;
  const Toolset& tools;
  PipelineTrace trace;

  llm::GenerationResponse call_llm(const std::string& prompt, double temperature, int n) {
    llm::GenerationRequest req{prompt, temperature, config.max_tokens, n};
    ++trace.llm_call_count;
    auto resp = llm::generate(req, *tools.providers().llm);
    trace.prompt_digests.push_back(resp.prompt_digest);
    return resp;
  }

  int next_invocation_id() const { return static_cast<int>(trace.invocations.size()); }
};

// Link the query entity and run the (repaired) symbolic query; results go
// into `pool` as sparql-sourced candidates.
void run_symbolic(RunState& st, HopState& hop, const prompts::HopFields& fields,
                  std::vector<EvidenceCandidate>& pool) {
  const auto& store = st.tools.store();
  if (fields.query_entity) {
    auto* embedder = st.config.describe_links ? st.tools.providers().embedder : nullptr;
    try {
      hop.link = link(*fields.query_entity, fields.search_query, store, embedder);
    } catch (const ProviderUnavailable& e) {
      hop.errors.push_back(std::string("entity disambiguation: ") + e.what());
      hop.link = link(*fields.query_entity, fields.search_query, store, nullptr);
    }
  }
  if (!st.config.use_sparql || !fields.sparql) return;

  ToolInvocation inv;
  inv.id = st.next_invocation_id();
  inv.hop = hop.index;
  inv.tool = "sparql";
  inv.corpus = "store";
  inv.query = *fields.sparql;
  try {
    auto q = sparql::parse(*fields.sparql);
    if (hop.link && hop.link->chosen) {
      q = repair_sparql(q, *hop.link, store, fields.search_query);
    } else {
      hop.errors.push_back("NoEntityMatch: running the generated query unrepaired");
    }
    inv.query = sparql::print(q);
    hop.executed_sparql = inv.query;
    auto result = sparql::evaluate(q, store);
    for (auto& line : sparql::render_evidence(result, q, store)) {
      EvidenceCandidate c;
      c.key = "sparql:" + line;
      c.text = line;
      c.source = EvidenceSource::sparql;
      c.originating_query = fields.search_query;
      c.sparql = inv.query;
      c.invocation = inv.id;
      inv.hits.push_back({c.key, 1.0});
      pool.push_back(std::move(c));
    }
  } catch (const Error& e) {
    inv.error = e.what();
    hop.errors.push_back(std::string("sparql: ") + e.what());
  }
  st.trace.invocations.push_back(std::move(inv));
}

void run_hop(RunState& st, int j, const std::string& question, std::vector<RankedContext>& contexts) {
  HopState hop;
  hop.index = j;
  auto prompt = prompts::render_prompt(prompts::Stage::hop_stage(j), question, contexts);

  std::vector<prompts::HopFields> parsed;
  try {
    auto resp = st.call_llm(prompt, st.config.query_temperature, st.config.diverse_queries);
    for (const auto& sample : resp.samples) {
      try {
        parsed.push_back(prompts::parse_llm_fields(sample));
      } catch (const MissingField& e) {
        hop.errors.push_back(e.what());
      }
    }
  } catch (const Error& e) {
    hop.errors.push_back(std::string("llm: ") + e.what());
  }

  if (parsed.empty()) {
    hop.context.question = question;
    contexts.push_back(hop.context);
    st.trace.hops.push_back(std::move(hop));
    return;
  }

  const auto& primary = parsed.front();
  hop.rationale = primary.rationale;
  hop.query_entity = primary.query_entity;
  hop.sparql_text = primary.sparql;
  std::set<std::string> seen;
  for (const auto& f : parsed)
    if (seen.insert(f.search_query).second) hop.search_queries.push_back(f.search_query);

  std::vector<EvidenceCandidate> pool;
  for (const auto& q : hop.search_queries) {
    auto got = st.tools.retrieve(q, j, st.config, st.trace.invocations);
    pool.insert(pool.end(), std::make_move_iterator(got.begin()), std::make_move_iterator(got.end()));
  }
  run_symbolic(st, hop, primary, pool);

  hop.context = fuse_and_rank(primary.search_query, std::move(pool), st.config.k, *st.tools.providers().scorer);
  contexts.push_back(hop.context);
  st.trace.hops.push_back(std::move(hop));
}

void run_final(RunState& st, const std::string& question, const std::vector<RankedContext>& contexts) {
  auto prompt = prompts::render_prompt(prompts::Stage::final_stage(), question, contexts);
  try {
    auto resp = st.call_llm(prompt, st.config.answer_temperature, 1);
    auto fields = prompts::parse_answer(resp.samples.front());
    st.trace.final_rationale = fields.rationale;
    st.trace.answer = fields.answer;
  } catch (const Error& e) {
    st.trace.errors.push_back(std::string("final answer: ") + e.what());
  }
}

}  // namespace

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::detllm: return "detllm";
    case Mode::vanilla: return "vanilla";
    case Mode::closed_book: return "closed_book";
    case Mode::oracle: return "oracle";
  }
  return "unknown";
}

Mode mode_from_string(std::string_view s) {
  for (auto m : {Mode::detllm, Mode::vanilla, Mode::closed_book, Mode::oracle})
    if (to_string(m) == s) return m;
  throw std::invalid_argument("unknown mode '" + std::string(s) + "'");
}

std::string_view to_string(Routing r) { return r == Routing::separate ? "separate" : "unified"; }

Routing routing_from_string(std::string_view s) {
  if (s == "separate") return Routing::separate;
  if (s == "unified") return Routing::unified;
  throw std::invalid_argument("unknown routing '" + std::string(s) + "'");
}

void RunConfig::validate() const {
  if (n_hops < 1) throw PreconditionViolation("n_hops must be >= 1");
  if (diverse_queries < 1) throw PreconditionViolation("diverse_queries must be >= 1");
  if (k < 1) throw PreconditionViolation("k must be >= 1");
  if (retrieval_depth < 1) throw PreconditionViolation("retrieval_depth must be >= 1");
  if (query_temperature < 0 || answer_temperature < 0) throw PreconditionViolation("temperatures must be >= 0");
  if (max_tokens < 1) throw PreconditionViolation("max_tokens must be >= 1");
}

// ----- toolset -------------------------------------------------------------

Toolset Toolset::assemble(const TripleStore& store, std::vector<Passage> text_corpus, Providers providers,
                          const RunConfig& config, Prebuilt prebuilt) {
  Toolset t;
  t.store_ = &store;
  t.providers_ = providers;
  auto& text = t.corpora_["text"];
  text.passages = std::move(text_corpus);
  auto& kb = t.corpora_["kb"];
  kb.passages = linearize_all(store);
  auto& unified = t.corpora_["unified"];
  unified.passages = text.passages;
  unified.passages.insert(unified.passages.end(), kb.passages.begin(), kb.passages.end());
  for (const auto& [name, c] : t.corpora_)
    for (const auto& p : c.passages) t.by_id_.emplace(p.id, &p);

  for (auto& [name, idx] : prebuilt.sparse) t.corpora_[name].sparse = std::move(idx);
  for (auto& [name, idx] : prebuilt.dense) t.corpora_[name].dense = std::move(idx);
  if (config.mode == Mode::closed_book || config.mode == Mode::oracle) return t;

  auto need = [&](Corpus& c, Retriever r) {
    if (r == Retriever::sparse) {
      if (!c.sparse) c.sparse = SparseIndex::build(c.passages);
    } else if (!c.dense) {
      if (!providers.embedder) throw ProviderUnavailable("dense retrieval configured without an embedder");
      c.dense = DenseIndex::build(c.passages, *providers.embedder);
    }
  };
  if (config.routing == Routing::unified) {
    need(unified, config.unified_retriever);
  } else {
    need(text, config.text_retriever);
    need(kb, config.kb_retriever);
  }
  return t;
}

const Passage* Toolset::passage(const std::string& id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : it->second;
}

void Toolset::search_corpus(const std::string& name, const Corpus& corpus, Retriever r, const std::string& query,
                            int hop, std::size_t depth, std::vector<ToolInvocation>& log,
                            std::vector<EvidenceCandidate>& out) const {
  ToolInvocation inv;
  inv.id = static_cast<int>(log.size());
  inv.hop = hop;
  inv.tool = std::string(to_string(r));
  inv.corpus = name;
  inv.query = query;
  try {
    std::vector<ScoredHit> hits;
    if (r == Retriever::sparse) {
      if (!corpus.sparse) throw ProviderUnavailable("no sparse index for corpus " + name);
      hits = corpus.sparse->search(query, depth);
    } else {
      if (!corpus.dense || !providers_.embedder) throw ProviderUnavailable("no dense index for corpus " + name);
      hits = corpus.dense->search(query, depth, *providers_.embedder);
    }
    for (const auto& h : hits) {
      const auto* p = passage(h.passage_id);
      if (!p) continue;
      inv.hits.push_back({h.passage_id, h.score});
      EvidenceCandidate c;
      c.key = p->id;
      c.text = p->body;
      c.source = source_for(p->origin, r);
      c.originating_query = query;
      c.invocation = inv.id;
      out.push_back(std::move(c));
    }
  } catch (const Error& e) {
    inv.error = e.what();
    spdlog::warn("{} retrieval over {} failed: {}", to_string(r), name, e.what());
  }
  log.push_back(std::move(inv));
}

std::vector<EvidenceCandidate> Toolset::retrieve(const std::string& query, int hop, const RunConfig& config,
                                                 std::vector<ToolInvocation>& log) const {
  std::vector<EvidenceCandidate> out;
  if (config.routing == Routing::unified) {
    search_corpus("unified", corpora_.at("unified"), config.unified_retriever, query, hop, config.retrieval_depth,
                  log, out);
  } else {
    search_corpus("text", corpora_.at("text"), config.text_retriever, query, hop, config.retrieval_depth, log, out);
    search_corpus("kb", corpora_.at("kb"), config.kb_retriever, query, hop, config.retrieval_depth, log, out);
  }
  return out;
}

// ----- modes ---------------------------------------------------------------

std::vector<EvidenceCandidate> gold_evidence(const HopGold& hop, const Toolset& tools) {
  std::vector<EvidenceCandidate> out;
  auto add = [&](std::string key, std::string text) {
    EvidenceCandidate c;
    c.key = std::move(key);
    c.text = std::move(text);
    c.source = EvidenceSource::oracle;
    c.originating_query = hop.sub_question;
    c.relevance = 1.0;
    out.push_back(std::move(c));
  };
  if (hop.gold_passage_id) {
    if (const auto* p = tools.passage(*hop.gold_passage_id)) add(p->id, p->body);
  }
  if (hop.gold_triple) {
    auto p = linearize(*hop.gold_triple, tools.store());
    add(p.id, p.body);
  }
  if (hop.gold_sparql) {
    try {
      auto q = sparql::parse(*hop.gold_sparql);
      for (auto& line : sparql::render_evidence(sparql::evaluate(q, tools.store()), q, tools.store()))
        add("sparql:" + line, line);
    } catch (const Error& e) {
      spdlog::warn("gold sparql failed: {}", e.what());
    }
  }
  return out;
}

AnswerResult answer_question(const std::string& question, const RunConfig& config, const Toolset& tools,
                             const BenchmarkRecord* gold) {
  config.validate();
  if (!tools.providers().llm) throw ProviderUnavailable("no LLM provider configured");
  if (!tools.providers().scorer && (config.mode == Mode::detllm || config.mode == Mode::vanilla))
    throw ProviderUnavailable("no relevance scorer configured");

  RunState st{config, tools, {}};
  st.trace.question = question;
  st.trace.mode = config.mode;
  if (gold) st.trace.record_id = gold->id;

  std::vector<RankedContext> contexts;
  switch (config.mode) {
    case Mode::detllm:
      for (int j = 1; j <= config.n_hops; ++j) run_hop(st, j, question, contexts);
      break;
    case Mode::vanilla: {
      HopState hop;
      hop.index = 1;
      hop.search_queries = {question};
      auto pool = tools.retrieve(question, 1, config, st.trace.invocations);
      hop.context = fuse_and_rank(question, std::move(pool), config.k, *tools.providers().scorer);
      contexts.push_back(hop.context);
      st.trace.hops.push_back(std::move(hop));
      break;
    }
    case Mode::closed_book:
      break;
    case Mode::oracle: {
      if (!gold) throw PreconditionViolation("oracle mode needs the benchmark record");
      for (std::size_t j = 0; j < gold->hops.size(); ++j) {
        HopState hop;
        hop.index = static_cast<int>(j + 1);
        hop.search_queries = {gold->hops[j].sub_question};
        ToolInvocation inv;
        inv.id = st.next_invocation_id();
        inv.hop = hop.index;
        inv.tool = "oracle";
        inv.corpus = "gold";
        inv.query = gold->hops[j].sub_question;
        auto items = gold_evidence(gold->hops[j], tools);
        for (auto& c : items) {
          c.invocation = inv.id;
          inv.hits.push_back({c.key, 1.0});
        }
        st.trace.invocations.push_back(std::move(inv));
        hop.context = RankedContext{gold->hops[j].sub_question, std::move(items)};
        contexts.push_back(hop.context);
        st.trace.hops.push_back(std::move(hop));
      }
      break;
    }
  }
  run_final(st, question, contexts);
  return {st.trace.answer, std::move(st.trace)};
}

}  // namespace hetqa
