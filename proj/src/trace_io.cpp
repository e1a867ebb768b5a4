#include "hetqa/trace_io.hpp"

#include <fstream>

#include "hetqa/errors.hpp"
#include "hetqa/text_util.hpp"

namespace hetqa {

using nlohmann::json;

namespace {

template <class T>
void put_opt(json& j, const char* key, const std::optional<T>& v) {
  j[key] = v ? json(*v) : json(nullptr);
}

std::optional<std::string> get_opt_str(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<std::string>();
}

}  // namespace

json to_json(const LinkResult& r, const TripleStore* store) {
  json j;
  j["chosen"] = r.chosen ? json(r.chosen->str()) : json(nullptr);
  if (store && r.chosen) j["chosen_label"] = store->label_of(*r.chosen);
  j["method"] = std::string(to_string(r.method));
  j["candidates"] = json::array();
  for (const auto& c : r.candidates)
    j["candidates"].push_back({{"entity", c.entity.str()},
                               {"label", c.label},
                               {"lexical_score", c.lexical_score},
                               {"description_score", c.description_score},
                               {"score", c.score}});
  return j;
}

LinkResult link_result_from_json(const json& j) {
  LinkResult r;
  if (auto s = get_opt_str(j, "chosen")) r.chosen = EntityId::parse(*s);
  r.method = link_method_from_string(j.at("method").get<std::string>());
  for (const auto& c : j.at("candidates")) {
    LinkCandidate lc;
    auto id = EntityId::parse(c.at("entity").get<std::string>());
    if (!id) throw std::invalid_argument("bad entity id in link candidates");
    lc.entity = *id;
    lc.label = c.at("label").get<std::string>();
    lc.lexical_score = c.at("lexical_score").get<double>();
    lc.description_score = c.at("description_score").get<double>();
    lc.score = c.at("score").get<double>();
    r.candidates.push_back(std::move(lc));
  }
  return r;
}

json to_json(const EvidenceCandidate& c) {
  json j{{"key", c.key},
         {"text", c.text},
         {"source", std::string(to_string(c.source))},
         {"originating_query", c.originating_query},
         {"invocation", c.invocation}};
  put_opt(j, "relevance", c.relevance);
  put_opt(j, "sparql", c.sparql);
  return j;
}

EvidenceCandidate evidence_from_json(const json& j) {
  EvidenceCandidate c;
  c.key = j.at("key").get<std::string>();
  c.text = j.at("text").get<std::string>();
  c.source = evidence_source_from_string(j.at("source").get<std::string>());
  c.originating_query = j.at("originating_query").get<std::string>();
  c.invocation = j.value("invocation", -1);
  if (j.contains("relevance") && !j.at("relevance").is_null()) c.relevance = j.at("relevance").get<double>();
  c.sparql = get_opt_str(j, "sparql");
  return c;
}

json to_json(const RankedContext& c) {
  json items = json::array();
  for (const auto& it : c.items) items.push_back(to_json(it));
  return {{"question", c.question}, {"items", items}};
}

RankedContext ranked_context_from_json(const json& j) {
  RankedContext c;
  c.question = j.at("question").get<std::string>();
  for (const auto& it : j.at("items")) c.items.push_back(evidence_from_json(it));
  return c;
}

json to_json(const PipelineTrace& t) {
  json hops = json::array();
  for (const auto& h : t.hops) {
    json hj{{"index", h.index},
            {"rationale", h.rationale},
            {"search_queries", h.search_queries},
            {"context", to_json(h.context)},
            {"errors", h.errors}};
    put_opt(hj, "query_entity", h.query_entity);
    put_opt(hj, "sparql", h.sparql_text);
    put_opt(hj, "executed_sparql", h.executed_sparql);
    hj["link"] = h.link ? to_json(*h.link) : json(nullptr);
    hops.push_back(std::move(hj));
  }
  json inv = json::array();
  for (const auto& i : t.invocations) {
    json hits = json::array();
    for (const auto& h : i.hits) hits.push_back({{"key", h.key}, {"score", h.score}});
    json ij{{"id", i.id}, {"hop", i.hop}, {"tool", i.tool}, {"corpus", i.corpus}, {"query", i.query}, {"hits", hits}};
    put_opt(ij, "error", i.error);
    inv.push_back(std::move(ij));
  }
  return {{"id", t.record_id},
          {"question", t.question},
          {"mode", std::string(to_string(t.mode))},
          {"hops", hops},
          {"llm_call_count", t.llm_call_count},
          {"prompt_digests", t.prompt_digests},
          {"invocations", inv},
          {"final_rationale", t.final_rationale},
          {"answer", t.answer},
          {"errors", t.errors}};
}

PipelineTrace trace_from_json(const json& j) {
  PipelineTrace t;
  t.record_id = j.at("id").get<std::string>();
  t.question = j.at("question").get<std::string>();
  t.mode = mode_from_string(j.at("mode").get<std::string>());
  for (const auto& hj : j.at("hops")) {
    HopState h;
    h.index = hj.at("index").get<int>();
    h.rationale = hj.at("rationale").get<std::string>();
    h.search_queries = hj.at("search_queries").get<std::vector<std::string>>();
    h.context = ranked_context_from_json(hj.at("context"));
    h.errors = hj.at("errors").get<std::vector<std::string>>();
    h.query_entity = get_opt_str(hj, "query_entity");
    h.sparql_text = get_opt_str(hj, "sparql");
    h.executed_sparql = get_opt_str(hj, "executed_sparql");
    if (hj.contains("link") && !hj.at("link").is_null()) h.link = link_result_from_json(hj.at("link"));
    t.hops.push_back(std::move(h));
  }
  t.llm_call_count = j.at("llm_call_count").get<int>();
  t.prompt_digests = j.at("prompt_digests").get<std::vector<std::string>>();
  for (const auto& ij : j.at("invocations")) {
    ToolInvocation i;
    i.id = ij.at("id").get<int>();
    i.hop = ij.at("hop").get<int>();
    i.tool = ij.at("tool").get<std::string>();
    i.corpus = ij.at("corpus").get<std::string>();
    i.query = ij.at("query").get<std::string>();
    for (const auto& h : ij.at("hits")) i.hits.push_back({h.at("key").get<std::string>(), h.at("score").get<double>()});
    i.error = get_opt_str(ij, "error");
    t.invocations.push_back(std::move(i));
  }
  t.final_rationale = j.at("final_rationale").get<std::string>();
  t.answer = j.at("answer").get<std::string>();
  t.errors = j.at("errors").get<std::vector<std::string>>();
  return t;
}

void save_traces(const std::filesystem::path& path, const std::vector<PipelineTrace>& traces) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& t : traces) out << to_json(t).dump() << '\n';
}

std::vector<PipelineTrace> load_traces(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  std::vector<PipelineTrace> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    try {
      out.push_back(trace_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw MalformedRecord(path.string(), n, e.what());
    }
  }
  return out;
}

}  // namespace hetqa
