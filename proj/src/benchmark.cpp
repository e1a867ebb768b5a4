#include "hetqa/benchmark.hpp"

#include <fstream>

#include "hetqa/errors.hpp"
#include "hetqa/sparql.hpp"
#include "hetqa/text_util.hpp"

namespace hetqa {

using nlohmann::json;

std::string_view to_string(QuestionType t) {
  switch (t) {
    case QuestionType::short_entity_text_kb: return "short_entity_text_kb";
    case QuestionType::short_entity_kb_text: return "short_entity_kb_text";
    case QuestionType::yesno_text_kb: return "yesno_text_kb";
    case QuestionType::yesno_kb_text: return "yesno_kb_text";
    case QuestionType::aggregate_text_kb: return "aggregate_text_kb";
  }
  return "unknown";
}

QuestionType question_type_from_string(std::string_view s) {
  for (auto t : kAllQuestionTypes)
    if (to_string(t) == s) return t;
  throw std::invalid_argument("unknown question type '" + std::string(s) + "'");
}

void validate(const BenchmarkRecord& r) {
  if (r.id.empty()) throw std::invalid_argument("record has no id");
  if (r.answers.empty()) throw std::invalid_argument("record " + r.id + " has no answers");
  if (r.hops.size() != 2) throw std::invalid_argument("record " + r.id + " must have two hops");
  for (const auto& h : r.hops) {
    if (h.source == HopSource::text && !h.gold_passage_id)
      throw std::invalid_argument("record " + r.id + ": text hop without gold_passage_id");
    if (h.source == HopSource::kb && !h.gold_triple)
      throw std::invalid_argument("record " + r.id + ": kb hop without gold_triple");
  }
  if (r.qtype == QuestionType::aggregate_text_kb) {
    bool has_count = false;
    for (const auto& h : r.hops)
      if (h.gold_sparql && std::holds_alternative<sparql::Count>(sparql::parse(*h.gold_sparql).projection))
        has_count = true;
    if (!has_count) throw std::invalid_argument("aggregate record " + r.id + " lacks a COUNT query");
  }
}

json to_json(const BenchmarkRecord& r) {
  json hops = json::array();
  for (const auto& h : r.hops) {
    json jh{{"sub_question", h.sub_question},
            {"sub_answer", h.sub_answer},
            {"source", h.source == HopSource::text ? "text" : "kb"}};
    if (h.gold_passage_id) jh["gold_passage_id"] = *h.gold_passage_id;
    if (h.gold_triple) jh["gold_triple"] = triple_to_json(*h.gold_triple);
    if (h.gold_sparql) jh["gold_sparql"] = *h.gold_sparql;
    hops.push_back(std::move(jh));
  }
  return json{{"id", r.id},
              {"question", r.question},
              {"answers", r.answers},
              {"qtype", to_string(r.qtype)},
              {"hops", hops}};
}

BenchmarkRecord record_from_json(const json& j) {
  BenchmarkRecord r;
  r.id = j.at("id").get<std::string>();
  r.question = j.at("question").get<std::string>();
  r.answers = j.at("answers").get<std::vector<std::string>>();
  r.qtype = question_type_from_string(j.at("qtype").get<std::string>());
  for (const auto& jh : j.at("hops")) {
    HopGold h;
    h.sub_question = jh.at("sub_question").get<std::string>();
    h.sub_answer = jh.at("sub_answer").get<std::string>();
    auto src = jh.at("source").get<std::string>();
    if (src != "text" && src != "kb") throw std::invalid_argument("hop source must be text or kb");
    h.source = src == "text" ? HopSource::text : HopSource::kb;
    if (jh.contains("gold_passage_id")) h.gold_passage_id = jh["gold_passage_id"].get<std::string>();
    if (jh.contains("gold_triple")) h.gold_triple = triple_from_json(jh["gold_triple"]);
    if (jh.contains("gold_sparql")) h.gold_sparql = jh["gold_sparql"].get<std::string>();
    r.hops.push_back(std::move(h));
  }
  validate(r);
  return r;
}

std::vector<BenchmarkRecord> load_benchmark(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MalformedRecord(path.string(), 0, "cannot open benchmark");
  std::vector<BenchmarkRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      out.push_back(record_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw MalformedRecord(path.string(), lineno, e.what());
    }
  }
  return out;
}

void save_benchmark(const std::filesystem::path& path, const std::vector<BenchmarkRecord>& records) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& r : records) out << to_json(r).dump() << "\n";
}

}  // namespace hetqa
