#include "hetqa/evaluator.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <set>
#include <sstream>

#include "hetqa/errors.hpp"
#include "hetqa/sparql.hpp"
#include "hetqa/text_index.hpp"

namespace hetqa {

namespace {

bool is_ascii_punct(unsigned char c) {
  return c < 0x80 && std::ispunct(c);
}

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

std::vector<std::string> norm_tokens(std::string_view s) { return split_ws(normalize(s)); }

bool contains_tokens(const std::vector<std::string>& hay, const std::vector<std::string>& needle) {
  if (needle.empty()) return false;
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

std::string fmt(double v, int prec = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

void accumulate(MetricRow& row, const RecordVerdict& v) {
  ++row.n;
  row.em += v.em;
  row.f1 += v.f1;
  row.recall += v.recall;
  row.h1 += v.h1;
  row.h2 += v.h2;
}

void finish(MetricRow& row) {
  if (row.n == 0) return;
  double n = static_cast<double>(row.n);
  row.em /= n;
  row.f1 /= n;
  row.recall /= n;
  row.h1 /= n;
  row.h2 /= n;
}

nlohmann::json row_json(const MetricRow& r) {
  return {{"n", r.n}, {"em", r.em}, {"f1", r.f1}, {"recall", r.recall}, {"h1_r", r.h1}, {"h2_r", r.h2}};
}

}  // namespace

std::string normalize(std::string_view answer) {
  std::string s;
  s.reserve(answer.size());
  for (unsigned char c : answer) {
    if (is_ascii_punct(c))
      s.push_back(' ');
    else if (c < 0x80)
      s.push_back(static_cast<char>(std::tolower(c)));
    else
      s.push_back(static_cast<char>(c));
  }
  std::string out;
  for (const auto& w : split_ws(s)) {
    if (w == "a" || w == "an" || w == "the") continue;
    if (!out.empty()) out.push_back(' ');
    out += w;
  }
  return out;
}

int exact_match(std::string_view prediction, const std::vector<std::string>& answers) {
  auto p = normalize(prediction);
  for (const auto& a : answers)
    if (normalize(a) == p) return 1;
  return 0;
}

double f1(std::string_view prediction, const std::vector<std::string>& answers) {
  auto pred = norm_tokens(prediction);
  double best = 0.0;
  for (const auto& a : answers) {
    auto gold = norm_tokens(a);
    if (pred.empty() || gold.empty()) {
      if (pred.empty() && gold.empty()) best = std::max(best, 1.0);
      continue;
    }
    std::map<std::string, int> counts;
    for (const auto& t : gold) ++counts[t];
    int common = 0;
    for (const auto& t : pred) {
      auto it = counts.find(t);
      if (it != counts.end() && it->second > 0) {
        --it->second;
        ++common;
      }
    }
    if (common == 0) continue;
    double precision = static_cast<double>(common) / static_cast<double>(pred.size());
    double recall = static_cast<double>(common) / static_cast<double>(gold.size());
    best = std::max(best, 2 * precision * recall / (precision + recall));
  }
  return best;
}

int recall_substring(std::string_view prediction, const std::vector<std::string>& answers) {
  auto p = normalize(prediction);
  for (const auto& a : answers) {
    auto g = normalize(a);
    // an answer that normalizes away only matches an equally empty prediction
    if (g.empty() ? p.empty() : p.find(g) != std::string::npos) return 1;
  }
  return 0;
}

int hop_retrieval_hit(const PipelineTrace& trace, const HopGold& gold, int j) {
  if (trace.hops.empty() || j < 1) return 0;
  const auto& hop = trace.hops[std::min<std::size_t>(static_cast<std::size_t>(j), trace.hops.size()) - 1];
  std::optional<std::string> triple_key;
  if (gold.gold_triple) triple_key = linearized_id(*gold.gold_triple);
  auto answer_tokens = norm_tokens(gold.sub_answer);
  for (const auto& item : hop.context.items) {
    if (gold.gold_passage_id && item.key == *gold.gold_passage_id) return 1;
    if (triple_key && item.key == *triple_key) return 1;
    bool symbolic = item.source == EvidenceSource::sparql || item.key.rfind("sparql:", 0) == 0;
    if (symbolic && contains_tokens(norm_tokens(item.text), answer_tokens)) return 1;
  }
  return 0;
}

SparqlDiagnostics sparql_diagnostics(const std::vector<PipelineTrace>& traces,
                                     const std::vector<BenchmarkRecord>& records) {
  std::map<std::string, const PipelineTrace*> by_id;
  for (const auto& t : traces) by_id.emplace(t.record_id, &t);

  SparqlDiagnostics d;
  std::size_t qid = 0, qid_rel = 0, qid_star = 0;
  for (const auto& r : records) {
    std::size_t kb_hop = r.hops.size();
    for (std::size_t j = 0; j < r.hops.size(); ++j)
      if (r.hops[j].source == HopSource::kb && r.hops[j].gold_triple) {
        kb_hop = j;
        break;
      }
    if (kb_hop == r.hops.size()) continue;
    ++d.evaluated;
    auto it = by_id.find(r.id);
    if (it == by_id.end()) continue;
    const auto& trace = *it->second;
    if (kb_hop >= trace.hops.size() || !trace.hops[kb_hop].link) continue;

    const auto& hop = trace.hops[kb_hop];
    const auto& gold = *r.hops[kb_hop].gold_triple;
    const auto& link = *hop.link;
    bool chosen_ok = link.chosen && *link.chosen == gold.subject;
    bool in_candidates = chosen_ok || std::any_of(link.candidates.begin(), link.candidates.end(),
                                                  [&](const LinkCandidate& c) { return c.entity == gold.subject; });
    bool relation_ok = false;
    if (chosen_ok && hop.executed_sparql) {
      try {
        auto q = sparql::parse(*hop.executed_sparql);
        for (const auto& p : q.patterns)
          if (const auto* rel = std::get_if<RelationId>(&p.predicate); rel && *rel == gold.predicate)
            relation_ok = true;
      } catch (const Error&) {
      }
    }
    qid += chosen_ok;
    qid_rel += chosen_ok && relation_ok;
    qid_star += in_candidates;
  }
  if (d.evaluated > 0) {
    double n = static_cast<double>(d.evaluated);
    d.qid = static_cast<double>(qid) / n;
    d.qid_rel = static_cast<double>(qid_rel) / n;
    d.qid_star = static_cast<double>(qid_star) / n;
  }
  return d;
}

EvalReport evaluate_run(const std::vector<BenchmarkRecord>& records, const std::vector<PipelineTrace>& traces) {
  if (records.empty()) throw PreconditionViolation("no benchmark records to evaluate");
  std::map<std::string, const PipelineTrace*> by_id;
  for (const auto& t : traces) by_id.emplace(t.record_id, &t);
  std::vector<const PipelineTrace*> matched(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto it = by_id.find(records[i].id);
    if (it == by_id.end()) throw MissingTrace(records[i].id);
    matched[i] = it->second;
  }

  EvalReport report;
  report.verdicts.resize(records.size());
  const auto n = static_cast<long>(records.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    const auto& r = records[static_cast<std::size_t>(i)];
    const auto& t = *matched[static_cast<std::size_t>(i)];
    auto& v = report.verdicts[static_cast<std::size_t>(i)];
    v.id = r.id;
    v.qtype = r.qtype;
    v.prediction = t.answer;
    v.em = exact_match(t.answer, r.answers);
    v.f1 = f1(t.answer, r.answers);
    v.recall = recall_substring(t.answer, r.answers);
    v.h1 = r.hops.size() > 0 ? hop_retrieval_hit(t, r.hops[0], 1) : 0;
    v.h2 = r.hops.size() > 1 ? hop_retrieval_hit(t, r.hops[1], 2) : 0;
    v.llm_calls = t.llm_call_count;
  }

  for (const auto& v : report.verdicts) {
    accumulate(report.all, v);
    accumulate(report.by_type[v.qtype], v);
  }
  finish(report.all);
  for (auto& [type, row] : report.by_type) finish(row);
  report.diagnostics = sparql_diagnostics(traces, records);
  report.metadata["records"] = std::to_string(records.size());
  if (!traces.empty()) report.metadata["mode"] = std::string(to_string(traces.front().mode));
  return report;
}

nlohmann::json verdict_to_json(const RecordVerdict& v) {
  return {{"id", v.id},     {"qtype", std::string(to_string(v.qtype))},
          {"prediction", v.prediction},
          {"em", v.em},     {"f1", v.f1},
          {"recall", v.recall},
          {"h1_r", v.h1},   {"h2_r", v.h2},
          {"llm_calls", v.llm_calls}};
}

nlohmann::json summary_to_json(const EvalReport& r) {
  nlohmann::json by_type = nlohmann::json::object();
  for (const auto& [type, row] : r.by_type) by_type[std::string(to_string(type))] = row_json(row);
  return {{"summary", row_json(r.all)},
          {"by_qtype", by_type},
          {"diagnostics",
           {{"evaluated", r.diagnostics.evaluated},
            {"qid", r.diagnostics.qid},
            {"qid_rel", r.diagnostics.qid_rel},
            {"qid_star", r.diagnostics.qid_star}}},
          {"metadata", r.metadata}};
}

void write_report_jsonl(std::ostream& out, const EvalReport& r) {
  for (const auto& v : r.verdicts) out << verdict_to_json(v).dump() << '\n';
  out << summary_to_json(r).dump() << '\n';
}

void write_report_table(std::ostream& out, const EvalReport& r) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"qtype", "n", "EM", "F1", "Recall", "H1-R", "H2-R"});
  auto add = [&](std::string name, const MetricRow& m) {
    rows.push_back({std::move(name), std::to_string(m.n), fmt(m.em), fmt(m.f1), fmt(m.recall), fmt(m.h1),
                    fmt(m.h2)});
  };
  for (auto t : kAllQuestionTypes) {
    auto it = r.by_type.find(t);
    if (it != r.by_type.end()) add(std::string(to_string(t)), it->second);
  }
  add("all", r.all);

  std::vector<std::size_t> width(rows.front().size(), 0);
  for (const auto& row : rows)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c == 0) {
        line += row[c] + std::string(width[c] - row[c].size(), ' ');
      } else {
        line += "  " + std::string(width[c] - row[c].size(), ' ') + row[c];
      }
    }
    out << line << '\n';
  }
  write_diagnostics(out, r.diagnostics);
}

void write_diagnostics(std::ostream& out, const SparqlDiagnostics& d) {
  out << "sparql diagnostics over " << d.evaluated << " records: QID " << fmt(d.qid) << "  QID+REL "
      << fmt(d.qid_rel) << "  QID* " << fmt(d.qid_star) << '\n';
}

}  // namespace hetqa
