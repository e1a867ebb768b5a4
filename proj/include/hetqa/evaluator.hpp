#pragma once

#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hetqa/benchmark.hpp"
#include "hetqa/orchestrator.hpp"

namespace hetqa {

// Lower-case, punctuation to spaces, drop a/an/the, collapse whitespace.
std::string normalize(std::string_view answer);

int exact_match(std::string_view prediction, const std::vector<std::string>& answers);
double f1(std::string_view prediction, const std::vector<std::string>& answers);
int recall_substring(std::string_view prediction, const std::vector<std::string>& answers);

// 1 when the retained hop-j context holds the gold passage, the linearized
// gold triple, or a sparql rendering containing the gold sub-answer. Traces
// with fewer hops (vanilla runs) are checked against their last context.
int hop_retrieval_hit(const PipelineTrace& trace, const HopGold& gold, int j);

struct SparqlDiagnostics {
  std::size_t evaluated = 0;  // records with a KB hop
  double qid = 0.0;
  double qid_rel = 0.0;
  double qid_star = 0.0;
};

// Over records with a KB hop: the hop's link picked the gold triple's
// subject (qid), and additionally the executed query used the gold
// relation (qid_rel); the gold subject was among the candidates (qid_star).
SparqlDiagnostics sparql_diagnostics(const std::vector<PipelineTrace>& traces,
                                     const std::vector<BenchmarkRecord>& records);

struct RecordVerdict {
  std::string id;
  QuestionType qtype = QuestionType::short_entity_text_kb;
  std::string prediction;
  int em = 0;
  double f1 = 0.0;
  int recall = 0;
  int h1 = 0;
  int h2 = 0;
  int llm_calls = 0;
};

struct MetricRow {
  std::size_t n = 0;
  double em = 0.0, f1 = 0.0, recall = 0.0, h1 = 0.0, h2 = 0.0;
};

struct EvalReport {
  std::vector<RecordVerdict> verdicts;  // in record order
  MetricRow all;
  std::map<QuestionType, MetricRow> by_type;
  SparqlDiagnostics diagnostics;
  std::map<std::string, std::string> metadata;
};

// Throws MissingTrace, or PreconditionViolation on an empty record set.
EvalReport evaluate_run(const std::vector<BenchmarkRecord>& records, const std::vector<PipelineTrace>& traces);

nlohmann::json verdict_to_json(const RecordVerdict& v);
nlohmann::json summary_to_json(const EvalReport& r);
// Verdict lines followed by one summary line.
void write_report_jsonl(std::ostream& out, const EvalReport& r);
void write_report_table(std::ostream& out, const EvalReport& r);
void write_diagnostics(std::ostream& out, const SparqlDiagnostics& d);

}  // namespace hetqa
