#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hetqa/benchmark.hpp"
#include "hetqa/kb.hpp"
#include "hetqa/llm.hpp"
#include "hetqa/text_index.hpp"

namespace hetqa::datagen {

struct AnchorQA {
  std::string question;
  std::string answer;
  std::string title;
  std::string passage;
};

enum class Direction { text_to_kb, kb_to_text };
std::string_view to_string(Direction d);

struct CandidatePair {
  AnchorQA anchor;
  Direction direction = Direction::text_to_kb;
  EntityId bridge;
  Triple triple;
};

enum class Status { machine, accepted, revised, rejected };
std::string_view to_string(Status s);
Status status_from_string(std::string_view s);

struct ComposedQuestion {
  std::string id;
  QuestionType qtype = QuestionType::short_entity_text_kb;
  std::string composed_text;
  HopGold hop1;
  HopGold hop2;
  std::vector<std::string> answers;
  std::optional<std::string> gold_sparql;       // aggregate only
  std::optional<std::string> verifying_answer;  // yes/no only
  Status status = Status::machine;
};

nlohmann::json to_json(const ComposedQuestion& q);
ComposedQuestion composed_from_json(const nlohmann::json& j);

using WikiPages = std::map<std::string, std::string>;  // title -> page text

struct GenOptions {
  double temperature = 0.7;
  int max_retries = 3;  // regenerations after the first attempt
};

// Keeps anchors with all four fields non-empty and an answer of at most
// five whitespace-separated words.
std::vector<AnchorQA> filter_anchors(const std::vector<AnchorQA>& records);
std::vector<AnchorQA> load_anchors(const std::filesystem::path& path);

// text_to_kb: triples with the linked answer as subject. kb_to_text:
// triples with the linked title entity as object.
std::vector<CandidatePair> link_bridge(const AnchorQA& anchor, const TripleStore& store, Direction direction);

// Drops pairs whose object label appears in the subject's page, and
// kb_to_text pairs whose (subject, relation) has more than one object.
std::vector<CandidatePair> retain_triples(const std::vector<CandidatePair>& pairs, const TripleStore& store,
                                          const WikiPages& wiki_pages);

// Metric-normalized substring test used by every leak validator.
bool leaks(const std::string& text, const std::string& secret);

// Question about (subject, relation) that avoids the object label.
// Throws GenerationLeak once the retries are spent.
std::string gen_kb_question(const CandidatePair& pair, const TripleStore& store, llm::Provider& gateway,
                            const GenOptions& opts = {});

struct YesNo {
  std::string question;
  std::string gold;  // "yes" or "no"
  std::string embedded;
};

// Even coin from `rng`: embed the answer (gold yes) or an LLM distractor
// (gold no). Throws DistractorEqualsAnswer or GenerationLeak once the
// retries are spent.
YesNo make_yesno(const std::string& question, const std::string& answer, llm::Provider& gateway, std::mt19937_64& rng,
                 const GenOptions& opts = {});

struct Aggregate {
  std::string question;
  std::size_t count = 0;
  std::string gold_sparql;
};

// Throws PreconditionViolation for kb_to_text pairs or fewer than two objects.
Aggregate make_aggregate(const CandidatePair& pair, const TripleStore& store);

// English words for small counts ("ten"); digits beyond 99.
std::string number_words(std::size_t n);

// Substitutes the bridge mention in hop2 with a rephrasing of hop1.
// Throws CircularQuestion, or CompositionLeak with reason code
// "bridge_leak", "answer_leak" or "other" once the retries are spent.
std::string compose(const std::string& hop1_question, const std::string& hop1_answer, const std::string& hop2_question,
                    const std::vector<std::string>& final_answers, llm::Provider& gateway, const GenOptions& opts = {});

// Passage id under which an anchor's text is indexed.
std::string anchor_passage_id(const AnchorQA& a);
Passage anchor_passage(const AnchorQA& a);

struct Rejection {
  std::string anchor_question;
  std::string stage;
  std::string reason;
};

// One pair through question generation and composition. nullopt (with a
// rejection appended) when a validator gives up.
std::optional<ComposedQuestion> generate_from_pair(const CandidatePair& pair, const TripleStore& store,
                                                   llm::Provider& gateway, std::mt19937_64& rng,
                                                   std::vector<Rejection>& rejections, const GenOptions& opts = {});

struct PipelineResult {
  std::vector<ComposedQuestion> questions;
  std::vector<Passage> passages;  // anchor passages used by text hops
  std::vector<Rejection> rejections;
};

// Filter, link both ways, retain, generate. Records are numbered G0001...
PipelineResult run_pipeline(const std::vector<AnchorQA>& raw, const TripleStore& store, const WikiPages& wiki_pages,
                            llm::Provider& gateway, std::uint64_t seed, const GenOptions& opts = {});

// Annotation exchange.
struct AnnotationTask {
  std::string record_id;
  int slot = 0;
  int display_order = 0;
  std::string question;
  std::string hop1_question;
  std::string hop1_answer;
  std::string hop2_question;
  std::vector<std::string> answers;
};

struct Verdict {
  std::string record_id;
  int slot = 0;
  std::string verdict;  // accept | revise | reject
  std::optional<std::string> revised_text;
  std::optional<std::string> reason;
};

// One task per (record, annotator slot), shuffled by `seed`.
std::vector<AnnotationTask> export_annotation(const std::vector<ComposedQuestion>& questions, int annotators,
                                              std::uint64_t seed);
// Any reject wins; else any revise (lowest slot's text); else accept.
// Throws UnknownRecordId.
std::vector<ComposedQuestion> import_verdicts(std::vector<ComposedQuestion> questions,
                                              const std::vector<Verdict>& verdicts);

nlohmann::json to_json(const AnnotationTask& t);
nlohmann::json to_json(const Verdict& v);
Verdict verdict_from_json(const nlohmann::json& j);

// Rejected questions are left out.
std::vector<BenchmarkRecord> to_benchmark(const std::vector<ComposedQuestion>& questions);

WikiPages load_wiki_pages(const std::filesystem::path& path);

}  // namespace hetqa::datagen
