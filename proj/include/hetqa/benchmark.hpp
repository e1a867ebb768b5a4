#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hetqa/kb.hpp"

namespace hetqa {

enum class QuestionType {
  short_entity_text_kb,
  short_entity_kb_text,
  yesno_text_kb,
  yesno_kb_text,
  aggregate_text_kb,
};

inline constexpr QuestionType kAllQuestionTypes[] = {
    QuestionType::short_entity_text_kb, QuestionType::short_entity_kb_text, QuestionType::yesno_text_kb,
    QuestionType::yesno_kb_text, QuestionType::aggregate_text_kb};

std::string_view to_string(QuestionType t);
QuestionType question_type_from_string(std::string_view s);

enum class HopSource { text, kb };

struct HopGold {
  std::string sub_question;
  std::string sub_answer;
  HopSource source = HopSource::text;
  std::optional<std::string> gold_passage_id;
  std::optional<Triple> gold_triple;
  std::optional<std::string> gold_sparql;
};

struct BenchmarkRecord {
  std::string id;
  std::string question;
  std::vector<std::string> answers;
  QuestionType qtype = QuestionType::short_entity_text_kb;
  std::vector<HopGold> hops;
};

// Throws std::invalid_argument on a violated record invariant (two hops,
// non-empty answers, text hops carry a passage id, kb hops a triple,
// aggregate records a COUNT query).
void validate(const BenchmarkRecord& r);

nlohmann::json to_json(const BenchmarkRecord& r);
BenchmarkRecord record_from_json(const nlohmann::json& j);

std::vector<BenchmarkRecord> load_benchmark(const std::filesystem::path& path);
void save_benchmark(const std::filesystem::path& path, const std::vector<BenchmarkRecord>& records);

}  // namespace hetqa
