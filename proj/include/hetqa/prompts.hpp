#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hetqa/reranker.hpp"

namespace hetqa::prompts {

struct Stage {
  enum Kind { hop, final_answer } kind = hop;
  int hop_index = 1;  // 1-based; only meaningful for hop stages

  static Stage hop_stage(int j) { return {hop, j}; }
  static Stage final_stage() { return {final_answer, 0}; }
};

// Few-shot hop/final prompts. Hop 1 uses the first-hop demonstrations,
// later hops the second-hop ones. Context items from every supplied
// RankedContext are numbered consecutively: "Context:\n[1] ...\n[2] ...".
std::string render_prompt(Stage stage, const std::string& question, const std::vector<RankedContext>& contexts);

// Renders only the numbered context block (without the "Context:" label).
std::string render_context_block(const std::vector<RankedContext>& contexts);

struct HopFields {
  std::string rationale;
  std::string search_query;
  std::optional<std::string> query_entity;
  std::optional<std::string> sparql;
};

// Pulls the labelled fields out of a hop completion. Text after a new
// demonstration block (Example/Target/Context:/Question: lines) is ignored;
// within what remains, the last occurrence of each label wins. "None"
// becomes absent. Throws MissingField("Search Query").
HopFields parse_llm_fields(const std::string& completion);

struct AnswerFields {
  std::string rationale;
  std::string answer;
};

// Final-stage completion; falls back to the whole trimmed completion when
// there is no "Answer:" label.
AnswerFields parse_answer(const std::string& completion);

// Dataset-construction prompts.
std::string single_hop_question_prompt(const std::string& answer, const std::string& relation,
                                       const std::string& question_entity);
std::string composition_prompt(const std::string& hop1_question, const std::string& hop1_answer,
                               const std::string& hop2_question);
std::string distractor_prompt(const std::string& question, const std::string& answer);
std::string verification_prompt(const std::string& question, const std::string& candidate);

// First non-empty line of a completion, trimmed.
std::string first_line(const std::string& completion);

}  // namespace hetqa::prompts
