#include "hetqa/prompts.hpp"

#include <array>
#include <string_view>

#include "hetqa/errors.hpp"
#include "hetqa/text_util.hpp"

namespace hetqa::prompts {

namespace {

constexpr std::string_view kHopHeader =
    "Write a search query, query entity, and SPARQL that will help answer a complex question.\n"
    "Follow the following format.\n"
    "Context: ${sources that may contain relevant content}\n"
    "Question: ${the question to be answered}\n"
    "Rationale: Let's think step by step. Based on the context, we have learned the following. "
    "${information from the context that provides useful clues}\n"
    "Search Query: ${a simple question for seeking the missing information}\n"
    "Query Entity: ${query entity name from search query}\n"
    "SPARQL: ${SPARQL query used to query against Wikidata}\n";

constexpr std::string_view kFirstHopDemos =
    "Example 1\n"
    "Context:\n"
    "Question: What are the occupations of the person who holds the most women's Wimbledon titles?\n"
    "Rationale: Let's think step by step. Based on the context, we have learned the following. "
    "Decompose the question to answer the following single-hop questions. 1. Who holds the most "
    "women's Wimbledon titles? 2. What are the occupations of this person\n"
    "Search Query: Who holds the most women's Wimbledon titles?\n"
    "Query Entity: women's Wimbledon titles\n"
    "SPARQL: None\n"
    "\n"
    "Example 2\n"
    "Context:\n"
    "Question: Which bay is the name of David Resnick's place of birth?\n"
    "Rationale: Let's think step by step. Based on the context, we have learned the following. "
    "Decompose the question to answer the following single-hop questions. 1. Where was David "
    "Resnick born? 2. Which bay is the name of this place\n"
    "Search Query: Where was David Resnick born?\n"
    "Query Entity: David Resnick\n"
    "SPARQL: SELECT ?place WHERE {wd:Q962183 wdt:P19 ?place.}\n"
    "\n"
    "Example 3\n"
    "Context:\n"
    "Question: Is the person who directed the film The Shape of Water a member of the Writers Guild "
    "of America, West?\n"
    "Rationale: Let's think step by step. Based on the context, we have learned the following. "
    "Decompose the question to answer the following single-hop questions. 1. Who directed the film "
    "the shape of water? 2. Is the person the person a member of the Writers Guild of America, West?\n"
    "Search Query: The director of the film The Shape of Water\n"
    "Query Entity: The Shape of Water\n"
    "SPARQL: SELECT ?name WHERE {wd:Q26698156 wdt:P57 ?name.}\n";

constexpr std::string_view kSecondHopDemos =
    "Example 1\n"
    "Context:[[1] ... [k]]\n"
    "Question: What are the occupations of the person who holds the most women's Wimbledon titles?\n"
    "Rationale: Let's think step by step. Based on the context, we have learned the following. "
    "Wimbledon is a tennis tournament, and tennis player Martina Navratilova holds the most women's "
    "Wimbledon titles. The second step is to answer what are the occupations of this person.\n"
    "Search Query: What are the occupations of Martina Navratilova?\n"
    "Query Entity: Martina Navratilova\n"
    "SPARQL: SELECT ?name WHERE {wd:Q54545 wdt:P106 ?name.}\n"
    "\n"
    "Example 2\n"
    "Context:[[1] ... [k]]\n"
    "Question: Which bay is the name of David Resnick's place of birth?\n"
    "Rationale: Let's think step by step. Based on the context, we have learned the following. "
    "David Resnick was born in Rio de Janeiro. The second step is to answer which bay is the name "
    "of Rio de Janeiro?\n"
    "Search Query: which bay is the name of Rio de Janeiro?\n"
    "Query Entity: Rio de Janeiro\n"
    "SPARQL: None\n"
    "\n"
    "Example 3\n"
    "Context:[[1] ... [k]]\n"
    "Question: Is the person who directed the film The Shape of Water a member of the Writers Guild "
    "of America, West?\n"
    "Rationale: Let's think step by step. Based on the context, we have learned the following. The "
    "Shape of Water is directed by Guillermo del Toro. The second step is to answer is the person a "
    "member of the Writers Guild of America, West\n"
    "Search Query: the organization Guillermo del Toro is in\n"
    "Query Entity: Guillermo del Toro\n"
    "SPARQL: SELECT ?name WHERE {wd:Q219124 wdt:P463 ?name.}\n";

constexpr std::string_view kFinalHeader =
    "Answer questions with short factoid answers.\n"
    "Follow the following format.\n"
    "Context: ${sources that may contain relevant content}\n"
    "Question: ${the question to be answered}\n"
    "Rationale: Let's think step by step. ${a step-by-step deduction that identifies the correct "
    "response, which will be provided below}\n"
    "Answer: ${a short factoid answer, often between 1 and 5 words}\n";

constexpr std::string_view kFinalDemos =
    "Example 1\n"
    "Context: [[1] ... [k]]\n"
    "Question: What are the occupations of the person who holds the most women's Wimbledon titles?\n"
    "Rationale: Let's think step by step. Martina Navratilova is a tennis player, writer, novelist, "
    "and autobiographer.\n"
    "Answer: tennis player, writer, novelist, and autobiographer\n"
    "\n"
    "Example 2\n"
    "Context: [[1] ... [k]]\n"
    "Question: Which bay is the name of David Resnick's place of birth?\n"
    "Rationale: Let's think step by step. David Resnick was born in Rio de Janeiro, and \"Rio de "
    "Janeiro\" was the name of Guanabara Bay.\n"
    "Answer: Guanabara Bay\n"
    "\n"
    "Example 3\n"
    "Context: [[1] ... [k]]\n"
    "Question: Is the person who directed the film The Shape of Water a member of the Writers Guild "
    "of America, West?\n"
    "Rationale: Let's think step by step. Guillermo del Toro Gomez is a filmmaker, he is a member of "
    "the Writers Guild of America, West.\n"
    "Answer: yes\n";

constexpr std::string_view kHopScaffold =
    "Rationale: Let's think step by step. Based on the context, we have learned the following.";
constexpr std::string_view kFinalScaffold = "Rationale: Let's think step by step.";

enum class Label { rationale, search_query, query_entity, sparql, answer };

// Recognizes "Label:" and the "SPARQL :" spelling; returns the value part.
std::optional<std::pair<Label, std::string>> match_label(const std::string& line) {
  static const std::array<std::pair<std::string_view, Label>, 5> kLabels{{
      {"Rationale", Label::rationale},
      {"Search Query", Label::search_query},
      {"Query Entity", Label::query_entity},
      {"SPARQL", Label::sparql},
      {"Answer", Label::answer},
  }};
  auto t = trim(line);
  for (const auto& [name, label] : kLabels) {
    if (!starts_with_ci(t, name)) continue;
    std::size_t i = name.size();
    while (i < t.size() && t[i] == ' ') ++i;
    if (i < t.size() && t[i] == ':') return std::make_pair(label, trim(std::string_view(t).substr(i + 1)));
  }
  return std::nullopt;
}

bool starts_new_block(const std::string& line) {
  auto t = trim(line);
  return starts_with_ci(t, "Example ") || starts_with_ci(t, "Target") || starts_with_ci(t, "Context:") ||
         starts_with_ci(t, "Question:");
}

std::optional<std::string> none_to_absent(const std::string& v) {
  if (v.empty() || casefold(v) == "none") return std::nullopt;
  return v;
}

struct Scanned {
  std::string preamble;  // unlabelled text before the first label
  std::vector<std::pair<Label, std::string>> fields;
};

Scanned scan(const std::string& completion) {
  Scanned out;
  bool seen_label = false;
  std::vector<std::string> pre;
  for (const auto& line : split_lines(completion)) {
    if (seen_label && starts_new_block(line)) break;
    if (auto m = match_label(line)) {
      seen_label = true;
      out.fields.push_back(std::move(*m));
    } else if (!seen_label && !trim(line).empty()) {
      pre.push_back(trim(line));
    }
  }
  out.preamble = join(pre, " ");
  return out;
}

std::optional<std::string> last_of(const Scanned& s, Label l) {
  std::optional<std::string> v;
  for (const auto& [label, value] : s.fields)
    if (label == l) v = value;
  return v;
}

}  // namespace

std::string render_context_block(const std::vector<RankedContext>& contexts) {
  std::string out;
  int n = 0;
  for (const auto& ctx : contexts)
    for (const auto& item : ctx.items) out += "\n[" + std::to_string(++n) + "] " + item.text;
  return out;
}

std::string render_prompt(Stage stage, const std::string& question, const std::vector<RankedContext>& contexts) {
  std::string out;
  if (stage.kind == Stage::hop) {
    out += kHopHeader;
    out += "\n";
    out += stage.hop_index <= 1 ? kFirstHopDemos : kSecondHopDemos;
    out += "\nTarget Question\n";
  } else {
    out += kFinalHeader;
    out += "\n";
    out += kFinalDemos;
    out += "\nTarget\n";
  }
  out += "Context:" + render_context_block(contexts) + "\n";
  out += "Question: " + question + "\n";
  out += stage.kind == Stage::hop ? kHopScaffold : kFinalScaffold;
  return out;
}

HopFields parse_llm_fields(const std::string& completion) {
  auto s = scan(completion);
  auto query = last_of(s, Label::search_query);
  if (!query || trim(*query).empty() || casefold(trim(*query)) == "none") throw MissingField("Search Query");
  HopFields f;
  f.search_query = *query;
  f.rationale = last_of(s, Label::rationale).value_or(s.preamble);
  if (auto e = last_of(s, Label::query_entity)) f.query_entity = none_to_absent(*e);
  if (auto q = last_of(s, Label::sparql)) f.sparql = none_to_absent(*q);
  return f;
}

AnswerFields parse_answer(const std::string& completion) {
  auto s = scan(completion);
  AnswerFields f;
  f.rationale = last_of(s, Label::rationale).value_or(s.preamble);
  if (auto a = last_of(s, Label::answer)) f.answer = *a;
  else f.answer = trim(completion);
  return f;
}

std::string single_hop_question_prompt(const std::string& answer, const std::string& relation,
                                       const std::string& question_entity) {
  std::string out =
      "Instruction: Question generation given the following information:\n"
      "1) Answer\n"
      "2) Short relation between the question entity and the answer\n"
      "3) Question entity.\n"
      "\n"
      "IMPORTANT: The answer must be avoided in the question.\n"
      "\n"
      "Answer: Jacques Boigelot;\n"
      "Relation: director;\n"
      "Question Entity: Peace in the Fields;\n"
      "Question: Who directs Peace in the Fields?\n"
      "\n"
      "Answer: Academy Award for Best Sound Mixing;\n"
      "Relation: award received;\n"
      "Question Entity: Douglas Shearer;\n"
      "Question: Which award does Douglas Shearer receive?\n"
      "\n"
      "Answer: Rio de Janeiro;\n"
      "Relation: place of birth;\n"
      "Question Entity: David Resnick;\n"
      "Question: Where was David Resnick born?\n"
      "\n";
  out += "Answer: " + answer + ";\n";
  out += "Relation: " + relation + ";\n";
  out += "Question Entity: " + question_entity + ";\n";
  out += "Question:";
  return out;
}

std::string composition_prompt(const std::string& hop1_question, const std::string& hop1_answer,
                               const std::string& hop2_question) {
  std::string out =
      "Instruction: Compose 2 single-hop questions into a 2-hop question given:\n"
      "1) Hop1 question\n"
      "2) Hop1 answer\n"
      "3) Hop2 question.\n"
      "\n"
      "Hop1 question: Who said a rose by any other name would smell just as sweet?\n"
      "Hop1 answer: Juliet\n"
      "Hop2 question: What is the cause of death of Juliet?\n"
      "Composed question: What is the cause of death of the person who said a rose by any other name "
      "would smell just as sweet?\n"
      "\n"
      "Hop1 question: Who hosted The Price Is Right before Bob Barker?\n"
      "Hop1 answer: Bill Cullen\n"
      "Hop2 question: What is the medical condition of Bill Cullen?\n"
      "Composed question: What is the medical condition of the person who hosted The Price Is Right "
      "before Bob Barker?\n"
      "\n"
      "Hop1 question: Who wrote If You Go Away on a Summer's Day?\n"
      "Hop1 answer: Rod McKuen\n"
      "Hop2 question: Which record company does Rod McKuen own?\n"
      "Composed question: Which record company does the person who wrote If You Go Away on a "
      "Summer's Day own?\n"
      "\n";
  out += "Hop1 question: " + hop1_question + "\n";
  out += "Hop1 answer: " + hop1_answer + "\n";
  out += "Hop2 question: " + hop2_question + "\n";
  out += "Composed question:";
  return out;
}

std::string distractor_prompt(const std::string& question, const std::string& answer) {
  return "Instruction: Give one wrong answer to the question that is plausible and of the same kind as "
         "the correct answer. Reply with the answer only.\n"
         "\n"
         "Question: What grade were they in High School Musical 1?\n"
         "Correct answer: juniors\n"
         "Distractor: seniors\n"
         "\n"
         "Question: " + question + "\n"
         "Correct answer: " + answer + "\n"
         "Distractor:";
}

std::string verification_prompt(const std::string& question, const std::string& candidate) {
  return "Instruction: Rewrite the question as a yes/no question that checks the candidate answer. "
         "The new question must contain the candidate answer and start with Is, Was, Were, Does, Do "
         "or Did.\n"
         "\n"
         "Question: What grade were they in High School Musical 1?\n"
         "Candidate answer: seniors\n"
         "Verification question: Were they seniors in High School Musical 1?\n"
         "\n"
         "Question: " + question + "\n"
         "Candidate answer: " + candidate + "\n"
         "Verification question:";
}

std::string first_line(const std::string& completion) {
  for (const auto& line : split_lines(completion)) {
    auto t = trim(line);
    if (!t.empty()) return t;
  }
  return {};
}

}  // namespace hetqa::prompts
