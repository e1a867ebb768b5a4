#include "hetqa/datagen.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "hetqa/entity_linker.hpp"
#include "hetqa/errors.hpp"
#include "hetqa/evaluator.hpp"
#include "hetqa/prompts.hpp"
#include "hetqa/sparql.hpp"
#include "hetqa/text_util.hpp"

namespace hetqa::datagen {

using nlohmann::json;

namespace {

constexpr std::string_view kVerificationPhrases[] = {"is", "was", "were", "does", "do", "did"};

std::string ask(llm::Provider& gateway, const std::string& prompt, const GenOptions& opts) {
  llm::GenerationRequest req{prompt, opts.temperature, 64, 1};
  return prompts::first_line(llm::generate(req, gateway).samples.front());
}

bool starts_with_verification(const std::string& q) {
  auto words = tokenize(q);
  if (words.empty()) return false;
  return std::find(std::begin(kVerificationPhrases), std::end(kVerificationPhrases), words.front()) !=
         std::end(kVerificationPhrases);
}

std::string select_query(const Triple& t) {
  return "SELECT ?answer WHERE { wd:" + t.subject.str() + " wdt:" + t.predicate.str() + " ?answer . }";
}

std::size_t word_count(const std::string& s) {
  std::istringstream in(s);
  std::size_t n = 0;
  std::string w;
  while (in >> w) ++n;
  return n;
}

HopGold kb_hop(const std::string& question, const std::string& answer, const Triple& t) {
  HopGold h;
  h.sub_question = question;
  h.sub_answer = answer;
  h.source = HopSource::kb;
  h.gold_triple = t;
  h.gold_sparql = select_query(t);
  return h;
}

HopGold text_hop(const AnchorQA& a) {
  HopGold h;
  h.sub_question = a.question;
  h.sub_answer = a.answer;
  h.source = HopSource::text;
  h.gold_passage_id = anchor_passage_id(a);
  return h;
}

BenchmarkRecord as_record(const ComposedQuestion& q) {
  return {q.id, q.composed_text, q.answers, q.qtype, {q.hop1, q.hop2}};
}

}  // namespace

std::string_view to_string(Direction d) { return d == Direction::text_to_kb ? "text_to_kb" : "kb_to_text"; }

std::string_view to_string(Status s) {
  switch (s) {
    case Status::machine: return "machine";
    case Status::accepted: return "accepted";
    case Status::revised: return "revised";
    case Status::rejected: return "rejected";
  }
  return "machine";
}

Status status_from_string(std::string_view s) {
  for (auto v : {Status::machine, Status::accepted, Status::revised, Status::rejected})
    if (to_string(v) == s) return v;
  throw std::invalid_argument("unknown status '" + std::string(s) + "'");
}

json to_json(const ComposedQuestion& q) {
  auto j = hetqa::to_json(as_record(q));
  j["status"] = std::string(to_string(q.status));
  if (q.gold_sparql) j["gold_sparql"] = *q.gold_sparql;
  if (q.verifying_answer) j["verifying_answer"] = *q.verifying_answer;
  return j;
}

ComposedQuestion composed_from_json(const json& j) {
  auto r = record_from_json(j);
  ComposedQuestion q;
  q.id = r.id;
  q.qtype = r.qtype;
  q.composed_text = r.question;
  q.answers = r.answers;
  q.hop1 = r.hops.at(0);
  q.hop2 = r.hops.at(1);
  q.status = status_from_string(j.value("status", "machine"));
  if (j.contains("gold_sparql")) q.gold_sparql = j.at("gold_sparql").get<std::string>();
  if (j.contains("verifying_answer")) q.verifying_answer = j.at("verifying_answer").get<std::string>();
  return q;
}

// ----- selection -----------------------------------------------------------

std::vector<AnchorQA> filter_anchors(const std::vector<AnchorQA>& records) {
  std::vector<AnchorQA> out;
  for (const auto& r : records) {
    if (trim(r.question).empty() || trim(r.answer).empty() || trim(r.title).empty() || trim(r.passage).empty())
      continue;
    if (word_count(r.answer) > 5) continue;
    out.push_back(r);
  }
  return out;
}

std::vector<AnchorQA> load_anchors(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  std::vector<AnchorQA> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    try {
      auto j = json::parse(line);
      AnchorQA a;
      a.question = j.value("question", "");
      if (j.contains("answer") && j.at("answer").is_array())
        a.answer = j.at("answer").empty() ? "" : j.at("answer").front().get<std::string>();
      else
        a.answer = j.value("answer", "");
      a.title = j.value("title", "");
      a.passage = j.value("passage", "");
      out.push_back(std::move(a));
    } catch (const std::exception& e) {
      throw MalformedRecord(path.string(), n, e.what());
    }
  }
  return out;
}

std::vector<CandidatePair> link_bridge(const AnchorQA& anchor, const TripleStore& store, Direction direction) {
  const auto& mention = direction == Direction::text_to_kb ? anchor.answer : anchor.title;
  if (trim(mention).empty()) return {};
  auto linked = link(mention, anchor.question, store, nullptr);
  if (!linked.chosen) return {};
  std::vector<Triple> triples = direction == Direction::text_to_kb
                                    ? store.lookup(*linked.chosen, std::nullopt, std::nullopt)
                                    : store.lookup(std::nullopt, std::nullopt, ObjectValue{*linked.chosen});
  std::vector<CandidatePair> out;
  for (auto& t : triples) out.push_back({anchor, direction, *linked.chosen, std::move(t)});
  return out;
}

std::vector<CandidatePair> retain_triples(const std::vector<CandidatePair>& pairs, const TripleStore& store,
                                          const WikiPages& wiki_pages) {
  std::vector<CandidatePair> out;
  for (const auto& p : pairs) {
    const auto* subject = store.entity(p.triple.subject);
    bool keep = true;
    if (subject && subject->wikipedia_title) {
      auto page = wiki_pages.find(*subject->wikipedia_title);
      if (page != wiki_pages.end())
        keep = casefold(page->second).find(casefold(store.label_of(p.triple.object))) == std::string::npos;
    }
    if (keep && p.direction == Direction::kb_to_text)
      keep = store.object_count(p.triple.subject, p.triple.predicate) == 1;
    if (keep) out.push_back(p);
  }
  return out;
}

bool leaks(const std::string& text, const std::string& secret) {
  auto s = normalize(secret);
  if (s.empty()) return false;
  return normalize(text).find(s) != std::string::npos;
}

// ----- generation ----------------------------------------------------------

std::string gen_kb_question(const CandidatePair& pair, const TripleStore& store, llm::Provider& gateway,
                            const GenOptions& opts) {
  auto answer = store.label_of(pair.triple.object);
  auto prompt = prompts::single_hop_question_prompt(answer, store.label_of(pair.triple.predicate),
                                                    store.label_of(pair.triple.subject));
  std::string last;
  for (int attempt = 0; attempt <= opts.max_retries; ++attempt) {
    last = ask(gateway, prompt, opts);
    if (!last.empty() && !leaks(last, answer)) return last;
    spdlog::debug("single-hop question rejected (attempt {}): {}", attempt + 1, last);
  }
  throw GenerationLeak("single-hop question for " + store.label_of(pair.triple.subject) + " kept leaking: " + last);
}

YesNo make_yesno(const std::string& question, const std::string& answer, llm::Provider& gateway, std::mt19937_64& rng,
                 const GenOptions& opts) {
  bool truthful = (rng() & 1U) != 0;
  std::string candidate = answer;
  if (!truthful) {
    candidate.clear();
    auto prompt = prompts::distractor_prompt(question, answer);
    for (int attempt = 0; attempt <= opts.max_retries && candidate.empty(); ++attempt) {
      auto d = ask(gateway, prompt, opts);
      if (!normalize(d).empty() && normalize(d) != normalize(answer)) candidate = d;
    }
    if (candidate.empty()) throw DistractorEqualsAnswer("no distractor distinct from '" + answer + "'");
  }
  auto prompt = prompts::verification_prompt(question, candidate);
  std::string last;
  for (int attempt = 0; attempt <= opts.max_retries; ++attempt) {
    last = ask(gateway, prompt, opts);
    bool ok = starts_with_verification(last) && leaks(last, candidate);
    if (!truthful) ok = ok && !leaks(last, answer);
    if (ok) return {last, truthful ? "yes" : "no", candidate};
  }
  throw GenerationLeak("verification question rejected: " + last);
}

Aggregate make_aggregate(const CandidatePair& pair, const TripleStore& store) {
  if (pair.direction != Direction::text_to_kb)
    throw PreconditionViolation("aggregate questions need a text_to_kb pair");
  const auto& t = pair.triple;
  if (store.object_count(t.subject, t.predicate) < 2)
    throw PreconditionViolation("aggregate questions need at least two objects");
  Aggregate a;
  a.gold_sparql =
      "SELECT (COUNT(?x) AS ?count) WHERE { wd:" + t.subject.str() + " wdt:" + t.predicate.str() + " ?x . }";
  auto q = sparql::parse(a.gold_sparql);
  a.count = static_cast<std::size_t>(std::get<sparql::CountValue>(sparql::evaluate(q, store)).value);
  a.question = "How many " + store.label_of(t.predicate) + " values does " + store.label_of(t.subject) + " have?";
  return a;
}

std::string number_words(std::size_t n) {
  static const char* small[] = {"zero",    "one",     "two",       "three",    "four",     "five",    "six",
                                "seven",   "eight",   "nine",      "ten",      "eleven",   "twelve",  "thirteen",
                                "fourteen", "fifteen", "sixteen",  "seventeen", "eighteen", "nineteen"};
  static const char* tens[] = {"", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety"};
  if (n < 20) return small[n];
  if (n < 100) return std::string(tens[n / 10]) + (n % 10 ? std::string("-") + small[n % 10] : "");
  return std::to_string(n);
}

std::string compose(const std::string& hop1_question, const std::string& hop1_answer, const std::string& hop2_question,
                    const std::vector<std::string>& final_answers, llm::Provider& gateway, const GenOptions& opts) {
  if (normalize(hop1_question) == normalize(hop2_question)) throw CircularQuestion();
  if (!leaks(hop2_question, hop1_answer))
    throw PreconditionViolation("hop-2 question does not mention the bridge '" + hop1_answer + "'");
  auto prompt = prompts::composition_prompt(hop1_question, hop1_answer, hop2_question);
  std::string code, last;
  for (int attempt = 0; attempt <= opts.max_retries; ++attempt) {
    last = ask(gateway, prompt, opts);
    if (normalize(last).empty()) {
      code = "other";
    } else if (leaks(last, hop1_answer)) {
      code = "bridge_leak";
    } else if (std::any_of(final_answers.begin(), final_answers.end(),
                           [&](const std::string& a) { return leaks(last, a); })) {
      code = "answer_leak";
    } else if (normalize(last) == normalize(hop1_question)) {
      code = "circular";
    } else {
      return last;
    }
    spdlog::debug("composition rejected ({}): {}", code, last);
  }
  throw CompositionLeak(code, last);
}

std::string anchor_passage_id(const AnchorQA& a) { return a.title + "#" + sha256_hex(a.passage).substr(0, 8); }

Passage anchor_passage(const AnchorQA& a) {
  Passage p;
  p.id = anchor_passage_id(a);
  p.title = a.title;
  p.body = a.passage;
  return p;
}

std::optional<ComposedQuestion> generate_from_pair(const CandidatePair& pair, const TripleStore& store,
                                                   llm::Provider& gateway, std::mt19937_64& rng,
                                                   std::vector<Rejection>& rejections, const GenOptions& opts) {
  const auto& t = pair.triple;
  const auto& a = pair.anchor;
  std::string stage = "select";
  try {
    ComposedQuestion q;
    if (pair.direction == Direction::text_to_kb) {
      q.hop1 = text_hop(a);
      if (store.object_count(t.subject, t.predicate) >= 2) {
        stage = "aggregate";
        auto agg = make_aggregate(pair, store);
        q.qtype = QuestionType::aggregate_text_kb;
        q.answers = {std::to_string(agg.count), number_words(agg.count)};
        q.hop2 = kb_hop(agg.question, std::to_string(agg.count), t);
        q.hop2.gold_sparql = agg.gold_sparql;
        q.gold_sparql = agg.gold_sparql;
        stage = "compose";
        q.composed_text = compose(a.question, a.answer, agg.question, q.answers, gateway, opts);
      } else {
        bool yesno = (rng() & 1U) != 0;
        stage = "single_hop";
        auto object = store.label_of(t.object);
        auto q2 = gen_kb_question(pair, store, gateway, opts);
        q.hop2 = kb_hop(q2, object, t);
        std::string outer = q2;
        if (yesno) {
          stage = "yesno";
          auto yn = make_yesno(q2, object, gateway, rng, opts);
          q.qtype = QuestionType::yesno_text_kb;
          q.answers = {yn.gold};
          q.verifying_answer = yn.embedded;
          outer = yn.question;
        } else {
          q.qtype = QuestionType::short_entity_text_kb;
          q.answers = {object};
        }
        stage = "compose";
        q.composed_text = compose(a.question, a.answer, outer, q.answers, gateway, opts);
      }
    } else {
      bool yesno = (rng() & 1U) != 0;
      stage = "single_hop";
      auto bridge = store.label_of(t.object);
      auto q1 = gen_kb_question(pair, store, gateway, opts);
      q.hop1 = kb_hop(q1, bridge, t);
      q.hop2 = text_hop(a);
      std::string outer = a.question;
      if (yesno) {
        stage = "yesno";
        auto yn = make_yesno(a.question, a.answer, gateway, rng, opts);
        q.qtype = QuestionType::yesno_kb_text;
        q.answers = {yn.gold};
        q.verifying_answer = yn.embedded;
        outer = yn.question;
      } else {
        q.qtype = QuestionType::short_entity_kb_text;
        q.answers = {a.answer};
      }
      stage = "compose";
      q.composed_text = compose(q1, bridge, outer, q.answers, gateway, opts);
    }
    return q;
  } catch (const CompositionLeak& e) {
    rejections.push_back({a.question, stage, e.reason_code()});
  } catch (const CircularQuestion& e) {
    rejections.push_back({a.question, stage, "circular"});
  } catch (const Error& e) {
    rejections.push_back({a.question, stage, e.what()});
  }
  spdlog::info("discarded pair for '{}' at {}: {}", a.question, stage, rejections.back().reason);
  return std::nullopt;
}

PipelineResult run_pipeline(const std::vector<AnchorQA>& raw, const TripleStore& store, const WikiPages& wiki_pages,
                            llm::Provider& gateway, std::uint64_t seed, const GenOptions& opts) {
  PipelineResult result;
  std::mt19937_64 rng(seed);
  std::set<std::string> passage_ids;
  auto anchors = filter_anchors(raw);
  spdlog::info("{} of {} anchors pass the answer-length filter", anchors.size(), raw.size());
  for (const auto& anchor : anchors) {
    for (auto direction : {Direction::text_to_kb, Direction::kb_to_text}) {
      auto pairs = retain_triples(link_bridge(anchor, store, direction), store, wiki_pages);
      std::set<std::pair<EntityId, RelationId>> seen;
      for (const auto& pair : pairs) {
        // one question per (subject, relation); the rest would repeat it
        if (!seen.insert({pair.triple.subject, pair.triple.predicate}).second) continue;
        auto q = generate_from_pair(pair, store, gateway, rng, result.rejections, opts);
        if (!q) continue;
        char id[16];
        std::snprintf(id, sizeof id, "G%04zu", result.questions.size() + 1);
        q->id = id;
        if (passage_ids.insert(anchor_passage_id(anchor)).second) result.passages.push_back(anchor_passage(anchor));
        result.questions.push_back(std::move(*q));
      }
    }
  }
  return result;
}

// ----- annotation ----------------------------------------------------------

std::vector<AnnotationTask> export_annotation(const std::vector<ComposedQuestion>& questions, int annotators,
                                              std::uint64_t seed) {
  if (annotators < 1) throw PreconditionViolation("need at least one annotator");
  std::vector<AnnotationTask> tasks;
  for (const auto& q : questions) {
    if (q.status == Status::rejected) continue;
    for (int slot = 0; slot < annotators; ++slot)
      tasks.push_back({q.id, slot, 0, q.composed_text, q.hop1.sub_question, q.hop1.sub_answer, q.hop2.sub_question,
                       q.answers});
  }
  std::mt19937_64 rng(seed);
  std::shuffle(tasks.begin(), tasks.end(), rng);
  for (std::size_t i = 0; i < tasks.size(); ++i) tasks[i].display_order = static_cast<int>(i);
  return tasks;
}

std::vector<ComposedQuestion> import_verdicts(std::vector<ComposedQuestion> questions,
                                              const std::vector<Verdict>& verdicts) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < questions.size(); ++i) index.emplace(questions[i].id, i);
  std::map<std::string, std::vector<const Verdict*>> grouped;
  for (const auto& v : verdicts) {
    if (!index.count(v.record_id)) throw UnknownRecordId(v.record_id);
    if (v.verdict != "accept" && v.verdict != "revise" && v.verdict != "reject")
      throw std::invalid_argument("unknown verdict '" + v.verdict + "' for " + v.record_id);
    if (v.verdict == "revise" && (!v.revised_text || trim(*v.revised_text).empty()))
      throw std::invalid_argument("revise verdict for " + v.record_id + " has no text");
    grouped[v.record_id].push_back(&v);
  }
  for (auto& [id, vs] : grouped) {
    std::sort(vs.begin(), vs.end(), [](const Verdict* a, const Verdict* b) { return a->slot < b->slot; });
    auto& q = questions[index.at(id)];
    auto has = [&](const char* kind) {
      return std::find_if(vs.begin(), vs.end(), [&](const Verdict* v) { return v->verdict == kind; });
    };
    if (has("reject") != vs.end()) {
      q.status = Status::rejected;
    } else if (auto it = has("revise"); it != vs.end()) {
      q.status = Status::revised;
      q.composed_text = *(*it)->revised_text;
    } else {
      q.status = Status::accepted;
    }
  }
  return questions;
}

json to_json(const AnnotationTask& t) {
  return {{"record_id", t.record_id},         {"slot", t.slot},
          {"display_order", t.display_order}, {"question", t.question},
          {"hop1_question", t.hop1_question}, {"hop1_answer", t.hop1_answer},
          {"hop2_question", t.hop2_question}, {"answers", t.answers}};
}

json to_json(const Verdict& v) {
  json j{{"record_id", v.record_id}, {"slot", v.slot}, {"verdict", v.verdict}};
  if (v.revised_text) j["revised_text"] = *v.revised_text;
  if (v.reason) j["reason"] = *v.reason;
  return j;
}

Verdict verdict_from_json(const json& j) {
  Verdict v;
  v.record_id = j.at("record_id").get<std::string>();
  v.slot = j.value("slot", 0);
  v.verdict = j.at("verdict").get<std::string>();
  if (j.contains("revised_text") && !j.at("revised_text").is_null())
    v.revised_text = j.at("revised_text").get<std::string>();
  if (j.contains("reason") && !j.at("reason").is_null()) v.reason = j.at("reason").get<std::string>();
  return v;
}

std::vector<BenchmarkRecord> to_benchmark(const std::vector<ComposedQuestion>& questions) {
  std::vector<BenchmarkRecord> out;
  for (const auto& q : questions) {
    if (q.status == Status::rejected) continue;
    auto r = as_record(q);
    validate(r);
    out.push_back(std::move(r));
  }
  return out;
}

WikiPages load_wiki_pages(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  return json::parse(in).get<WikiPages>();
}

}  // namespace hetqa::datagen
