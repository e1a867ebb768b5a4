#include "hetqa/sparql.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <set>

#include <spdlog/spdlog.h>

#include "hetqa/errors.hpp"

namespace hetqa::sparql {

namespace {

enum class Tok { LBrace, RBrace, LParen, RParen, Dot, Var, Entity, Relation, String, Word, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t offset;
};

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    std::size_t start = pos_;
    if (pos_ >= src_.size()) return {Tok::End, "", start};
    char c = src_[pos_];
    switch (c) {
      case '{': ++pos_; return {Tok::LBrace, "{", start};
      case '}': ++pos_; return {Tok::RBrace, "}", start};
      case '(': ++pos_; return {Tok::LParen, "(", start};
      case ')': ++pos_; return {Tok::RParen, ")", start};
      case '.': ++pos_; return {Tok::Dot, ".", start};
      case '/': case '|': case '^': case '*': case '+':
        throw ParseError(start, "a term (property paths are not supported)");
      default: break;
    }
    if (c == '?') {
      ++pos_;
      std::size_t b = pos_;
      while (pos_ < src_.size() && is_name_char(src_[pos_])) ++pos_;
      if (pos_ == b) throw ParseError(b, "a variable name after '?'");
      return {Tok::Var, std::string(src_.substr(b, pos_ - b)), start};
    }
    if (c == '"') {
      ++pos_;
      std::string text;
      while (true) {
        if (pos_ >= src_.size()) throw ParseError(pos_, "closing '\"'");
        char d = src_[pos_++];
        if (d == '"') break;
        if (d == '\\') {
          if (pos_ >= src_.size()) throw ParseError(pos_, "escaped character");
          char e = src_[pos_++];
          if (e == 'n') text.push_back('\n');
          else if (e == 't') text.push_back('\t');
          else text.push_back(e);
          continue;
        }
        text.push_back(d);
      }
      return {Tok::String, std::move(text), start};
    }
    if (is_name_char(c)) {
      while (pos_ < src_.size() && (is_name_char(src_[pos_]) || src_[pos_] == ':')) ++pos_;
      std::string word(src_.substr(start, pos_ - start));
      if (word.rfind("wd:", 0) == 0) {
        auto id = EntityId::parse(word.substr(3));
        if (!id) throw ParseError(start + 3, "an entity id like Q42 after 'wd:'");
        return {Tok::Entity, word.substr(3), start};
      }
      if (word.rfind("wdt:", 0) == 0) {
        auto id = RelationId::parse(word.substr(4));
        if (!id) throw ParseError(start + 4, "a relation id like P31 after 'wdt:'");
        return {Tok::Relation, word.substr(4), start};
      }
      if (word.find(':') != std::string::npos)
        throw ParseError(start, "a wd: or wdt: prefixed name");
      return {Tok::Word, std::move(word), start};
    }
    throw ParseError(start, "a token");
  }

 private:
  std::string_view src_;
  std::size_t pos_ = 0;
};

bool keyword_is(const Token& t, std::string_view kw) {
  if (t.kind != Tok::Word || t.text.size() != kw.size()) return false;
  for (std::size_t i = 0; i < kw.size(); ++i)
    if (std::toupper(static_cast<unsigned char>(t.text[i])) != kw[i]) return false;
  return true;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : lex_(src) { advance(); }

  Query parse_query() {
    expect_keyword("SELECT");
    Projection proj = parse_projection();
    expect_keyword("WHERE");
    expect(Tok::LBrace, "'{'");
    std::vector<TriplePattern> patterns;
    while (cur_.kind != Tok::RBrace) {
      if (cur_.kind == Tok::End) throw ParseError(cur_.offset, "'}'");
      patterns.push_back(parse_pattern());
      if (cur_.kind == Tok::Dot) advance();
    }
    if (patterns.empty()) throw ParseError(cur_.offset, "at least one triple pattern");
    advance();
    if (cur_.kind != Tok::End) throw ParseError(cur_.offset, "end of query");
    return Query{std::move(proj), std::move(patterns)};
  }

 private:
  void advance() { cur_ = lex_.next(); }

  void reject_unsupported() {
    static constexpr std::string_view kUnsupported[] = {"OPTIONAL", "FILTER", "LIMIT",
                                                        "SERVICE",  "UNION",  "ORDER",
                                                        "OFFSET",   "GROUP",  "DISTINCT"};
    for (auto kw : kUnsupported)
      if (keyword_is(cur_, kw))
        throw ParseError(cur_.offset, "supported syntax (" + std::string(kw) + " is not supported)");
  }

  void expect_keyword(std::string_view kw) {
    reject_unsupported();
    if (!keyword_is(cur_, kw)) throw ParseError(cur_.offset, "'" + std::string(kw) + "'");
    advance();
  }

  void expect(Tok kind, const char* what) {
    if (cur_.kind != kind) {
      reject_unsupported();
      throw ParseError(cur_.offset, what);
    }
    advance();
  }

  std::string expect_var() {
    if (cur_.kind != Tok::Var) throw ParseError(cur_.offset, "a variable");
    std::string name = cur_.text;
    advance();
    return name;
  }

  Projection parse_projection() {
    if (cur_.kind == Tok::Var) return SelectVar{expect_var()};
    if (cur_.kind != Tok::LParen) throw ParseError(cur_.offset, "a variable or '(COUNT(?var) AS ?alias)'");
    advance();
    expect_keyword("COUNT");
    expect(Tok::LParen, "'('");
    std::string inner = expect_var();
    expect(Tok::RParen, "')'");
    expect_keyword("AS");
    std::string alias = expect_var();
    expect(Tok::RParen, "')'");
    return Count{std::move(inner), std::move(alias)};
  }

  Term parse_term() {
    reject_unsupported();
    Token t = cur_;
    switch (t.kind) {
      case Tok::Var: advance(); return Variable{t.text};
      case Tok::Entity: advance(); return *EntityId::parse(t.text);
      case Tok::Relation: advance(); return *RelationId::parse(t.text);
      case Tok::String: advance(); return Literal{t.text};
      default: throw ParseError(t.offset, "a term (?var, wd:Q…, wdt:P…, or \"literal\")");
    }
  }

  TriplePattern parse_pattern() {
    std::size_t s_off = cur_.offset;
    Term s = parse_term();
    if (!std::holds_alternative<Variable>(s) && !std::holds_alternative<EntityId>(s))
      throw ParseError(s_off, "a subject (?var or wd:Q…)");
    std::size_t p_off = cur_.offset;
    Term p = parse_term();
    if (!std::holds_alternative<Variable>(p) && !std::holds_alternative<RelationId>(p))
      throw ParseError(p_off, "a predicate (?var or wdt:P…)");
    std::size_t o_off = cur_.offset;
    Term o = parse_term();
    if (std::holds_alternative<RelationId>(o))
      throw ParseError(o_off, "an object (?var, wd:Q… or \"literal\")");
    return TriplePattern{std::move(s), std::move(p), std::move(o)};
  }

  Lexer lex_;
  Token cur_{Tok::End, "", 0};
};

const std::string* var_name(const Term& t) {
  if (const auto* v = std::get_if<Variable>(&t)) return &v->name;
  return nullptr;
}

std::string escape_literal(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    if (c == '\n') { out += "\\n"; continue; }
    if (c == '\t') { out += "\\t"; continue; }
    out.push_back(c);
  }
  return out + "\"";
}

const std::string& projected_var(const Projection& p) {
  if (const auto* s = std::get_if<SelectVar>(&p)) return s->name;
  return std::get<Count>(p).inner;
}

// ----- evaluation --------------------------------------------------------

using Binding = std::map<std::string, Value>;

std::optional<Value> resolve(const Term& t, const Binding& b) {
  if (const auto* v = std::get_if<Variable>(&t)) {
    auto it = b.find(v->name);
    if (it == b.end()) return std::nullopt;
    return it->second;
  }
  if (const auto* e = std::get_if<EntityId>(&t)) return Value{*e};
  if (const auto* r = std::get_if<RelationId>(&t)) return Value{*r};
  return Value{std::get<Literal>(t)};
}

int bound_positions(const TriplePattern& p, const Binding& b) {
  return static_cast<int>(resolve(p.subject, b).has_value()) +
         static_cast<int>(resolve(p.predicate, b).has_value()) +
         static_cast<int>(resolve(p.object, b).has_value());
}

Value object_value(const ObjectValue& o) {
  if (const auto* e = std::get_if<EntityId>(&o)) return Value{*e};
  return Value{std::get<Literal>(o)};
}

// Bind (or check) a pattern term against a concrete value.
bool unify(const Term& t, const Value& v, Binding& b) {
  if (const auto* var = std::get_if<Variable>(&t)) {
    auto [it, inserted] = b.emplace(var->name, v);
    return inserted || it->second == v;
  }
  return true;  // constants were already used to filter the lookup
}

class Evaluator {
 public:
  Evaluator(const Query& q, const TripleStore& store) : q_(q), store_(store), vars_(q.variables()) {}

  std::set<std::vector<Value>> run() {
    std::vector<bool> used(q_.patterns.size(), false);
    Binding b;
    solve(used, b, 0);
    return std::move(solutions_);
  }

 private:
  void solve(std::vector<bool>& used, Binding& b, std::size_t depth) {
    if (depth == q_.patterns.size()) {
      std::vector<Value> row;
      row.reserve(vars_.size());
      for (const auto& v : vars_) row.push_back(b.at(v));
      solutions_.insert(std::move(row));
      return;
    }
    // Most-selective first: the unused pattern with the most bound positions.
    std::size_t pick = q_.patterns.size();
    int best = -1;
    for (std::size_t i = 0; i < q_.patterns.size(); ++i) {
      if (used[i]) continue;
      int n = bound_positions(q_.patterns[i], b);
      if (n > best) {
        best = n;
        pick = i;
      }
    }
    const auto& pat = q_.patterns[pick];

    auto s = resolve(pat.subject, b);
    auto p = resolve(pat.predicate, b);
    auto o = resolve(pat.object, b);
    std::optional<EntityId> sid;
    std::optional<RelationId> pid;
    std::optional<ObjectValue> oval;
    if (s) {
      if (!std::holds_alternative<EntityId>(*s)) return;
      sid = std::get<EntityId>(*s);
    }
    if (p) {
      if (!std::holds_alternative<RelationId>(*p)) return;
      pid = std::get<RelationId>(*p);
    }
    if (o) {
      if (const auto* e = std::get_if<EntityId>(&*o)) oval = *e;
      else if (const auto* l = std::get_if<Literal>(&*o)) oval = *l;
      else return;
    }

    std::vector<Triple> scratch;
    const std::vector<Triple>* candidates = &store_.triples();
    if (sid || pid || oval) {
      scratch = store_.lookup(sid, pid, oval);
      candidates = &scratch;
    }

    used[pick] = true;
    for (const auto& t : *candidates) {
      Binding next = b;
      if (!unify(pat.subject, Value{t.subject}, next)) continue;
      if (!unify(pat.predicate, Value{t.predicate}, next)) continue;
      if (!unify(pat.object, object_value(t.object), next)) continue;
      solve(used, next, depth + 1);
    }
    used[pick] = false;
  }

  const Query& q_;
  const TripleStore& store_;
  std::vector<std::string> vars_;
  std::set<std::vector<Value>> solutions_;
};

std::string label_for(const Value& v, const TripleStore& store) {
  if (const auto* e = std::get_if<EntityId>(&v)) return store.label_of(*e);
  if (const auto* r = std::get_if<RelationId>(&v)) return store.label_of(*r);
  return std::get<Literal>(v).text;
}

}  // namespace

std::vector<std::string> Query::variables() const {
  std::set<std::string> names;
  for (const auto& p : patterns)
    for (const Term* t : {&p.subject, &p.predicate, &p.object})
      if (const auto* n = var_name(*t)) names.insert(*n);
  return {names.begin(), names.end()};
}

bool Query::connected() const {
  std::set<std::string> reach{projected_var(projection)};
  std::vector<bool> joined(patterns.size(), false);
  bool grew = true;
  while (grew) {
    grew = false;
    for (std::size_t i = 0; i < patterns.size(); ++i) {
      if (joined[i]) continue;
      const auto& p = patterns[i];
      bool touches = false;
      for (const Term* t : {&p.subject, &p.predicate, &p.object})
        if (const auto* n = var_name(*t); n && reach.count(*n)) touches = true;
      if (!touches) continue;
      joined[i] = grew = true;
      for (const Term* t : {&p.subject, &p.predicate, &p.object})
        if (const auto* n = var_name(*t)) reach.insert(*n);
    }
  }
  return std::all_of(joined.begin(), joined.end(), [](bool j) { return j; });
}

Query parse(std::string_view text) {
  Query q = Parser(text).parse_query();
  auto vars = q.variables();
  const auto& pv = projected_var(q.projection);
  if (!std::binary_search(vars.begin(), vars.end(), pv)) throw UnboundProjection(pv);
  return q;
}

std::string to_string(const Term& t) {
  if (const auto* v = std::get_if<Variable>(&t)) return "?" + v->name;
  if (const auto* e = std::get_if<EntityId>(&t)) return "wd:" + e->str();
  if (const auto* r = std::get_if<RelationId>(&t)) return "wdt:" + r->str();
  return escape_literal(std::get<Literal>(t).text);
}

std::string to_string(const Value& v) {
  if (const auto* e = std::get_if<EntityId>(&v)) return e->str();
  if (const auto* r = std::get_if<RelationId>(&v)) return r->str();
  return escape_literal(std::get<Literal>(v).text);
}

std::string print(const Query& q) {
  std::string out = "SELECT ";
  if (const auto* s = std::get_if<SelectVar>(&q.projection)) {
    out += "?" + s->name;
  } else {
    const auto& c = std::get<Count>(q.projection);
    out += "(COUNT(?" + c.inner + ") AS ?" + c.alias + ")";
  }
  out += " WHERE {";
  for (const auto& p : q.patterns)
    out += " " + to_string(p.subject) + " " + to_string(p.predicate) + " " + to_string(p.object) + " .";
  out += " }";
  return out;
}

ResultSet evaluate(const Query& q, const TripleStore& store) {
  if (!q.connected()) spdlog::warn("query has disconnected patterns, evaluating as a cross product: {}", print(q));
  auto vars = q.variables();
  auto solutions = Evaluator(q, store).run();

  if (const auto* c = std::get_if<Count>(&q.projection)) {
    auto idx = static_cast<std::size_t>(
        std::lower_bound(vars.begin(), vars.end(), c->inner) - vars.begin());
    std::set<Value> distinct;
    for (const auto& row : solutions) distinct.insert(row[idx]);
    return CountValue{c->alias, distinct.size()};
  }

  Rows rows;
  rows.rows.reserve(solutions.size());
  for (const auto& sol : solutions) {
    BindingRow row;
    for (std::size_t i = 0; i < vars.size(); ++i) row.emplace(vars[i], sol[i]);
    rows.rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<std::string> render_evidence(const ResultSet& result, const Query& q,
                                         const TripleStore& store) {
  std::vector<std::string> out;
  if (const auto* c = std::get_if<CountValue>(&result)) {
    out.push_back("count = " + std::to_string(c->value));
    return out;
  }
  for (const auto& row : std::get<Rows>(result).rows) {
    std::string line;
    for (const auto& pat : q.patterns) {
      auto render = [&](const Term& t) { return label_for(*resolve(t, row), store); };
      if (!line.empty()) line += "; ";
      line += render(pat.subject) + " " + render(pat.predicate) + " " + render(pat.object);
    }
    out.push_back(std::move(line));
  }
  return out;
}

}  // namespace hetqa::sparql
