#pragma once

#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hetqa/kb.hpp"

namespace hetqa::sparql {

struct Variable {
  std::string name;
  friend auto operator<=>(const Variable&, const Variable&) = default;
};

// ?var | wd:Qn | wdt:Pn | "literal"
using Term = std::variant<Variable, EntityId, RelationId, Literal>;

struct TriplePattern {
  Term subject;    // Variable or EntityId
  Term predicate;  // Variable or RelationId
  Term object;     // Variable, EntityId or Literal
  friend bool operator==(const TriplePattern&, const TriplePattern&) = default;
};

struct SelectVar {
  std::string name;
  friend bool operator==(const SelectVar&, const SelectVar&) = default;
};

struct Count {
  std::string inner;
  std::string alias;
  friend bool operator==(const Count&, const Count&) = default;
};

using Projection = std::variant<SelectVar, Count>;

struct Query {
  Projection projection;
  std::vector<TriplePattern> patterns;

  // Sorted, unique variable names across all patterns.
  std::vector<std::string> variables() const;
  // False when some pattern shares no variable path with the projection.
  bool connected() const;

  friend bool operator==(const Query&, const Query&) = default;
};

// A value bound to a variable. Predicate-position variables bind relations.
using Value = std::variant<EntityId, RelationId, Literal>;
using BindingRow = std::map<std::string, Value>;

struct Rows {
  std::vector<BindingRow> rows;
  friend bool operator==(const Rows&, const Rows&) = default;
};

struct CountValue {
  std::string alias;
  std::size_t value = 0;
  friend bool operator==(const CountValue&, const CountValue&) = default;
};

using ResultSet = std::variant<Rows, CountValue>;

// Grammar:
//   query      := SELECT projection WHERE '{' pattern+ '}'
//   projection := ?var | '(' COUNT '(' ?var ')' AS ?var ')'
//   pattern    := term term term ['.']
// Keywords are case-insensitive. Throws ParseError or UnboundProjection.
Query parse(std::string_view text);

// Canonical single-space rendering; parse(print(q)) == q.
std::string print(const Query& q);

std::string to_string(const Term& t);
std::string to_string(const Value& v);

// Deduplicated satisfying assignments over every pattern variable, sorted
// lexicographically by value in variable-name order. COUNT projections give
// the number of distinct values of the counted variable.
ResultSet evaluate(const Query& q, const TripleStore& store);

// One line per row: "<subject> <relation> <object>", labels resolved through
// the catalog. CountValue renders as "count = <n>".
std::vector<std::string> render_evidence(const ResultSet& result, const Query& q,
                                         const TripleStore& store);

}  // namespace hetqa::sparql
