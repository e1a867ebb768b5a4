#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace hetqa {

// Wikidata-style identifier: a prefix letter followed by a non-negative
// integer. Ordering is numeric, so Q9 < Q10.
template <char Prefix>
class WikiId {
 public:
  static constexpr char kPrefix = Prefix;

  constexpr WikiId() = default;
  constexpr explicit WikiId(std::uint64_t number) : number_(number) {}

  // Accepts "Q42" (or "P19"); nullopt on anything else.
  static std::optional<WikiId> parse(std::string_view text) {
    if (text.size() < 2 || text.size() > 20 || text[0] != Prefix) return std::nullopt;
    std::uint64_t n = 0;
    for (char c : text.substr(1)) {
      if (c < '0' || c > '9') return std::nullopt;
      n = n * 10 + static_cast<std::uint64_t>(c - '0');
    }
    return WikiId(n);
  }

  constexpr std::uint64_t number() const { return number_; }
  std::string str() const { return std::string(1, Prefix) + std::to_string(number_); }

  friend constexpr auto operator<=>(const WikiId&, const WikiId&) = default;

 private:
  std::uint64_t number_ = 0;
};

using EntityId = WikiId<'Q'>;
using RelationId = WikiId<'P'>;

struct Literal {
  std::string text;
  friend auto operator<=>(const Literal&, const Literal&) = default;
};

// Triple object position: an entity or a raw-text literal. Entities sort
// before literals.
using ObjectValue = std::variant<EntityId, Literal>;

std::string to_string(const ObjectValue& v);

struct Entity {
  EntityId id;
  std::string label;
  std::string description;
  std::vector<std::string> aliases;
  std::optional<std::string> wikipedia_title;
};

struct Relation {
  RelationId id;
  std::string label;
  std::vector<std::string> aliases;
};

struct Triple {
  EntityId subject;
  RelationId predicate;
  ObjectValue object;

  friend auto operator<=>(const Triple&, const Triple&) = default;
};

struct IngestStats {
  std::size_t entities = 0;
  std::size_t relations = 0;
  std::size_t triples = 0;
};

// Immutable triple multiset with SPO/POS/OSP orderings and entity/relation
// catalogs. Build with ingest() or TripleStore::Builder; safe for concurrent
// readers afterwards.
class TripleStore {
 public:
  class Builder {
   public:
    Builder& add_entity(Entity e);
    Builder& add_relation(Relation r);
    Builder& add_triple(Triple t);
    // Throws DanglingReference when a triple names an unknown id.
    TripleStore build() &&;

   private:
    std::map<EntityId, Entity> entities_;
    std::map<RelationId, Relation> relations_;
    std::vector<Triple> triples_;
  };

  TripleStore() = default;

  // Triples matching every bound position, ordered by (s, p, o).
  // Throws PreconditionViolation when nothing is bound.
  std::vector<Triple> lookup(std::optional<EntityId> subject, std::optional<RelationId> predicate,
                             std::optional<ObjectValue> object) const;

  std::size_t object_count(EntityId subject, RelationId predicate) const;

  // All triples in SPO order.
  const std::vector<Triple>& triples() const { return spo_; }

  const Entity* entity(EntityId id) const;
  const Relation* relation(RelationId id) const;
  const std::map<EntityId, Entity>& entities() const { return entities_; }
  const std::map<RelationId, Relation>& relations() const { return relations_; }

  // Catalog label, falling back to the raw id.
  std::string label_of(EntityId id) const;
  std::string label_of(RelationId id) const;
  std::string label_of(const ObjectValue& v) const;

  IngestStats stats() const { return {entities_.size(), relations_.size(), spo_.size()}; }

  // Orderings as stored; exposed for invariant checks.
  const std::vector<Triple>& pos_order() const { return pos_; }
  const std::vector<Triple>& osp_order() const { return osp_; }

 private:
  std::map<EntityId, Entity> entities_;
  std::map<RelationId, Relation> relations_;
  std::vector<Triple> spo_;
  std::vector<Triple> pos_;
  std::vector<Triple> osp_;
};

// Loads the three line-delimited files. Blank lines are skipped.
// Throws MalformedRecord (with 1-based line) or DanglingReference.
TripleStore ingest(const std::filesystem::path& entities_file,
                   const std::filesystem::path& relations_file,
                   const std::filesystem::path& triples_file);

// JSON codecs shared with the benchmark and trace files.
nlohmann::json object_to_json(const ObjectValue& v);
ObjectValue object_from_json(const nlohmann::json& j);
nlohmann::json triple_to_json(const Triple& t);
Triple triple_from_json(const nlohmann::json& j);

}  // namespace hetqa
