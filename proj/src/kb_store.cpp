#include "hetqa/kb.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <tuple>

#include <spdlog/spdlog.h>

#include "hetqa/errors.hpp"
#include "hetqa/text_util.hpp"

namespace hetqa {

namespace {

using nlohmann::json;

struct PosLess {
  bool operator()(const Triple& a, const Triple& b) const {
    return std::tie(a.predicate, a.object, a.subject) < std::tie(b.predicate, b.object, b.subject);
  }
};

struct OspLess {
  bool operator()(const Triple& a, const Triple& b) const {
    return std::tie(a.object, a.subject, a.predicate) < std::tie(b.object, b.subject, b.predicate);
  }
};

template <typename Fn>
void for_each_record(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw MalformedRecord(path.string(), 0, "cannot open file");
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw MalformedRecord(path.string(), lineno, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw MalformedRecord(path.string(), lineno, "record is not an object");
    try {
      fn(j);
    } catch (const MalformedRecord&) {
      throw;
    } catch (const DanglingReference&) {
      throw;
    } catch (const std::exception& e) {
      throw MalformedRecord(path.string(), lineno, e.what());
    }
  }
}

std::string required_string(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) throw std::invalid_argument(std::string("missing string field '") + key + "'");
  return it->get<std::string>();
}

std::vector<std::string> string_list(const json& j, const char* key) {
  std::vector<std::string> out;
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return out;
  if (!it->is_array()) throw std::invalid_argument(std::string("field '") + key + "' is not a list");
  for (const auto& v : *it) {
    if (!v.is_string()) throw std::invalid_argument(std::string("field '") + key + "' has a non-string item");
    out.push_back(v.get<std::string>());
  }
  return out;
}

template <typename Id>
Id parse_id(const std::string& text) {
  auto id = Id::parse(text);
  if (!id) throw std::invalid_argument("bad identifier '" + text + "'");
  return *id;
}

void check_aliases(const std::vector<std::string>& aliases) {
  std::set<std::string> seen;
  for (const auto& a : aliases) {
    if (!seen.insert(casefold(a)).second) throw std::invalid_argument("duplicate alias '" + a + "'");
  }
}

}  // namespace

std::string to_string(const ObjectValue& v) {
  if (const auto* e = std::get_if<EntityId>(&v)) return e->str();
  return "\"" + std::get<Literal>(v).text + "\"";
}

TripleStore::Builder& TripleStore::Builder::add_entity(Entity e) {
  if (e.label.empty()) throw std::invalid_argument("entity " + e.id.str() + " has an empty label");
  check_aliases(e.aliases);
  auto id = e.id;
  entities_.insert_or_assign(id, std::move(e));
  return *this;
}

TripleStore::Builder& TripleStore::Builder::add_relation(Relation r) {
  if (r.label.empty()) throw std::invalid_argument("relation " + r.id.str() + " has an empty label");
  auto id = r.id;
  relations_.insert_or_assign(id, std::move(r));
  return *this;
}

TripleStore::Builder& TripleStore::Builder::add_triple(Triple t) {
  triples_.push_back(std::move(t));
  return *this;
}

TripleStore TripleStore::Builder::build() && {
  for (const auto& t : triples_) {
    if (!entities_.count(t.subject)) throw DanglingReference(t.subject.str());
    if (!relations_.count(t.predicate)) throw DanglingReference(t.predicate.str());
    if (const auto* o = std::get_if<EntityId>(&t.object); o && !entities_.count(*o))
      throw DanglingReference(o->str());
  }
  TripleStore store;
  store.entities_ = std::move(entities_);
  store.relations_ = std::move(relations_);
  store.spo_ = std::move(triples_);
  std::sort(store.spo_.begin(), store.spo_.end());
  store.pos_ = store.spo_;
  std::sort(store.pos_.begin(), store.pos_.end(), PosLess{});
  store.osp_ = store.spo_;
  std::sort(store.osp_.begin(), store.osp_.end(), OspLess{});
  return store;
}

std::vector<Triple> TripleStore::lookup(std::optional<EntityId> subject,
                                        std::optional<RelationId> predicate,
                                        std::optional<ObjectValue> object) const {
  if (!subject && !predicate && !object)
    throw PreconditionViolation("lookup needs at least one bound position");

  auto matches = [&](const Triple& t) {
    return (!subject || t.subject == *subject) && (!predicate || t.predicate == *predicate) &&
           (!object || t.object == *object);
  };

  std::vector<Triple> out;
  auto collect = [&](auto first, auto last) {
    for (auto it = first; it != last; ++it)
      if (matches(*it)) out.push_back(*it);
  };

  if (subject) {
    // SPO prefix on subject (and predicate when bound).
    auto lo = std::lower_bound(spo_.begin(), spo_.end(), *subject,
                               [](const Triple& t, EntityId s) { return t.subject < s; });
    auto hi = std::upper_bound(lo, spo_.end(), *subject,
                               [](EntityId s, const Triple& t) { return s < t.subject; });
    if (predicate) {
      lo = std::lower_bound(lo, hi, *predicate,
                            [](const Triple& t, RelationId p) { return t.predicate < p; });
      hi = std::upper_bound(lo, hi, *predicate,
                            [](RelationId p, const Triple& t) { return p < t.predicate; });
    }
    collect(lo, hi);
  } else if (predicate) {
    auto lo = std::lower_bound(pos_.begin(), pos_.end(), *predicate,
                               [](const Triple& t, RelationId p) { return t.predicate < p; });
    auto hi = std::upper_bound(lo, pos_.end(), *predicate,
                               [](RelationId p, const Triple& t) { return p < t.predicate; });
    if (object) {
      lo = std::lower_bound(lo, hi, *object,
                            [](const Triple& t, const ObjectValue& o) { return t.object < o; });
      hi = std::upper_bound(lo, hi, *object,
                            [](const ObjectValue& o, const Triple& t) { return o < t.object; });
    }
    collect(lo, hi);
  } else {
    auto lo = std::lower_bound(osp_.begin(), osp_.end(), *object,
                               [](const Triple& t, const ObjectValue& o) { return t.object < o; });
    auto hi = std::upper_bound(lo, osp_.end(), *object,
                               [](const ObjectValue& o, const Triple& t) { return o < t.object; });
    collect(lo, hi);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t TripleStore::object_count(EntityId subject, RelationId predicate) const {
  return lookup(subject, predicate, std::nullopt).size();
}

const Entity* TripleStore::entity(EntityId id) const {
  auto it = entities_.find(id);
  return it == entities_.end() ? nullptr : &it->second;
}

const Relation* TripleStore::relation(RelationId id) const {
  auto it = relations_.find(id);
  return it == relations_.end() ? nullptr : &it->second;
}

std::string TripleStore::label_of(EntityId id) const {
  const auto* e = entity(id);
  return e ? e->label : id.str();
}

std::string TripleStore::label_of(RelationId id) const {
  const auto* r = relation(id);
  return r ? r->label : id.str();
}

std::string TripleStore::label_of(const ObjectValue& v) const {
  if (const auto* e = std::get_if<EntityId>(&v)) return label_of(*e);
  return std::get<Literal>(v).text;
}

json object_to_json(const ObjectValue& v) {
  if (const auto* e = std::get_if<EntityId>(&v)) return json{{"qid", e->str()}};
  return json{{"literal", std::get<Literal>(v).text}};
}

ObjectValue object_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("object must be {\"qid\"} or {\"literal\"}");
  if (auto it = j.find("qid"); it != j.end()) return parse_id<EntityId>(it->get<std::string>());
  if (auto it = j.find("literal"); it != j.end()) {
    if (!it->is_string()) throw std::invalid_argument("literal must be a string");
    return Literal{it->get<std::string>()};
  }
  throw std::invalid_argument("object must be {\"qid\"} or {\"literal\"}");
}

json triple_to_json(const Triple& t) {
  return json{{"subject", t.subject.str()},
              {"predicate", t.predicate.str()},
              {"object", object_to_json(t.object)}};
}

Triple triple_from_json(const json& j) {
  return Triple{parse_id<EntityId>(required_string(j, "subject")),
                parse_id<RelationId>(required_string(j, "predicate")),
                object_from_json(j.at("object"))};
}

TripleStore ingest(const std::filesystem::path& entities_file,
                   const std::filesystem::path& relations_file,
                   const std::filesystem::path& triples_file) {
  TripleStore::Builder builder;
  for_each_record(entities_file, [&](const json& j) {
    Entity e;
    e.id = parse_id<EntityId>(required_string(j, "qid"));
    e.label = required_string(j, "label");
    if (auto it = j.find("description"); it != j.end() && it->is_string()) e.description = *it;
    e.aliases = string_list(j, "aliases");
    if (auto it = j.find("wikipedia_title"); it != j.end() && it->is_string())
      e.wikipedia_title = it->get<std::string>();
    builder.add_entity(std::move(e));
  });
  for_each_record(relations_file, [&](const json& j) {
    Relation r;
    r.id = parse_id<RelationId>(required_string(j, "pid"));
    r.label = required_string(j, "label");
    r.aliases = string_list(j, "aliases");
    builder.add_relation(std::move(r));
  });
  for_each_record(triples_file, [&](const json& j) { builder.add_triple(triple_from_json(j)); });
  auto store = std::move(builder).build();
  auto s = store.stats();
  spdlog::info("loaded {} entities, {} relations, {} triples", s.entities, s.relations, s.triples);
  return store;
}

}  // namespace hetqa
