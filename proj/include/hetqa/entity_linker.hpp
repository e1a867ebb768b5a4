#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hetqa/kb.hpp"
#include "hetqa/providers.hpp"
#include "hetqa/sparql.hpp"

namespace hetqa {

enum class LinkMethod { none, exact_label, alias, fuzzy };

std::string_view to_string(LinkMethod m);
LinkMethod link_method_from_string(std::string_view s);

struct LinkCandidate {
  EntityId entity;
  std::string label;
  double lexical_score = 0.0;
  double description_score = 0.0;
  double score = 0.0;  // the value candidates are ranked by
};

struct LinkResult {
  std::optional<EntityId> chosen;
  std::vector<LinkCandidate> candidates;
  LinkMethod method = LinkMethod::none;
};

struct LinkerOptions {
  std::size_t max_candidates = 10;
  double fuzzy_threshold = 0.5;
};

// Candidate generation runs in stages and stops at the first stage that
// yields anything: exact label, then alias, then token-set Jaccard >= 0.5.
// Candidates are ranked by cosine(context, description) when a provider is
// given, else by lexical score; ties go to the smaller numeric id.
LinkResult link(const std::string& mention, const std::string& context_query, const TripleStore& store,
                EmbeddingProvider* provider = nullptr, const LinkerOptions& opts = {});

// Rewrites every EntityRef subject to link.chosen. A RelationRef predicate
// missing from the catalog is replaced by the relation whose label or alias
// tokens are best covered by `relation_words` (coverage >= 0.5), else kept.
// Throws NoEntityMatch when nothing was linked.
sparql::Query repair_sparql(const sparql::Query& query, const LinkResult& link,
                            const TripleStore& store, const std::string& relation_words);

// Best catalog relation for the words, if any reaches the coverage bar.
std::optional<RelationId> match_relation(const std::string& words, const TripleStore& store);

}  // namespace hetqa
