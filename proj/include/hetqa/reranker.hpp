#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hetqa/providers.hpp"

namespace hetqa {

// Where a piece of evidence came from. The enumerator order is also the
// tie-break order when relevance scores are equal.
enum class EvidenceSource { sparql, sparse_kb, dense_kb, sparse_text, dense_text, oracle };

std::string_view to_string(EvidenceSource s);
EvidenceSource evidence_source_from_string(std::string_view s);

struct EvidenceCandidate {
  std::string key;  // passage id, or "sparql:<rendering>"
  std::string text;
  EvidenceSource source = EvidenceSource::dense_text;
  std::string originating_query;
  std::optional<double> relevance;
  std::optional<std::string> sparql;  // executed query, sparql-sourced only
  int invocation = -1;                // index of the producing tool call
};

struct RankedContext {
  std::string question;
  std::vector<EvidenceCandidate> items;
};

// Deduplicates by key (keeping the highest pre-set relevance, first seen on
// ties), scores survivors with `scorer` against the question, and keeps
// the top k. If the scorer is unavailable, falls back to lexical overlap
// and logs a warning.
RankedContext fuse_and_rank(const std::string& question, std::vector<EvidenceCandidate> pool,
                            std::size_t k, RelevanceScorer& scorer);

}  // namespace hetqa
