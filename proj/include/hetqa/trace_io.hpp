#pragma once

#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "hetqa/orchestrator.hpp"

namespace hetqa {

nlohmann::json to_json(const LinkResult& r, const TripleStore* store = nullptr);
LinkResult link_result_from_json(const nlohmann::json& j);

nlohmann::json to_json(const EvidenceCandidate& c);
EvidenceCandidate evidence_from_json(const nlohmann::json& j);

nlohmann::json to_json(const RankedContext& c);
RankedContext ranked_context_from_json(const nlohmann::json& j);

nlohmann::json to_json(const PipelineTrace& t);
PipelineTrace trace_from_json(const nlohmann::json& j);

// One trace per line.
void save_traces(const std::filesystem::path& path, const std::vector<PipelineTrace>& traces);
std::vector<PipelineTrace> load_traces(const std::filesystem::path& path);

}  // namespace hetqa
