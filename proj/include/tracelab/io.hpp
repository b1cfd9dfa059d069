#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "tracelab/graphdomain.hpp"
#include "tracelab/report.hpp"

namespace tracelab {

using Json = nlohmann::json;

// {"coords": [[x,y],...], "edges": [[u,v,c],...], "measure": [...],
//  "interior": [...], "boundary": [...], "absorbing": [...], "mesh": h}
// plus optional "slit", "family" and "base_vertex".
Json graph_to_json(const DomainGraph& g);
DomainGraph graph_from_json(const Json& j);

// {"family": "half_plane", "side": 128, "alpha": 1, "truncation_radius": 128,
//  "base_point": [64, 16], "scale": 12}
DomainSpec spec_from_json(const Json& j);
Json spec_to_json(const DomainSpec& spec);

Json read_json_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string report_csv(const EstimateReport& report);

// Stable text for a report summary: 17-digit reals, sorted keys.
Json report_summary(const EstimateReport& report);

}  // namespace tracelab
