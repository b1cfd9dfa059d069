#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "tracelab/io.hpp"
#include "tracelab/measures.hpp"
#include "tracelab/naimtrace.hpp"

namespace tracelab {

/// One domain plus the objects most checks share. Derived objects are built
/// on first use and are safe to request from several threads.
class Workspace {
public:
    // `domain` is a DomainSpec object, or {"family": "custom", "graph": <graph or path>,
    // "base_vertex": k} for a hand-made graph.
    Workspace(const Json& domain, SolverConfig cfg, const std::filesystem::path& base_dir = {});

    const DomainGraph& graph() const { return *graph_; }
    const std::optional<DomainSpec>& spec() const { return spec_; }
    Index base_point() const { return x0_; }
    const SolverConfig& solver() const { return cfg_; }

    const GreenFunction& green_u() const;
    // Truncated domains only.
    const ProfileVector& profile() const;
    const ReferenceMeasure& reference() const;
    // Trace form against the reference measure.
    const TraceForm& trace() const;

    // A vertex given as an index or as [x, y] lattice coordinates.
    Index vertex(const Json& v) const;
    // Boundary vertices selected by {"min": a, "max": b, "anchor": [x, y]}: distance
    // from the anchor in [a, b] times the side (absolute units for custom graphs).
    // A missing window selects the whole boundary.
    VertexSet window(const Json& params) const;
    // Length unit used by fractional parameters: the side, or 1 for custom graphs.
    double unit() const;

private:
    std::unique_ptr<DomainGraph> graph_;
    std::optional<DomainSpec> spec_;
    Index x0_ = -1;
    SolverConfig cfg_;

    mutable std::once_flag green_once_, profile_once_, reference_once_, trace_once_;
    mutable std::unique_ptr<GreenFunction> green_;
    mutable std::unique_ptr<ProfileVector> profile_;
    mutable std::unique_ptr<ReferenceMeasure> reference_;
    mutable std::unique_ptr<TraceForm> trace_;
};

struct CheckSpec {
    std::string name;
    std::string id;  // output file stem; defaults to the name
    Json params = Json::object();
};

struct ExperimentConfig {
    Json domain;
    std::vector<CheckSpec> checks;
    std::filesystem::path output_dir = "out";
    std::filesystem::path base_dir;  // relative graph paths resolve here
    std::uint64_t seed = 1;
    bool parallel = false;
    // Overrides the tolerance of the exact identity checks.
    std::optional<double> tol;

    static ExperimentConfig from_json(const Json& j, const std::filesystem::path& base_dir = {});
    // Unknown check names and non-positive tolerances are rejected here.
    void validate() const;
};

const std::vector<std::string>& check_names();

// Runs one named check against a workspace.
EstimateReport run_check(const Workspace& ws, const CheckSpec& check, std::uint64_t seed,
                         std::optional<double> tol = {});

struct RunOutcome {
    int exit_code = 1;  // 0 all pass, 2 some check failed, 1 error
    std::vector<EstimateReport> reports;
    std::string error;
};

// Validates, runs every check, writes <id>.csv per check and summary.json.
RunOutcome run_experiment(const ExperimentConfig& config, std::ostream* log = nullptr);

int run(const ExperimentConfig& config);

}  // namespace tracelab
