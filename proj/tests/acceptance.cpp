// Acceptance gate: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"
#include "tracelab/experiment.hpp"
#include "tracelab/montecarlo.hpp"
#include "tracelab/traceheat.hpp"

using namespace tracelab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(4);
    s << v;
    return s.str();
}

Json half_plane(int n, double alpha = 1.0) {
    return {{"family", "half_plane"}, {"side", n}, {"alpha", alpha}, {"truncation_radius", n}};
}

Json family_domain(const std::string& family, int n) {
    Json d = {{"family", family}, {"side", n}};
    if (family == "half_plane" || family == "quadrant") d["truncation_radius"] = n;
    else if (family != "rectangle") d["truncation_radius"] = n / 2;
    return d;
}

const std::vector<std::string> kFamilies = {"half_plane", "quadrant", "parabola_exterior",
                                            "slit_plane", "disk_exterior", "rectangle"};

EstimateReport check(const Workspace& ws, const std::string& name, Json params = Json::object(),
                     std::uint64_t seed = 20240101) {
    return run_check(ws, {name, name, std::move(params)}, seed);
}

SolverConfig solver() { return SolverConfig::from_environment(); }

// 1. Exact Doob-Naim formula on random and hand-made graphs.
Outcome doob_naim() {
    double worst = 0.0;
    bool ok = true;
    int graphs = 0;
    auto run = [&](const DomainGraph& g, Index x0) {
        const EstimateReport r = doob_naim_verify(g, x0, {});
        worst = std::max({worst, r.max_ratio, r.metrics.at("base_invariance")});
        ok = ok && r.pass;
        ++graphs;
    };
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        const DomainGraph g = testing::random_graph(1000 + seed, false, seed % 3 == 0);
        if (g.vertex_count() > 60) return {false, "random graph exceeds 60 vertices"};
        run(g, g.interior().front());
    }
    const DomainGraph p3 = testing::path3(), c4 = testing::cycle4(), s3 = testing::star3();
    run(p3, 1);
    run(c4, 1);
    run(s3, 0);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const DomainGraph g = testing::random_graph(2000 + seed, true, seed % 2 == 0);
        run(g, g.interior().front());
    }
    return {ok && worst <= 1e-9, std::to_string(graphs) + " graphs, max relative deviation " + fmt(worst)};
}

// 2. Laplacian identities for omega and nu on every family.
Outcome laplacian_identities() {
    double worst = 0.0;
    bool ok = true;
    for (const auto& f : kFamilies) {
        const Workspace ws(family_domain(f, 64), solver());
        const EstimateReport r = check(ws, "laplacian-identity", {{"tolerance", 1e-10}});
        worst = std::max(worst, r.max_ratio);
        ok = ok && r.pass;
    }
    return {ok, "6 families at N=64, max deviation " + fmt(worst)};
}

// 3. Block of the Green function on U+B equals the inverse of S_BB.
Outcome trace_green() {
    double worst = 0.0;
    bool ok = true;
    std::size_t balls = 0;
    for (const auto& f : kFamilies) {
        const Workspace ws(family_domain(f, 64), solver());
        const EstimateReport r = check(ws, "trace-green", {{"balls", 10}, {"tolerance", 1e-9}});
        worst = std::max(worst, r.max_ratio);
        balls += r.rows.size();
        ok = ok && r.pass && r.rows.size() == 10;
    }
    return {ok, std::to_string(balls) + " balls, max relative residual " + fmt(worst)};
}

const Json kMiddleThird = {{"max", 1.0 / 6}};

// 4. Jump kernel slope -(1+alpha) and on-diagonal heat kernel slope -1/alpha.
Outcome stable_recovery() {
    bool ok = true;
    std::string detail;
    for (double alpha : {0.5, 1.0, 1.5}) {
        const Workspace ws(half_plane(128, alpha), solver());
        const double tol = alpha == 1.0 ? 0.15 : 0.2;
        const EstimateReport r =
            check(ws, "jump-check", {{"window", kMiddleThird}, {"expect_slope", -(1 + alpha)}, {"slope_tolerance", tol}});
        const double slope = r.metrics.at("slope");
        ok = ok && std::abs(slope + 1 + alpha) <= tol;
        detail += "J slope(alpha=" + fmt(alpha) + ")=" + fmt(slope) + " ";
        if (alpha == 1.0) {
            const EstimateReport h = check(ws, "shk-check", {{"window", kMiddleThird}});
            const double d = h.metrics.at("diagonal_slope");
            ok = ok && std::abs(d + 1.0) <= 0.2;
            detail += "diag slope=" + fmt(d) + " ";
        }
    }
    return {ok, detail};
}

// 5. Quadrant: profile proportional to xy, exit exponents 2 at the corner and 1 on a face.
Outcome orthant() {
    const Workspace ws(family_domain("quadrant", 128), solver());
    const DomainGraph& g = ws.graph();
    const ProfileVector& h = ws.profile();
    double lo = INFINITY, hi = 0.0;
    for (Index v : g.interior()) {
        const Eigen::Vector2d p = g.coord(v);
        if (p.norm() > 64.0) continue;
        const double q = h.values[v] / (p.x() * p.y());
        lo = std::min(lo, q);
        hi = std::max(hi, q);
    }
    // Best single constant c for |h / (c x y) - 1|.
    const double profile_error = (hi - lo) / (hi + lo);
    const Json corner = Json::array({0, 1});
    const Json face = Json::array({64, 0});
    const EstimateReport r = check(
        ws, "exit-time",
        {{"points", Json::array({Json{{"point", corner}, {"expect_slope", 2.0}, {"slope_tolerance", 0.2}},
                                 Json{{"point", face}, {"radii", {8, 16, 32}}, {"expect_slope", 1.0}, {"slope_tolerance", 0.1}}})},
         {"radii", {2, 4, 8, 16, 32}}});
    const double sc = r.metrics.at("slope_" + std::to_string(ws.vertex(corner)));
    const double sf = r.metrics.at("slope_" + std::to_string(ws.vertex(face)));
    const bool ok = profile_error <= 0.05 && r.pass;
    return {ok, "profile/xy max relative error " + fmt(profile_error) + ", corner slope " + fmt(sc) + ", face slope " + fmt(sf)};
}

// 6. Parabola: local exponent of Psi at the vertex crosses over from 1 to 1/2.
Outcome parabola() {
    const Workspace ws(family_domain("parabola_exterior", 192), solver());
    const Json vertex = Json::array({96, 96});
    const EstimateReport r = check(
        ws, "scale",
        {{"a2", std::sqrt(2.0)},
         {"exponents", Json::array({Json{{"point", vertex}, {"k_lo", 0}, {"k_hi", 2}, {"min", 0.85}, {"max", 1.15}},
                                    Json{{"point", vertex}, {"k_lo", -3}, {"k_hi", -1}, {"min", 0.35}, {"max", 0.65}}})},
         {"window", {{"max", 0.0}}}});
    const double small = r.metrics.at("exponent_0"), large = r.metrics.at("exponent_1");
    const bool ok = small >= 0.85 && small <= 1.15 && large >= 0.35 && large <= 0.65;
    return {ok, "small-scale exponent " + fmt(small) + " (r " + fmt(r.metrics.at("exponent_0_r_lo")) + ".." +
                    fmt(r.metrics.at("exponent_0_r_hi")) + "), large-scale exponent " + fmt(large) + " (r " +
                    fmt(r.metrics.at("exponent_1_r_lo")) + ".." + fmt(r.metrics.at("exponent_1_r_hi")) + ")"};
}

// 7. Two-sided harmonic measure bound and doubling on half plane and quadrant.
Outcome harmonic_measure_bounds() {
    bool ok = true;
    std::string detail;
    struct Case {
        std::string family;
        Json window;
        Json base;
    };
    const std::vector<Case> cases = {
        {"half_plane", kMiddleThird, Json::array({64, 96})},
        {"quadrant", {{"min", 1.0 / 3}, {"max", 2.0 / 3}}, Json::array({72, 72})},
    };
    for (const Case& c : cases) {
        const Workspace ws(family_domain(c.family, 128), solver());
        const Json p = {{"window", c.window}, {"scales", {4, 8, 16}}, {"base", c.base}, {"constant", 10}};
        const EstimateReport hm = check(ws, "hmeas-check", p);
        Json dp = p;
        dp["constant"] = 16;
        const EstimateReport db = check(ws, "doubling-check", dp);
        const double spread = hm.max_ratio / hm.min_ratio;
        const bool scales_covered = hm.rows.size() == 3 * ws.window(p).size();
        ok = ok && hm.pass && db.pass && spread <= 100 && scales_covered;
        detail += c.family + ": max/min " + fmt(spread) + " over " + std::to_string(hm.rows.size()) + " rows, doubling " +
                  fmt(db.max_ratio) + "; ";
    }
    return {ok, detail};
}

// 8. No killing on bounded domains; killing proportional to nu outside a disk.
Outcome killing() {
    double kmax = 0.0;
    {
        const Workspace ws(family_domain("rectangle", 64), solver());
        kmax = std::max(kmax, ws.trace().killing.cwiseAbs().maxCoeff());
    }
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const DomainGraph g = testing::random_graph(3000 + seed);
        BoundaryMeasure mu;
        mu.values = Eigen::VectorXd::Ones(static_cast<Index>(g.boundary().size()));
        kmax = std::max(kmax, trace_form(g, mu).killing.cwiseAbs().maxCoeff());
    }
    Json disk = family_domain("disk_exterior", 128);
    disk["truncation_radius"] = 64;
    disk["scale"] = 4;  // truncation is 8 boundary diameters
    const Workspace ws(disk, solver());
    const EstimateReport r = check(ws, "killing-check", {{"max_cv", 0.1}, {"escape_tolerance", 0.1}});
    const bool ok = kmax <= 1e-10 && r.pass;
    return {ok, "bounded max |kappa| " + fmt(kmax) + "; disk cv " + fmt(r.metrics.at("cv")) + ", escape error " +
                    fmt(r.metrics.at("escape_error"))};
}

// 9. Stable-like heat kernel bounds.
Outcome shk() {
    const Workspace ws(half_plane(128), solver());
    const EstimateReport r = check(ws, "shk-check", {{"window", kMiddleThird}, {"constant", 50}});
    const bool ok = r.pass && r.min_ratio >= 1.0 / 50 && r.max_ratio <= 50 &&
                    r.metrics.at("chapman_kolmogorov") <= 1e-8;
    return {ok, std::to_string(r.rows.size()) + " (t, xi, eta) triples, ratios in [" + fmt(r.min_ratio) + ", " +
                    fmt(r.max_ratio) + "], CK residual " + fmt(r.metrics.at("chapman_kolmogorov"))};
}

// 10. Walks against exact harmonic measure, watched chain against the trace.
Outcome monte_carlo() {
    const Workspace ws(half_plane(64), solver());
    const EstimateReport hit = check(ws, "mc-hitting", {{"n_paths", 100000}, {"max_outside", 0.02}});
    const EstimateReport watch =
        check(ws, "mc-watched", {{"n_paths", 100000}, {"start", Json::array({32, 0})}, {"tolerance", 1e-9}});
    const bool ok = hit.pass && watch.pass;
    return {ok, "hitting share outside 3 sigma " + fmt(hit.metrics.at("share_outside")) + ", watched share " +
                    fmt(watch.metrics.at("share_outside")) + ", identity residual " +
                    fmt(watch.metrics.at("identity_residual"))};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// 11. Two runs of the same config produce identical bytes.
Outcome determinism() {
    const fs::path root = fs::temp_directory_path() / "tracelab_acceptance_determinism";
    fs::remove_all(root);
    std::vector<ExperimentConfig> configs;
    configs.push_back(ExperimentConfig::from_json(read_json_file(TRACELAB_CONFIG_DIR "/p3_doob_naim.json"),
                                                  TRACELAB_CONFIG_DIR));
    configs.push_back(ExperimentConfig::from_json(
        Json{{"domain", half_plane(48)},
             {"seed", 7},
             {"checks", Json::array({"laplacian-identity", "trace-green", "jump-check", "shk-check", "killing-check",
                                     Json{{"name", "mc-hitting"}, {"params", {{"n_paths", 20000}, {"threads", 4}}}},
                                     Json{{"name", "mc-watched"}, {"params", {{"n_paths", 20000}}}}})}}));
    std::size_t files = 0;
    for (std::size_t k = 0; k < configs.size(); ++k) {
        ExperimentConfig c = configs[k];
        const fs::path a = root / std::to_string(k) / "a", b = root / std::to_string(k) / "b";
        c.output_dir = a;
        if (run_experiment(c).exit_code == 1) return {false, "config " + std::to_string(k) + " failed to run"};
        c.output_dir = b;
        c.parallel = !c.parallel;
        if (run_experiment(c).exit_code == 1) return {false, "config " + std::to_string(k) + " failed to run"};
        for (const auto& entry : fs::directory_iterator(a)) {
            const fs::path other = b / entry.path().filename();
            if (!fs::exists(other) || slurp(entry.path()) != slurp(other))
                return {false, entry.path().filename().string() + " differs between runs"};
            ++files;
        }
    }
    return {true, std::to_string(files) + " output files byte-identical across runs"};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"C1 Doob-Naim formula", doob_naim},
        {"C2 Laplacian identities", laplacian_identities},
        {"C3 trace-Green invariance", trace_green},
        {"C4 stable-like recovery", stable_recovery},
        {"C5 orthant scaling", orthant},
        {"C6 parabola crossover", parabola},
        {"C7 harmonic measure bounds", harmonic_measure_bounds},
        {"C8 killing dichotomy", killing},
        {"C9 heat kernel bounds", shk},
        {"C10 Monte Carlo consistency", monte_carlo},
        {"C11 determinism", determinism},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << " [" << fmt(secs) << " s]"
                  << std::endl;
        failed += o.pass ? 0 : 1;
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
              << std::endl;
    return failed == 0 ? 0 : 1;
}
