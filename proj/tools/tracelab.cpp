// Command-line front end: one subcommand per library operation plus `run`.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "tracelab/experiment.hpp"
#include "tracelab/montecarlo.hpp"
#include "tracelab/traceheat.hpp"

using namespace tracelab;

namespace {

struct Globals {
    std::string config;
    std::string out = "out";
    std::uint64_t seed = 1;
    bool parallel = false;
    std::optional<double> tol;

    std::string domain_file;
    std::string family;
    int side = 0;
    std::optional<double> alpha, truncation, scale;
    std::string base;
    std::string params = "{}";
};

Json parse_vertex(const std::string& s) {
    if (s.find(',') != std::string::npos) {
        std::istringstream in(s);
        double x = 0, y = 0;
        char comma = 0;
        in >> x >> comma >> y;
        if (!in) throw InvalidArgument("cannot parse point '" + s + "'");
        return Json::array({x, y});
    }
    return Json(std::stoll(s));
}

// Domain from --domain, then --config, then the inline flags.
Json domain_json(const Globals& g, std::filesystem::path* base_dir) {
    Json d;
    if (!g.domain_file.empty()) {
        d = read_json_file(g.domain_file);
        *base_dir = std::filesystem::path(g.domain_file).parent_path();
        if (d.contains("domain")) d = d.at("domain");
    } else if (!g.config.empty()) {
        d = read_json_file(g.config).at("domain");
        *base_dir = std::filesystem::path(g.config).parent_path();
    } else if (!g.family.empty()) {
        d["family"] = g.family;
    } else {
        throw InvalidArgument("no domain given: use --config, --domain or --family");
    }
    if (!g.family.empty()) d["family"] = g.family;
    if (g.side > 0) d["side"] = g.side;
    if (g.alpha) d["alpha"] = *g.alpha;
    if (g.truncation) d["truncation_radius"] = *g.truncation;
    if (g.scale) d["scale"] = *g.scale;
    if (!g.base.empty()) {
        const Json v = parse_vertex(g.base);
        if (d.value("family", std::string("custom")) == "custom")
            d["base_vertex"] = v;
        else
            d["base_point"] = v;
    }
    return d;
}

std::unique_ptr<Workspace> workspace(const Globals& g) {
    std::filesystem::path base;
    const Json d = domain_json(g, &base);
    return std::make_unique<Workspace>(d, SolverConfig::from_environment(), base);
}

void write_table(const Globals& g, const std::string& name, const std::vector<std::string>& columns,
                 const std::vector<std::vector<double>>& rows) {
    EstimateReport r;
    r.columns = columns;
    r.rows = rows;
    const auto path = std::filesystem::path(g.out) / name;
    write_file_atomic(path, report_csv(r));
    std::cout << "wrote " << path.string() << " (" << rows.size() << " rows)\n";
}

int single_check(const Globals& g, const std::string& name) {
    ExperimentConfig cfg;
    std::filesystem::path base;
    cfg.domain = domain_json(g, &base);
    cfg.base_dir = base;
    CheckSpec c;
    c.name = c.id = name;
    c.params = Json::parse(g.params);
    cfg.checks.push_back(c);
    cfg.output_dir = g.out;
    cfg.seed = g.seed;
    cfg.tol = g.tol;
    return run_experiment(cfg, &std::cout).exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tracelab: boundary potential theory on weighted lattice graphs"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--config", g.config, "experiment config (JSON)");
    app.add_option("--out", g.out, "output directory");
    app.add_option("--seed", g.seed, "random seed");
    app.add_flag("--parallel", g.parallel, "run independent checks concurrently");
    app.add_option("--tol", g.tol, "tolerance for the exact identity checks")->check(CLI::PositiveNumber);
    app.add_option("--domain", g.domain_file, "domain spec or graph (JSON)");
    app.add_option("--family", g.family, "domain family");
    app.add_option("--side", g.side, "lattice side N");
    app.add_option("--alpha", g.alpha, "half-plane weight exponent");
    app.add_option("--truncation", g.truncation, "truncation radius");
    app.add_option("--scale", g.scale, "parabola scale or disk radius");
    app.add_option("--base", g.base, "base point: vertex index or x,y");

    auto* domain = app.add_subcommand("domain", "domain operations");
    domain->require_subcommand(1);
    domain->fallthrough();
    auto* build = domain->add_subcommand("build", "build the lattice graph and write it as JSON");

    std::string x_arg, y_arg, centre_arg;
    double radius = 0, outer = 0;
    auto* green_cmd = app.add_subcommand("green", "Green function of the interior");
    green_cmd->add_option("--x", x_arg, "source vertex (default: base point)");
    green_cmd->add_option("--y", y_arg, "target vertex; omitted: the whole row");

    auto* cap_cmd = app.add_subcommand("capacity", "capacity of B(xi,r) inside B(xi,R)");
    cap_cmd->add_option("--center", centre_arg, "ball centre")->required();
    cap_cmd->add_option("--r", radius, "inner radius")->required();
    cap_cmd->add_option("--outer", outer, "outer radius")->required();

    auto* hm_cmd = app.add_subcommand("harmonic-measure", "harmonic measure from the base point");
    auto* prof_cmd = app.add_subcommand("profile", "harmonic profile of a truncated domain");
    auto* naim_cmd = app.add_subcommand("naim", "Naim kernel on boundary pairs");
    bool dump = false;
    auto* trace_cmd = app.add_subcommand("trace", "boundary trace form: jump conductances and killing");
    trace_cmd->add_flag("--dump-matrix", dump, "also write the Schur matrix");
    std::vector<double> times;
    auto* heat_cmd = app.add_subcommand("heatkernel", "heat kernel of the trace form");
    heat_cmd->add_option("--t", times, "times")->required();

    std::vector<std::pair<std::string, CLI::App*>> checks;
    for (const char* name : {"cdc-check", "hmeas-check", "doubling-check", "elliptic-measure", "doob-naim-verify",
                             "jump-check", "killing-check", "scale", "shk-check", "exit-time", "laplacian-identity",
                             "trace-green"}) {
        auto* sub = app.add_subcommand(name, std::string("run the ") + name + " check");
        sub->add_option("--params", g.params, "check parameters (JSON object)");
        checks.emplace_back(name, sub);
    }
    auto* mc = app.add_subcommand("mc", "Monte Carlo cross-checks");
    mc->require_subcommand(1);
    mc->fallthrough();
    auto* mc_hit = mc->add_subcommand("hitting", "empirical harmonic measure");
    auto* mc_watch = mc->add_subcommand("watched", "chain watched on the boundary");
    for (auto* sub : {mc_hit, mc_watch}) sub->add_option("--params", g.params, "check parameters (JSON object)");
    auto* run_cmd = app.add_subcommand("run", "run every check of --config");

    CLI11_PARSE(app, argc, argv);

    try {
        if (build->parsed()) {
            const auto ws = workspace(g);
            Json j = graph_to_json(ws->graph());
            j["base_vertex"] = ws->base_point();
            const auto path = std::filesystem::path(g.out) / "graph.json";
            write_file_atomic(path, j.dump() + "\n");
            std::cout << "wrote " << path.string() << ": " << ws->graph().vertex_count() << " vertices, "
                      << ws->graph().interior().size() << " interior, " << ws->graph().boundary().size()
                      << " boundary, " << ws->graph().absorbing().size() << " absorbing\n";
            return 0;
        }
        if (green_cmd->parsed()) {
            const auto ws = workspace(g);
            const DomainGraph& dg = ws->graph();
            const Index x = x_arg.empty() ? ws->base_point() : ws->vertex(parse_vertex(x_arg));
            if (!y_arg.empty()) {
                std::cout << format_real(ws->green_u()(x, ws->vertex(parse_vertex(y_arg)))) << '\n';
                return 0;
            }
            const Eigen::VectorXd row = ws->green_u().row(x);
            std::vector<std::vector<double>> rows;
            for (Index v = 0; v < dg.vertex_count(); ++v)
                rows.push_back({static_cast<double>(v), dg.coord(v).x(), dg.coord(v).y(), row[v]});
            write_table(g, "green.csv", {"vertex", "x", "y", "green"}, rows);
            return 0;
        }
        if (cap_cmd->parsed()) {
            const auto ws = workspace(g);
            const DomainGraph& dg = ws->graph();
            const Index c = ws->vertex(parse_vertex(centre_arg));
            const EquilibriumData e = capacity(dg, dg.ball(c, radius), dg.ball(c, outer), ws->solver());
            std::cout << "capacity " << format_real(e.capacity) << '\n';
            std::vector<std::vector<double>> rows;
            for (size_t i = 0; i < e.inner_support.size(); ++i)
                rows.push_back({static_cast<double>(e.inner_support[i]), 1, e.inner[static_cast<Index>(i)]});
            for (size_t i = 0; i < e.outer_support.size(); ++i)
                rows.push_back({static_cast<double>(e.outer_support[i]), 0, e.outer[static_cast<Index>(i)]});
            write_table(g, "equilibrium.csv", {"vertex", "inner", "mass"}, rows);
            return 0;
        }
        if (hm_cmd->parsed() || prof_cmd->parsed()) {
            const auto ws = workspace(g);
            const DomainGraph& dg = ws->graph();
            std::vector<std::vector<double>> rows;
            if (hm_cmd->parsed()) {
                const BoundaryMeasure w = harmonic_measure(ws->green_u(), ws->base_point());
                for (size_t j = 0; j < dg.boundary().size(); ++j) {
                    const Index v = dg.boundary()[j];
                    rows.push_back({static_cast<double>(v), dg.coord(v).x(), dg.coord(v).y(), w.values[static_cast<Index>(j)]});
                }
                write_table(g, "harmonic_measure.csv", {"vertex", "x", "y", "omega"}, rows);
            } else {
                const ProfileVector& h = ws->profile();
                for (Index v = 0; v < dg.vertex_count(); ++v)
                    rows.push_back({static_cast<double>(v), dg.coord(v).x(), dg.coord(v).y(), h.values[v]});
                write_table(g, "profile.csv", {"vertex", "x", "y", "h"}, rows);
                std::cout << "escape probability " << format_real(h.escape_probability) << '\n';
            }
            return 0;
        }
        if (naim_cmd->parsed()) {
            const auto ws = workspace(g);
            const DomainGraph& dg = ws->graph();
            const NaimKernel theta(ws->green_u(), ws->base_point(), ws->solver());
            std::vector<std::vector<double>> rows;
            const VertexSet& f = dg.boundary();
            for (size_t i = 0; i < f.size(); ++i)
                for (size_t j = 0; j < f.size(); ++j)
                    if (i != j)
                        rows.push_back({static_cast<double>(f[i]), static_cast<double>(f[j]), dg.distance(f[i], f[j]),
                                        theta.boundary_values().values(static_cast<Index>(i), static_cast<Index>(j))});
            write_table(g, "naim.csv", {"xi", "eta", "distance", "theta"}, rows);
            return 0;
        }
        if (trace_cmd->parsed()) {
            const auto ws = workspace(g);
            const DomainGraph& dg = ws->graph();
            const TraceForm& tf = ws->trace();
            const VertexSet& f = dg.boundary();
            std::vector<std::vector<double>> rows, kill;
            for (size_t i = 0; i < f.size(); ++i) {
                const Index a = static_cast<Index>(i);
                kill.push_back({static_cast<double>(f[i]), tf.killing[a], tf.mu.values[a]});
                for (size_t j = 0; j < f.size(); ++j)
                    if (i != j)
                        rows.push_back({static_cast<double>(f[i]), static_cast<double>(f[j]), dg.distance(f[i], f[j]),
                                        tf.jump_conductance(a, static_cast<Index>(j)), tf.jump_kernel(a, static_cast<Index>(j))});
            }
            write_table(g, "trace.csv", {"xi", "eta", "distance", "c_hat", "J_mu"}, rows);
            write_table(g, "killing.csv", {"xi", "kappa", "mu"}, kill);
            if (dump) {
                std::vector<std::string> cols;
                for (Index v : f) cols.push_back("v" + std::to_string(v));
                std::vector<std::vector<double>> m;
                for (Index i = 0; i < tf.schur.size(); ++i) {
                    const Eigen::VectorXd r = tf.schur.values.row(i).transpose();
                    m.emplace_back(r.data(), r.data() + r.size());
                }
                write_table(g, "schur.csv", cols, m);
            }
            return 0;
        }
        if (heat_cmd->parsed()) {
            const auto ws = workspace(g);
            const DomainGraph& dg = ws->graph();
            const HeatKernelSeries s = trace_heat_kernel(ws->trace(), times, ws->solver());
            std::vector<std::vector<double>> rows;
            const VertexSet& f = dg.boundary();
            for (const auto& slice : s.slices)
                for (size_t i = 0; i < f.size(); ++i)
                    for (size_t j = 0; j < f.size(); ++j)
                        rows.push_back({slice.t, static_cast<double>(f[i]), static_cast<double>(f[j]),
                                        slice.density.values(static_cast<Index>(i), static_cast<Index>(j))});
            write_table(g, "heatkernel.csv", {"t", "xi", "eta", "p"}, rows);
            std::cout << "chapman-kolmogorov residual " << format_real(s.chapman_kolmogorov) << '\n';
            return 0;
        }
        for (const auto& [name, sub] : checks)
            if (sub->parsed()) return single_check(g, name);
        if (mc_hit->parsed()) return single_check(g, "mc-hitting");
        if (mc_watch->parsed()) return single_check(g, "mc-watched");
        if (run_cmd->parsed()) {
            if (g.config.empty()) throw InvalidArgument("run needs --config");
            ExperimentConfig cfg = ExperimentConfig::from_json(read_json_file(g.config),
                                                               std::filesystem::path(g.config).parent_path());
            if (app.get_option("--out")->count() > 0) cfg.output_dir = g.out;
            if (app.get_option("--seed")->count() > 0) cfg.seed = g.seed;
            if (g.tol) cfg.tol = g.tol;
            cfg.parallel = cfg.parallel || g.parallel;
            return run_experiment(cfg, &std::cout).exit_code;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
