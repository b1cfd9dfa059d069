#include "tracelab/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <future>
#include <map>
#include <ostream>
#include <random>
#include <set>

#include "tracelab/montecarlo.hpp"
#include "tracelab/traceheat.hpp"

namespace tracelab {

// ---------------------------------------------------------------------------
// Workspace

Workspace::Workspace(const Json& domain, SolverConfig cfg, const std::filesystem::path& base_dir) : cfg_(cfg) {
    if (!domain.is_object()) throw InvalidArgument("domain must be a JSON object");
    const std::string family = domain.value("family", std::string("custom"));
    if (family == "custom" || domain.contains("graph") || domain.contains("coords")) {
        Json g = domain.contains("graph") ? domain.at("graph") : domain;
        if (g.is_string()) {
            std::filesystem::path p = g.get<std::string>();
            if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
            g = read_json_file(p);
        }
        graph_ = std::make_unique<DomainGraph>(graph_from_json(g));
        const Json* base = domain.contains("base_vertex") ? &domain.at("base_vertex")
                           : g.contains("base_vertex") ? &g.at("base_vertex")
                                                       : nullptr;
        if (base) {
            x0_ = vertex(*base);
        } else {
            if (graph_->interior().empty()) throw InvalidArgument("graph has no interior vertex");
            x0_ = graph_->interior().front();
        }
        if (!graph_->is_interior(x0_)) throw InvalidArgument("base vertex must be interior");
    } else {
        spec_ = spec_from_json(domain);
        graph_ = std::make_unique<DomainGraph>(build_domain(*spec_));
        x0_ = base_vertex(*graph_, *spec_);
    }
}

const GreenFunction& Workspace::green_u() const {
    std::call_once(green_once_, [&] { green_ = std::make_unique<GreenFunction>(interior_green(*graph_, cfg_)); });
    return *green_;
}

const ProfileVector& Workspace::profile() const {
    std::call_once(profile_once_, [&] {
        profile_ = std::make_unique<ProfileVector>(harmonic_profile(
            green_u(), x0_, spec_ ? spec_->truncation_radius : std::optional<double>{}));
    });
    return *profile_;
}

const ReferenceMeasure& Workspace::reference() const {
    std::call_once(reference_once_, [&] {
        if (!graph_->absorbing().empty()) {
            BoundaryMeasure nu = elliptic_measure(green_u(), profile(), {}).nu;
            nu.role = MeasureRole::reference;
            reference_ = std::make_unique<ReferenceMeasure>(ReferenceMeasure{std::move(nu), x0_});
        } else {
            reference_ = std::make_unique<ReferenceMeasure>(reference_measure(green_u(), x0_));
        }
    });
    return *reference_;
}

const TraceForm& Workspace::trace() const {
    std::call_once(trace_once_, [&] { trace_ = std::make_unique<TraceForm>(trace_form(*graph_, reference().mu, cfg_)); });
    return *trace_;
}

double Workspace::unit() const { return spec_ ? static_cast<double>(spec_->side) : 1.0; }

Index Workspace::vertex(const Json& v) const {
    if (v.is_number_integer()) {
        const Index k = v.get<Index>();
        if (k < 0 || k >= graph_->vertex_count()) throw InvalidArgument("vertex index out of range");
        return k;
    }
    if (v.is_array() && v.size() == 2) {
        const Eigen::Vector2d p(v.at(0).get<double>(), v.at(1).get<double>());
        const Index k = graph_->nearest_vertex(p);
        if ((graph_->coord(k) - p).norm() > 0.5 * graph_->mesh())
            throw InvalidArgument("no vertex at (" + format_real(p.x()) + ", " + format_real(p.y()) + ")");
        return k;
    }
    throw InvalidArgument("a vertex is an index or an [x, y] pair");
}

VertexSet Workspace::window(const Json& params) const {
    if (!params.contains("window")) return graph_->boundary();
    const Json& w = params.at("window");
    Eigen::Vector2d anchor = spec_ ? spec_->anchor() : graph_->coord(graph_->boundary().front());
    if (w.contains("anchor")) anchor = {w.at("anchor").at(0).get<double>(), w.at("anchor").at(1).get<double>()};
    const double lo = w.value("min", 0.0) * unit();
    const double hi = w.value("max", std::numeric_limits<double>::infinity()) * unit();
    VertexSet out;
    for (Index v : graph_->boundary()) {
        const double d = (graph_->coord(v) - anchor).norm();
        if (d >= lo - 1e-9 && d <= hi + 1e-9) out.push_back(v);
    }
    if (out.empty()) throw InvalidArgument("window selects no boundary vertex");
    return out;
}

// ---------------------------------------------------------------------------
// Checks

namespace {

std::vector<double> dyadic(double lo, double hi) {
    std::vector<double> out;
    for (double r = lo; r <= hi * (1 + 1e-12); r *= 2) out.push_back(r);
    return out;
}

std::vector<double> scales_param(const Json& p, const char* key, std::vector<double> fallback) {
    if (!p.contains(key)) return fallback;
    return p.at(key).get<std::vector<double>>();
}

double tol_param(const Json& p, std::optional<double> global, double fallback) {
    if (global) return *global;
    return p.value("tolerance", fallback);
}

// Adds a slope expectation to the pass flag when the params ask for one.
void expect_slope(EstimateReport& r, const Json& p, const std::string& metric, const char* key = "expect_slope",
                  const char* tol_key = "slope_tolerance") {
    if (!p.contains(key)) return;
    const double want = p.at(key).get<double>(), tol = p.value(tol_key, 0.1);
    const double got = r.metrics.at(metric);
    const bool ok = std::abs(got - want) <= tol;
    r.metrics[metric + "_expected"] = want;
    r.pass = r.pass && ok;
    r.predicate += " and |" + metric + " - " + format_real(want) + "| <= " + format_real(tol);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

using Runner = std::function<EstimateReport(const Workspace&, const Json&, std::uint64_t, std::optional<double>)>;

EstimateReport laplacian_identity(const Workspace& ws, const Json& p, std::uint64_t, std::optional<double> tol) {
    const auto start = std::chrono::steady_clock::now();
    const DomainGraph& g = ws.graph();
    const double t = tol_param(p, tol, 1e-10);
    EstimateReport r;
    r.check = "laplacian-identity";
    r.columns = {"identity", "deviation"};
    r.predicate = "max deviation <= " + format_real(t);
    r.add_row({0, laplacian_identity_check(ws.green_u(), ws.base_point())});
    if (!g.absorbing().empty()) {
        const ProfileVector& h = ws.profile();
        const BoundaryMeasure& nu = ws.reference().mu;
        double dev = 0.0;
        for (size_t j = 0; j < g.boundary().size(); ++j) {
            double sum = 0.0;
            for (const Neighbor& nb : g.neighbors(g.boundary()[j])) sum += nb.conductance * h.values[nb.vertex];
            dev = std::max(dev, std::abs(sum - nu.values[static_cast<Index>(j)]));
        }
        r.add_row({1, dev / nu.values.cwiseAbs().maxCoeff()});
        r.add_row({2, profile_residual(g, h) / h.values.cwiseAbs().maxCoeff()});
    }
    r.summarize("deviation");
    r.pass = r.max_ratio <= t;
    r.runtime_seconds = seconds_since(start);
    return r;
}

EstimateReport trace_green(const Workspace& ws, const Json& p, std::uint64_t seed, std::optional<double> tol) {
    const auto start = std::chrono::steady_clock::now();
    const DomainGraph& g = ws.graph();
    const double t = tol_param(p, tol, 1e-9);
    const int balls = p.value("balls", 10);
    const VertexSet centres = ws.window(p);
    const double r_max = std::max(3.0 * g.mesh(), p.value("r_max", g.diameter() / 8));
    std::mt19937_64 rng(path_seed(seed, 0x7472616365ULL));
    EstimateReport r;
    r.check = "trace-green";
    r.columns = {"draw", "xi", "r", "ball_size", "residual"};
    r.predicate = "max residual <= " + format_real(t);
    for (int k = 0, tries = 0; k < balls && tries < 100 * balls; ++tries) {
        const Index xi = centres[static_cast<size_t>(rng() % centres.size())];
        const double radius = 1.5 * g.mesh() + (r_max - 1.5 * g.mesh()) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
        try {
            const ExitTime e = exit_time(ws.trace(), xi, radius, ws.solver());
            r.add_row({static_cast<double>(k), static_cast<double>(xi), radius, static_cast<double>(e.ball.size()),
                       e.block_inverse_residual});
            ++k;
        } catch (const InvalidArgument&) {
            continue;  // ball covered all of F
        }
    }
    r.summarize("residual");
    r.pass = !r.rows.empty() && r.max_ratio <= t;
    r.runtime_seconds = seconds_since(start);
    return r;
}

EstimateReport cdc(const Workspace& ws, const Json& p, std::uint64_t, std::optional<double>) {
    CdcOptions o;
    o.a0 = p.value("a0", o.a0);
    o.max_ratio = p.value("max_ratio", o.max_ratio);
    o.scales = scales_param(p, "scales", dyadic(2, std::max(2.0, ws.unit() / 16)));
    o.centres = ws.window(p);
    return cdc_check(ws.graph(), o, ws.solver());
}

EstimateReport hmeas(const Workspace& ws, const Json& p, std::uint64_t, std::optional<double>) {
    HmeasOptions o;
    o.constant = p.value("constant", o.constant);
    o.separation = p.value("separation", o.separation);
    o.scales = scales_param(p, "scales", dyadic(4, std::max(4.0, ws.unit() / 8)));
    o.centres = ws.window(p);
    const Index x0 = p.contains("base") ? ws.vertex(p.at("base")) : ws.base_point();
    return hmeas_estimate_check(ws.green_u(), x0, o, ws.solver());
}

EstimateReport doubling(const Workspace& ws, const Json& p, std::uint64_t, std::optional<double>) {
    DoublingOptions o;
    o.constant = p.value("constant", o.constant);
    o.scales = scales_param(p, "scales", dyadic(4, std::max(4.0, ws.unit() / 8)));
    o.centres = ws.window(p);
    const std::string which = p.value("measure", std::string("harmonic"));
    BoundaryMeasure mu;
    if (which == "harmonic")
        mu = harmonic_measure(ws.green_u(), p.contains("base") ? ws.vertex(p.at("base")) : ws.base_point());
    else if (which == "reference")
        mu = ws.reference().mu;
    else
        throw InvalidArgument("doubling-check: measure must be 'harmonic' or 'reference'");
    return doubling_check(ws.graph(), mu, o);
}

EstimateReport doob_naim(const Workspace& ws, const Json& p, std::uint64_t, std::optional<double> tol) {
    DoobNaimOptions o;
    o.tolerance = tol_param(p, tol, o.tolerance);
    if (p.contains("alternate_base")) o.alternate_base = ws.vertex(p.at("alternate_base"));
    return doob_naim_verify(ws.graph(), ws.base_point(), o, ws.solver());
}

ScaleOptions scale_options(const Workspace& ws, const Json& p, const VertexSet& centres) {
    ScaleOptions o;
    o.a2 = p.value("a2", o.a2);
    o.r0 = p.value("r0", o.r0);
    if (p.contains("r_max")) o.r_max = p.at("r_max").get<double>();
    o.centres = centres;
    (void)ws;
    return o;
}

EstimateReport jump(const Workspace& ws, const Json& p, std::uint64_t, std::optional<double>) {
    JumpOptions o;
    o.constant = p.value("constant", o.constant);
    o.centres = ws.window(p);
    const ScaleTable psi = scale_function(ws.green_u(), ws.base_point(), scale_options(ws, p, o.centres));
    EstimateReport r = jump_bound_check(ws.trace(), psi, o);
    expect_slope(r, p, "slope");
    return r;
}

EstimateReport killing(const Workspace& ws, const Json& p, std::uint64_t, std::optional<double>) {
    KillingOptions o;
    o.max_cv = p.value("max_cv", o.max_cv);
    o.escape_tolerance = p.value("escape_tolerance", o.escape_tolerance);
    o.centres = ws.window(p);
    const bool truncated = !ws.graph().absorbing().empty();
    const double escape = truncated ? ws.profile().escape_probability : 0.0;
    return killing_check(ws.trace(), ws.reference().mu, escape, o);
}

EstimateReport scale(const Workspace& ws, const Json& p, std::uint64_t, std::optional<double>) {
    const auto start = std::chrono::steady_clock::now();
    VertexSet centres = ws.window(p);
    std::vector<Index> probes;
    if (p.contains("exponents"))
        for (const Json& e : p.at("exponents")) {
            const Index v = ws.vertex(e.at("point"));
            probes.push_back(v);
            if (std::find(centres.begin(), centres.end(), v) == centres.end()) centres.push_back(v);
        }
    const ScaleTable psi = scale_function(ws.green_u(), ws.base_point(), scale_options(ws, p, centres));
    EstimateReport r = measure_scale_check(ws.graph(), psi, ws.reference().mu, p.value("constant", 10.0));
    if (p.contains("exponents")) {
        size_t k = 0;
        for (const Json& e : p.at("exponents")) {
            const Index v = probes[k];
            // Radii given directly (r_lo, r_hi) or as knot indices (k_lo, k_hi; negative counts from the end).
            auto radius = [&](const char* r_key, const char* k_key) {
                if (e.contains(r_key)) return e.at(r_key).get<double>();
                long i = e.at(k_key).get<long>();
                if (i < 0) i += static_cast<long>(psi.radii.size());
                if (i < 0 || i >= static_cast<long>(psi.radii.size())) throw InvalidArgument("scale: knot index out of range");
                return psi.radii[static_cast<size_t>(i)];
            };
            const double lo = radius("r_lo", "k_lo"), hi = radius("r_hi", "k_hi");
            const double expo = psi.local_exponent(v, lo, hi);
            const std::string key = "exponent_" + std::to_string(k);
            r.metrics[key] = expo;
            r.metrics[key + "_r_lo"] = lo;
            r.metrics[key + "_r_hi"] = hi;
            const bool ok = expo >= e.value("min", -INFINITY) && expo <= e.value("max", INFINITY);
            r.pass = r.pass && ok;
            ++k;
        }
        r.predicate += " and fitted exponents inside their ranges";
    }
    r.runtime_seconds = seconds_since(start);
    return r;
}

EstimateReport shk(const Workspace& ws, const Json& p, std::uint64_t, std::optional<double>) {
    ShkOptions o;
    o.constant = p.value("constant", o.constant);
    o.t_lo_radius = p.value("t_lo_radius", o.t_lo_radius);
    o.centres = ws.window(p);
    const ScaleTable psi = scale_function(ws.green_u(), ws.base_point(), scale_options(ws, p, o.centres));
    double window = 0.0;
    for (Index a : o.centres)
        for (Index b : o.centres) window = std::max(window, ws.graph().distance(a, b));
    const Index mid = o.centres[o.centres.size() / 2];
    const std::vector<double> times = p.contains("times")
                                          ? p.at("times").get<std::vector<double>>()
                                          : default_times(psi, mid, o.t_lo_radius, p.value("t_hi_radius", window / 4),
                                                          p.value("time_count", 8));
    const HeatKernelSeries series = trace_heat_kernel(ws.trace(), times, ws.solver());
    EstimateReport r = shk_check(ws.trace(), series, psi, o);
    expect_slope(r, p, "diagonal_slope", "expect_diagonal_slope", "slope_tolerance");
    return r;
}

EstimateReport exit_times(const Workspace& ws, const Json& p, std::uint64_t, std::optional<double> tol) {
    const auto start = std::chrono::steady_clock::now();
    if (!p.contains("points")) throw InvalidArgument("exit-time: 'points' is required");
    std::vector<Index> pts;
    for (const Json& e : p.at("points")) pts.push_back(ws.vertex(e.is_object() ? e.at("point") : e));
    ExitOptions o;
    o.centres = pts;
    o.tolerance = tol_param(p, tol, 1e-9);
    o.radii = scales_param(p, "radii", dyadic(2, std::max(2.0, ws.unit() / 4)));
    Json sp = p;
    sp.erase("window");
    const ScaleTable psi = scale_function(ws.green_u(), ws.base_point(), scale_options(ws, sp, pts));
    EstimateReport r = exit_time_check(ws.trace(), psi, o, ws.solver());
    size_t k = 0;
    for (const Json& e : p.at("points")) {
        if (e.is_object() && e.contains("radii")) {
            // Slope over this point's own radii.
            std::vector<double> rs = e.at("radii").get<std::vector<double>>(), ts;
            for (double rad : rs) ts.push_back(exit_time(ws.trace(), pts[k], rad, ws.solver()).value);
            r.metrics["slope_" + std::to_string(pts[k])] = loglog_slope(rs, ts);
        }
        if (e.is_object()) expect_slope(r, e, "slope_" + std::to_string(pts[k]));
        ++k;
    }
    r.runtime_seconds = seconds_since(start);
    return r;
}

WalkConfig walk_config(const Json& p, std::uint64_t seed) {
    WalkConfig c;
    c.seed = path_seed(seed, p.value("stream", 0ULL));
    c.n_paths = p.value("n_paths", 100000LL);
    c.max_steps = p.value("max_steps", c.max_steps);
    c.threads = p.value("threads", 0U);
    return c;
}

EstimateReport mc_hitting(const Workspace& ws, const Json& p, std::uint64_t seed, std::optional<double>) {
    const auto start = std::chrono::steady_clock::now();
    const Index x0 = p.contains("base") ? ws.vertex(p.at("base")) : ws.base_point();
    const HittingSample s = sample_hitting(ws.graph(), x0, walk_config(p, seed));
    const BoundaryMeasure exact = harmonic_measure(ws.green_u(), x0);
    EstimateReport r = compare_empirical(ws.graph(), s, exact.values, "mc-hitting", p.value("max_outside", 0.02));
    r.runtime_seconds = seconds_since(start);
    return r;
}

EstimateReport mc_watched(const Workspace& ws, const Json& p, std::uint64_t seed, std::optional<double> tol) {
    const auto start = std::chrono::steady_clock::now();
    const DomainGraph& g = ws.graph();
    const Index from = p.contains("start") ? ws.vertex(p.at("start")) : ws.window(p).front();
    if (!g.is_boundary(from)) throw InvalidArgument("mc-watched: start must be a boundary vertex");
    const Eigen::MatrixXd p_hat = watched_transition(g);
    const KernelMatrix s = schur_complement(g.laplacian(), g.boundary(), g.interior(), ws.solver());
    const double residual = watched_identity_residual(g, p_hat, s);
    const HittingSample sample = watched_chain(g, from, walk_config(p, seed));
    const Eigen::VectorXd exact = p_hat.row(g.boundary_position(from)).transpose();
    EstimateReport r = compare_empirical(g, sample, exact, "mc-watched", p.value("max_outside", 0.02));
    const double t = tol_param(p, tol, 1e-9);
    r.metrics["identity_residual"] = residual;
    r.predicate += " and |D(I - P_hat) - S| <= " + format_real(t);
    r.pass = r.pass && residual <= t;
    r.runtime_seconds = seconds_since(start);
    return r;
}

std::vector<Index> default_far_points(const Workspace& ws) {
    const DomainGraph& g = ws.graph();
    const Index x0 = ws.base_point();
    const Eigen::Vector2d anchor = ws.spec() ? ws.spec()->anchor() : g.coord(g.boundary().front());
    Eigen::Vector2d dir = g.coord(x0) - anchor;
    const double base = dir.norm();
    if (base == 0.0) return {};
    dir /= base;
    const double reach = ws.spec() && ws.spec()->truncation_radius ? 0.75 * *ws.spec()->truncation_radius : g.diameter() / 2;
    std::vector<Index> out;
    for (double d = 2 * base; d <= reach; d *= 2) {
        const Index v = g.nearest_vertex(anchor + d * dir);
        if (g.is_interior(v) && v != x0) out.push_back(v);
    }
    return out;
}

EstimateReport elliptic(const Workspace& ws, const Json& p, std::uint64_t, std::optional<double> tol) {
    const auto start = std::chrono::steady_clock::now();
    const DomainGraph& g = ws.graph();
    if (g.absorbing().empty()) throw InvalidArgument("elliptic-measure needs a truncated unbounded domain");
    std::vector<Index> far;
    if (p.contains("far_points"))
        for (const Json& v : p.at("far_points")) far.push_back(ws.vertex(v));
    else
        far = default_far_points(ws);
    VertexSet win;
    if (p.contains("window")) win = ws.window(p);
    const EllipticMeasure e = elliptic_measure(ws.green_u(), ws.profile(), far, win);
    EstimateReport r;
    r.check = "elliptic-measure";
    r.columns = {"far_point", "distance", "tv"};
    const double t = tol_param(p, tol, 1e-10);
    r.predicate = "profile residual <= " + format_real(t) + " and TV distance decreasing";
    for (size_t k = 0; k < far.size(); ++k)
        r.add_row({static_cast<double>(far[k]), g.distance(far[k], ws.base_point()), e.tv_distance[k]});
    r.summarize("tv");
    const double res = profile_residual(g, ws.profile()) / ws.profile().values.cwiseAbs().maxCoeff();
    r.metrics["profile_residual"] = res;
    r.metrics["escape_probability"] = ws.profile().escape_probability;
    r.metrics["nu_total"] = e.nu.total();
    r.pass = res <= t && e.tv_decreasing;
    r.runtime_seconds = seconds_since(start);
    return r;
}

const std::map<std::string, Runner>& registry() {
    static const std::map<std::string, Runner> table = {
        {"laplacian-identity", laplacian_identity},
        {"trace-green", trace_green},
        {"cdc-check", cdc},
        {"hmeas-check", hmeas},
        {"doubling-check", doubling},
        {"doob-naim-verify", doob_naim},
        {"jump-check", jump},
        {"killing-check", killing},
        {"scale", scale},
        {"shk-check", shk},
        {"exit-time", exit_times},
        {"mc-hitting", mc_hitting},
        {"mc-watched", mc_watched},
        {"elliptic-measure", elliptic},
    };
    return table;
}

bool is_tolerance_key(const std::string& key) {
    static const std::set<std::string> names = {"tolerance", "constant", "max_ratio", "max_cv", "max_outside",
                                                "escape_tolerance", "slope_tolerance"};
    return names.count(key) > 0;
}

}  // namespace

const std::vector<std::string>& check_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& [k, v] : registry()) out.push_back(k);
        return out;
    }();
    return names;
}

EstimateReport run_check(const Workspace& ws, const CheckSpec& check, std::uint64_t seed, std::optional<double> tol) {
    const auto it = registry().find(check.name);
    if (it == registry().end()) throw InvalidArgument("unknown check '" + check.name + "'");
    EstimateReport r = it->second(ws, check.params, seed, tol);
    r.check = check.id.empty() ? check.name : check.id;
    return r;
}

// ---------------------------------------------------------------------------
// Config and runner

ExperimentConfig ExperimentConfig::from_json(const Json& j, const std::filesystem::path& base_dir) {
    try {
        ExperimentConfig c;
        c.base_dir = base_dir;
        c.domain = j.at("domain");
        if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
        c.seed = j.value("seed", c.seed);
        c.parallel = j.value("parallel", false);
        if (j.contains("tol")) c.tol = j.at("tol").get<double>();
        for (const Json& e : j.at("checks")) {
            CheckSpec s;
            if (e.is_string()) {
                s.name = e.get<std::string>();
            } else {
                s.name = e.at("name").get<std::string>();
                s.id = e.value("id", std::string());
                s.params = e.value("params", Json::object());
            }
            if (s.id.empty()) s.id = s.name;
            c.checks.push_back(std::move(s));
        }
        return c;
    } catch (const Json::exception& e) {
        throw InvalidArgument(std::string("config: ") + e.what());
    }
}

void ExperimentConfig::validate() const {
    if (checks.empty()) throw InvalidArgument("config lists no checks");
    if (tol && !(*tol > 0.0)) throw InvalidArgument("tolerance must be positive");
    std::set<std::string> ids;
    for (const CheckSpec& c : checks) {
        if (!registry().count(c.name)) throw InvalidArgument("unknown check '" + c.name + "'");
        if (!ids.insert(c.id).second) throw InvalidArgument("duplicate check id '" + c.id + "'");
        if (!c.params.is_object()) throw InvalidArgument("params of '" + c.id + "' must be an object");
        for (const auto& [k, v] : c.params.items()) {
            if (!is_tolerance_key(k)) continue;
            if (!v.is_number() || !(v.get<double>() > 0.0))
                throw InvalidArgument("'" + c.id + "': " + k + " must be a positive number");
        }
    }
}

RunOutcome run_experiment(const ExperimentConfig& config, std::ostream* log) {
    RunOutcome out;
    try {
        config.validate();
        SolverConfig cfg = SolverConfig::from_environment();
        const Workspace ws(config.domain, cfg, config.base_dir);

        std::vector<EstimateReport> reports(config.checks.size());
        auto one = [&](size_t i) {
            reports[i] = run_check(ws, config.checks[i], config.seed, config.tol);
            write_file_atomic(config.output_dir / (config.checks[i].id + ".csv"), report_csv(reports[i]));
        };
        if (config.parallel) {
            std::vector<std::future<void>> jobs;
            for (size_t i = 0; i < config.checks.size(); ++i) jobs.push_back(std::async(std::launch::async, one, i));
            for (auto& job : jobs) job.get();
        } else {
            for (size_t i = 0; i < config.checks.size(); ++i) one(i);
        }

        Json summary;
        summary["schema"] = 1;
        bool all = true;
        for (size_t i = 0; i < reports.size(); ++i) {
            const EstimateReport& r = reports[i];
            summary[config.checks[i].id] = report_summary(r);
            all = all && r.pass;
            if (log) {
                *log << (r.pass ? "PASS " : "FAIL ") << config.checks[i].id << "  min=" << format_real(r.min_ratio)
                     << " max=" << format_real(r.max_ratio) << "  (" << r.runtime_seconds << " s)\n";
                for (const auto& [k, v] : r.metrics) *log << "    " << k << " = " << format_real(v) << '\n';
                if (!r.warnings.empty()) *log << "    " << r.warnings.size() << " warning(s), first: " << r.warnings.front() << '\n';
            }
        }
        write_file_atomic(config.output_dir / "summary.json", summary.dump(2) + "\n");
        out.reports = std::move(reports);
        out.exit_code = all ? 0 : 2;
    } catch (const std::exception& e) {
        out.error = e.what();
        out.exit_code = 1;
        if (log) *log << "error: " << e.what() << '\n';
    }
    return out;
}

int run(const ExperimentConfig& config) { return run_experiment(config).exit_code; }

}  // namespace tracelab
