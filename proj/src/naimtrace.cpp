#include "tracelab/naimtrace.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace tracelab {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<Index> positions_in(const VertexSet& list, Index n) {
    std::vector<Index> pos(static_cast<size_t>(n), -1);
    for (size_t i = 0; i < list.size(); ++i) pos[static_cast<size_t>(list[i])] = static_cast<Index>(i);
    return pos;
}

// K(xi, eta) = sum_{x,y in U} c_{xi x} g_U(x, y) c_{y eta}, built from Green
// values on the interior neighbours of F (not from the Schur complement).
Eigen::MatrixXd boundary_green_sandwich(const GreenFunction& green_u) {
    const DomainGraph& g = green_u.graph();
    const VertexSet& f = g.boundary();
    std::set<Index> near;
    for (Index xi : f)
        for (const Neighbor& nb : g.neighbors(xi))
            if (green_u.contains(nb.vertex)) near.insert(nb.vertex);
    const VertexSet nbr(near.begin(), near.end());
    const Index n = static_cast<Index>(nbr.size());
    const Index nu = static_cast<Index>(green_u.domain().size());

    Eigen::MatrixXd gnn(n, n);
    constexpr Index block = 64;
    for (Index c0 = 0; c0 < n; c0 += block) {
        const Index nc = std::min(block, n - c0);
        Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nu, nc);
        for (Index j = 0; j < nc; ++j) rhs(green_u.local(nbr[static_cast<size_t>(c0 + j)]), j) = 1.0;
        const Eigen::MatrixXd cols = green_u.solve(rhs);
        for (Index i = 0; i < n; ++i) gnn.block(i, c0, 1, nc) = cols.row(green_u.local(nbr[static_cast<size_t>(i)]));
    }
    gnn = 0.5 * (gnn + gnn.transpose()).eval();

    const std::vector<Index> pos = positions_in(nbr, g.vertex_count());
    Eigen::MatrixXd cfn = Eigen::MatrixXd::Zero(static_cast<Index>(f.size()), n);
    for (size_t j = 0; j < f.size(); ++j)
        for (const Neighbor& nb : g.neighbors(f[j]))
            if (const Index p = pos[static_cast<size_t>(nb.vertex)]; p >= 0) cfn(static_cast<Index>(j), p) = nb.conductance;
    return cfn * gnn * cfn.transpose();
}

Index pick_alternate_base(const DomainGraph& g, Index x0) {
    const VertexSet& u = g.interior();
    Index best = -1;
    double far = -1.0;
    for (Index v : u) {
        if (v == x0) continue;
        const double d = g.distance(v, x0);
        if (d > far) {
            far = d;
            best = v;
        }
    }
    return best;
}

}  // namespace

NaimKernel::NaimKernel(GreenFunction green_u, Index x0, const SolverConfig&)
    : green_(std::move(green_u)), x0_(x0) {
    const DomainGraph& g = green_.graph();
    if (!g.is_interior(x0) || !green_.contains(x0)) throw InvalidArgument("naim_kernel: x0 must be interior");
    omega_ = harmonic_measure(green_, x0);
    const VertexSet& f = g.boundary();
    theta_.role = KernelRole::naim;
    theta_.index = f;
    theta_.values = boundary_green_sandwich(green_);
    for (Index i = 0; i < theta_.size(); ++i) {
        for (Index j = 0; j < theta_.size(); ++j) {
            if (i == j) {
                theta_.values(i, j) = 0.0;
                continue;
            }
            const double w = omega_.values[i] * omega_.values[j];
            if (!(w > 0.0)) throw Error("naim_kernel: harmonic measure vanishes on a boundary vertex");
            theta_.values(i, j) /= w;
        }
    }
}

double NaimKernel::operator()(Index x, Index y) const {
    const DomainGraph& g = green_.graph();
    if (x == x0_ || y == x0_) throw InvalidArgument("Naim kernel is undefined at the base point");
    if (g.is_absorbing(x) || g.is_absorbing(y)) throw InvalidArgument("Naim kernel: absorbing vertex");
    if (g.is_boundary(x) && g.is_boundary(y)) {
        if (x == y) throw InvalidArgument("Naim kernel: boundary diagonal is not defined");
        return theta_.values(g.boundary_position(x), g.boundary_position(y));
    }
    if (g.is_boundary(x)) std::swap(x, y);
    const Eigen::VectorXd g0 = green_.row(x0_);
    if (g.is_boundary(y)) {
        const Index p = g.boundary_position(y);
        return harmonic_measure(green_, x).values[p] / (g0[x] * omega_.values[p]);
    }
    return green_(x, y) / (g0[x] * g0[y]);
}

NaimKernel naim_kernel(const DomainGraph& g, Index x0, const SolverConfig& cfg) {
    return NaimKernel(interior_green(g, cfg), x0, cfg);
}

NaimBracket naim_corkscrew_estimate(const NaimKernel& theta, Index xi, Index eta, double r, double c0) {
    const GreenFunction& gu = theta.green();
    const DomainGraph& g = gu.graph();
    if (!g.is_boundary(xi) || !g.is_boundary(eta) || xi == eta)
        throw InvalidArgument("naim_corkscrew_estimate: need two distinct boundary vertices");
    const Index x0 = theta.base_point();
    const double limit = c0 * std::min({g.distance(x0, xi), g.distance(x0, eta), g.distance(xi, eta)});
    if (r > limit) throw InvalidArgument("naim_corkscrew_estimate: r exceeds c0 times the separation");
    const Index a = corkscrew(g, xi, r).xi_r;
    const Index b = corkscrew(g, eta, r).xi_r;
    const Eigen::VectorXd g0 = gu.row(x0);
    NaimBracket out;
    out.theta = theta(xi, eta);
    out.comparison = gu(a, b) / (g0[a] * g0[b]);
    out.ratio = out.theta / out.comparison;
    return out;
}

TraceForm trace_form(const DomainGraph& g, const BoundaryMeasure& mu, const SolverConfig& cfg) {
    const VertexSet& f = g.boundary();
    if (mu.values.size() != static_cast<Index>(f.size())) throw InvalidArgument("trace_form: measure size mismatch");
    if ((mu.values.array() <= 0.0).any()) throw InvalidArgument("trace_form: reference measure must be positive");
    TraceForm tf;
    tf.graph = &g;
    tf.schur = schur_complement(g.laplacian(), f, g.interior(), cfg);
    tf.jump_conductance = -tf.schur.values;
    tf.jump_conductance.diagonal().setZero();
    tf.killing = tf.schur.values.rowwise().sum();
    tf.mu = mu;
    const Eigen::VectorXd inv = mu.values.cwiseInverse();
    tf.jump_kernel = inv.asDiagonal() * tf.jump_conductance * inv.asDiagonal();
    return tf;
}

EstimateReport doob_naim_verify(const DomainGraph& g, Index x0, const DoobNaimOptions& options,
                                const SolverConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    EstimateReport report;
    report.check = "doob-naim-verify";
    report.columns = {"xi", "eta", "c_hat", "direct", "omega_theta", "deviation"};
    report.key_columns = 2;
    report.predicate = "max deviation <= " + format_real(options.tolerance);

    const GreenFunction gu = interior_green(g, cfg);
    const NaimKernel theta(gu, x0, cfg);
    const KernelMatrix s = schur_complement(g.laplacian(), g.boundary(), g.interior(), cfg);
    const VertexSet& f = g.boundary();
    const Index nf = static_cast<Index>(f.size());
    const Eigen::VectorXd& w = theta.omega().values;

    double scale = 0.0;
    for (Index i = 0; i < nf; ++i)
        for (Index j = 0; j < nf; ++j)
            if (i != j) scale = std::max(scale, std::abs(s.values(i, j)));
    if (scale == 0.0) scale = 1.0;
    for (Index i = 0; i < nf; ++i) {
        for (Index j = i + 1; j < nf; ++j) {
            const double chat = -s.values(i, j);
            const double direct = g.conductance(f[static_cast<size_t>(i)], f[static_cast<size_t>(j)]);
            const double prod = w[i] * w[j] * theta.boundary_values().values(i, j);
            report.add_row({static_cast<double>(f[static_cast<size_t>(i)]), static_cast<double>(f[static_cast<size_t>(j)]),
                            chat, direct, prod, std::abs(chat - direct - prod) / scale});
        }
    }

    // Base-point invariance of omega(xi) omega(eta) Theta(xi, eta).
    double invariance = 0.0;
    const Index y = options.alternate_base >= 0 ? options.alternate_base : pick_alternate_base(g, x0);
    if (y >= 0 && nf > 1) {
        const NaimKernel other(gu, y, cfg);
        const Eigen::VectorXd& wy = other.omega().values;
        double top = 0.0;
        for (Index i = 0; i < nf; ++i)
            for (Index j = 0; j < nf; ++j) {
                if (i == j) continue;
                const double a = w[i] * w[j] * theta.boundary_values().values(i, j);
                const double b = wy[i] * wy[j] * other.boundary_values().values(i, j);
                top = std::max(top, std::abs(a));
                invariance = std::max(invariance, std::abs(a - b));
            }
        if (top > 0.0) invariance /= top;
        report.metrics["alternate_base"] = static_cast<double>(y);
    }
    report.metrics["base_invariance"] = invariance;

    report.summarize("deviation");
    if (report.rows.empty()) report.warnings.push_back("fewer than two boundary vertices: nothing to compare");
    report.metrics["max_deviation"] = report.max_ratio;
    report.pass = report.max_ratio <= options.tolerance && invariance <= options.tolerance;
    report.runtime_seconds = seconds_since(start);
    return report;
}

Index ScaleTable::row_of(Index xi) const {
    const auto it = std::find(centres.begin(), centres.end(), xi);
    if (it == centres.end()) throw InvalidArgument("ScaleTable: vertex " + std::to_string(xi) + " was not sampled");
    return static_cast<Index>(it - centres.begin());
}

double ScaleTable::operator()(Index xi, double r) const {
    if (!(r > 0.0)) throw InvalidArgument("ScaleTable: r must be positive");
    const Index row = row_of(xi);
    const Index k = static_cast<Index>(radii.size());
    // Segment containing r, the end segments extend outward.
    Index s = 0;
    while (s + 2 < k && r > radii[static_cast<size_t>(s + 1)]) ++s;
    const double l0 = std::log(radii[static_cast<size_t>(s)]), l1 = std::log(radii[static_cast<size_t>(s + 1)]);
    const double v0 = std::log(values(row, s)), v1 = std::log(values(row, s + 1));
    return std::exp(v0 + (v1 - v0) * (std::log(r) - l0) / (l1 - l0));
}

double ScaleTable::inverse(Index xi, double t, bool* clipped) const {
    if (!(t > 0.0)) throw InvalidArgument("ScaleTable: t must be positive");
    const Index row = row_of(xi);
    if (clipped) *clipped = t < values(row, 0) || t > values(row, values.cols() - 1);
    double lo = std::log(radii.front()) - 12.0, hi = std::log(radii.back()) + 12.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((*this)(xi, std::exp(mid)) < t)
            lo = mid;
        else
            hi = mid;
    }
    return std::exp(0.5 * (lo + hi));
}

double ScaleTable::local_exponent(Index xi, double r_lo, double r_hi) const {
    return std::log((*this)(xi, r_hi) / (*this)(xi, r_lo)) / std::log(r_hi / r_lo);
}

ScaleTable scale_function(const GreenFunction& green_u, Index x0, const ScaleOptions& options) {
    const DomainGraph& g = green_u.graph();
    if (!(options.a2 > 1.0)) throw InvalidArgument("scale_function: a2 must exceed 1");
    ScaleTable table;
    table.a2 = options.a2;
    table.bounded = g.absorbing().empty();
    table.centres = options.centres.empty() ? g.boundary() : options.centres;
    const double r_max = options.r_max.value_or(g.diameter() / 4 * (1 - 1e-9));
    const double r_first = std::max(options.r0, 2 * g.mesh());
    for (double r = r_first; r <= r_max * (1 + 1e-12) && r < g.diameter() / 4; r *= options.a2) table.radii.push_back(r);
    if (table.radii.size() < 2) throw InvalidArgument("scale_function: fewer than two admissible radii");

    Eigen::VectorXd field;
    if (table.bounded)
        field = green_u.row(x0);
    else
        field = harmonic_profile(green_u, x0).values;

    const Index nc = static_cast<Index>(table.centres.size()), nk = static_cast<Index>(table.radii.size());
    table.raw.resize(nc, nk);
    for (Index i = 0; i < nc; ++i)
        for (Index k = 0; k < nk; ++k)
            table.raw(i, k) = field[corkscrew(g, table.centres[static_cast<size_t>(i)], table.radii[static_cast<size_t>(k)]).xi_r];
    // Knot values are kept; between knots Psi is geometric (linear in log-log).
    table.values = table.raw;
    for (Index i = 0; i < nc; ++i)
        for (Index k = 1; k < nk; ++k)
            if (!(table.values(i, k) > table.values(i, k - 1)) || !(table.values(i, 0) > 0.0))
                throw Error("scale function is not increasing at vertex " +
                            std::to_string(table.centres[static_cast<size_t>(i)]) + " (r = " +
                            format_real(table.radii[static_cast<size_t>(k)]) + "); the mesh is too coarse");
    return table;
}

EstimateReport measure_scale_check(const DomainGraph& g, const ScaleTable& psi, const BoundaryMeasure& mu,
                                   double constant) {
    const auto start = std::chrono::steady_clock::now();
    EstimateReport report;
    report.check = "scale";
    report.columns = {"xi_index", "R", "mu_ball", "psi", "volume", "ratio"};
    report.key_columns = 2;
    report.predicate = "max/min <= " + format_real(constant * constant);
    const BoundaryBallMass mass(g, mu, psi.centres);
    for (size_t i = 0; i < psi.centres.size(); ++i) {
        const Index xi = psi.centres[i];
        for (size_t k = 0; k < psi.radii.size(); ++k) {
            const double r = psi.radii[k];
            double volume = 0.0;
            for (Index v : g.ball(xi, r)) volume += g.measure()[v];
            const double p = psi.values(static_cast<Index>(i), static_cast<Index>(k));
            const double m = mass(xi, r);
            report.add_row({static_cast<double>(xi), r, m, p, volume, m / (p * volume / (r * r))});
        }
    }
    report.summarize("ratio");
    double beta1 = std::numeric_limits<double>::infinity(), beta2 = 0.0;
    for (Index i = 0; i < psi.values.rows(); ++i)
        for (Index k = 1; k < psi.values.cols(); ++k) {
            const double e = std::log(psi.values(i, k) / psi.values(i, k - 1)) / std::log(psi.a2);
            beta1 = std::min(beta1, e);
            beta2 = std::max(beta2, e);
        }
    report.metrics["beta1"] = beta1;
    report.metrics["beta2"] = beta2;
    const double spread = report.max_ratio / report.min_ratio;
    report.metrics["spread"] = spread;
    report.pass = !report.rows.empty() && report.min_ratio > 0.0 && spread <= constant * constant && beta1 > 0.0;
    report.runtime_seconds = seconds_since(start);
    return report;
}

EstimateReport jump_bound_check(const TraceForm& tf, const ScaleTable& psi, const JumpOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    const DomainGraph& g = *tf.graph;
    EstimateReport report;
    report.check = "jump-check";
    report.columns = {"xi", "eta", "distance", "c_hat", "J_mu", "bound_ratio"};
    report.key_columns = 2;
    report.predicate = "max/min <= " + format_real(options.constant * options.constant);
    const VertexSet& centres = options.centres.empty() ? g.boundary() : options.centres;
    const BoundaryBallMass mass(g, tf.mu, centres);
    std::vector<double> dist, jump;
    for (Index xi : centres) {
        const Index i = g.boundary_position(xi);
        for (Index eta : centres) {
            if (eta == xi) continue;
            const double d = g.distance(xi, eta);
            if (d < 2 * g.mesh()) continue;
            const Index j = g.boundary_position(eta);
            const double jmu = tf.jump_kernel(i, j);
            const double ratio = jmu * mass(xi, d) * psi(xi, d);
            report.add_row({static_cast<double>(xi), static_cast<double>(eta), d, tf.jump_conductance(i, j), jmu, ratio});
            dist.push_back(d);
            jump.push_back(jmu);
        }
    }
    report.summarize("bound_ratio");
    const double spread = report.max_ratio / report.min_ratio;
    report.metrics["spread"] = spread;
    report.metrics["slope"] = loglog_slope(dist, jump);
    report.pass = !report.rows.empty() && report.min_ratio > 0.0 &&
                  spread <= options.constant * options.constant;
    report.runtime_seconds = seconds_since(start);
    return report;
}

EstimateReport killing_check(const TraceForm& tf, const BoundaryMeasure& nu, double escape_probability,
                             const KillingOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    const DomainGraph& g = *tf.graph;
    EstimateReport report;
    report.check = "killing-check";
    report.columns = {"xi", "kappa", "nu", "ratio"};
    report.key_columns = 1;
    report.predicate = "cv <= " + format_real(options.max_cv) + " and |implied - escape| / escape <= " +
                       format_real(options.escape_tolerance);
    const VertexSet& centres = options.centres.empty() ? g.boundary() : options.centres;
    double kmax = 0.0;
    for (Index xi : centres) kmax = std::max(kmax, std::abs(tf.killing[g.boundary_position(xi)]));
    report.metrics["max_killing"] = kmax;
    if (kmax <= 1e-10) {
        for (Index xi : centres)
            report.add_row({static_cast<double>(xi), tf.killing[g.boundary_position(xi)],
                            nu.values.size() ? nu.values[g.boundary_position(xi)] : 0.0, 0.0});
        report.summarize("ratio");
        report.warnings.push_back("pure-jump case, killing vacuously zero");
        report.pass = true;
        report.runtime_seconds = seconds_since(start);
        return report;
    }
    std::vector<double> ratios;
    for (Index xi : centres) {
        const Index p = g.boundary_position(xi);
        if (!(nu.values[p] > 0.0)) {
            report.warnings.push_back("skipped xi=" + std::to_string(xi) + ": nu vanishes");
            continue;
        }
        const double ratio = tf.killing[p] / nu.values[p];
        ratios.push_back(ratio);
        report.add_row({static_cast<double>(xi), tf.killing[p], nu.values[p], ratio});
    }
    report.summarize("ratio");
    if (ratios.empty()) {
        report.pass = false;
        report.runtime_seconds = seconds_since(start);
        return report;
    }
    const double mean = std::accumulate(ratios.begin(), ratios.end(), 0.0) / static_cast<double>(ratios.size());
    double var = 0.0;
    for (double r : ratios) var += (r - mean) * (r - mean);
    var /= static_cast<double>(ratios.size());
    const double cv = std::sqrt(var) / mean;
    const double err = std::abs(mean - escape_probability) / escape_probability;
    report.metrics["cv"] = cv;
    report.metrics["implied_escape"] = mean;
    report.metrics["escape_probability"] = escape_probability;
    report.metrics["escape_error"] = err;
    report.pass = cv <= options.max_cv && err <= options.escape_tolerance;
    report.runtime_seconds = seconds_since(start);
    return report;
}

}  // namespace tracelab
