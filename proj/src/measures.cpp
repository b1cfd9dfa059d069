#include "tracelab/measures.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace tracelab {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// omega_x(eta) for every eta given the Green row g_U(x, .).
Eigen::VectorXd boundary_flux(const DomainGraph& g, const Eigen::VectorXd& green_row) {
    const VertexSet& f = g.boundary();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Index>(f.size()));
    for (size_t j = 0; j < f.size(); ++j)
        for (const Neighbor& nb : g.neighbors(f[j]))
            if (g.is_interior(nb.vertex)) out[static_cast<Index>(j)] += nb.conductance * green_row[nb.vertex];
    return out;
}

Eigen::MatrixXd boundary_coupling(const DomainGraph& g, const VertexSet& domain, const VertexSet& cols) {
    return -Eigen::MatrixXd(submatrix(g.laplacian(), domain, cols));
}

}  // namespace

BoundaryMeasure harmonic_measure(const GreenFunction& green_u, Index x0) {
    const DomainGraph& g = green_u.graph();
    if (!g.is_interior(x0)) throw InvalidArgument("harmonic_measure: x0 must be interior");
    return {MeasureRole::harmonic, boundary_flux(g, green_u.row(x0)), x0};
}

Eigen::MatrixXd hitting_matrix(const GreenFunction& green_u) {
    const DomainGraph& g = green_u.graph();
    return green_u.solve(boundary_coupling(g, green_u.domain(), g.boundary()));
}

double laplacian_identity_check(const GreenFunction& green_u, Index x0) {
    const DomainGraph& g = green_u.graph();
    if (!g.is_interior(x0)) throw InvalidArgument("laplacian_identity_check: x0 must be interior");
    const VertexSet& f = g.boundary();
    const Index row = green_u.local(x0);
    // Hitting probabilities of each boundary vertex, solved column block by block.
    Eigen::VectorXd omega(static_cast<Index>(f.size()));
    constexpr size_t block = 64;
    for (size_t c0 = 0; c0 < f.size(); c0 += block) {
        const VertexSet cols(f.begin() + static_cast<long>(c0), f.begin() + static_cast<long>(std::min(f.size(), c0 + block)));
        const Eigen::MatrixXd h = green_u.solve(boundary_coupling(g, green_u.domain(), cols));
        omega.segment(static_cast<Index>(c0), static_cast<Index>(cols.size())) = h.row(row).transpose();
    }
    const Eigen::VectorXd flux = boundary_flux(g, green_u.row(x0));
    return (omega - flux).cwiseAbs().maxCoeff();
}

double boundary_ball_mass(const DomainGraph& g, const BoundaryMeasure& mu, Index xi, double r) {
    double mass = 0.0;
    for (Index v : g.ball(xi, r))
        if (const Index p = g.boundary_position(v); p >= 0) mass += mu.values[p];
    return mass;
}

BoundaryBallMass::BoundaryBallMass(const DomainGraph& g, const BoundaryMeasure& mu, const VertexSet& centres)
    : slot_(static_cast<size_t>(g.vertex_count()), -1) {
    const VertexSet& f = g.boundary();
    for (Index xi : centres) {
        if (!g.is_boundary(xi)) throw InvalidArgument("BoundaryBallMass: centres must be boundary vertices");
        if (slot_[static_cast<size_t>(xi)] >= 0) continue;
        slot_[static_cast<size_t>(xi)] = static_cast<Index>(dist_.size());
        std::vector<std::pair<double, double>> items;
        items.reserve(f.size());
        for (size_t j = 0; j < f.size(); ++j) items.emplace_back(g.distance(xi, f[j]), mu.values[static_cast<Index>(j)]);
        std::sort(items.begin(), items.end());
        std::vector<double> d, c;
        double run = 0.0;
        for (const auto& [dj, mj] : items) {
            run += mj;
            d.push_back(dj);
            c.push_back(run);
        }
        dist_.push_back(std::move(d));
        cumulative_.push_back(std::move(c));
    }
}

double BoundaryBallMass::operator()(Index xi, double r) const {
    const Index s = slot_[static_cast<size_t>(xi)];
    if (s < 0) throw InvalidArgument("BoundaryBallMass: unknown centre");
    const auto& d = dist_[static_cast<size_t>(s)];
    const auto k = std::lower_bound(d.begin(), d.end(), r) - d.begin();
    return k == 0 ? 0.0 : cumulative_[static_cast<size_t>(s)][static_cast<size_t>(k - 1)];
}

EstimateReport hmeas_estimate_check(const GreenFunction& green_u, Index x0, const HmeasOptions& options,
                                    const SolverConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    const DomainGraph& g = green_u.graph();
    EstimateReport report;
    report.check = "hmeas-check";
    report.columns = {"xi_index", "r", "omega_ball", "green_corkscrew", "capacity", "ratio"};
    report.key_columns = 2;
    report.predicate = "max/min <= " + format_real(options.constant * options.constant);
    const BoundaryMeasure omega = harmonic_measure(green_u, x0);
    const Eigen::VectorXd g0 = green_u.row(x0);
    const VertexSet& centres = options.centres.empty() ? g.boundary() : options.centres;
    for (Index xi : centres) {
        const double sep = g.distance(xi, x0);
        for (double r : options.scales) {
            if (r < 2 * g.mesh() || r * options.separation >= sep) {
                report.warnings.push_back("skipped xi=" + std::to_string(xi) + " r=" + format_real(r) +
                                          ": scale outside the admissible range");
                continue;
            }
            CorkscrewPoint ck;
            try {
                ck = corkscrew(g, xi, r);
            } catch (const Error& e) {
                report.warnings.push_back("skipped xi=" + std::to_string(xi) + " r=" + format_real(r) + ": " +
                                          e.what());
                continue;
            }
            const double mass = boundary_ball_mass(g, omega, xi, r);
            const double cap = ball_capacity(g, xi, r, 2 * r, cfg);
            const double gc = g0[ck.xi_r];
            report.add_row({static_cast<double>(xi), r, mass, gc, cap, mass / (gc * cap)});
        }
    }
    report.summarize("ratio");
    const double spread = report.max_ratio / report.min_ratio;
    report.metrics["spread"] = spread;
    report.pass = !report.rows.empty() && report.min_ratio > 0.0 &&
                  spread <= options.constant * options.constant;
    report.runtime_seconds = seconds_since(start);
    return report;
}

EstimateReport doubling_check(const DomainGraph& g, const BoundaryMeasure& mu, const DoublingOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    EstimateReport report;
    report.check = "doubling-check";
    report.columns = {"xi_index", "r", "mu_ball", "mu_half_ball", "ratio"};
    report.key_columns = 2;
    report.predicate = "max ratio <= " + format_real(options.constant);
    const VertexSet& centres = options.centres.empty() ? g.boundary() : options.centres;
    for (Index xi : centres) {
        for (double r : options.scales) {
            const double full = boundary_ball_mass(g, mu, xi, r);
            const double half = boundary_ball_mass(g, mu, xi, r / 2);
            if (!(half > 0.0)) {
                report.warnings.push_back("skipped xi=" + std::to_string(xi) + " r=" + format_real(r) +
                                          ": empty half ball");
                continue;
            }
            report.add_row({static_cast<double>(xi), r, full, half, full / half});
        }
    }
    report.summarize("ratio");
    report.pass = !report.rows.empty() && report.max_ratio <= options.constant;
    report.runtime_seconds = seconds_since(start);
    return report;
}

double martin_kernel(const GreenFunction& green_u, Index x0, Index x, Index eta) {
    const DomainGraph& g = green_u.graph();
    if (!g.is_interior(x) || !g.is_interior(x0)) throw InvalidArgument("martin_kernel: x and x0 must be interior");
    if (x == x0) return 1.0;
    if (g.is_boundary(eta)) {
        const Index p = g.boundary_position(eta);
        const double base = boundary_flux(g, green_u.row(x0))[p];
        if (!(base > 0.0)) throw Error("martin_kernel: omega_{x0}(eta) = 0 (boundary piece not reachable)");
        return boundary_flux(g, green_u.row(x))[p] / base;
    }
    if (!g.is_interior(eta)) throw InvalidArgument("martin_kernel: eta must be interior or boundary");
    return green_u(x, eta) / green_u(x0, eta);
}

ProfileVector harmonic_profile(const GreenFunction& green_u, Index x0, std::optional<double> truncation_radius) {
    const DomainGraph& g = green_u.graph();
    if (g.absorbing().empty()) throw InvalidArgument("harmonic_profile: needs a truncated (absorbing) domain");
    if (!g.is_interior(x0)) throw InvalidArgument("harmonic_profile: x0 must be interior");
    const VertexSet& u = green_u.domain();
    const Eigen::VectorXd rhs = boundary_coupling(g, u, g.absorbing()).rowwise().sum();
    const Eigen::VectorXd raw = green_u.solve(rhs);
    const double escape = raw[green_u.local(x0)];
    if (!(escape > 0.0)) throw Error("harmonic_profile: singular system (base point cannot escape)");
    ProfileVector h;
    h.values = Eigen::VectorXd::Zero(g.vertex_count());
    for (size_t i = 0; i < u.size(); ++i) h.values[u[i]] = raw[static_cast<Index>(i)] / escape;
    for (Index a : g.absorbing()) h.values[a] = 1.0 / escape;
    h.base_point = x0;
    h.escape_probability = escape;
    h.truncation_radius = truncation_radius;
    return h;
}

double profile_residual(const DomainGraph& g, const ProfileVector& h) {
    const Eigen::VectorXd lh = g.laplacian() * h.values;
    double worst = 0.0;
    for (Index x : g.interior()) worst = std::max(worst, std::abs(lh[x]));
    return worst;
}

EllipticMeasure elliptic_measure(const GreenFunction& green_u, const ProfileVector& h,
                                 const std::vector<Index>& far_points, const VertexSet& window) {
    const DomainGraph& g = green_u.graph();
    const VertexSet& f = g.boundary();
    EllipticMeasure out;
    const Eigen::VectorXd lh = g.laplacian() * h.values;
    out.nu.role = MeasureRole::elliptic;
    out.nu.base_point = h.base_point;
    out.nu.values.resize(static_cast<Index>(f.size()));
    for (size_t j = 0; j < f.size(); ++j) out.nu.values[static_cast<Index>(j)] = -lh[f[j]];

    VertexSet win = window;
    if (win.empty()) {
        std::vector<double> d;
        for (Index v : f) d.push_back(g.distance(v, h.base_point));
        std::vector<double> sorted = d;
        std::nth_element(sorted.begin(), sorted.begin() + static_cast<long>(sorted.size() / 2), sorted.end());
        const double median = sorted[sorted.size() / 2];
        for (size_t j = 0; j < f.size(); ++j)
            if (d[j] <= median) win.push_back(f[j]);
    }
    const Eigen::VectorXd g0 = green_u.row(h.base_point);
    for (Index xn : far_points) {
        const Eigen::VectorXd omega = harmonic_measure(green_u, xn).values / g0[xn];
        double tv = 0.0;
        for (Index v : win) {
            const Index p = g.boundary_position(v);
            tv += std::abs(omega[p] - out.nu.values[p]);
        }
        if (!out.tv_distance.empty() && tv >= out.tv_distance.back()) out.tv_decreasing = false;
        out.tv_distance.push_back(tv);
    }
    return out;
}

ReferenceMeasure reference_measure(const GreenFunction& green_u, Index x0, std::optional<double> truncation_radius) {
    const DomainGraph& g = green_u.graph();
    if (!g.absorbing().empty()) {
        const ProfileVector h = harmonic_profile(green_u, x0, truncation_radius);
        EllipticMeasure e = elliptic_measure(green_u, h, {});
        e.nu.role = MeasureRole::reference;
        return {e.nu, x0};
    }
    const Index xi_hat = g.boundary().front();
    const Index base = corkscrew(g, xi_hat, g.diameter() / 5).xi_r;
    BoundaryMeasure mu = harmonic_measure(green_u, base);
    mu.role = MeasureRole::reference;
    return {mu, base};
}

double harnack_ratio(const DomainGraph& g, const Eigen::VectorXd& positive, Index x, double r) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (Index v : g.ball(x, r / 4)) {
        if (!g.is_interior(v)) continue;
        lo = std::min(lo, positive[v]);
        hi = std::max(hi, positive[v]);
    }
    return hi / lo;
}

double escape_from_boundary_ball(const DomainGraph& g, Index xi, double r, double big_r, const SolverConfig& cfg) {
    const Index start = corkscrew(g, xi, r).xi_r;
    VertexSet d;
    for (Index v : g.ball(xi, big_r))
        if (g.is_interior(v)) d.push_back(v);
    const GreenFunction gd(g, d, cfg);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Index>(d.size()));
    for (size_t i = 0; i < d.size(); ++i)
        for (const Neighbor& nb : g.neighbors(d[i]))
            if (!gd.contains(nb.vertex) && !g.is_boundary(nb.vertex)) rhs[static_cast<Index>(i)] += nb.conductance;
    return gd.solve(rhs)[gd.local(start)];
}

}  // namespace tracelab
