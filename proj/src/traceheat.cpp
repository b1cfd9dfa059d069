#include "tracelab/traceheat.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace tracelab {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

HeatKernelSeries trace_heat_kernel(const TraceForm& tf, std::vector<double> times, const SolverConfig& cfg) {
    if (times.empty()) throw InvalidArgument("trace_heat_kernel: no times given");
    for (double t : times)
        if (!(t > 0.0)) throw InvalidArgument("trace_heat_kernel: times must be positive");
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    const auto sd = spectral_decomposition<double>(tf.schur.values, tf.mu.values, cfg.spectral_cap);

    HeatKernelSeries out;
    for (double t : times)
        out.slices.push_back({t, {KernelRole::heat_kernel, tf.schur.index, heat_density(sd, t)}});

    const Eigen::VectorXd& m = tf.mu.values;
    auto compose = [&](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) -> Eigen::MatrixXd {
        return a * m.asDiagonal() * b;
    };
    auto residual = [](const Eigen::MatrixXd& want, const Eigen::MatrixXd& got) {
        return (want - got).cwiseAbs().maxCoeff() / want.cwiseAbs().maxCoeff();
    };
    if (out.slices.size() == 1) {
        const double t = out.slices[0].t;
        const Eigen::MatrixXd half = heat_density(sd, t / 2);
        out.chapman_kolmogorov = residual(out.slices[0].density.values, compose(half, half));
    }
    for (size_t i = 0; i + 1 < out.slices.size(); ++i) {
        const Eigen::MatrixXd step = heat_density(sd, out.slices[i + 1].t - out.slices[i].t);
        out.chapman_kolmogorov = std::max(
            out.chapman_kolmogorov,
            residual(out.slices[i + 1].density.values, compose(out.slices[i].density.values, step)));
    }
    for (const auto& s : out.slices)
        out.mass_defect = std::max(out.mass_defect, ((s.density.values * m).array() - 1.0).abs().maxCoeff());
    return out;
}

std::vector<double> default_times(const ScaleTable& psi, Index xi, double lo, double hi, int count) {
    if (count < 2) throw InvalidArgument("default_times: need at least two times");
    const double a = std::log(psi(xi, lo)), b = std::log(psi(xi, hi));
    std::vector<double> t;
    for (int i = 0; i < count; ++i) t.push_back(std::exp(a + (b - a) * i / (count - 1)));
    return t;
}

EstimateReport shk_check(const TraceForm& tf, const HeatKernelSeries& series, const ScaleTable& psi,
                         const ShkOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    const DomainGraph& g = *tf.graph;
    EstimateReport report;
    report.check = "shk-check";
    report.columns = {"t", "xi", "eta", "p", "bound", "ratio"};
    report.key_columns = 3;
    report.predicate = "ratios within [1/" + format_real(options.constant) + ", " + format_real(options.constant) +
                       "] and Chapman-Kolmogorov residual <= 1e-8";
    const VertexSet& centres = options.centres.empty() ? g.boundary() : options.centres;
    if (centres.empty()) throw InvalidArgument("shk_check: empty window");
    double window = 0.0;
    for (Index a : centres)
        for (Index b : centres) window = std::max(window, g.distance(a, b));
    const BoundaryBallMass mass(g, tf.mu, centres);

    int clipped_count = 0;
    const Index mid = centres[centres.size() / 2];
    std::vector<double> diag_t, diag_p;
    for (const HeatKernelSlice& slice : series.slices) {
        const double t = slice.t;
        const Eigen::MatrixXd& p = slice.density.values;
        for (Index xi : centres) {
            if (t < psi(xi, options.t_lo_radius) || t > psi(xi, window / 4)) continue;
            bool clipped = false;
            const double rinv = psi.inverse(xi, t, &clipped);
            clipped_count += clipped;
            const double near = 1.0 / mass(xi, rinv);
            const Index i = g.boundary_position(xi);
            for (Index eta : centres) {
                const Index j = g.boundary_position(eta);
                double bound = near;
                if (eta != xi) {
                    const double d = g.distance(xi, eta);
                    bound = std::min(bound, t / (mass(xi, d) * psi(xi, d)));
                }
                report.add_row({t, static_cast<double>(xi), static_cast<double>(eta), p(i, j), bound, p(i, j) / bound});
            }
            if (xi == mid) {
                diag_t.push_back(t);
                diag_p.push_back(p(i, i));
            }
        }
    }
    if (clipped_count > 0)
        report.warnings.push_back(std::to_string(clipped_count) +
                                  " inverse scale evaluations clipped to the sampled range");
    report.summarize("ratio");
    report.metrics["diagonal_slope"] = loglog_slope(diag_t, diag_p);
    report.metrics["chapman_kolmogorov"] = series.chapman_kolmogorov;

    // Off-diagonal tail at one time: pairs with 2 Psi^{-1}(t) <= d <= window.
    if (!series.slices.empty()) {
        const HeatKernelSlice* slice = &series.slices.front();
        if (options.tail_time > 0.0)
            for (const auto& s : series.slices)
                if (std::abs(s.t - options.tail_time) < std::abs(slice->t - options.tail_time)) slice = &s;
        const double r_t = psi.inverse(mid, slice->t);
        std::vector<double> d, v;
        const Index i = g.boundary_position(mid);
        for (Index eta : g.boundary()) {
            const double dist = g.distance(mid, eta);
            if (eta == mid || dist < 2 * r_t || dist > window) continue;
            d.push_back(dist);
            v.push_back(slice->density.values(i, g.boundary_position(eta)));
        }
        report.metrics["tail_time"] = slice->t;
        report.metrics["tail_slope"] = loglog_slope(d, v);
    }
    report.pass = !report.rows.empty() && report.min_ratio >= 1.0 / options.constant &&
                  report.max_ratio <= options.constant && series.chapman_kolmogorov <= 1e-8;
    report.runtime_seconds = seconds_since(start);
    return report;
}

ExitTime exit_time(const TraceForm& tf, Index xi, double r, const SolverConfig& cfg) {
    const DomainGraph& g = *tf.graph;
    if (!g.is_boundary(xi)) throw InvalidArgument("exit_time: xi must be a boundary vertex");
    ExitTime out;
    for (Index v : g.ball(xi, r))
        if (g.is_boundary(v)) out.ball.push_back(v);
    if (out.ball.size() >= g.boundary().size())
        throw InvalidArgument("exit_time: the ball covers the whole boundary");
    const Index nb = static_cast<Index>(out.ball.size());
    std::vector<Index> pos(out.ball.size());
    for (size_t k = 0; k < out.ball.size(); ++k) pos[k] = g.boundary_position(out.ball[k]);
    Eigen::MatrixXd sbb(nb, nb);
    for (Index a = 0; a < nb; ++a)
        for (Index b = 0; b < nb; ++b) sbb(a, b) = tf.schur.values(pos[static_cast<size_t>(a)], pos[static_cast<size_t>(b)]);
    const Eigen::LLT<Eigen::MatrixXd> llt(sbb);
    if (llt.info() != Eigen::Success) throw Error("exit_time: S_BB is singular");
    const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(nb, nb));

    Eigen::VectorXd mu_b(nb);
    for (Index a = 0; a < nb; ++a) mu_b[a] = tf.mu.values[pos[static_cast<size_t>(a)]];
    const Index row = static_cast<Index>(std::find(out.ball.begin(), out.ball.end(), xi) - out.ball.begin());
    out.value = inv.row(row).dot(mu_b);

    // The same block read off the Green function of U together with B.
    VertexSet d = g.interior();
    d.insert(d.end(), out.ball.begin(), out.ball.end());
    const GreenFunction gd(g, d, cfg);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(static_cast<Index>(d.size()), nb);
    for (Index a = 0; a < nb; ++a) rhs(gd.local(out.ball[static_cast<size_t>(a)]), a) = 1.0;
    const Eigen::MatrixXd cols = gd.solve(rhs);
    Eigen::MatrixXd block(nb, nb);
    for (Index a = 0; a < nb; ++a) block.row(a) = cols.row(gd.local(out.ball[static_cast<size_t>(a)]));
    out.block_inverse_residual = (block - inv).cwiseAbs().maxCoeff() / inv.cwiseAbs().maxCoeff();
    return out;
}

EstimateReport exit_time_check(const TraceForm& tf, const ScaleTable& psi, const ExitOptions& options,
                               const SolverConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    EstimateReport report;
    report.check = "exit-time";
    report.columns = {"xi", "r", "exit_time", "psi", "ratio"};
    report.key_columns = 2;
    report.predicate = "block-inverse residual <= " + format_real(options.tolerance) + " and min ratio > 0";
    const VertexSet& centres = options.centres.empty() ? psi.centres : options.centres;
    double worst = 0.0;
    for (Index xi : centres) {
        std::vector<double> rs, ts;
        for (double r : options.radii) {
            const ExitTime e = exit_time(tf, xi, r, cfg);
            worst = std::max(worst, e.block_inverse_residual);
            const double p = psi(xi, r);
            report.add_row({static_cast<double>(xi), r, e.value, p, e.value / p});
            rs.push_back(r);
            ts.push_back(e.value);
        }
        report.metrics["slope_" + std::to_string(xi)] = loglog_slope(rs, ts);
    }
    report.summarize("ratio");
    report.metrics["max_block_residual"] = worst;
    report.metrics["lower_constant"] = report.min_ratio;
    report.pass = !report.rows.empty() && worst <= options.tolerance && report.min_ratio > 0.0;
    report.runtime_seconds = seconds_since(start);
    return report;
}

}  // namespace tracelab
