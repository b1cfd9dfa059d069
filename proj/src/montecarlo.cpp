#include "tracelab/montecarlo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <thread>

#include <Eigen/SparseLU>

namespace tracelab {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// 53-bit uniform on [0, 1); std::uniform_real_distribution is not portable bit-for-bit.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

Index step(const DomainGraph& g, Index x, std::mt19937_64& rng) {
    const auto nb = g.neighbors(x);
    double target = uniform01(rng) * g.degree(x);
    for (const Neighbor& n : nb) {
        target -= n.conductance;
        if (target < 0.0) return n.vertex;
    }
    return nb.back().vertex;
}

enum class Outcome { boundary, escaped, timed_out };

struct PathResult {
    Outcome outcome;
    Index vertex;
};

// Walks until the path lands on F (after at least one step), an absorbing vertex, or the step cap.
PathResult walk(const DomainGraph& g, Index start, long long max_steps, std::mt19937_64& rng) {
    Index x = start;
    for (long long n = 0; n < max_steps; ++n) {
        x = step(g, x, rng);
        if (g.is_boundary(x)) return {Outcome::boundary, x};
        if (g.is_absorbing(x)) return {Outcome::escaped, x};
    }
    return {Outcome::timed_out, x};
}

HittingSample run_paths(const DomainGraph& g, Index start, const WalkConfig& cfg) {
    cfg.validate();
    const size_t nf = g.boundary().size();
    unsigned workers = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<long long>(workers, cfg.n_paths));

    struct Tally {
        std::vector<long long> counts;
        long long escaped = 0, timed_out = 0;
    };
    std::vector<Tally> tallies(workers, Tally{std::vector<long long>(nf, 0)});
    auto work = [&](unsigned w) {
        Tally& t = tallies[w];
        const long long lo = cfg.n_paths * w / workers, hi = cfg.n_paths * (w + 1) / workers;
        for (long long p = lo; p < hi; ++p) {
            std::mt19937_64 rng(path_seed(cfg.seed, static_cast<std::uint64_t>(p)));
            const PathResult r = walk(g, start, cfg.max_steps, rng);
            switch (r.outcome) {
            case Outcome::boundary: ++t.counts[static_cast<size_t>(g.boundary_position(r.vertex))]; break;
            case Outcome::escaped: ++t.escaped; break;
            case Outcome::timed_out: ++t.timed_out; break;
            }
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
        for (auto& th : pool) th.join();
    }

    HittingSample out;
    out.n_paths = cfg.n_paths;
    out.counts.assign(nf, 0);
    for (const Tally& t : tallies) {
        for (size_t j = 0; j < nf; ++j) out.counts[j] += t.counts[j];
        out.escaped += t.escaped;
        out.timed_out += t.timed_out;
    }
    const double n = static_cast<double>(cfg.n_paths);
    out.empirical.role = MeasureRole::harmonic;
    out.empirical.base_point = start;
    out.empirical.values.resize(static_cast<Index>(nf));
    out.standard_error.resize(static_cast<Index>(nf));
    for (size_t j = 0; j < nf; ++j) {
        const double p = static_cast<double>(out.counts[j]) / n;
        out.empirical.values[static_cast<Index>(j)] = p;
        out.standard_error[static_cast<Index>(j)] = std::sqrt(p * (1 - p) / n);
    }
    return out;
}

}  // namespace

void WalkConfig::validate() const {
    if (n_paths < 1) throw InvalidArgument("WalkConfig: n_paths must be at least 1");
    if (max_steps < 1) throw InvalidArgument("WalkConfig: max_steps must be at least 1");
}

std::uint64_t path_seed(std::uint64_t seed, std::uint64_t path) { return splitmix64(splitmix64(seed) ^ path); }

HittingSample sample_hitting(const DomainGraph& g, Index x0, const WalkConfig& cfg) {
    if (!g.is_interior(x0)) throw InvalidArgument("sample_hitting: x0 must be interior");
    return run_paths(g, x0, cfg);
}

HittingSample watched_chain(const DomainGraph& g, Index start, const WalkConfig& cfg) {
    if (!g.is_boundary(start)) throw InvalidArgument("watched_chain: start must be a boundary vertex");
    return run_paths(g, start, cfg);
}

Eigen::MatrixXd watched_transition(const DomainGraph& g) {
    const VertexSet& f = g.boundary();
    const VertexSet& u = g.interior();
    const Eigen::VectorXd& deg = g.degrees();
    // Transition blocks P = D^{-1} C, built from the conductances directly.
    const SparseMatrix c = -SparseMatrix(g.laplacian().triangularView<Eigen::StrictlyUpper>()) -
                           SparseMatrix(g.laplacian().triangularView<Eigen::StrictlyLower>());
    auto block = [&](const VertexSet& rows, const VertexSet& cols) {
        SparseMatrix b = submatrix(c, rows, cols);
        Eigen::VectorXd inv(static_cast<Index>(rows.size()));
        for (size_t i = 0; i < rows.size(); ++i) inv[static_cast<Index>(i)] = 1.0 / deg[rows[i]];
        return SparseMatrix(inv.asDiagonal() * b);
    };
    const SparseMatrix pff = block(f, f), pfu = block(f, u), puf = block(u, f), puu = block(u, u);
    Eigen::MatrixXd p_hat = Eigen::MatrixXd(pff);
    if (!u.empty()) {
        SparseMatrix i_minus(static_cast<Index>(u.size()), static_cast<Index>(u.size()));
        i_minus.setIdentity();
        i_minus -= puu;
        i_minus.makeCompressed();
        Eigen::SparseLU<SparseMatrix> lu(i_minus);
        if (lu.info() != Eigen::Success) throw Error("watched_transition: I - P_UU is singular");
        const Eigen::MatrixXd x = lu.solve(Eigen::MatrixXd(puf));
        p_hat += pfu * x;
    }
    return p_hat;
}

double watched_identity_residual(const DomainGraph& g, const Eigen::MatrixXd& p_hat, const KernelMatrix& schur) {
    const VertexSet& f = g.boundary();
    Eigen::VectorXd d(static_cast<Index>(f.size()));
    for (size_t i = 0; i < f.size(); ++i) d[static_cast<Index>(i)] = g.degree(f[i]);
    const Eigen::MatrixXd lhs =
        d.asDiagonal() * (Eigen::MatrixXd::Identity(p_hat.rows(), p_hat.cols()) - p_hat);
    return (lhs - schur.values).cwiseAbs().maxCoeff() / schur.values.cwiseAbs().maxCoeff();
}

EstimateReport compare_empirical(const DomainGraph& g, const HittingSample& sample, const Eigen::VectorXd& exact,
                                 const std::string& check, double max_outside) {
    const auto start = std::chrono::steady_clock::now();
    EstimateReport report;
    report.check = check;
    report.columns = {"vertex", "empirical", "exact", "stderr", "z"};
    report.key_columns = 1;
    report.predicate = "share of |z| > 3 <= " + format_real(max_outside);
    const VertexSet& f = g.boundary();
    const double n = static_cast<double>(sample.n_paths);
    long long outside = 0;
    for (size_t j = 0; j < f.size(); ++j) {
        const Index k = static_cast<Index>(j);
        const double e = exact[k], p = sample.empirical.values[k];
        const double sigma = std::sqrt(std::max(e * (1 - e), 0.0) / n);
        double z = 0.0;
        if (sigma > 0.0)
            z = (p - e) / sigma;
        else if (p != e)
            z = std::numeric_limits<double>::infinity();
        if (std::abs(z) > 3.0) ++outside;
        report.add_row({static_cast<double>(f[j]), p, e, sigma, z});
    }
    report.summarize("z");
    const double share = f.empty() ? 0.0 : static_cast<double>(outside) / static_cast<double>(f.size());
    report.metrics["share_outside"] = share;
    report.metrics["escaped"] = static_cast<double>(sample.escaped);
    report.metrics["timed_out"] = static_cast<double>(sample.timed_out);
    if (sample.timed_out > 0)
        report.warnings.push_back(std::to_string(sample.timed_out) + " paths exceeded max_steps");
    report.pass = share <= max_outside;
    report.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

}  // namespace tracelab
