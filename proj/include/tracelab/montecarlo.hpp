#pragma once

#include <cstdint>

#include "tracelab/graphdomain.hpp"
#include "tracelab/report.hpp"
#include "tracelab/solvers.hpp"
#include "tracelab/types.hpp"

namespace tracelab {

struct WalkConfig {
    std::uint64_t seed = 1;
    long long n_paths = 100000;
    long long max_steps = 10000000;
    // Worker threads; 0 uses the hardware concurrency. Results do not depend on it.
    unsigned threads = 0;

    void validate() const;
};

// Independent stream per path: splitmix64 of (seed, path) seeds the generator.
std::uint64_t path_seed(std::uint64_t seed, std::uint64_t path);

struct HittingSample {
    BoundaryMeasure empirical;  // hit frequencies over boundary()
    Eigen::VectorXd standard_error;  // binomial standard errors sqrt(p (1 - p) / n)
    std::vector<long long> counts;
    long long escaped = 0;    // paths that reached an absorbing vertex
    long long timed_out = 0;  // paths cut at max_steps
    long long n_paths = 0;
};

// First boundary hit of the discrete-time walk p(x,y) = c_xy / deg(x) started at x0.
HittingSample sample_hitting(const DomainGraph& g, Index x0, const WalkConfig& cfg);

// Exact one-step law of the chain watched on F:
// P_hat = P_FF + P_FU (I - P_UU)^{-1} P_UF, rows over boundary().
Eigen::MatrixXd watched_transition(const DomainGraph& g);

// max |D (I - P_hat) - S| / max |S| with D the diagonal of degrees on F.
double watched_identity_residual(const DomainGraph& g, const Eigen::MatrixXd& p_hat, const KernelMatrix& schur);

// Next boundary visit of the walk started at a boundary vertex.
HittingSample watched_chain(const DomainGraph& g, Index start, const WalkConfig& cfg);

// Rows (vertex, empirical, exact, stderr, z) with sigma from the exact law;
// pass iff the share of |z| > 3 is at most max_outside.
EstimateReport compare_empirical(const DomainGraph& g, const HittingSample& sample, const Eigen::VectorXd& exact,
                                 const std::string& check, double max_outside = 0.02);

}  // namespace tracelab
