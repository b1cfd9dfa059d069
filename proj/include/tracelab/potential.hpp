#pragma once

#include <map>
#include <memory>
#include <mutex>

#include "tracelab/graphdomain.hpp"
#include "tracelab/report.hpp"
#include "tracelab/solvers.hpp"

namespace tracelab {

/// Green function of the generator killed outside D: g_D = (L_DD)^{-1}.
///
/// Rows are solved on demand and cached; the cache is shared by copies and
/// guarded by a mutex, so concurrent readers are fine.
class GreenFunction {
public:
    GreenFunction(const DomainGraph& g, VertexSet domain, SolverConfig cfg = SolverConfig::from_environment());
    // The graph is referenced, not copied.
    GreenFunction(const DomainGraph&& g, VertexSet domain, SolverConfig cfg = {}) = delete;

    const DomainGraph& graph() const { return *g_; }
    const VertexSet& domain() const { return domain_; }
    bool contains(Index v) const { return local_[static_cast<size_t>(v)] >= 0; }
    Index local(Index v) const { return local_[static_cast<size_t>(v)]; }
    const SpdSolver& solver() const { return *solver_; }

    double operator()(Index x, Index y) const;
    // g_D(x, .) over every vertex of the graph (zero off D).
    Eigen::VectorXd row(Index x) const;
    // Dense |D| x |D| matrix.
    KernelMatrix kernel() const;

    // Solves L_DD u = rhs with rhs indexed like domain().
    Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const { return solver_->solve(rhs); }
    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const { return solver_->solve(rhs); }

private:
    struct Cache {
        std::mutex mutex;
        std::map<Index, Eigen::VectorXd> rows;
    };

    const DomainGraph* g_;
    VertexSet domain_;
    std::vector<Index> local_;
    std::shared_ptr<const SpdSolver> solver_;
    std::shared_ptr<Cache> cache_;
};

GreenFunction green(const DomainGraph& g, const VertexSet& domain,
                    const SolverConfig& cfg = SolverConfig::from_environment());
GreenFunction green(const DomainGraph&& g, const VertexSet& domain, const SolverConfig& cfg = {}) = delete;

// Green function of the interior U (killed on the boundary and on absorbing vertices).
GreenFunction interior_green(const DomainGraph& g, const SolverConfig& cfg = SolverConfig::from_environment());
GreenFunction interior_green(const DomainGraph&& g, const SolverConfig& cfg = {}) = delete;

// |g_{D2}(x,y) - g_{D1}(x,y) - sum_z H^{D1}(x,z) g_{D2}(z,y)| for D1 inside D2.
double dynkin_hunt_check(const DomainGraph& g, const VertexSet& d1, const VertexSet& d2, Index x, Index y,
                         const SolverConfig& cfg = SolverConfig::from_environment());

struct EquilibriumData {
    double capacity = 0.0;
    Eigen::VectorXd potential;  // over every vertex
    VertexSet inner_support;    // vertices of A carrying lambda^1
    Eigen::VectorXd inner;      // lambda^1 = (L e) on A
    VertexSet outer_support;    // vertices just outside D carrying lambda^0
    Eigen::VectorXd outer;      // lambda^0 = -(L e) outside D
};

// Equilibrium potential and measures of A relative to D (Dirichlet outside D).
EquilibriumData capacity(const DomainGraph& g, const VertexSet& a, const VertexSet& d,
                         const SolverConfig& cfg = SolverConfig::from_environment());

// Capacity of B(xi,r) relative to B(xi,outer_r).
double ball_capacity(const DomainGraph& g, Index xi, double r, double outer_r,
                     const SolverConfig& cfg = SolverConfig::from_environment());

struct CdcOptions {
    double a0 = 4.0;
    std::vector<double> scales;
    double max_ratio = 4.0;
    VertexSet centres;  // empty: every boundary vertex
};

// Cap_{B(xi,A0 R)}(B(xi,R)) / Cap_{B(xi,A0 R)}(B(xi,R) \ U) over centres and scales.
EstimateReport cdc_check(const DomainGraph& g, const CdcOptions& options,
                         const SolverConfig& cfg = SolverConfig::from_environment());

}  // namespace tracelab
