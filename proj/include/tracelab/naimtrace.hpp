#pragma once

#include <optional>
#include <vector>

#include "tracelab/measures.hpp"
#include "tracelab/potential.hpp"
#include "tracelab/report.hpp"
#include "tracelab/solvers.hpp"
#include "tracelab/types.hpp"

namespace tracelab {

/// Theta_{x0}(x, y) = g_U(x, y) / (g_U(x0, x) g_U(x0, y)) and its boundary
/// extension. Boundary values come from the normal-derivative formula
///   Theta(xi, eta) = sum_{x,y in U} c_{xi x} g_U(x, y) c_{y eta} / (omega(xi) omega(eta)),
/// so omega(xi) omega(eta) Theta(xi, eta) is exact on the graph.
class NaimKernel {
public:
    NaimKernel(GreenFunction green_u, Index x0, const SolverConfig& cfg = SolverConfig::from_environment());

    Index base_point() const { return x0_; }
    const GreenFunction& green() const { return green_; }
    const BoundaryMeasure& omega() const { return omega_; }
    // F x F, diagonal left at zero.
    const KernelMatrix& boundary_values() const { return theta_; }

    // Any pair of non-base vertices in U and F; throws at x0 or on absorbing vertices.
    double operator()(Index x, Index y) const;

private:
    GreenFunction green_;
    Index x0_;
    BoundaryMeasure omega_;
    KernelMatrix theta_;
};

NaimKernel naim_kernel(const DomainGraph& g, Index x0, const SolverConfig& cfg = SolverConfig::from_environment());
NaimKernel naim_kernel(const DomainGraph&& g, Index x0, const SolverConfig& cfg = {}) = delete;

struct NaimBracket {
    double theta = 0.0;
    // g_U(xi_r, eta_r) / (g_U(x0, xi_r) g_U(x0, eta_r))
    double comparison = 0.0;
    double ratio = 0.0;
};

// Corkscrew comparison for Theta(xi, eta); needs r <= c0 min{d(x0,xi), d(x0,eta), d(xi,eta)}.
NaimBracket naim_corkscrew_estimate(const NaimKernel& theta, Index xi, Index eta, double r, double c0 = 0.125);

/// Boundary trace of the Dirichlet form: S is the Schur complement onto F,
/// jump conductances are -S off the diagonal and the killing density is S 1.
struct TraceForm {
    const DomainGraph* graph = nullptr;
    KernelMatrix schur;
    Eigen::MatrixXd jump_conductance;  // zero diagonal
    Eigen::VectorXd killing;
    BoundaryMeasure mu;
    Eigen::MatrixXd jump_kernel;  // c_hat(xi,eta) / (mu(xi) mu(eta))
};

TraceForm trace_form(const DomainGraph& g, const BoundaryMeasure& mu,
                     const SolverConfig& cfg = SolverConfig::from_environment());
TraceForm trace_form(const DomainGraph&& g, const BoundaryMeasure& mu, const SolverConfig& cfg = {}) = delete;

struct DoobNaimOptions {
    double tolerance = 1e-9;
    // Second base point for the invariance check; -1 picks one automatically.
    Index alternate_base = -1;
};

// c_hat(xi,eta) - c(xi,eta) = omega(xi) omega(eta) Theta(xi,eta) over every pair of F.
EstimateReport doob_naim_verify(const DomainGraph& g, Index x0, const DoobNaimOptions& options = {},
                                const SolverConfig& cfg = SolverConfig::from_environment());

/// Dyadic samples of Psi(xi, r) for a set of boundary vertices, regularized
/// by geometric interpolation between the knots r_k = r0 * a2^k.
struct ScaleTable {
    VertexSet centres;
    std::vector<double> radii;
    Eigen::MatrixXd raw;     // Psi tilde; one row per centre
    Eigen::MatrixXd values;  // regularized knot values
    double a2 = 2.0;
    bool bounded = true;

    Index row_of(Index xi) const;
    // Log-log interpolation, geometric extrapolation past the end knots.
    double operator()(Index xi, double r) const;
    // Psi^{-1}(xi, t) by bisection; `clipped` is set if t lies outside the sampled range.
    double inverse(Index xi, double t, bool* clipped = nullptr) const;
    // log(Psi(r_hi) / Psi(r_lo)) / log(r_hi / r_lo)
    double local_exponent(Index xi, double r_lo, double r_hi) const;
};

struct ScaleOptions {
    double a2 = 2.0;
    double r0 = 2.0;
    // Largest knot; default just below diam/4.
    std::optional<double> r_max;
    VertexSet centres;  // empty: every boundary vertex
};

// Psi tilde = g_U(x0, xi_r) for bounded domains and h_{x0}(xi_r) for truncated ones.
ScaleTable scale_function(const GreenFunction& green_u, Index x0, const ScaleOptions& options = {});

// mu(B(xi,R)) / (Psi(xi,R) m(B(xi,R)) / R^2) on the sampled knots.
EstimateReport measure_scale_check(const DomainGraph& g, const ScaleTable& psi, const BoundaryMeasure& mu,
                                   double constant = 10.0);

struct JumpOptions {
    VertexSet centres;  // empty: every boundary vertex
    double constant = 10.0;
};

// J_mu(xi,eta) mu(B(xi,d)) Psi(xi,d) over window pairs with d >= 2 mesh.
EstimateReport jump_bound_check(const TraceForm& tf, const ScaleTable& psi, const JumpOptions& options = {});

struct KillingOptions {
    VertexSet centres;  // empty: every boundary vertex
    double max_cv = 0.1;
    double escape_tolerance = 0.1;
};

// kappa(xi) / nu(xi) across the window; compares its mean with `escape_probability`.
EstimateReport killing_check(const TraceForm& tf, const BoundaryMeasure& nu, double escape_probability,
                             const KillingOptions& options = {});

}  // namespace tracelab
