#pragma once

#include <optional>
#include <vector>

#include "tracelab/graphdomain.hpp"
#include "tracelab/potential.hpp"
#include "tracelab/report.hpp"
#include "tracelab/types.hpp"

namespace tracelab {

// omega_{x0}(eta) = sum_{x in U} g_U(x0, x) c_{x eta}. `green_u` must be the
// Green function of the interior.
BoundaryMeasure harmonic_measure(const GreenFunction& green_u, Index x0);

// Hitting distribution from every starting vertex: column j is
// P_x(first boundary hit = boundary()[j]) as a function of x in U.
Eigen::MatrixXd hitting_matrix(const GreenFunction& green_u);

// max_eta |omega_{x0}(eta) - sum_x c_{eta x} g_U(x0, x)| with omega taken
// from the hitting matrix.
double laplacian_identity_check(const GreenFunction& green_u, Index x0);

// mu(B(xi, r) on the boundary).
double boundary_ball_mass(const DomainGraph& g, const BoundaryMeasure& mu, Index xi, double r);

// Same quantity for many radii around a fixed set of boundary centres:
// boundary distances are sorted once per centre.
class BoundaryBallMass {
public:
    BoundaryBallMass(const DomainGraph& g, const BoundaryMeasure& mu, const VertexSet& centres);
    double operator()(Index xi, double r) const;

private:
    std::vector<Index> slot_;
    std::vector<std::vector<double>> dist_, cumulative_;
};

struct WindowOptions {
    std::vector<double> scales;
    VertexSet centres;  // empty: every boundary vertex
};

struct HmeasOptions : WindowOptions {
    double separation = 4.0;  // scale must stay below d(xi, x0) / separation
    double constant = 10.0;   // pass iff max/min <= constant^2
};

// omega(B(xi,r)) / (g_U(x0, xi_r) Cap_{B(xi,2r)}(B(xi,r))).
EstimateReport hmeas_estimate_check(const GreenFunction& green_u, Index x0, const HmeasOptions& options,
                                    const SolverConfig& cfg = SolverConfig::from_environment());

struct DoublingOptions : WindowOptions {
    double constant = 16.0;
};

// mu(B(xi,r)) / mu(B(xi,r/2)); pass iff max <= constant.
EstimateReport doubling_check(const DomainGraph& g, const BoundaryMeasure& mu, const DoublingOptions& options);

// K_{x0}(x, eta) = omega_x(eta) / omega_{x0}(eta) for boundary eta, and
// g_U(x, eta) / g_U(x0, eta) for interior eta.
double martin_kernel(const GreenFunction& green_u, Index x0, Index x, Index eta);

struct ProfileVector {
    // h over every vertex: positive on U, 0 on the boundary, constant on the
    // absorbing layer; normalized so that h(x0) = 1.
    Eigen::VectorXd values;
    Index base_point = -1;
    // Escape probability P_{x0}(reach the absorbing layer before the boundary).
    double escape_probability = 0.0;
    std::optional<double> truncation_radius;
};

// L h = 0 on U, h = 0 on the boundary, h = 1 on the absorbing layer, then h(x0) = 1.
ProfileVector harmonic_profile(const GreenFunction& green_u, Index x0, std::optional<double> truncation_radius = {});

// max |L h| over U.
double profile_residual(const DomainGraph& g, const ProfileVector& h);

struct EllipticMeasure {
    BoundaryMeasure nu;
    // ||nu_n - nu||_TV over the window, one entry per far point.
    std::vector<double> tv_distance;
    bool tv_decreasing = true;
};

// nu(eta) = sum_x c_{eta x} h(x); nu_n = omega_{x_n} / g_U(x0, x_n).
EllipticMeasure elliptic_measure(const GreenFunction& green_u, const ProfileVector& h,
                                 const std::vector<Index>& far_points, const VertexSet& window = {});

// Reference measure: omega at the diam/5 corkscrew base point for bounded
// domains, nu for truncated unbounded ones.
struct ReferenceMeasure {
    BoundaryMeasure mu;
    Index base_point = -1;
};
ReferenceMeasure reference_measure(const GreenFunction& green_u, Index x0,
                                   std::optional<double> truncation_radius = {});

// max/min of a positive function over B(x, r/4), for Harnack comparisons.
double harnack_ratio(const DomainGraph& g, const Eigen::VectorXd& positive, Index x, double r);

// omega^{U cap B(xi,R)}_{xi_r}(U cap S(xi,R)): probability that the walk from
// the corkscrew point xi_r reaches distance R from xi before the boundary.
double escape_from_boundary_ball(const DomainGraph& g, Index xi, double r, double big_r,
                                 const SolverConfig& cfg = SolverConfig::from_environment());

}  // namespace tracelab
