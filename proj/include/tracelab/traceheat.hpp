#pragma once

#include <vector>

#include "tracelab/naimtrace.hpp"

namespace tracelab {

struct HeatKernelSlice {
    double t = 0.0;
    KernelMatrix density;  // p_t(xi, eta) with respect to mu, over the trace index
};

struct HeatKernelSeries {
    std::vector<HeatKernelSlice> slices;
    // max over consecutive times of |p_{t'} - p_t M p_{t'-t}| / max |p_{t'}|.
    double chapman_kolmogorov = 0.0;
    // max over slices of |sum_eta p_t(xi,eta) mu(eta) - 1| (meaningful when killing vanishes).
    double mass_defect = 0.0;
};

// Spectral heat kernel of the trace form, one slice per time (times must be positive).
HeatKernelSeries trace_heat_kernel(const TraceForm& tf, std::vector<double> times,
                                   const SolverConfig& cfg = SolverConfig::from_environment());

struct ShkOptions {
    VertexSet centres;    // window; empty: every boundary vertex
    double constant = 50.0;
    // Times outside [Psi(xi, t_lo_radius), Psi(xi, window / 4)] are skipped for xi.
    double t_lo_radius = 4.0;
    // Time used for the off-diagonal tail slope; 0 picks the earliest slice.
    double tail_time = 0.0;
};

// p_t(xi,eta) / min{1/mu(B(xi, Psi^{-1}(xi,t))), t / (mu(B(xi,d)) Psi(xi,d))}.
EstimateReport shk_check(const TraceForm& tf, const HeatKernelSeries& series, const ScaleTable& psi,
                         const ShkOptions& options = {});

// Times spread geometrically between Psi(xi, lo) and Psi(xi, hi).
std::vector<double> default_times(const ScaleTable& psi, Index xi, double lo, double hi, int count);

struct ExitTime {
    double value = 0.0;
    VertexSet ball;
    // max |(S_BB)^{-1} - ((L on U and B)^{-1})_BB| / max |(S_BB)^{-1}|
    double block_inverse_residual = 0.0;
};

// E_xi[exit time of B(xi,r) for the trace chain] = sum_eta (S_BB)^{-1}(xi,eta) mu(eta).
ExitTime exit_time(const TraceForm& tf, Index xi, double r,
                   const SolverConfig& cfg = SolverConfig::from_environment());

struct ExitOptions {
    VertexSet centres;
    std::vector<double> radii;
    double tolerance = 1e-9;
};

// Rows (xi, r, exit_time, psi, ratio); slope metrics per centre.
EstimateReport exit_time_check(const TraceForm& tf, const ScaleTable& psi, const ExitOptions& options,
                               const SolverConfig& cfg = SolverConfig::from_environment());

}  // namespace tracelab
