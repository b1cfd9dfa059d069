#pragma once

#include <memory>
#include <variant>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "tracelab/common.hpp"
#include "tracelab/types.hpp"

namespace tracelab {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct SolverConfig {
    enum class Method { automatic, dense, sparse_direct, conjugate_gradient };

    Method method = Method::automatic;
    double tol = 1e-12;
    int max_iterations = 20000;
    // automatic: dense Cholesky up to this size, sparse Cholesky above.
    Index dense_cutoff = 300;
    // Largest matrix handed to the dense eigensolver.
    Index spectral_cap = 4000;
    // Tolerance used by identity checks.
    double identity_tol = 1e-9;

    // Defaults, with TRACELAB_SPECTRAL_CAP applied when set.
    static SolverConfig from_environment();
};

// Factorizes a symmetric positive definite matrix once; solves many
// right-hand sides against it.
class SpdSolver {
public:
    explicit SpdSolver(const SparseMatrix& a, SolverConfig cfg = SolverConfig::from_environment());

    Index size() const { return a_.rows(); }
    const SparseMatrix& matrix() const { return a_; }
    const SolverConfig& config() const { return cfg_; }

    Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
    Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const;

private:
    Eigen::MatrixXd raw_solve(const Eigen::MatrixXd& b) const;

    SparseMatrix a_;
    SolverConfig cfg_;
    SolverConfig::Method method_;
    std::unique_ptr<Eigen::LLT<Eigen::MatrixXd>> dense_;
    std::unique_ptr<Eigen::SimplicialLLT<SparseMatrix>> sparse_;
    std::unique_ptr<Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper>> cg_;
};

Eigen::VectorXd solve_spd(const SparseMatrix& a, const Eigen::VectorXd& b,
                          const SolverConfig& cfg = SolverConfig::from_environment());

// Rows `rows` and columns `cols` of m.
SparseMatrix submatrix(const SparseMatrix& m, const VertexSet& rows, const VertexSet& cols);

// S = L_FF - L_FU L_UU^{-1} L_UF, with F = keep and U = eliminate.
KernelMatrix schur_complement(const SparseMatrix& laplacian, const VertexSet& keep, const VertexSet& eliminate,
                              const SolverConfig& cfg = SolverConfig::from_environment());

/// Eigen-pairs of M^{-1/2} S M^{-1/2} for M = diag(weight).
template <typename Scalar>
struct SpectralDecomposition {
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    Vector eigenvalues;   // ascending
    Matrix eigenvectors;  // orthonormal columns
    Vector weight;
};

template <typename Scalar>
SpectralDecomposition<Scalar> spectral_decomposition(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& s,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& weight, Index cap) {
    if (s.rows() != s.cols() || s.rows() != weight.size())
        throw InvalidArgument("spectral_decomposition: dimension mismatch");
    if (s.rows() > cap)
        throw InvalidArgument("dimension " + std::to_string(s.rows()) + " exceeds spectral cap " +
                              std::to_string(cap) + "; restrict to a boundary window");
    if ((weight.array() <= Scalar(0)).any()) throw InvalidArgument("spectral_decomposition: weight must be positive");
    const auto inv_sqrt = weight.array().rsqrt().matrix().eval();
    using Matrix = typename SpectralDecomposition<Scalar>::Matrix;
    Matrix a = inv_sqrt.asDiagonal() * s * inv_sqrt.asDiagonal();
    a = Scalar(0.5) * (a + a.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> es(a);
    if (es.info() != Eigen::Success) throw Error("spectral_decomposition: eigensolver failed");
    return {es.eigenvalues(), es.eigenvectors(), weight};
}

/// Density of exp(-t M^{-1} S) with respect to the weight:
/// p_t(x, y) = exp(-t M^{-1} S)_{xy} / weight(y).
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> heat_density(const SpectralDecomposition<Scalar>& sd,
                                                                   Scalar t) {
    const auto inv_sqrt = sd.weight.array().rsqrt().matrix().eval();
    const auto decay = (-t * sd.eigenvalues.array()).exp().matrix().eval();
    const auto scaled = (inv_sqrt.asDiagonal() * sd.eigenvectors).eval();
    return scaled * decay.asDiagonal() * scaled.transpose();
}

KernelMatrix matrix_exponential_density(const KernelMatrix& s, const BoundaryMeasure& mu, double t,
                                        const SolverConfig& cfg = SolverConfig::from_environment());

}  // namespace tracelab
