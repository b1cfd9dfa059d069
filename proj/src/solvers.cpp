#include "tracelab/solvers.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

namespace tracelab {

std::string_view to_string(MeasureRole role) {
    switch (role) {
    case MeasureRole::harmonic: return "harmonic";
    case MeasureRole::elliptic: return "elliptic";
    case MeasureRole::reference: return "reference";
    case MeasureRole::killing: return "killing";
    }
    return "reference";
}

SolverConfig SolverConfig::from_environment() {
    SolverConfig cfg;
    if (const char* cap = std::getenv("TRACELAB_SPECTRAL_CAP")) {
        char* end = nullptr;
        const long value = std::strtol(cap, &end, 10);
        if (end != cap && value > 0) cfg.spectral_cap = value;
    }
    return cfg;
}

SpdSolver::SpdSolver(const SparseMatrix& a, SolverConfig cfg) : a_(a), cfg_(cfg), method_(cfg.method) {
    if (a_.rows() != a_.cols()) throw InvalidArgument("SpdSolver: matrix must be square");
    if (!(cfg_.tol > 0.0)) throw InvalidArgument("SpdSolver: tol must be positive");
    a_.makeCompressed();
    if (method_ == SolverConfig::Method::automatic)
        method_ = a_.rows() <= cfg_.dense_cutoff ? SolverConfig::Method::dense : SolverConfig::Method::sparse_direct;
    if (a_.rows() == 0) return;

    switch (method_) {
    case SolverConfig::Method::dense:
        dense_ = std::make_unique<Eigen::LLT<Eigen::MatrixXd>>(Eigen::MatrixXd(a_));
        if (dense_->info() != Eigen::Success) throw Error("SpdSolver: matrix is not positive definite");
        break;
    case SolverConfig::Method::sparse_direct:
        sparse_ = std::make_unique<Eigen::SimplicialLLT<SparseMatrix>>(a_);
        if (sparse_->info() != Eigen::Success) throw Error("SpdSolver: matrix is not positive definite");
        break;
    case SolverConfig::Method::conjugate_gradient:
        cg_ = std::make_unique<Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper>>();
        cg_->setTolerance(cfg_.tol);
        cg_->setMaxIterations(cfg_.max_iterations);
        cg_->compute(a_);
        break;
    case SolverConfig::Method::automatic:
        break;
    }
}

Eigen::MatrixXd SpdSolver::raw_solve(const Eigen::MatrixXd& b) const {
    if (dense_) return dense_->solve(b);
    if (sparse_) return sparse_->solve(b);
    Eigen::MatrixXd x(b.rows(), b.cols());
    for (Index j = 0; j < b.cols(); ++j) {
        x.col(j) = cg_->solve(b.col(j));
        if (cg_->info() != Eigen::Success)
            throw SolverError("conjugate gradient did not converge in " + std::to_string(cg_->iterations()) +
                                  " iterations",
                              cg_->error());
    }
    return x;
}

Eigen::MatrixXd SpdSolver::solve(const Eigen::MatrixXd& b) const {
    if (b.rows() != size()) throw InvalidArgument("SpdSolver: right-hand side has wrong length");
    if (size() == 0) return Eigen::MatrixXd(0, b.cols());
    Eigen::MatrixXd x = raw_solve(b);
    // One round of refinement for columns that miss the tolerance.
    const Eigen::MatrixXd r = b - a_ * x;
    for (Index j = 0; j < b.cols(); ++j) {
        const double bn = b.col(j).norm();
        if (bn == 0.0 || r.col(j).norm() <= cfg_.tol * bn) continue;
        x.col(j) += raw_solve(r.col(j));
        const double res = (b.col(j) - a_ * x.col(j)).norm() / bn;
        if (res > cfg_.tol) throw SolverError("SPD solve missed tolerance", res);
    }
    return x;
}

Eigen::VectorXd SpdSolver::solve(const Eigen::VectorXd& b) const {
    return solve(Eigen::MatrixXd(b)).col(0);
}

Eigen::VectorXd solve_spd(const SparseMatrix& a, const Eigen::VectorXd& b, const SolverConfig& cfg) {
    return SpdSolver(a, cfg).solve(b);
}

SparseMatrix submatrix(const SparseMatrix& m, const VertexSet& rows, const VertexSet& cols) {
    std::vector<Index> row_pos(static_cast<size_t>(m.rows()), -1);
    for (size_t i = 0; i < rows.size(); ++i) row_pos[static_cast<size_t>(rows[i])] = static_cast<Index>(i);
    std::vector<Eigen::Triplet<double>> t;
    for (size_t j = 0; j < cols.size(); ++j) {
        const Index c = cols[j];
        for (SparseMatrix::InnerIterator it(m, c); it; ++it) {
            const Index r = row_pos[static_cast<size_t>(it.row())];
            if (r >= 0) t.emplace_back(r, static_cast<Index>(j), it.value());
        }
    }
    SparseMatrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
    out.setFromTriplets(t.begin(), t.end());
    return out;
}

KernelMatrix schur_complement(const SparseMatrix& laplacian, const VertexSet& keep, const VertexSet& eliminate,
                              const SolverConfig& cfg) {
    const SparseMatrix lff = submatrix(laplacian, keep, keep);
    KernelMatrix s{KernelRole::schur_trace, keep, Eigen::MatrixXd(lff)};
    if (eliminate.empty()) return s;
    const SparseMatrix luu = submatrix(laplacian, eliminate, eliminate);
    const SparseMatrix luf = submatrix(laplacian, eliminate, keep);
    const SparseMatrix lfu = luf.transpose();
    const SpdSolver solver(luu, cfg);
    constexpr Index block = 64;
    for (Index c0 = 0; c0 < static_cast<Index>(keep.size()); c0 += block) {
        const Index nc = std::min<Index>(block, static_cast<Index>(keep.size()) - c0);
        const Eigen::MatrixXd rhs = Eigen::MatrixXd(luf.middleCols(c0, nc));
        const Eigen::MatrixXd x = solver.solve(rhs);
        s.values.middleCols(c0, nc) -= lfu * x;
    }
    s.values = 0.5 * (s.values + s.values.transpose()).eval();
    return s;
}

KernelMatrix matrix_exponential_density(const KernelMatrix& s, const BoundaryMeasure& mu, double t,
                                        const SolverConfig& cfg) {
    if (!(t > 0.0)) throw InvalidArgument("matrix_exponential_density: t must be positive");
    const auto sd = spectral_decomposition<double>(s.values, mu.values, cfg.spectral_cap);
    return {KernelRole::heat_kernel, s.index, heat_density(sd, t)};
}

}  // namespace tracelab
