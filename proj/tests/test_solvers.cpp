#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "tracelab/solvers.hpp"

using namespace tracelab;
using namespace tracelab::testing;

namespace {

Eigen::MatrixXd trace_matrix(const DomainGraph& g, SolverConfig cfg = {}) {
    return schur_complement(g.laplacian(), g.boundary(), g.interior(), cfg).values;
}

}  // namespace

TEST_SUITE("solvers") {

TEST_CASE("schur complement of the path P3") {
    Eigen::Matrix2d expected;
    expected << 0.5, -0.5, -0.5, 0.5;
    CHECK((trace_matrix(path3()) - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("schur complement of the 4-cycle") {
    Eigen::Matrix2d expected;
    expected << 1, -1, -1, 1;
    CHECK((trace_matrix(cycle4()) - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("schur complement of the star is I - J/3") {
    const Eigen::Matrix3d expected = Eigen::Matrix3d::Identity() - Eigen::Matrix3d::Constant(1.0 / 3);
    CHECK((trace_matrix(star3()) - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("solver back ends agree") {
    const DomainGraph g = random_graph(7, true, true);
    SolverConfig dense, sparse, cg;
    dense.method = SolverConfig::Method::dense;
    sparse.method = SolverConfig::Method::sparse_direct;
    cg.method = SolverConfig::Method::conjugate_gradient;
    cg.tol = 1e-14;
    const Eigen::MatrixXd a = trace_matrix(g, dense);
    CHECK((a - trace_matrix(g, sparse)).cwiseAbs().maxCoeff() < 1e-11);
    CHECK((a - trace_matrix(g, cg)).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((a - a.transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("singular systems are reported") {
    // Laplacian of a path without any killing is singular.
    const DomainGraph g = path3();
    SolverConfig dense;
    dense.method = SolverConfig::Method::dense;
    CHECK_THROWS_AS(SpdSolver(g.laplacian(), dense), Error);
    SolverConfig cg;
    cg.method = SolverConfig::Method::conjugate_gradient;
    cg.max_iterations = 1;
    cg.tol = 1e-15;
    const DomainGraph grid = build_domain(lattice(Family::rectangle, 16));
    const SparseMatrix a = submatrix(grid.laplacian(), grid.interior(), grid.interior());
    const SpdSolver s(a, cg);
    CHECK_THROWS_AS(s.solve(Eigen::VectorXd::Ones(a.rows()).eval()), SolverError);
}

TEST_CASE("heat density on P3 with the uniform half measure") {
    // M^{-1} S has eigenvalues 0 and 2; the off-diagonal density is 1 - exp(-2t).
    const DomainGraph g = path3();
    const KernelMatrix s = schur_complement(g.laplacian(), g.boundary(), g.interior());
    BoundaryMeasure mu;
    mu.values = Eigen::Vector2d(0.5, 0.5);
    const double t = std::log(2.0) / 2;
    const KernelMatrix p = matrix_exponential_density(s, mu, t);
    CHECK(p.values(0, 1) == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(p.values(0, 0) == doctest::Approx(1.5).epsilon(1e-13));
    const KernelMatrix early = matrix_exponential_density(s, mu, 1e-9);
    CHECK(early.values(0, 0) == doctest::Approx(2.0));
    CHECK(early.values(0, 1) == doctest::Approx(0.0).epsilon(1e-8));
    CHECK_THROWS_AS(matrix_exponential_density(s, mu, 0.0), InvalidArgument);
}

TEST_CASE("spectral cap and dimension checks") {
    const Eigen::MatrixXd s = Eigen::MatrixXd::Identity(5, 5);
    CHECK_THROWS_AS(spectral_decomposition<double>(s, Eigen::VectorXd::Ones(5), 4), InvalidArgument);
    CHECK_THROWS_AS(spectral_decomposition<double>(s, Eigen::VectorXd::Ones(4), 10), InvalidArgument);
    CHECK_THROWS_AS(spectral_decomposition<double>(s, -Eigen::VectorXd::Ones(5), 10), InvalidArgument);
}

TEST_CASE("spectral decomposition is templated on the scalar") {
    Eigen::MatrixXf s(2, 2);
    s << 1, -1, -1, 1;
    const auto sd = spectral_decomposition<float>(s, Eigen::VectorXf::Constant(2, 0.5f), 10);
    CHECK(sd.eigenvalues(0) == doctest::Approx(0.0f).epsilon(1e-5));
    CHECK(sd.eigenvalues(1) == doctest::Approx(4.0f).epsilon(1e-5));
    const Eigen::MatrixXf p = heat_density<float>(sd, 0.0f);
    CHECK(p(0, 0) == doctest::Approx(2.0f).epsilon(1e-5));
}

}  // TEST_SUITE
