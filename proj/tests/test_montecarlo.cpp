#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "tracelab/measures.hpp"
#include "tracelab/montecarlo.hpp"

using namespace tracelab;
using namespace tracelab::testing;

TEST_SUITE("montecarlo") {

TEST_CASE("path seeds are distinct and reproducible") {
    CHECK(path_seed(1, 0) == path_seed(1, 0));
    CHECK(path_seed(1, 0) != path_seed(1, 1));
    CHECK(path_seed(1, 0) != path_seed(2, 0));
}

TEST_CASE("hitting distribution of P3") {
    const DomainGraph g = path3();
    WalkConfig cfg;
    cfg.n_paths = 20000;
    cfg.seed = 7;
    const HittingSample s = sample_hitting(g, 1, cfg);
    CHECK(s.n_paths == 20000);
    CHECK(s.counts[0] + s.counts[1] == 20000);
    CHECK(s.empirical.values(0) == doctest::Approx(0.5).epsilon(0.03));
    CHECK(s.standard_error(0) == doctest::Approx(std::sqrt(0.25 / 20000)).epsilon(0.05));
}

TEST_CASE("hitting distribution of the star") {
    const DomainGraph g = star3();
    WalkConfig cfg;
    cfg.n_paths = 30000;
    const HittingSample s = sample_hitting(g, 0, cfg);
    const Eigen::VectorXd exact = Eigen::VectorXd::Constant(3, 1.0 / 3);
    const EstimateReport r = compare_empirical(g, s, exact, "mc-hitting");
    CHECK(r.pass);
    CHECK(r.rows.size() == 3);
}

TEST_CASE("results do not depend on the thread count") {
    const DomainGraph g = build_domain(lattice(Family::half_plane, 16, 16.0));
    WalkConfig one, four;
    one.n_paths = four.n_paths = 3000;
    one.threads = 1;
    four.threads = 4;
    const Index x0 = g.nearest_vertex({8, 4});
    const HittingSample a = sample_hitting(g, x0, one), b = sample_hitting(g, x0, four);
    CHECK(a.counts == b.counts);
    CHECK(a.escaped == b.escaped);
    CHECK(a.escaped > 0);
}

TEST_CASE("walks agree with the exact harmonic measure on a lattice") {
    const DomainGraph g = build_domain(lattice(Family::rectangle, 12));
    const Index x0 = g.nearest_vertex({6, 6});
    WalkConfig cfg;
    cfg.n_paths = 20000;
    const HittingSample s = sample_hitting(g, x0, cfg);
    const BoundaryMeasure w = harmonic_measure(interior_green(g), x0);
    const EstimateReport r = compare_empirical(g, s, w.values, "mc-hitting");
    CHECK(r.pass);
    CHECK(r.metrics.at("share_outside") <= 0.02);
}

TEST_CASE("step cap is honoured") {
    const DomainGraph g = build_domain(lattice(Family::rectangle, 32));
    WalkConfig cfg;
    cfg.n_paths = 200;
    cfg.max_steps = 3;
    const HittingSample s = sample_hitting(g, g.nearest_vertex({16, 16}), cfg);
    CHECK(s.timed_out == 200);
}

TEST_CASE("watched chain of P3 and the 4-cycle") {
    const DomainGraph p3 = path3();
    const Eigen::MatrixXd q3 = watched_transition(p3);
    CHECK(q3(0, 0) == doctest::Approx(0.5));
    CHECK(q3(0, 1) == doctest::Approx(0.5));

    const DomainGraph c4 = cycle4();
    const Eigen::MatrixXd q4 = watched_transition(c4);
    CHECK(q4(0, 1) == doctest::Approx(0.5));  // boundary order {0, 2}

    WalkConfig cfg;
    cfg.n_paths = 20000;
    const HittingSample s = watched_chain(p3, 0, cfg);
    CHECK(s.empirical.values(1) == doctest::Approx(0.5).epsilon(0.03));
}

TEST_CASE("watched chain reproduces the trace form") {
    for (std::uint64_t seed = 300; seed < 305; ++seed) {
        const DomainGraph g = random_graph(seed, seed % 2 == 1);
        const Eigen::MatrixXd q = watched_transition(g);
        const KernelMatrix s = schur_complement(g.laplacian(), g.boundary(), g.interior());
        CHECK(watched_identity_residual(g, q, s) < 1e-12);
        CHECK((q.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("bad walk settings are rejected") {
    WalkConfig cfg;
    cfg.n_paths = 0;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    cfg.n_paths = 10;
    cfg.max_steps = 0;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    CHECK_THROWS_AS(sample_hitting(path3(), 0, WalkConfig{}), InvalidArgument);
}

}  // TEST_SUITE
