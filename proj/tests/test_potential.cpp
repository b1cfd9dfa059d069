#include <doctest.h>

#include "support.hpp"
#include "tracelab/potential.hpp"

using namespace tracelab;
using namespace tracelab::testing;

TEST_SUITE("potential") {

TEST_CASE("green function of small graphs") {
    const DomainGraph p3 = path3();
    const GreenFunction g3 = interior_green(p3);
    CHECK(g3(1, 1) == doctest::Approx(0.5));

    // P5 interior {1,2,3}: g(x,y) = min(x,y)(4-max(x,y))/4.
    const DomainGraph p5 = path5();
    const GreenFunction g5 = interior_green(p5);
    for (Index x = 1; x <= 3; ++x)
        for (Index y = 1; y <= 3; ++y)
            CHECK(g5(x, y) == doctest::Approx(std::min(x, y) * (4.0 - std::max(x, y)) / 4.0));

    const DomainGraph c4 = cycle4();
    const GreenFunction g4 = interior_green(c4);
    CHECK(g4(1, 1) == doctest::Approx(0.5));
    CHECK(g4(1, 3) == doctest::Approx(0.0));
}

TEST_CASE("green function is symmetric and inverts the killed laplacian") {
    const DomainGraph g = random_graph(11, false, true);
    const GreenFunction gf = interior_green(g);
    const KernelMatrix k = gf.kernel();
    CHECK((k.values - k.values.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    const Eigen::MatrixXd l = Eigen::MatrixXd(submatrix(g.laplacian(), g.interior(), g.interior()));
    const Eigen::MatrixXd id = l * k.values;
    CHECK((id - Eigen::MatrixXd::Identity(id.rows(), id.cols())).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((k.values.array() > 0).all());
}

TEST_CASE("green values outside the domain are zero") {
    const DomainGraph g = path5();
    const GreenFunction gf = green(g, {1, 2});
    CHECK(gf(1, 3) == 0.0);
    CHECK(gf(0, 1) == 0.0);
    CHECK(gf.row(1).size() == g.vertex_count());
}

TEST_CASE("dynkin hunt decomposition on random graphs") {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        CAPTURE(seed);
        const DomainGraph g = random_graph(seed, seed % 2 == 0, seed % 3 == 0);
        const VertexSet d2 = g.interior();
        const VertexSet d1(d2.begin(), d2.begin() + static_cast<long>(d2.size() - d2.size() / 3));
        CHECK(dynkin_hunt_check(g, d1, d2, d1.front(), d1.back()) < 1e-10);
        CHECK(dynkin_hunt_check(g, d1, d2, d1.back(), d1.front()) < 1e-10);
    }
}

TEST_CASE("no killing means no green function") {
    const DomainGraph g = path3();
    CHECK_THROWS_AS(green(g, {0, 1, 2}), RecurrenceError);
    // An absorbing vertex is enough.
    const DomainGraph q = make_graph(3, {{0, 1, 1}, {1, 2, 1}}, {1}, {0}, {2});
    CHECK_NOTHROW(green(q, {0, 1}));
    CHECK_THROWS_AS(green(q, {1, 2}), InvalidArgument);
}

TEST_CASE("capacity of a single vertex") {
    const DomainGraph g = path3();
    const EquilibriumData e = capacity(g, {1}, {1});
    CHECK(e.capacity == doctest::Approx(2.0));
    CHECK(e.inner[0] == doctest::Approx(2.0));
    CHECK(e.outer.sum() == doctest::Approx(2.0));
    CHECK_THROWS_AS(capacity(g, {0}, {1}), InvalidArgument);
}

TEST_CASE("capacity equals the inner charge and grows with the set") {
    const DomainGraph g = build_domain(lattice(Family::rectangle, 24));
    const Index c = g.nearest_vertex({12, 12});
    const EquilibriumData small = capacity(g, g.ball(c, 2.0), g.ball(c, 10.0));
    const EquilibriumData large = capacity(g, g.ball(c, 4.0), g.ball(c, 10.0));
    CHECK(small.capacity == doctest::Approx(small.inner.sum()).epsilon(1e-10));
    CHECK(small.capacity == doctest::Approx(small.outer.sum()).epsilon(1e-10));
    CHECK(large.capacity > small.capacity);
    CHECK((large.potential.array() >= -1e-12).all());
    CHECK((large.potential.array() <= 1 + 1e-12).all());
}

TEST_CASE("capacity density condition on the half plane") {
    const DomainGraph g = build_domain(lattice(Family::half_plane, 48, 48.0));
    CdcOptions o;
    o.scales = {2, 4};
    o.centres = {g.nearest_vertex({20, 0}), g.nearest_vertex({24, 0})};
    const EstimateReport r = cdc_check(g, o);
    CHECK(r.rows.size() == 4);
    CHECK(r.pass);
    CHECK(r.min_ratio >= 1.0 - 1e-12);
}

}  // TEST_SUITE
