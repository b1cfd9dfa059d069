#include <doctest.h>

#include "support.hpp"
#include "tracelab/measures.hpp"

using namespace tracelab;
using namespace tracelab::testing;

TEST_SUITE("measures") {

TEST_CASE("harmonic measure on paths") {
    const DomainGraph p3 = path3();
    const BoundaryMeasure w3 = harmonic_measure(interior_green(p3), 1);
    CHECK(w3.values(0) == doctest::Approx(0.5));
    CHECK(w3.values(1) == doctest::Approx(0.5));
    CHECK(w3.role == MeasureRole::harmonic);

    const DomainGraph p5 = path5();
    const GreenFunction g5 = interior_green(p5);
    const BoundaryMeasure w1 = harmonic_measure(g5, 1);
    CHECK(w1.values(0) == doctest::Approx(0.75));
    CHECK(w1.values(1) == doctest::Approx(0.25));
}

TEST_CASE("martin kernel on P5") {
    const DomainGraph p5 = path5();
    const GreenFunction g5 = interior_green(p5);
    CHECK(martin_kernel(g5, 2, 1, 0) == doctest::Approx(1.5));
    CHECK(martin_kernel(g5, 2, 3, 0) == doctest::Approx(0.5));
    CHECK(martin_kernel(g5, 2, 2, 4) == doctest::Approx(1.0));
}

TEST_CASE("hitting matrix rows are probability vectors on bounded graphs") {
    const DomainGraph g = random_graph(5);
    const GreenFunction gf = interior_green(g);
    const Eigen::MatrixXd h = hitting_matrix(gf);
    CHECK(h.rows() == static_cast<Index>(g.interior().size()));
    CHECK((h.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
    CHECK(h.minCoeff() >= 0.0);
    const BoundaryMeasure w = harmonic_measure(gf, g.interior()[3]);
    CHECK((h.row(3).transpose() - w.values).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("laplacian identity holds on every family") {
    for (Family f : {Family::half_plane, Family::quadrant, Family::slit_plane, Family::rectangle}) {
        CAPTURE(to_string(f));
        const auto s = lattice(f, 24, is_unbounded(f) ? std::optional<double>(12.0) : std::nullopt);
        const DomainGraph g = build_domain(s);
        CHECK(laplacian_identity_check(interior_green(g), base_vertex(g, s)) < 1e-10);
    }
}

TEST_CASE("profile on the half plane is linear in the height") {
    // Reflecting sides and an absorbing top row: h(x, y) = y / y0.
    auto s = lattice(Family::half_plane, 32, 32.0);
    s.base_point = Eigen::Vector2d(16, 4);
    const DomainGraph g = build_domain(s);
    const Index x0 = base_vertex(g, s);
    const GreenFunction gf = interior_green(g);
    const ProfileVector h = harmonic_profile(gf, x0, 32.0);
    for (Index v = 0; v < g.vertex_count(); ++v) CHECK(h.values[v] == doctest::Approx(g.coord(v).y() / 4.0));
    CHECK(h.escape_probability == doctest::Approx(4.0 / 32.0));
    CHECK(profile_residual(g, h) < 1e-10);

    // nu = -(L h) on the boundary is then uniform.
    const EllipticMeasure nu = elliptic_measure(gf, h, {});
    for (Index i = 0; i < nu.nu.values.size(); ++i) CHECK(nu.nu.values[i] == doctest::Approx(0.25));
}

TEST_CASE("elliptic measure is the limit of normalized harmonic measures") {
    auto s = lattice(Family::quadrant, 48, 48.0);
    const DomainGraph g = build_domain(s);
    const Index x0 = base_vertex(g, s);
    const GreenFunction gf = interior_green(g);
    const ProfileVector h = harmonic_profile(gf, x0, 48.0);
    const std::vector<Index> far = {g.nearest_vertex({8, 8}), g.nearest_vertex({16, 16}), g.nearest_vertex({24, 24})};
    const EllipticMeasure nu = elliptic_measure(gf, h, far);
    REQUIRE(nu.tv_distance.size() == 3);
    CHECK(nu.tv_decreasing);
    CHECK(nu.tv_distance.back() < nu.tv_distance.front());
}

TEST_CASE("ball mass of a uniform measure") {
    const DomainGraph g = build_domain(lattice(Family::half_plane, 32, 32.0));
    BoundaryMeasure mu;
    mu.values = Eigen::VectorXd::Ones(static_cast<Index>(g.boundary().size()));
    const Index xi = g.nearest_vertex({16, 0});
    CHECK(boundary_ball_mass(g, mu, xi, 3.5) == 7.0);
    CHECK(boundary_ball_mass(g, mu, xi, 3.0) == 5.0);  // open ball
    const BoundaryBallMass fast(g, mu, {xi});
    for (double r : {1.0, 2.5, 3.0, 7.0}) CHECK(fast(xi, r) == boundary_ball_mass(g, mu, xi, r));

    DoublingOptions o;
    o.scales = {4, 8};
    o.centres = {xi};
    const EstimateReport d = doubling_check(g, mu, o);
    CHECK(d.pass);
    CHECK(d.max_ratio <= 2.5);
}

TEST_CASE("harmonic measure estimate on the half plane") {
    auto s = lattice(Family::half_plane, 64, 64.0);
    s.base_point = Eigen::Vector2d(32, 40);
    const DomainGraph g = build_domain(s);
    const GreenFunction gf = interior_green(g);
    HmeasOptions o;
    o.scales = {4, 8};
    o.centres = {g.nearest_vertex({24, 0}), g.nearest_vertex({32, 0}), g.nearest_vertex({40, 0})};
    const EstimateReport r = hmeas_estimate_check(gf, base_vertex(g, s), o);
    CHECK(r.rows.size() == 6);
    CHECK(r.pass);
    CHECK(r.max_ratio / r.min_ratio < 4.0);
}

TEST_CASE("reference measure and harnack") {
    const DomainGraph g = build_domain(lattice(Family::rectangle, 32));
    const Index x0 = g.nearest_vertex({16, 16});
    const GreenFunction gf = interior_green(g);
    const ReferenceMeasure ref = reference_measure(gf, x0);
    CHECK(ref.mu.total() == doctest::Approx(1.0));
    CHECK((ref.mu.values.array() > 0).all());
    const Eigen::VectorXd row = gf.row(x0);
    const double ratio = harnack_ratio(g, row, g.nearest_vertex({8, 8}), 4.0);
    CHECK(ratio >= 1.0);
    CHECK(ratio < 10.0);
}

TEST_CASE("escape probability from a boundary ball") {
    const DomainGraph g = build_domain(lattice(Family::half_plane, 64, 64.0));
    const Index xi = g.nearest_vertex({32, 0});
    const double e = escape_from_boundary_ball(g, xi, 4.0, 16.0);
    CHECK(e > 0.0);
    CHECK(e < 1.0);
}

}  // TEST_SUITE
