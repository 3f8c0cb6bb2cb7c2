#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "potlab/discrete_domain.hpp"
#include "potlab/errors.hpp"
#include "potlab/plaplace_solver.hpp"

#include <cmath>
#include <numbers>

using namespace potlab;
constexpr double kPi = std::numbers::pi;

TEST_CASE("single-cell radial grid carries the midpoint volume") {
    auto m = ModelManifold::euclidean(2);
    auto d = DiscreteDomain::build_radial_grid(m, 2.0, 2.0, 1);
    CHECK(d.node_count() == 2);
    CHECK(d.face_count() == 1);
    CHECK(d.total_volume() == doctest::Approx(2.0 * kPi * 1.5 * 1.0).epsilon(1e-12));
    CHECK(d.tag(0) == BoundaryTag::inner);
    CHECK(d.tag(1) == BoundaryTag::outer);
}

TEST_CASE("total volume converges to the annulus volume") {
    auto m = ModelManifold::euclidean(2);
    auto d = DiscreteDomain::build_radial_grid(m, 2.0, 2.0, 4096);
    CHECK(d.total_volume() == doctest::Approx(kPi * 3.0).epsilon(1e-4));
    double prev = d.node_r(0);
    for (std::size_t i = 1; i < d.node_count(); ++i) {
        CHECK(d.node_r(i) > prev);
        prev = d.node_r(i);
    }
}

TEST_CASE("graded grids keep the endpoints and increase") {
    auto m = ModelManifold::euclidean(2);
    const double ratio = std::pow(1e6, 1.0 / 64);
    auto d = DiscreteDomain::build_radial_grid(m, 2.0, 1e6, 64, ratio);
    CHECK(d.node_r(0) == 1.0);
    CHECK(d.node_r(64) == 1e6);
    // log-uniform: interior nodes follow rbar * ratio^i
    CHECK(d.node_r(32) == doctest::Approx(std::pow(1e6, 0.5)).epsilon(1e-9));
}

TEST_CASE("surface grid prerequisites") {
    auto m2 = ModelManifold::euclidean(2);
    auto m3 = ModelManifold::euclidean(3);
    CHECK_THROWS_AS(DiscreteDomain::build_surface_grid(m3, 2.0, 8, 16), InputError);
    CHECK_THROWS_AS(DiscreteDomain::build_surface_grid(m2, 2.0, 8, 7), InputError);
    CHECK_THROWS_AS(DiscreteDomain::build_surface_grid(m2, 2.0, 8, 6), InputError);
    CHECK_THROWS_AS(DiscreteDomain::build_surface_grid(m2, 0.5, 8, 16), InputError);
}

TEST_CASE("axisymmetric fields reduce the surface grid to the radial grid") {
    auto m = ModelManifold::euclidean(2);
    const int mr = 48, mt = 16;
    auto d1 = DiscreteDomain::build_radial_grid(m, 2.0, 3.0, mr);
    auto d2 = DiscreteDomain::build_surface_grid(m, 3.0, mr, mt);

    for (double p : {1.5, 2.0, 3.0}) {
        ScalarField u1(d1), u2(d2);
        for (std::size_t i = 0; i < d1.node_count(); ++i)
            u1[i] = std::cos(d1.node_r(i));
        for (std::size_t i = 0; i < d2.node_count(); ++i)
            u2[i] = std::cos(d2.node_r(i));
        const double e1 = p_energy(d1, u1, p);
        const double e2 = p_energy(d2, u2, p);
        CHECK(e2 == doctest::Approx(e1).epsilon(1e-12));
    }

    ScalarField c(d2, 3.25);
    CHECK(p_energy(d2, c, 2.0) == 0.0);
}

TEST_CASE("2D log-radius field has the classical 2-energy") {
    auto m = ModelManifold::euclidean(2);
    auto d = DiscreteDomain::build_surface_grid(m, 2.0, 256, 256);
    ScalarField u(d);
    for (std::size_t i = 0; i < d.node_count(); ++i) u[i] = std::log(d.node_r(i));
    CHECK(p_energy(d, u, 2.0) == doctest::Approx(2.0 * kPi * std::log(2.0)).epsilon(0.01));
}

TEST_CASE("refinement convergence of the interpolated radial solution") {
    auto m = ModelManifold::euclidean(2);
    for (double p : {2.0, 3.0}) {
        double err[3];
        int k = 0;
        for (int M : {64, 128, 256}) {
            auto d = DiscreteDomain::build_radial_grid(m, p, 2.0, M);
            ScalarField u(d);
            for (std::size_t i = 0; i < d.node_count(); ++i)
                u[i] = m.radial_p_harmonic(p, d.node_r(i));
            const double exact = m.sphere_area() * m.radial_p_harmonic(p, 2.0);
            err[k++] = std::fabs(p_energy(d, u, p) - exact);
        }
        // midpoint-weighted faces give (at least) first-order decay; smooth
        // euclidean areas come out second order
        CHECK(err[1] / err[2] >= 1.7);
        CHECK(err[0] / err[1] >= 1.7);
        CHECK(err[1] / err[2] <= 4.6);
    }
}

TEST_CASE("sublevel regions") {
    auto m = ModelManifold::euclidean(2);
    auto d = DiscreteDomain::build_radial_grid(m, 2.0, 2.0, 8);
    ScalarField z(d, 0.0);
    CHECK(sublevel_region(z, 1.0, false).size() == d.node_count());

    ScalarField f(d);
    for (std::size_t i = 0; i < d.node_count(); ++i)
        f[i] = m.radial_p_harmonic(2.0, d.node_r(i));
    const double t = f[5];
    CHECK(sublevel_region(f, t, false).size() == 6);  // nodes 0..5 by monotonicity
    CHECK(sublevel_region(f, t, true).size() == 5);   // strict excludes the level set
}

TEST_CASE("exhaustion validation") {
    auto m = ModelManifold::euclidean(2);
    auto d = DiscreteDomain::build_radial_grid(m, 2.0, 8.0, 32);
    ScalarField r(d);
    for (std::size_t i = 0; i < d.node_count(); ++i) r[i] = d.node_r(i);
    auto e = Exhaustion::from_sublevels(r, {2.0, 4.0, 8.0});
    e.validate(d);
    CHECK(e.levels() == 3);
    CHECK(e.set(2).size() == d.node_count());
    CHECK(e.set(0).size() < e.set(1).size());
    CHECK(e.contains(0, 0));

    auto bad = Exhaustion::from_sublevels(r, {2.0, 4.0}); // never covers
    CHECK_THROWS_AS(bad.validate(d), InputError);
    CHECK_THROWS_AS(Exhaustion::from_sublevels(r, {4.0, 2.0}), InputError);

    auto ex = Exhaustion::from_sets(d, {{0, 1, 2}, e.set(2)});
    ex.validate(d);
    CHECK(ex.set(0).size() == 3);
}
