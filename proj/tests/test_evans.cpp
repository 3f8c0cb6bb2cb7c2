#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "potlab/errors.hpp"
#include "potlab/evans.hpp"

#include <cmath>
#include <numbers>

using namespace potlab;
constexpr double kPi = std::numbers::pi;

namespace {

DiscreteDomain surface(const ModelManifold& m, double ln_rmax, int mr, int mt) {
    const double rmax = std::exp(ln_rmax);
    return DiscreteDomain::build_surface_grid(m, rmax, mr, mt,
                                              std::pow(rmax, 1.0 / mr));
}

std::vector<std::uint32_t> half_arc(const DiscreteDomain& d) {
    std::vector<std::uint32_t> arc;
    for (auto i : d.inner_nodes())
        if (d.node_theta(i) < kPi) arc.push_back(i);
    return arc;
}

} // namespace

TEST_CASE("full-ring compactum reproduces the radial potential exactly") {
    auto m = ModelManifold::euclidean(2);
    auto d = surface(m, 3.4, 56, 16);
    SolverOptions opt;
    opt.tol = 1e-11;
    auto run = evans_iterate(d, d.inner_nodes(), 2.0, 3, opt);
    double sup = 0.0;
    for (std::size_t i = 0; i < d.node_count(); ++i)
        sup = std::max(sup, std::fabs(run.field[i] - run.comparator[i]));
    CHECK(sup < 1e-8);
    CHECK(run.ring_max == 0.0); // the whole ring is pinned to zero
}

TEST_CASE("half-arc compactum: monotone levels, sandwich, harmonicity") {
    auto m = ModelManifold::euclidean(2);
    auto d = surface(m, 4.2, 64, 24);
    auto arc = half_arc(d);
    SolverOptions opt;
    opt.tol = 1e-10;
    auto run = evans_iterate(d, arc, 2.0, 4, opt);

    REQUIRE(run.levels.size() == 4);
    CHECK(run.ring_max > 0.0);
    CHECK(run.ring_min >= -1e-10);
    for (const auto& lv : run.levels) {
        CHECK(lv.radial_gap >= -1e-9);   // e_n >= radial comparator
        CHECK(lv.sandwich_gap >= -1e-9); // e_n <= comparator + M_n
        CHECK(lv.mn_bound_pass);
        CHECK(lv.report.status == SolveStatus::converged);
    }
    // zero on K exactly, p-harmonic at free nodes in both directions
    for (auto k : arc) CHECK(run.field[k] == 0.0);
    std::vector<std::uint32_t> pinned(arc.begin(), arc.end());
    for (std::size_t i = 0; i < d.node_count(); ++i)
        if (run.profile[i] > (double)run.n_max) pinned.push_back((std::uint32_t)i);
    CHECK(check_supersolution(d, run.field, 2.0, 1e-8, pinned).pass);
    CHECK(check_subsolution(d, run.field, 2.0, 1e-8, pinned).pass);

    // boundary-continuity surrogate: e <= M (1 - h) on the first sublevel
    // band, h the (K, A_1) condenser potential
    std::vector<std::uint32_t> zeros;
    for (std::size_t i = 0; i < d.node_count(); ++i)
        if (run.profile[i] >= 1.0 && d.tag(i) != BoundaryTag::inner)
            zeros.push_back((std::uint32_t)i);
    auto h = condenser_capacity(d, arc, zeros, 2.0, opt);
    double m1 = 0.0; // max of e on the rim of A_1
    for (std::size_t i = 0; i < d.node_count(); ++i)
        if (run.profile[i] >= 1.0) m1 = std::max(m1, run.field[i]);
    for (std::size_t i = 0; i < d.node_count(); ++i)
        if (run.profile[i] < 1.0)
            CHECK(run.field[i] <= m1 * (1.0 - h.potential[i]) + 1e-8);
}

TEST_CASE("capacity asymptotics stay within the two-sided envelopes") {
    auto m = ModelManifold::euclidean(2);
    auto d = surface(m, 5.2, 72, 24);
    SolverOptions opt;
    opt.tol = 1e-10;

    // axisymmetric compactum: normalized capacity is the sphere constant
    auto ring_run = evans_iterate(d, d.inner_nodes(), 2.0, 5, opt);
    const double ts[] = {1.0, 2.0, 4.0};
    auto rows = capacity_asymptotics(d, ring_run, 2.0, ts, opt);
    // first-order level-set quantization: relative error ~ mesh/t
    for (const auto& row : rows)
        CHECK(row.normalized ==
              doctest::Approx(2.0 * kPi).epsilon(0.02 + 0.08 / row.t));

    // half-arc compactum: bounded normalized column, doubling ratio toward
    // 2^(1-p)
    auto run = evans_iterate(d, half_arc(d), 2.0, 5, opt);
    auto rows2 = capacity_asymptotics(d, run, 2.0, ts, opt);
    for (const auto& row : rows2) {
        CHECK(row.enveloped);
        CHECK(row.normalized > 0.0);
    }
    const double ratio = rows2[2].capacity / rows2[1].capacity;
    CHECK(ratio == doctest::Approx(0.5).epsilon(0.25)); // 2^(1-p) at p=2

    CHECK_THROWS_AS(capacity_asymptotics(d, run, 2.0, {{4.5}}, opt), InputError);
    CHECK_THROWS_AS(capacity_asymptotics(d, run, 2.0, {{1e-9}}, opt), InputError);
}

TEST_CASE("preconditions") {
    auto m2 = ModelManifold::euclidean(2);
    auto m3 = ModelManifold::euclidean(3);
    auto d = surface(m2, 2.0, 24, 16);

    CHECK_THROWS_AS(evans_iterate(d, {}, 2.0, 1), InputError);

    auto d3r = DiscreteDomain::build_radial_grid(m3, 2.0, 4.0, 32);
    CHECK_THROWS_AS(evans_iterate(d3r, {{0u}}, 2.0, 1), InputError);

    // nonparabolic pair
    bool hit = false;
    try {
        evans_iterate(d, d.inner_nodes(), 1.5, 1);
    } catch (const ConstructionError& e) {
        hit = true;
        CHECK(e.code() == "evans-undefined");
    }
    CHECK(hit);
}
