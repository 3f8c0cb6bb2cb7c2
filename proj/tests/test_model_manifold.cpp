#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "potlab/errors.hpp"
#include "potlab/model_manifold.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <vector>

using namespace potlab;
constexpr double kPi = std::numbers::pi;

namespace {

// Independent 1D oracle: the discrete p-capacity of a radial condenser is a
// series-resistance sum, cap = (sum_i rho_i)^(1-p) with
// rho_i = (omega * Abar_i * dr_i^(1-p))^(-1/(p-1)), the exact energy of the
// discrete minimizer. No quadrature involved.
double resistance_capacity(const ModelManifold& m, double p, double a, double b, int M) {
    double rho = 0.0;
    for (int i = 0; i < M; ++i) {
        const double r0 = a + (b - a) * i / M;
        const double r1 = a + (b - a) * (i + 1) / M;
        const double w = m.sphere_area() * m.area(0.5 * (r0 + r1)) *
                         std::pow(r1 - r0, 1.0 - p);
        rho += std::pow(w, -1.0 / (p - 1.0));
    }
    return std::pow(rho, 1.0 - p);
}

} // namespace

TEST_CASE("radial p-harmonic closed forms") {
    auto m2 = ModelManifold::euclidean(2);
    CHECK(m2.radial_p_harmonic(2.0, 2.0) == doctest::Approx(std::log(2.0)).epsilon(1e-10));
    CHECK(m2.radial_p_harmonic(2.0, 1.0) == 0.0);

    auto m3 = ModelManifold::euclidean(3);
    CHECK(m3.radial_p_harmonic(2.0, 2.0) == doctest::Approx(0.5).epsilon(1e-10));

    // strictly increasing in r
    double prev = -1.0;
    for (double r : {1.0, 1.25, 2.0, 3.0, 10.0}) {
        const double f = m2.radial_p_harmonic(3.0, r);
        CHECK(f > prev);
        prev = f;
    }
}

TEST_CASE("parabolicity dichotomy") {
    for (int n : {2, 3, 4}) {
        for (double p : {1.5, 2.0, 3.0, 4.5}) {
            auto rep = ModelManifold::euclidean(n).classify_parabolicity(p);
            const bool expect_parabolic = p >= n;
            CHECK(rep.verdict ==
                  (expect_parabolic ? Parabolicity::parabolic : Parabolicity::nonparabolic));
        }
        // p == n is the borderline parabolic case
        CHECK(ModelManifold::euclidean(n).classify_parabolicity((double)n).verdict ==
              Parabolicity::parabolic);
    }
    CHECK(ModelManifold::power(2, 1.0).classify_parabolicity(2.0).verdict ==
          Parabolicity::parabolic);
    CHECK(ModelManifold::power(2, 1.5).classify_parabolicity(2.0).verdict ==
          Parabolicity::nonparabolic);
    // alpha == p-1, beta decides
    CHECK(ModelManifold::logpower(2, 1.0, 1.0).classify_parabolicity(2.0).verdict ==
          Parabolicity::parabolic);
    CHECK(ModelManifold::logpower(2, 1.0, 2.0).classify_parabolicity(2.0).verdict ==
          Parabolicity::nonparabolic);
    CHECK(ModelManifold::hyperbolic(2).classify_parabolicity(4.0).verdict ==
          Parabolicity::nonparabolic);

    auto rep = ModelManifold::euclidean(2).classify_parabolicity(2.0);
    CHECK(rep.f_at_rmax > 10.0); // log growth evidence
    CHECK(std::isinf(rep.tail_estimate));
}

TEST_CASE("annulus capacity against the discrete resistance oracle") {
    auto m2 = ModelManifold::euclidean(2);
    const double cap = m2.annulus_capacity(2.0, 1.0, 2.0);
    CHECK(cap == doctest::Approx(2.0 * kPi / std::log(2.0)).epsilon(1e-10));

    // oracle extrapolated in grid size (first-order Richardson)
    const double c1 = resistance_capacity(m2, 2.0, 1.0, 2.0, 4096);
    const double c2 = resistance_capacity(m2, 2.0, 1.0, 2.0, 8192);
    CHECK(cap == doctest::Approx(2.0 * c2 - c1).epsilon(1e-6));

    for (double p : {1.5, 3.0}) {
        const double capp = m2.annulus_capacity(p, 1.0, 2.0);
        const double o1 = resistance_capacity(m2, p, 1.0, 2.0, 4096);
        const double o2 = resistance_capacity(m2, p, 1.0, 2.0, 8192);
        CHECK(capp == doctest::Approx(2.0 * o2 - o1).epsilon(1e-6));
    }

    CHECK_THROWS_AS(m2.annulus_capacity(2.0, 2.0, 2.0), InputError);
    CHECK_THROWS_AS(m2.annulus_capacity(2.0, 2.0, 1.0), InputError);

    // b -> a+ blows up monotonically
    double prev = 0.0;
    for (double b : {1.5, 1.25, 1.125, 1.0625}) {
        const double c = m2.annulus_capacity(2.0, 1.0, b);
        CHECK(c > prev);
        prev = c;
    }
}

TEST_CASE("capacity to infinity") {
    auto m3 = ModelManifold::euclidean(3);
    CHECK(m3.capacity_to_infinity(2.0, 1.0) == doctest::Approx(4.0 * kPi).epsilon(1e-9));
    auto m2 = ModelManifold::euclidean(2);
    CHECK(m2.capacity_to_infinity(2.0, 1.0) == 0.0);
}

TEST_CASE("consistency: cap * f^(p-1) = omega for random annuli") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> ua(1.0, 4.0), uw(0.1, 8.0), up(1.2, 4.0);
    for (int it = 0; it < 20; ++it) {
        auto m = it % 2 == 0 ? ModelManifold::euclidean(2 + it % 3)
                             : ModelManifold::power(2, 1.0 + 0.1 * it);
        const double a = ua(rng), b = a + uw(rng), p = up(rng);
        const double f = m.radial_p_harmonic_from(p, a, b);
        const double cap = m.annulus_capacity(p, a, b);
        CHECK(cap * std::pow(f, p - 1.0) ==
              doctest::Approx(m.sphere_area()).epsilon(1e-9));
    }
}

TEST_CASE("radial Evans identities") {
    const double levels[] = {0.0, 0.5, 1.0, 2.0, 5.0};
    auto m2 = ModelManifold::euclidean(2);
    auto res = m2.radial_evans(2.0, levels);
    for (const auto& c : res.levels) {
        if (c.t == 0.0) {
            CHECK(c.energy_integral == 0.0);
            continue;
        }
        CHECK(c.energy_integral ==
              doctest::Approx(c.energy_expected).epsilon(1e-8));
        CHECK(c.cap_value == doctest::Approx(c.cap_expected).epsilon(1e-8));
    }
    // t=1 closed forms: energy 2*pi*1, cap 2*pi
    CHECK(res.levels[2].energy_integral == doctest::Approx(2.0 * kPi).epsilon(1e-8));
    CHECK(res.levels[2].cap_value == doctest::Approx(2.0 * kPi).epsilon(1e-8));

    // profile nondecreasing
    for (std::size_t i = 1; i < res.profile.values.size(); ++i)
        CHECK(res.profile.values[i] >= res.profile.values[i - 1]);

    // other parabolic families, including the borderline log-power form
    auto mp = ModelManifold::power(2, 0.5);
    auto res2 = mp.radial_evans(1.75, levels);
    for (const auto& c : res2.levels) {
        if (c.t == 0.0) continue;
        CHECK(c.energy_integral == doctest::Approx(c.energy_expected).epsilon(1e-8));
        CHECK(c.cap_value == doctest::Approx(c.cap_expected).epsilon(1e-8));
    }
    auto ml = ModelManifold::logpower(2, 1.0, 1.0);
    const double lp_levels[] = {0.5, 1.0, 2.0, 4.0};
    auto res3 = ml.radial_evans(2.0, lp_levels);
    for (const auto& c : res3.levels) {
        CHECK(c.energy_integral == doctest::Approx(c.energy_expected).epsilon(1e-8));
        CHECK(c.cap_value == doctest::Approx(c.cap_expected).epsilon(1e-8));
    }

    CHECK_THROWS_AS(ModelManifold::euclidean(3).radial_evans(2.0, levels),
                    ConstructionError);
}

TEST_CASE("string parsing round trips") {
    auto m = ModelManifold::parse("euclidean:n=3");
    CHECK(m.dimension() == 3);
    CHECK(m.area(2.0) == doctest::Approx(4.0));
    CHECK(ModelManifold::parse("power:n=2,alpha=1.5").area(4.0) ==
          doctest::Approx(8.0));
    auto lp = ModelManifold::parse("logpower:n=2,alpha=1,beta=2");
    CHECK(lp.area(1.0) == doctest::Approx(std::pow(std::log(2.0), 2.0)));
    CHECK_THROWS_AS(ModelManifold::parse("sphere:n=2"), InputError);
    CHECK_THROWS_AS(ModelManifold::parse("euclidean:n"), InputError);
}

TEST_CASE("table form interpolates and refuses extrapolation") {
    // synthetic euclidean n=3 table
    const char* path = "mm_table_test.csv";
    {
        std::FILE* f = std::fopen(path, "w");
        std::fputs("r,A\n", f);
        for (double r = 0.5; r <= 64.0; r *= 1.1)
            std::fprintf(f, "%.17g,%.17g\n", r, r * r);
        std::fclose(f);
    }
    auto m = ModelManifold::parse("table:mm_table_test.csv,n=3");
    CHECK(m.area(3.0) == doctest::Approx(9.0).epsilon(1e-6));
    CHECK(m.radial_p_harmonic(2.0, 2.0) == doctest::Approx(0.5).epsilon(1e-5));
    CHECK_THROWS_AS(m.area(1000.0), InputError);
    CHECK(m.classify_parabolicity(2.0).verdict == Parabolicity::inconclusive);
    CHECK_THROWS_AS(m.capacity_to_infinity(2.0, 1.0), InputError);
    std::remove(path);

    // header row is required
    {
        std::FILE* f = std::fopen("mm_headerless.csv", "w");
        std::fprintf(f, "0.5,0.25\n1.0,1.0\n2.0,4.0\n4.0,16.0\n");
        std::fclose(f);
    }
    CHECK_THROWS_AS(ModelManifold::parse("table:mm_headerless.csv"), InputError);
    std::remove("mm_headerless.csv");
}
