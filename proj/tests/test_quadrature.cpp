#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "potlab/errors.hpp"
#include "potlab/quadrature.hpp"

#include <cmath>

using namespace potlab;

TEST_CASE("closed forms at tight tolerance") {
    auto r = integrate([](double t) { return 1.0 / t; }, 1.0, 2.0);
    CHECK(r.value == doctest::Approx(std::log(2.0)).epsilon(1e-12));

    r = integrate([](double t) { return std::exp(-t); }, 0.0, 30.0);
    CHECK(r.value == doctest::Approx(1.0 - std::exp(-30.0)).epsilon(1e-12));

    // steep near the left endpoint
    r = integrate([](double t) { return 1.0 / std::sqrt(t); }, 1e-12, 1.0);
    CHECK(r.value == doctest::Approx(2.0 * (1.0 - 1e-6)).epsilon(1e-9));
}

TEST_CASE("empty interval integrates to zero") {
    auto r = integrate([](double t) { return t; }, 3.0, 3.0);
    CHECK(r.value == 0.0);
}

TEST_CASE("improper integrals via the infinity map") {
    auto r = integrate_to_infinity([](double t) { return 1.0 / (t * t); }, 1.0);
    CHECK(r.value == doctest::Approx(1.0).epsilon(1e-10));

    r = integrate_to_infinity([](double t) { return std::exp(-t); }, 0.0);
    CHECK(r.value == doctest::Approx(1.0).epsilon(1e-10));

    r = integrate_to_infinity([](double t) { return std::pow(t, -1.5); }, 4.0);
    CHECK(r.value == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("non-integrable singularity raises diverged-integrand") {
    CHECK_THROWS_AS(integrate([](double t) { return 1.0 / t; }, 0.0, 1.0),
                    ConstructionError);
    CHECK_THROWS_AS(integrate_to_infinity([](double t) { return 1.0 / t; }, 1.0),
                    ConstructionError);
}

TEST_CASE("bad bounds raise invalid-range") {
    CHECK_THROWS_AS(integrate([](double t) { return t; }, 2.0, 1.0), InputError);
}
