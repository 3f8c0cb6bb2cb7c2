#pragma once

#include <functional>

namespace potlab {

struct QuadResult {
    double value = 0.0;
    double abs_error = 0.0; // estimated
    int panels = 0;
};

struct QuadOptions {
    double rel_tol = 1e-10;
    double abs_tol = 0.0;
    int max_panels = 20000;
    // number of geometrically graded seed panels stacked against the left
    // endpoint (integrands here are steepest near the base radius)
    int left_grading = 8;
};

/// Adaptive Gauss-Kronrod (G7,K15) on [a, b].
/// Throws ConstructionError("diverged-integrand") when the integrand
/// produces non-finite values or the tolerance is unreachable within the
/// panel budget (non-integrable singularities show up this way).
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     const QuadOptions& opt = {});

/// Adaptive quadrature of f over [a, inf) via the map t = a + x/(1-x).
/// Only sensible for integrands with a finite improper integral; divergence
/// surfaces as a diverged-integrand error.
QuadResult integrate_to_infinity(const std::function<double(double)>& f, double a,
                                 const QuadOptions& opt = {});

} // namespace potlab
