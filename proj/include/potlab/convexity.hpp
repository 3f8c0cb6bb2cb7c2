#pragma once

#include <span>

namespace potlab {

/// Lower bound for the modulus of convexity of any L^p space, 1 < p < inf;
/// depends only on p, not on the underlying measure space. For p >= 2 this
/// is the Clarkson bound 1 - (1 - (eps/2)^p)^(1/p); for 1 < p < 2 the
/// quadratic bound (p-1) eps^2 / 8, capped at the p = 2 value. eps in [0,2].
double clarkson_modulus(double p, double eps);

/// sigma(x) = (1 - delta(x))^(-1) - 1 for x in [0,1): vanishes at 0, is
/// strictly positive on (0,1), nondecreasing.
double sigma_function(double p, double x);

enum class LemmaStarOutcome { holds, violated, hypothesis_not_met };

struct LemmaStarReport {
    LemmaStarOutcome outcome = LemmaStarOutcome::holds;
    double norm_v = 0, norm_w = 0;
    double norm_v_half_w = 0; // ||v + w/2||
    double norm_v_plus_w = 0; // ||v + w||
    double rhs = 0;           // ||v|| (1 + sigma(||w||/(||v||+||w||)))
};

/// Checks the uniform-convexity growth inequality in a weighted l^p norm
/// (weights > 0, all spans the same length): whenever ||v + w/2|| >= ||v||,
///   ||v + w|| >= ||v|| (1 + sigma(||w||/(||v|| + ||w||))) - slack.
/// Reports hypothesis_not_met without asserting when the premise fails.
LemmaStarReport lemma_star_check(std::span<const double> v, std::span<const double> w,
                                 double p, std::span<const double> weights,
                                 double slack = 1e-12);

/// Same inequality on precomputed norms (used by the energy-chain audit,
/// where the norms come from gradient fields).
LemmaStarReport lemma_star_check_norms(double norm_v, double norm_w,
                                       double norm_v_half_w, double norm_v_plus_w,
                                       double p, double slack = 1e-12);

} // namespace potlab
