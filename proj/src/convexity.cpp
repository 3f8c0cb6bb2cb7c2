#include "potlab/convexity.hpp"

#include "potlab/errors.hpp"
#include "potlab/kernels.hpp"

#include <cmath>
#include <vector>

namespace potlab {

double clarkson_modulus(double p, double eps) {
    if (!(p > 1.0)) throw domain_error("p must be > 1");
    if (!(eps >= 0.0 && eps <= 2.0)) throw domain_error("eps must lie in [0, 2]");
    if (eps == 0.0) return 0.0;
    const double half = 0.5 * eps;
    const double p2 = 1.0 - std::sqrt(1.0 - half * half); // p = 2 modulus
    if (p >= 2.0) {
        // expm1/log1p form keeps small eps exact
        return -std::expm1(std::log1p(-std::pow(half, p)) / p);
    }
    return std::min((p - 1.0) * eps * eps / 8.0, p2);
}

double sigma_function(double p, double x) {
    if (!(x >= 0.0 && x < 1.0)) throw domain_error("sigma needs x in [0, 1)");
    const double delta = clarkson_modulus(p, x);
    return 1.0 / (1.0 - delta) - 1.0;
}

namespace {

double weighted_pnorm(std::span<const double> x, std::span<const double> w, double p) {
    const double s = kernels::active().wabspow(w.data(), x.data(), x.size(), p);
    return std::pow(s, 1.0 / p);
}

} // namespace

LemmaStarReport lemma_star_check_norms(double norm_v, double norm_w,
                                       double norm_v_half_w, double norm_v_plus_w,
                                       double p, double slack) {
    LemmaStarReport rep;
    rep.norm_v = norm_v;
    rep.norm_w = norm_w;
    rep.norm_v_half_w = norm_v_half_w;
    rep.norm_v_plus_w = norm_v_plus_w;
    if (norm_v_half_w < norm_v) {
        rep.outcome = LemmaStarOutcome::hypothesis_not_met;
        return rep;
    }
    if (norm_v == 0.0) { // rhs degenerates to 0; inequality is trivial
        rep.rhs = 0.0;
        rep.outcome = LemmaStarOutcome::holds;
        return rep;
    }
    const double x = norm_w / (norm_v + norm_w);
    rep.rhs = norm_v * (1.0 + sigma_function(p, x));
    rep.outcome = norm_v_plus_w >= rep.rhs - slack ? LemmaStarOutcome::holds
                                                   : LemmaStarOutcome::violated;
    return rep;
}

LemmaStarReport lemma_star_check(std::span<const double> v, std::span<const double> w,
                                 double p, std::span<const double> weights,
                                 double slack) {
    if (v.size() != w.size() || v.size() != weights.size())
        throw invalid_range("v, w and weights must have equal length");
    if (!(p > 1.0)) throw domain_error("p must be > 1");
    std::vector<double> tmp(v.size());
    const double nv = weighted_pnorm(v, weights, p);
    const double nw = weighted_pnorm(w, weights, p);
    for (std::size_t i = 0; i < v.size(); ++i) tmp[i] = v[i] + 0.5 * w[i];
    const double nvhw = weighted_pnorm(tmp, weights, p);
    for (std::size_t i = 0; i < v.size(); ++i) tmp[i] = v[i] + w[i];
    const double nvw = weighted_pnorm(tmp, weights, p);
    return lemma_star_check_norms(nv, nw, nvhw, nvw, p, slack);
}

} // namespace potlab
