#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "potlab/errors.hpp"
#include "potlab/khasminskii.hpp"

#include <cmath>
#include <numbers>

using namespace potlab;
constexpr double kPi = std::numbers::pi;

namespace {

DiscreteDomain log_grid(const ModelManifold& m, double ln_rmax, int per_unit) {
    const int cells = std::max(8, (int)(ln_rmax * per_unit));
    const double rmax = std::exp(ln_rmax);
    return DiscreteDomain::build_radial_grid(m, 2.0, rmax, cells,
                                             std::pow(rmax, 1.0 / cells));
}

Exhaustion log_levels(const DiscreteDomain& d, int n_levels) {
    ScalarField lnr(d);
    for (std::size_t i = 0; i < d.node_count(); ++i) lnr[i] = std::log(d.node_r(i));
    std::vector<double> taus;
    for (int k = 1; k <= n_levels; ++k) taus.push_back((double)k);
    taus.push_back(std::log(d.node_r(d.node_count() - 1)) + 1.0);
    return Exhaustion::from_sublevels(lnr, std::move(taus));
}

} // namespace

TEST_CASE("forward check accepts a genuine proper witness") {
    auto m = ModelManifold::euclidean(2);
    auto d = log_grid(m, 5.0, 24);
    ScalarField kappa(d);
    for (std::size_t i = 0; i < d.node_count(); ++i) kappa[i] = std::log(d.node_r(i));
    const std::vector<std::uint32_t> K{0};
    auto ex = log_levels(d, 4);

    auto rep = forward_khasminskii_check(d, K, kappa, 2.0, ex);
    CHECK(rep.all_inequalities_pass);
    CHECK(rep.conclusion == ForwardConclusion::parabolic_consistent);
    REQUIRE(rep.levels.size() == 5);
    for (std::size_t k = 0; k + 1 < rep.levels.size(); ++k) {
        // cap trend ~ 2 pi / n with m_n ~ n
        CHECK(rep.levels[k].capacity ==
              doctest::Approx(2.0 * kPi / (double)(k + 1)).epsilon(0.03));
        CHECK(rep.levels[k].frontier_min == doctest::Approx((double)(k + 1)).epsilon(0.05));
        CHECK(rep.levels[k + 1].capacity <= rep.levels[k].capacity);
    }

    // scale covariance: 3 kappa passes identically
    ScalarField k3 = kappa;
    for (auto& v : k3.values) v *= 3.0;
    auto rep3 = forward_khasminskii_check(d, K, k3, 2.0, ex);
    CHECK(rep3.all_inequalities_pass);
    CHECK(rep3.conclusion == ForwardConclusion::parabolic_consistent);
}

TEST_CASE("forward check stays inconclusive on a bounded witness") {
    auto m = ModelManifold::euclidean(3);
    auto d = DiscreteDomain::build_radial_grid(m, 2.0, 64.0, 512,
                                               std::pow(64.0, 1.0 / 512));
    // bounded discrete-harmonic witness ~ 1 - 1/r
    PinnedValues pv;
    pv.pin(0, 0.0);
    pv.pin((std::uint32_t)(d.node_count() - 1), 1.0 - 1.0 / 64.0);
    auto kappa = solve_dirichlet(d, pv, 2.0).field;

    ScalarField rf(d);
    for (std::size_t i = 0; i < d.node_count(); ++i) rf[i] = d.node_r(i);
    auto ex = Exhaustion::from_sublevels(rf, {4.0, 8.0, 16.0, 32.0, 65.0});
    auto rep = forward_khasminskii_check(d, {{0u}}, kappa, 2.0, ex);
    CHECK(rep.all_inequalities_pass); // the inequality itself still holds
    CHECK(rep.frontier_growth < 1.5); // but the witness stays bounded
    CHECK(rep.conclusion == ForwardConclusion::inconclusive);
}

TEST_CASE("forward check rejects invalid witnesses") {
    auto m = ModelManifold::euclidean(2);
    auto d = log_grid(m, 3.0, 16);
    auto ex = log_levels(d, 2);
    const std::vector<std::uint32_t> K{0};

    ScalarField neg(d, -1.0);
    CHECK_THROWS_AS(forward_khasminskii_check(d, K, neg, 2.0, ex), ConstructionError);

    ScalarField sub(d); // r^2 is subharmonic: fails the supersolution gate
    for (std::size_t i = 0; i < d.node_count(); ++i)
        sub[i] = d.node_r(i) * d.node_r(i) - 1.0;
    CHECK_THROWS_AS(forward_khasminskii_check(d, K, sub, 2.0, ex), ConstructionError);
}

TEST_CASE("p=2 summation construction") {
    auto m = ModelManifold::euclidean(2);
    // term k selects against D_k = {ln r <= k+1}: sup = (k+1)/n <= 2^-k
    // needs level n = 12 for the second term
    auto d = log_grid(m, 13.5, 16);
    auto ex = log_levels(d, 13);
    const std::vector<std::uint32_t> K{0};
    auto res = linear_sum_construction(d, K, ex, 1e-4);
    CHECK(res.terms.size() >= 2);
    CHECK(res.witness[0] == 0.0);
    CHECK(res.supersolution_pass);
    // outermost value counts the summed terms
    CHECK(res.witness[d.node_count() - 1] ==
          doctest::Approx((double)res.terms.size()).epsilon(1e-9));
    // grows like a rescaled log: ratio bounded on the outer half
    double lo = 1e300, hi = 0.0;
    for (std::size_t i = 0; i < d.node_count(); ++i) {
        if (d.node_r(i) < std::exp(1.5)) continue;
        const double ratio = res.witness[i] / std::log(d.node_r(i));
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
    }
    CHECK(lo > 0.05);
    CHECK(hi < 20.0);

    // sum of two p=2 supersolutions stays a supersolution
    ScalarField twice = res.witness;
    for (std::size_t i = 0; i < d.node_count(); ++i) twice[i] += res.witness[i];
    CHECK(check_supersolution(d, twice, 2.0, 1e-7, K).pass);

    // nonparabolic family: the first term already fails
    auto m3 = ModelManifold::euclidean(3);
    auto d3 = DiscreteDomain::build_radial_grid(m3, 2.0, 64.0, 256,
                                                std::pow(64.0, 1.0 / 256));
    ScalarField rf(d3);
    for (std::size_t i = 0; i < d3.node_count(); ++i) rf[i] = d3.node_r(i);
    auto ex3 = Exhaustion::from_sublevels(rf, {8.0, 16.0, 32.0, 65.0});
    CHECK_THROWS_AS(linear_sum_construction(d3, {{0u}}, ex3, 1e-4), ConstructionError);
}

TEST_CASE("proper finite-energy function enforces both selection rules") {
    // p = 2 needs exponentially spaced levels: terms at ln r > 4 pi, 8 pi
    auto m = ModelManifold::euclidean(2);
    auto d = log_grid(m, 26.5, 8);
    auto ex = log_levels(d, 26);
    auto res = proper_finite_energy_function(d, ex, 2.0, 1e-12, 8);
    CHECK(res.terms.size() == 2); // the third term needs ln r > 12 pi
    for (const auto& t : res.terms) {
        CHECK(t.term_energy < std::pow(0.5, (double)t.k));
        CHECK(t.sup_on_selection_set <= std::pow(0.5, (double)t.k) + 1e-12);
    }
    CHECK(res.energy <= res.energy_budget * (1.0 + 1e-9));
    for (auto n : ex.set(0)) CHECK(res.f[n] == 0.0);

    // p = 3 decays polynomially: more terms on a small grid
    auto d3 = DiscreteDomain::build_radial_grid(m, 3.0, 300.0, 700,
                                                std::pow(300.0, 1.0 / 700));
    ScalarField prof(d3);
    auto rp = m.radial_profile(3.0, d3.radii());
    prof.values = rp.values;
    std::vector<double> taus;
    for (int k = 1; (double)k < rp.values.back() - 1.0; ++k) taus.push_back((double)k);
    taus.push_back(rp.values.back());
    auto ex3 = Exhaustion::from_sublevels(prof, std::move(taus));
    auto res3 = proper_finite_energy_function(d3, ex3, 3.0, 1e-12, 8);
    CHECK(res3.terms.size() >= 3);
    CHECK(res3.energy <= res3.energy_budget * (1.0 + 1e-9));
}

TEST_CASE("reverse construction on a parabolic model (radial witness)") {
    auto m = ModelManifold::euclidean(2);
    auto d = log_grid(m, 19.0, 8);
    const std::vector<std::uint32_t> K{0};
    KhasminskiiConfig cfg;
    cfg.steps = 2;
    cfg.witness = WitnessSource::radial;
    auto run = reverse_khasminskii(d, K, 2.0, cfg);

    CHECK(run.witness_used == WitnessSource::radial);
    REQUIRE(run.stages.size() == 2);
    for (const auto& st : run.stages) {
        CHECK(st.sup_gap < std::pow(0.5, st.n + 1));
        auto audit = energy_chain_audit(st, 2.0);
        CHECK(audit.pass);
    }
    CHECK(run.stages[1].j_bar >= run.stages[0].j_bar);
    CHECK(run.supersolution_pass);
    CHECK(run.field[0] == 0.0);
    CHECK(run.field[d.node_count() - 1] == 2.0);
    // monotone in n: final >= first stage's field everywhere is implied by
    // construction; spot-check s is nondecreasing in radius
    for (std::size_t i = 1; i < d.node_count(); ++i)
        CHECK(run.field[i] >= run.field[i - 1] - 1e-9);
}

TEST_CASE("reverse construction with the energy rule (p=2, two steps)") {
    auto m = ModelManifold::euclidean(2);
    auto d = log_grid(m, 34.0, 8);
    KhasminskiiConfig cfg;
    cfg.steps = 2;
    cfg.energy_rule = true;
    cfg.witness = WitnessSource::radial;
    auto run = reverse_khasminskii(d, {{0u}}, 2.0, cfg);
    REQUIRE(run.stages.size() == 2);
    for (const auto& st : run.stages)
        CHECK(st.delta_energy_norm < std::pow(0.5, st.n));
    CHECK(run.final_energy <= run.energy_budget * (1.0 + 1e-9));
}

TEST_CASE("reverse construction with a constructed witness (p=3)") {
    auto m = ModelManifold::euclidean(2);
    auto d = DiscreteDomain::build_radial_grid(m, 3.0, 8000.0, 1400,
                                               std::pow(8000.0, 1.0 / 1400));
    KhasminskiiConfig cfg;
    cfg.steps = 1;
    cfg.energy_rule = true;
    cfg.witness = WitnessSource::constructed;
    cfg.witness_terms = 6;
    auto run = reverse_khasminskii(d, {{0u}}, 3.0, cfg);
    CHECK(run.witness_used == WitnessSource::constructed);
    REQUIRE(run.stages.size() == 1);
    CHECK(run.stages[0].sup_gap < 0.5);
    CHECK(run.supersolution_pass);
    auto audit = energy_chain_audit(run.stages[0], 3.0);
    CHECK(audit.pass);
    CHECK(audit.links.back().trivial); // first step starts from s = 0
}

TEST_CASE("audit links are tight on a degenerate stage") {
    // delta = 0: every link holds with equality
    KhasminskiiStage st;
    st.n = 3;
    st.norm_s = 2.0;
    st.norm_s_half_delta = 2.0;
    st.norm_s_plus_delta = 2.0;
    st.norm_fj = 0.25;
    st.delta_energy_norm = 0.0;
    auto rep = energy_chain_audit(st, 2.0);
    CHECK(rep.pass);
    CHECK(rep.links[0].lhs == rep.links[0].rhs);
    CHECK(rep.links[2].lhs == 0.0); // sigma(0) = 0

    // a fabricated violation is named
    st.norm_s_half_delta = 1.0;
    rep = energy_chain_audit(st, 2.0);
    CHECK(!rep.pass);
    CHECK(rep.links[0].name == "minimizing-property");
    CHECK(!rep.links[0].pass);
}

TEST_CASE("automatic witness falls back to the radial profile") {
    // p=2 needs selection levels at ln r > 2 pi 2^k, far beyond this grid,
    // so the constructed witness cannot cover two induction steps and the
    // automatic source must fall back to the radial one
    auto m = ModelManifold::euclidean(2);
    auto d = log_grid(m, 19.0, 8);
    KhasminskiiConfig cfg;
    cfg.steps = 2;
    cfg.witness = WitnessSource::automatic;
    auto run = reverse_khasminskii(d, {{0u}}, 2.0, cfg);
    CHECK(run.witness_used == WitnessSource::radial);
    CHECK(run.stages.size() == 2);
}

TEST_CASE("nonparabolic converse fails with grid-too-small") {
    auto m = ModelManifold::euclidean(3);
    for (double rmax : {4.0, 8.0, 16.0}) {
        auto d = DiscreteDomain::build_radial_grid(m, 2.0, rmax, 256,
                                                   std::pow(rmax, 1.0 / 256));
        KhasminskiiConfig cfg;
        cfg.steps = 5;
        bool hit = false;
        try {
            reverse_khasminskii(d, {{0u}}, 2.0, cfg);
        } catch (const ConstructionError& e) {
            hit = true;
            CHECK(e.code() == "grid-too-small");
        }
        CHECK(hit);
    }
}

TEST_CASE("2D reverse construction stays radial for a full-ring compactum") {
    auto m = ModelManifold::euclidean(2);
    const double rmax = std::exp(10.0);
    auto d = DiscreteDomain::build_surface_grid(m, rmax, 80, 16,
                                                std::pow(rmax, 1.0 / 80));
    KhasminskiiConfig cfg;
    cfg.steps = 1;
    cfg.tol = 1e-11;
    cfg.witness = WitnessSource::radial;
    auto ring = d.inner_nodes();
    auto run = reverse_khasminskii(d, ring, 2.0, cfg);
    CHECK(run.supersolution_pass);
    // axisymmetry: within each radial ring the field is constant
    const int nth = d.cells_theta();
    for (int i = 0; i <= d.cells_r(); ++i) {
        double lo = 1e300, hi = -1e300;
        for (int j = 0; j < nth; ++j) {
            const double v = run.field[(std::size_t)i * nth + j];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        CHECK(hi - lo <= 1e-8);
    }
}
