#include "potlab/khasminskii.hpp"

#include "potlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace potlab {
namespace {

double grad_norm(const DiscreteDomain& d, const ScalarField& u, double p) {
    return std::pow(p_energy(d, u, p), 1.0 / p);
}

// nodes of D_k with a face neighbor outside D_k; the outer ring when D_k
// covers the grid
std::vector<std::uint32_t> level_frontier(const DiscreteDomain& d, const Exhaustion& ex,
                                          std::size_t k) {
    std::vector<char> in(d.node_count(), 0);
    bool full = true;
    for (std::size_t i = 0; i < d.node_count(); ++i) {
        in[i] = ex.contains(k, (std::uint32_t)i);
        full = full && in[i];
    }
    if (full) return d.outer_nodes();
    std::vector<char> front(d.node_count(), 0);
    const auto fa = d.face_a();
    const auto fb = d.face_b();
    for (std::size_t f = 0; f < fa.size(); ++f) {
        if (in[fa[f]] != in[fb[f]]) {
            if (in[fa[f]]) front[fa[f]] = 1;
            if (in[fb[f]]) front[fb[f]] = 1;
        }
    }
    std::vector<std::uint32_t> out;
    for (std::size_t i = 0; i < d.node_count(); ++i)
        if (front[i]) out.push_back((std::uint32_t)i);
    return out;
}

std::vector<std::uint32_t> level_complement(const DiscreteDomain& d, const Exhaustion& ex,
                                            std::size_t k) {
    std::vector<std::uint32_t> zeros;
    for (std::size_t i = 0; i < d.node_count(); ++i)
        if (!ex.contains(k, (std::uint32_t)i)) zeros.push_back((std::uint32_t)i);
    if (zeros.empty()) zeros = d.outer_nodes();
    return zeros;
}

// per-node radial profile value of f_{p,rbar}
std::vector<double> node_profile(const DiscreteDomain& d, double p) {
    const auto& m = d.manifold();
    if (d.kind() == DomainKind::radial1d) {
        auto prof = m.radial_profile(p, d.radii());
        return prof.values;
    }
    const int nth = d.cells_theta();
    std::vector<double> levels(d.cells_r() + 1);
    for (int i = 0; i <= d.cells_r(); ++i)
        levels[i] = d.node_r((std::size_t)i * nth);
    auto prof = m.radial_profile(p, levels);
    std::vector<double> out(d.node_count());
    for (std::size_t i = 0; i < d.node_count(); ++i) out[i] = prof.values[i / nth];
    return out;
}

} // namespace

// ---------------------------------------------------------------------------

ForwardReport forward_khasminskii_check(const DiscreteDomain& d,
                                        std::span<const std::uint32_t> compactum,
                                        const ScalarField& kappa, double p,
                                        const Exhaustion& ex, const SolverOptions& opt) {
    if (kappa.values.size() != d.node_count())
        throw invalid_range("witness field does not match domain");
    ex.validate(d);
    const double zero_band = 10.0 * opt.tol;
    for (double v : kappa.values)
        if (v < -zero_band) throw invalid_witness("witness must be nonnegative");
    for (auto k : compactum)
        if (std::fabs(kappa.values[k]) > zero_band)
            throw invalid_witness("witness must vanish on the compactum");
    // p-superharmonic where the witness is positive (the zero plateau rim is
    // excluded: no superharmonicity is claimed across it)
    std::vector<std::uint32_t> plateau;
    std::vector<char> in_plateau(d.node_count(), 0);
    for (std::size_t i = 0; i < d.node_count(); ++i)
        if (kappa.values[i] <= zero_band) {
            plateau.push_back((std::uint32_t)i);
            in_plateau[i] = 1;
        }
    auto sup = check_supersolution(d, kappa, p, 100.0 * opt.tol, plateau);
    if (!sup.pass)
        throw invalid_witness("witness fails the p-supersolution check off its zero set");
    for (auto k : compactum)
        if (!in_plateau[k])
            throw invalid_witness("witness must vanish on a neighborhood of K");

    // potentials are taken of the fattened couple (zero plateau, D_n): the
    // comparison argument needs the witness superharmonic on the whole
    // checked region, which fails across the plateau rim
    ForwardReport rep;
    SolverOptions o = opt;
    ScalarField warm;
    for (std::size_t k = 0; k < ex.levels(); ++k) {
        auto zeros = level_complement(d, ex, k);
        std::vector<char> zero_mark(d.node_count(), 0);
        for (auto z : zeros) zero_mark[z] = 1;
        for (auto z : plateau)
            if (zero_mark[z])
                throw invalid_range("exhaustion level cuts the witness zero plateau");
        auto res = condenser_capacity(d, plateau, zeros, p, o);
        warm = res.potential;
        o.warm_start = &warm;

        ForwardLevelRecord rec;
        rec.level = k;
        rec.capacity = res.value;
        double mn = std::numeric_limits<double>::infinity();
        for (auto fnode : level_frontier(d, ex, k))
            mn = std::min(mn, kappa.values[fnode]);
        rec.frontier_min = mn;

        std::vector<char> in_k(d.node_count(), 0);
        for (std::size_t i = 0; i < d.node_count(); ++i)
            in_k[i] = ex.contains(k, (std::uint32_t)i);

        rec.worst_violation = -std::numeric_limits<double>::infinity();
        if (mn > zero_band) {
            for (std::size_t i = 0; i < d.node_count(); ++i) {
                if (!in_k[i] || in_plateau[i] || zero_mark[i]) continue;
                const double lhs = 1.0 - res.potential[i];
                const double rhs = kappa.values[i] / mn;
                rec.worst_violation = std::max(rec.worst_violation, lhs - rhs);
            }
            rec.inequality_pass = rec.worst_violation <= 10.0 * opt.tol;
        } else {
            rec.worst_violation = 0.0; // kappa/m blows up; inequality is vacuous
            rec.inequality_pass = true;
        }
        rep.all_inequalities_pass = rep.all_inequalities_pass && rec.inequality_pass;
        rep.levels.push_back(rec);
    }

    const auto& first = rep.levels.front();
    const auto& last = rep.levels.back();
    rep.capacity_drop = first.capacity > 0.0 ? 1.0 - last.capacity / first.capacity : 0.0;
    rep.frontier_growth =
        first.frontier_min > 0.0 ? last.frontier_min / first.frontier_min : 0.0;
    rep.conclusion = (rep.all_inequalities_pass && rep.frontier_growth >= 2.0 &&
                      last.capacity < first.capacity)
                         ? ForwardConclusion::parabolic_consistent
                         : ForwardConclusion::inconclusive;
    return rep;
}

// ---------------------------------------------------------------------------

namespace {

// smallest level in (lo, hi] whose complementary potential h~ = 1 - h of
// (ones, D_level) meets `accept`; h~ decreases in the level, so bisection
// applies. Returns the level and its potential, or nullopt.
template <typename Accept>
std::optional<std::pair<std::size_t, CapacityResult>>
bisect_level(const DiscreteDomain& d, const Exhaustion& ex,
             std::span<const std::uint32_t> ones, double p, std::size_t lo,
             std::size_t hi, const SolverOptions& opt, Accept accept) {
    auto solve = [&](std::size_t lvl) {
        return condenser_capacity(d, ones, level_complement(d, ex, lvl), p, opt);
    };
    auto top = solve(hi);
    if (!accept(top)) return std::nullopt;
    while (hi > lo + 1) {
        const std::size_t mid = lo + (hi - lo) / 2;
        auto cand = solve(mid);
        if (accept(cand)) {
            hi = mid;
            top = std::move(cand);
        } else {
            lo = mid;
        }
    }
    return std::make_pair(hi, std::move(top));
}

double sup_htilde_on(const DiscreteDomain& d, const Exhaustion& ex, std::size_t k,
                     const CapacityResult& res) {
    double s = 0.0;
    for (std::size_t i = 0; i < d.node_count(); ++i)
        if (ex.contains(k, (std::uint32_t)i))
            s = std::max(s, 1.0 - res.potential[i]);
    return s;
}

} // namespace

LinearSumResult linear_sum_construction(const DiscreteDomain& d,
                                        std::span<const std::uint32_t> compactum,
                                        const Exhaustion& ex, double tol,
                                        const SolverOptions& opt) {
    ex.validate(d);
    if (compactum.empty()) throw invalid_condenser("compactum must be nonempty");
    const double p = 2.0; // the summation argument is linear-only
    LinearSumResult out;
    out.witness = ScalarField(d, 0.0);

    std::size_t prev_level = 0;
    for (std::size_t k = 1; k < ex.levels(); ++k) {
        if (std::pow(0.5, (double)k) < tol) break; // remaining sup tail below tol
        if (prev_level + 1 >= ex.levels()) break;
        const double bound = std::pow(0.5, (double)k);
        auto hit = bisect_level(d, ex, compactum, p, prev_level, ex.levels() - 1, opt,
                                [&](const CapacityResult& r) {
                                    return sup_htilde_on(d, ex, k, r) <= bound;
                                });
        if (!hit) {
            if (k == 1)
                throw cannot_construct(
                    "sup decay stalls at the first term (nonparabolic family?)");
            break;
        }
        auto [lvl, res] = std::move(*hit);
        SumTermRecord rec;
        rec.k = k;
        rec.level = lvl;
        rec.sup_on_selection_set = sup_htilde_on(d, ex, k, res);
        rec.term_energy = res.value;
        out.terms.push_back(rec);
        for (std::size_t i = 0; i < d.node_count(); ++i)
            out.witness[i] += 1.0 - res.potential[i];
        prev_level = lvl;
    }
    if (out.terms.empty())
        throw cannot_construct("no admissible term found for the summation witness");

    out.witness_energy = p_energy(d, out.witness, p);
    std::vector<std::uint32_t> excl(compactum.begin(), compactum.end());
    out.supersolution_pass =
        check_supersolution(d, out.witness, p, 100.0 * opt.tol, excl).pass;
    return out;
}

ProperFunctionResult proper_finite_energy_function(const DiscreteDomain& d,
                                                   const Exhaustion& ex, double p,
                                                   double tol, int max_terms,
                                                   const SolverOptions& opt) {
    ex.validate(d);
    if (!(p > 1.0)) throw invalid_range("p must be > 1");
    auto ones = ex.set(0);
    ProperFunctionResult out;
    out.f = ScalarField(d, 0.0);

    std::size_t prev_level = 0;
    for (int k = 1; k <= max_terms; ++k) {
        if (prev_level + 1 >= ex.levels()) break;
        const double bound = std::pow(0.5, (double)k);
        auto hit = bisect_level(d, ex, ones, p, prev_level, ex.levels() - 1, opt,
                                [&](const CapacityResult& r) {
                                    return r.value < bound &&
                                           sup_htilde_on(d, ex, (std::size_t)k, r) <= bound;
                                });
        if (!hit) break;
        auto [lvl, res] = std::move(*hit);
        SumTermRecord rec;
        rec.k = (std::size_t)k;
        rec.level = lvl;
        rec.sup_on_selection_set = sup_htilde_on(d, ex, (std::size_t)k, res);
        rec.term_energy = res.value;
        out.terms.push_back(rec);
        for (std::size_t i = 0; i < d.node_count(); ++i)
            out.f[i] += 1.0 - res.potential[i];
        prev_level = lvl;
    }
    if (out.terms.empty())
        throw cannot_construct(
            "no exhaustion level meets the first sup/energy selection bounds");

    // Minkowski budget over the selected terms
    double budget_root = 0.0;
    for (const auto& t : out.terms) budget_root += std::pow(0.5, (double)t.k / p);
    out.energy_budget = std::pow(budget_root, p);
    out.energy = p_energy(d, out.f, p);
    if (out.energy > out.energy_budget * (1.0 + 1e-9))
        throw assertion_failure("finite-energy-budget",
                                "triangle-inequality budget violated");
    for (auto n : ones)
        if (out.f[n] != 0.0)
            throw assertion_failure("zero-on-D0", "witness must vanish on D_0");
    // f >= k-1 beyond the k-th selected level
    for (const auto& t : out.terms) {
        double mn = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < d.node_count(); ++i)
            if (!ex.contains(t.level, (std::uint32_t)i)) mn = std::min(mn, out.f[i]);
        if (mn < (double)t.k - 1.0 - 100.0 * tol)
            throw assertion_failure("growth-alignment",
                                    "f fails f >= k-1 outside the k-th level");
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

struct WitnessBundle {
    ScalarField f;
    WitnessSource used = WitnessSource::constructed;
};

WitnessBundle build_constructed_witness(const DiscreteDomain& d, double p,
                                        const KhasminskiiConfig& cfg) {
    auto prof = node_profile(d, p);
    ScalarField level(d);
    level.values = prof;
    const double emax = *std::max_element(prof.begin(), prof.end());
    if (emax <= 2.0)
        throw cannot_construct("radial profile spans too few levels for a witness");
    std::vector<double> taus;
    for (double t = 1.0; t < emax - 1.0; t += 1.0) taus.push_back(t);
    taus.push_back(emax);
    auto ex = Exhaustion::from_sublevels(level, std::move(taus));
    SolverOptions opt;
    opt.tol = cfg.tol;
    auto prop = proper_finite_energy_function(d, ex, p, cfg.tol, cfg.witness_terms, opt);
    WitnessBundle out;
    out.f = std::move(prop.f);
    out.used = WitnessSource::constructed;
    return out;
}

WitnessBundle build_radial_witness(const DiscreteDomain& d, double p,
                                   const KhasminskiiConfig& cfg) {
    const auto cls = d.manifold().classify_parabolicity(p);
    if (cls.verdict == Parabolicity::nonparabolic)
        throw cannot_construct("radial witness is bounded: model is nonparabolic at p");
    auto prof = node_profile(d, p);
    WitnessBundle out;
    out.f = ScalarField(d);
    for (std::size_t i = 0; i < d.node_count(); ++i)
        out.f[i] = std::max(prof[i] - cfg.zero_band, 0.0);
    out.used = WitnessSource::radial;
    return out;
}

} // namespace

KhasminskiiRun reverse_khasminskii(const DiscreteDomain& d,
                                   std::span<const std::uint32_t> compactum, double p,
                                   const KhasminskiiConfig& cfg) {
    if (compactum.empty()) throw invalid_condenser("compactum must be nonempty");
    if (cfg.steps < 1) throw invalid_range("need at least one induction step");

    auto usable_levels = [](const WitnessBundle& w) {
        double fmax = 0.0;
        for (double v : w.f.values) fmax = std::max(fmax, v);
        return (long)std::floor(fmax);
    };

    WitnessBundle wb;
    try {
        switch (cfg.witness) {
        case WitnessSource::constructed: wb = build_constructed_witness(d, p, cfg); break;
        case WitnessSource::radial: wb = build_radial_witness(d, p, cfg); break;
        case WitnessSource::automatic: {
            // pick whichever witness gives the j-sweep more room
            std::optional<WitnessBundle> cons, rad;
            try {
                cons = build_constructed_witness(d, p, cfg);
            } catch (const ConstructionError&) {
            }
            try {
                rad = build_radial_witness(d, p, cfg);
            } catch (const ConstructionError& e) {
                if (!cons) throw;
            }
            if (cons && (!rad || usable_levels(*cons) >= usable_levels(*rad)))
                wb = std::move(*cons);
            else if (rad)
                wb = std::move(*rad);
            else
                throw cannot_construct("no witness source available");
            break;
        }
        }
    } catch (const ConstructionError& e) {
        throw grid_too_small(std::string("proper witness unavailable on this grid: ") +
                             e.what());
    }

    KhasminskiiRun run;
    run.witness_f = wb.f;
    run.witness_used = wb.used;
    const auto& f = run.witness_f;

    // integer alignment levels: D_m = {f < m}, so f >= m outside D_m
    double fmax = 0.0;
    for (double v : f.values) fmax = std::max(fmax, v);
    const long max_level = (long)std::floor(fmax);
    // step n needs the gap region D_(n+1) and at least one sweep level beyond
    if (max_level < cfg.steps + 1)
        throw grid_too_small("witness reaches level " + std::to_string(max_level) +
                             " but " + std::to_string(cfg.steps) +
                             " induction steps need more exhaustion levels");

    std::vector<char> in_zero(d.node_count(), 0);
    for (std::size_t i = 0; i < d.node_count(); ++i)
        if (f[i] <= 0.0) {
            in_zero[i] = 1;
            run.pinned_zero.push_back((std::uint32_t)i);
        }
    for (auto k : compactum)
        if (!in_zero[k])
            throw invalid_range("compactum must lie inside the witness zero plateau");
    for (auto o : d.outer_nodes())
        if (in_zero[o]) throw grid_too_small("witness zero plateau reaches the outer ring");

    ScalarField s(d, 0.0);
    double norm_s1 = 0.0;
    long j_prev = 1;

    for (int n = 0; n < cfg.steps; ++n) {
        const double gap_target = std::pow(0.5, (double)(n + 1));
        const double energy_target = std::pow(0.5, (double)n);
        const double norm_s = grad_norm(d, s, p);

        bool accepted = false;
        ScalarField warm = s;
        double best_gap = std::numeric_limits<double>::infinity();
        std::vector<double> prev_h;

        std::vector<long> sweep;
        for (long j = j_prev; j <= std::min((long)cfg.j_max, max_level - 1); j *= 2)
            sweep.push_back(j);
        if (!sweep.empty() && sweep.back() != max_level - 1 &&
            max_level - 1 <= cfg.j_max)
            sweep.push_back(max_level - 1);

        for (long j : sweep) {
            // obstacle psi_j = s + min(f/j, 1) on {f < j+1} minus the zero
            // plateau; pinned to 0 on the plateau and to n+1 beyond level j+1
            ObstacleProblemSpec spec;
            spec.domain = &d;
            spec.p = p;
            spec.obstacle = ScalarField(d);
            PinnedValues pins;
            bool s_consistent = true;
            for (std::size_t i = 0; i < d.node_count(); ++i) {
                const double fj = std::min(f[i] / (double)j, 1.0);
                spec.obstacle[i] = s[i] + fj;
                if (in_zero[i]) {
                    pins.pin((std::uint32_t)i, 0.0);
                } else if (f[i] >= (double)(j + 1)) {
                    if (std::fabs(s[i] - (double)n) > 1e-9) s_consistent = false;
                    pins.pin((std::uint32_t)i, (double)(n + 1));
                }
            }
            if (!s_consistent) continue; // j below the reach of s^(n); sweep on
            spec.boundary = std::move(pins);

            SolverOptions opt;
            opt.tol = cfg.tol;
            opt.warm_start = &warm;
            auto sol = solve_obstacle(spec, opt);
            if (sol.report.status == SolveStatus::infeasible)
                throw grid_too_small("obstacle problem infeasible in the j-sweep");

            const auto& h = sol.field;
            const double tol10 = 10.0 * cfg.tol;
            double gap = 0.0;
            for (std::size_t i = 0; i < d.node_count(); ++i) {
                if (h[i] < s[i] - tol10)
                    throw assertion_failure("sweep-monotone-above-s",
                                            "obstacle solution dropped below s");
                if (!prev_h.empty() && h[i] > prev_h[i] + tol10)
                    throw assertion_failure("sweep-nonincreasing-in-j",
                                            "obstacle solutions must decrease in j");
                if (f[i] < (double)(n + 1)) gap = std::max(gap, h[i] - s[i]);
            }
            prev_h = h.values;

            ScalarField delta(d);
            for (std::size_t i = 0; i < d.node_count(); ++i) delta[i] = h[i] - s[i];
            const double norm_delta = grad_norm(d, delta, p);
            ScalarField fj_field(d);
            for (std::size_t i = 0; i < d.node_count(); ++i)
                fj_field[i] = std::min(f[i] / (double)j, 1.0);
            const double norm_fj = grad_norm(d, fj_field, p);
            if (norm_delta > 2.0 * norm_s + norm_fj + 1e-7)
                throw assertion_failure("delta-energy-apriori-bound",
                                        "|grad delta| exceeded 2|grad s| + |grad f_j|");

            best_gap = std::min(best_gap, gap);
            warm = h;

            if (gap < gap_target && (!cfg.energy_rule || norm_delta < energy_target)) {
                KhasminskiiStage st;
                st.n = n;
                st.j_bar = j;
                st.sup_gap = gap;
                st.delta_energy_norm = norm_delta;
                st.norm_s = norm_s;
                st.norm_fj = norm_fj;
                ScalarField half(d);
                for (std::size_t i = 0; i < d.node_count(); ++i)
                    half[i] = s[i] + 0.5 * delta[i];
                st.norm_s_half_delta = grad_norm(d, half, p);
                st.norm_s_plus_delta = grad_norm(d, h, p);
                st.cumulative_energy_norm = st.norm_s_plus_delta;
                run.stages.push_back(st);
                run.cumulative.push_back(h);
                s = h;
                j_prev = j;
                if (n == 0) norm_s1 = st.cumulative_energy_norm;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            std::ostringstream msg;
            msg << "step " << n << ": gap target " << gap_target
                << " unreachable within " << max_level - 1
                << " witness levels (best gap " << best_gap << ")";
            throw grid_too_small(msg.str());
        }
    }

    run.field = s;
    run.final_energy = p_energy(d, s, p);
    if (cfg.energy_rule) {
        double tail = 0.0;
        for (int n = 1; n <= cfg.steps; ++n) tail += std::pow(0.5, (double)n);
        run.energy_budget = std::pow(norm_s1 + tail, p);
        if (run.final_energy > run.energy_budget * (1.0 + 1e-9))
            throw assertion_failure("final-energy-budget",
                                    "p-energy of the limit exceeds the explicit budget");
    }
    for (auto k : compactum)
        if (run.field[k] != 0.0)
            throw assertion_failure("pin-zero-on-K", "final field must vanish on K");
    for (auto o : d.outer_nodes())
        if (run.field[o] != (double)cfg.steps)
            throw assertion_failure("pin-steps-at-ring",
                                    "final field must equal N on the outer ring");
    run.supersolution_pass =
        check_supersolution(d, run.field, p, 1e-9, run.pinned_zero).pass;
    return run;
}

// ---------------------------------------------------------------------------

AuditReport energy_chain_audit(const KhasminskiiStage& st, double p, double slack) {
    AuditReport rep;
    auto push = [&](std::string name, double lhs, double rhs, bool trivial) {
        AuditLink l;
        l.name = std::move(name);
        l.lhs = lhs;
        l.rhs = rhs;
        l.trivial = trivial;
        l.pass = trivial || lhs <= rhs + slack;
        rep.pass = rep.pass && l.pass;
        rep.links.push_back(l);
    };
    // (a) minimizing property of s against the half-step perturbation
    push("minimizing-property", st.norm_s, st.norm_s_half_delta, false);
    // (b) obstacle solution energy against the competitor s + f_j
    push("obstacle-energy-triangle", st.norm_s_plus_delta, st.norm_s + st.norm_fj, false);
    // (c) uniform convexity turns (a)+(b) into a sigma bound
    if (st.norm_s == 0.0) {
        push("sigma-chain", 0.0, 0.0, true);
    } else {
        const double x =
            st.delta_energy_norm / (st.norm_s + st.delta_energy_norm);
        push("sigma-chain", sigma_function(p, x), st.norm_fj / st.norm_s, false);
    }
    return rep;
}

} // namespace potlab
