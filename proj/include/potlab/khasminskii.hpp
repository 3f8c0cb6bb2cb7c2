#pragma once

#include "potlab/capacity.hpp"
#include "potlab/convexity.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace potlab {

// ---------------------------------------------------------------------------
// forward direction: a proper nonnegative witness that is p-superharmonic
// off its zero plateau forces the capacity of the plateau to die out

struct ForwardLevelRecord {
    std::size_t level = 0;
    double frontier_min = 0;   // m_n: min of the witness on the frontier of D_n
    double capacity = 0;       // cap_p(K, D_n)
    double worst_violation = 0; // max over D_n\K of (1 - h_n) - kappa/m_n
    bool inequality_pass = true;
};

enum class ForwardConclusion { parabolic_consistent, inconclusive };

struct ForwardReport {
    std::vector<ForwardLevelRecord> levels;
    bool all_inequalities_pass = true;
    double capacity_drop = 0;  // 1 - cap_last/cap_first
    double frontier_growth = 0; // m_last / m_first
    ForwardConclusion conclusion = ForwardConclusion::inconclusive;
};

/// Validates the witness (nonnegative, zero on a neighborhood of K,
/// p-supersolution where positive; invalid-witness otherwise), then checks
/// 1 - h_n <= kappa/m_n nodewise on every exhaustion level and reports the
/// capacity trend. The potentials h_n are taken of the fattened couple
/// (witness zero plateau, D_n): the comparison argument behind the
/// inequality needs the witness superharmonic on the whole checked region,
/// which fails across the plateau rim.
ForwardReport forward_khasminskii_check(const DiscreteDomain& d,
                                        std::span<const std::uint32_t> compactum,
                                        const ScalarField& kappa, double p,
                                        const Exhaustion& ex,
                                        const SolverOptions& opt = {});

// ---------------------------------------------------------------------------
// p = 2 summation construction and the proper finite-energy function

struct SumTermRecord {
    std::size_t k = 0;         // term index (bounds 2^-k)
    std::size_t level = 0;     // selected exhaustion level n(k)
    double sup_on_selection_set = 0;
    double term_energy = 0;    // p-energy of the selected h-tilde
};

struct LinearSumResult {
    ScalarField witness;
    std::vector<SumTermRecord> terms;
    double witness_energy = 0;
    bool supersolution_pass = false;
};

/// Sum of complementary potentials 1 - h_{n(k)} of (K, D_{n(k)}) with the
/// geometric sup rule sup_{D_k} <= 2^-k; p = 2 only. Terms stop when the
/// remaining tail bound drops below tol or the exhaustion runs out;
/// cannot-construct if even the first term has no admissible level.
LinearSumResult linear_sum_construction(const DiscreteDomain& d,
                                        std::span<const std::uint32_t> compactum,
                                        const Exhaustion& ex, double tol,
                                        const SolverOptions& opt = {});

struct ProperFunctionResult {
    ScalarField f;
    std::vector<SumTermRecord> terms;
    double energy = 0;       // p-energy of f
    double energy_budget = 0; // (sum_k 2^(-k/p))^p over the selected terms
};

/// f = sum of complementary potentials of (D_0, D_{n(k)}) with both
/// selection rules (sup_{D_k} <= 2^-k and term energy < 2^-k) enforced; the
/// selected level index is found by monotone bisection. max_terms caps the
/// construction; fewer terms are returned when the grid affords fewer.
ProperFunctionResult proper_finite_energy_function(const DiscreteDomain& d,
                                                   const Exhaustion& ex, double p,
                                                   double tol, int max_terms,
                                                   const SolverOptions& opt = {});

// ---------------------------------------------------------------------------
// reverse direction: obstacle-problem induction

enum class WitnessSource { automatic, constructed, radial };

struct KhasminskiiConfig {
    int steps = 5;             // induction steps N; final field is steps at the ring
    bool energy_rule = false;  // additionally require |grad delta|_p < 2^-n
    WitnessSource witness = WitnessSource::automatic;
    double tol = 1e-12;        // solver residual for the obstacle solves
    long j_max = 1 << 20;      // cap on the doubling j-sweep
    int witness_terms = 11;    // constructed witness: max selection terms
    double zero_band = 1.0;    // radial witness: f = max(E - zero_band, 0)
};

struct KhasminskiiStage {
    int n = 0;              // building s^(n+1) from s^(n)
    long j_bar = 0;         // accepted sweep index
    double sup_gap = 0;     // sup over D_(n+1) of (h~_j - s)
    double delta_energy_norm = 0;      // |grad delta|_p
    double cumulative_energy_norm = 0; // |grad s^(n+1)|_p
    // inputs of the three-link energy-chain audit
    double norm_s = 0;            // |grad s|_p
    double norm_s_half_delta = 0; // |grad (s + delta/2)|_p
    double norm_s_plus_delta = 0; // |grad (s + delta)|_p
    double norm_fj = 0;           // |grad f_j|_p
};

struct KhasminskiiRun {
    std::vector<KhasminskiiStage> stages;
    std::vector<ScalarField> cumulative; // s^(1) .. s^(N); s^(0) = 0
    ScalarField witness_f; // proper function f (zero on D_0, >= n outside D_n)
    ScalarField field;     // final limit surrogate, = steps on the outer ring
    std::vector<std::uint32_t> pinned_zero; // D_0 = {f <= 0}, contains the compactum
    double final_energy = 0;  // p-energy of the final field
    double energy_budget = 0; // (|grad s^(1)|_p + sum 2^-n)^p when the rule is on
    bool supersolution_pass = false;
    WitnessSource witness_used = WitnessSource::constructed;
};

/// The obstacle-problem induction: per step n a doubling j-sweep solves the
/// obstacle problem with obstacle s + min(f/j, 1) on {f < j+1} minus the
/// zero plateau, accepts j when sup_{f < n+1} (h~_j - s) < 2^(-n-1) (and,
/// with the energy rule, |grad delta|_p < 2^-n), and advances s. Runs out
/// of usable j -> grid-too-small. The witness f is built per `witness`:
/// `constructed` uses proper_finite_energy_function on integer levels of
/// the radial profile; `radial` uses the shifted profile itself (model
/// manifolds are exactly the geometries with such closed-form witnesses);
/// `automatic` tries constructed, then falls back to radial.
KhasminskiiRun reverse_khasminskii(const DiscreteDomain& d,
                                   std::span<const std::uint32_t> compactum, double p,
                                   const KhasminskiiConfig& cfg);

// ---------------------------------------------------------------------------
// energy-chain audit

struct AuditLink {
    std::string name;
    double lhs = 0, rhs = 0; // asserted lhs <= rhs + slack
    bool pass = true;
    bool trivial = false; // degenerate step (zero base norm)
};

struct AuditReport {
    std::vector<AuditLink> links;
    bool pass = true;
};

/// Replays the three printed inequality links on a completed stage:
/// (a) |grad s|       <= |grad (s + delta/2)|       (minimizing property)
/// (b) |grad (s+delta)| <= |grad s| + |grad f_j|     (obstacle energy bound)
/// (c) sigma(x_delta)  <= |grad f_j| / |grad s|      (uniform convexity)
AuditReport energy_chain_audit(const KhasminskiiStage& stage, double p,
                               double slack = 1e-9);

} // namespace potlab
