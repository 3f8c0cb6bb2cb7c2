#pragma once

#include "potlab/plaplace_solver.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace potlab {

/// Discrete condenser capacity: the p-energy of the extremal potential,
/// which is 1 on the compactum and 0 on the grounded set. Satisfies the
/// discrete maximum principle 0 <= h <= 1 up to solver tolerance.
struct CapacityResult {
    double value = 0.0;
    ScalarField potential;
    SolveReport report;
};

/// General condenser: `ones` pinned to 1, `zeros` pinned to 0, everything
/// else free. The sets must be nonempty and disjoint.
CapacityResult condenser_capacity(const DiscreteDomain& d,
                                  std::span<const std::uint32_t> ones,
                                  std::span<const std::uint32_t> zeros, double p,
                                  const SolverOptions& opt = {});

/// cap_p(K, domain): potential 1 on K, 0 on the outer boundary ring. K must
/// be nonempty and disjoint from the outer boundary.
CapacityResult capacity(const DiscreteDomain& d, std::span<const std::uint32_t> compactum,
                        double p, const SolverOptions& opt = {});

/// Sublevel condenser ({h >= s}, {h > t}) of a computed potential h,
/// 0 <= t < s <= 1: its capacity obeys cap = value / (s-t)^(p-1); returns
/// the measured/predicted ratio. Empty level sets or an empty strict
/// in-between region raise degenerate-levels.
struct ScalingCheck {
    double t = 0, s = 0;
    double measured = 0;
    double predicted = 0;
    double ratio = 0;
    std::size_t ones_count = 0, zeros_count = 0;
};
ScalingCheck sublevel_scaling_check(const DiscreteDomain& d, const CapacityResult& r,
                                    double t, double s, double p,
                                    const SolverOptions& opt = {});

/// cap_p(K, D_k) along an exhaustion; nonincreasing in k. When the top set
/// covers the whole grid its complement is empty and the outer boundary
/// ring stands in for the missing "boundary at infinity".
struct DecayEntry {
    std::size_t level = 0;
    double r_max = 0;      // largest radius inside D_level
    double capacity = 0;
};
std::vector<DecayEntry> capacity_decay(const DiscreteDomain& d,
                                       std::span<const std::uint32_t> compactum,
                                       const Exhaustion& ex, double p,
                                       const SolverOptions& opt = {});

/// Exhaustion limit of cap_p(K, D_k) with the stopping rule
/// |cap_k - cap_{k+1}| < 1e-6 * cap_0; `converged` records whether the rule
/// fired before the levels ran out.
struct CapacityLimit {
    double value = 0.0;
    bool converged = false;
    std::vector<DecayEntry> sequence;
};
CapacityLimit capacity_limit(const DiscreteDomain& d,
                             std::span<const std::uint32_t> compactum,
                             const Exhaustion& ex, double p,
                             const SolverOptions& opt = {});

} // namespace potlab
