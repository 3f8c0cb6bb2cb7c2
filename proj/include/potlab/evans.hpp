#pragma once

#include "potlab/capacity.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace potlab {

struct EvansLevelRecord {
    int level = 0;       // boundary value n imposed on the level set rim
    double ring_min = 0; // m_n: min of e_n on the inner ring
    double ring_max = 0; // M_n: max of e_n on the inner ring
    double radial_gap = 0;    // min over A_n of (e_n - radial comparator); >= -10 tol
    double sandwich_gap = 0;  // min over A_n of (M_n + comparator - e_n); >= -10 tol
    double mn_bound_lhs = 0;  // m_n^(p-1) * cap(K, A_1)
    double mn_bound_rhs = 0;  // n^(p-1) * cap(ring, {E < n})
    bool mn_bound_pass = true;
    SolveReport report;
};

struct EvansRun {
    std::vector<EvansLevelRecord> levels;
    std::vector<std::uint32_t> compactum;
    ScalarField field;       // e = e_{n_max}
    ScalarField comparator;  // discrete full-ring radial potential at n_max
    ScalarField profile;     // sampled closed-form radial profile E per node
    int n_max = 0;
    double ring_min = 0;     // m: min of e on the inner ring
    double ring_max = 0;     // M: max of e on the inner ring
    double cap_inner = 0;    // cap(K, A_1), the discrete stand-in for cap(K, B_rbar)
};

/// Evans iteration on a surface grid: for n = 1..n_max solve the Dirichlet
/// problem with data 0 on K and n outside the sublevel region {E <= n} of
/// the radial profile E; levels are monotone and sandwiched between the
/// radial comparator and comparator + M. K must be a nonempty subset of the
/// inner ring; the model must be parabolic at p.
EvansRun evans_iterate(const DiscreteDomain& d, std::span<const std::uint32_t> compactum,
                       double p, int n_max, const SolverOptions& opt = {});

struct AsymptoticsRow {
    double t = 0;
    double capacity = 0;    // cap(K, {e < t})
    double normalized = 0;  // t^(p-1) * capacity
    double lower_env = 0;   // ((t-M)/t)^p * t^(p-1) * cap(ring, {E < t})
    double upper_env = 0;   // t^(p-1) * cap(ring, {E < t - M})
    bool enveloped = true;
};

/// cap(K, {e < t}) for each level in t_list (each t <= 0.8 n_max, above the
/// ring minimum), with the two-sided envelopes derived from the run's own
/// ring extremes. The normalized column stays bounded between positive
/// constants as t grows; envelope checks carry a mesh-level slack.
std::vector<AsymptoticsRow> capacity_asymptotics(const DiscreteDomain& d,
                                                 const EvansRun& run, double p,
                                                 std::span<const double> t_list,
                                                 const SolverOptions& opt = {});

} // namespace potlab
