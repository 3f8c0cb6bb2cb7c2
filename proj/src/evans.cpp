#include "potlab/evans.hpp"

#include "potlab/errors.hpp"

#include <algorithm>
#include <cmath>

namespace potlab {
namespace {

// Axisymmetric condenser values are solved on the matching radial grid and
// broadcast: on axisymmetric data the tensor grid's discrete equations
// restrict to exactly the radial ones.
struct RadialReduction {
    DiscreteDomain grid;
    std::vector<double> profile; // f_{p,rbar} at the radial levels

    static std::vector<double> radial_levels(const DiscreteDomain& d2) {
        std::vector<double> out(d2.cells_r() + 1);
        for (int i = 0; i <= d2.cells_r(); ++i)
            out[i] = d2.node_r((std::size_t)i * d2.cells_theta());
        return out;
    }

    static double radial_ratio(const DiscreteDomain& d2) {
        const auto r = radial_levels(d2);
        if (r.size() < 3) return 1.0;
        const double a = r[1] - r[0];
        const double b = r[r.size() - 1] - r[r.size() - 2];
        return std::pow(b / a, 1.0 / (double)(r.size() - 2));
    }

    RadialReduction(const DiscreteDomain& d2, double p)
        : grid(DiscreteDomain::build_radial_grid(
              d2.manifold(), p, d2.node_r(d2.node_count() - 1), d2.cells_r(),
              radial_ratio(d2))) {
        auto prof = d2.manifold().radial_profile(p, radial_levels(d2));
        profile = prof.values;
    }

    // ground set for the condenser (inner node, {profile < level})
    std::vector<std::uint32_t> zero_set(double level) const {
        std::vector<std::uint32_t> zeros;
        for (std::size_t i = 1; i < profile.size(); ++i)
            if (profile[i] >= level) zeros.push_back((std::uint32_t)i);
        if (zeros.empty()) zeros.push_back((std::uint32_t)(profile.size() - 1));
        return zeros;
    }

    double ring_capacity(double level, double p, const SolverOptions& opt) const {
        const std::vector<std::uint32_t> k{0};
        return condenser_capacity(grid, k, zero_set(level), p, opt).value;
    }
};

} // namespace

EvansRun evans_iterate(const DiscreteDomain& d, std::span<const std::uint32_t> compactum,
                       double p, int n_max, const SolverOptions& opt) {
    if (d.kind() != DomainKind::surface2d)
        throw unsupported_dimension("the Evans iteration runs on surface grids");
    if (compactum.empty())
        throw invalid_compactum("compactum is empty (zero discrete capacity)");
    for (auto k : compactum)
        if (d.tag(k) != BoundaryTag::inner)
            throw invalid_range("compactum must be a subset of the inner ring");
    if (n_max < 1) throw invalid_range("need n_max >= 1");
    const auto cls = d.manifold().classify_parabolicity(p);
    if (cls.verdict != Parabolicity::parabolic)
        throw evans_undefined("Evans potentials need a parabolic (model, p) pair");

    const int nth = d.cells_theta();
    RadialReduction rad(d, p);
    EvansRun run;
    run.n_max = n_max;
    run.compactum.assign(compactum.begin(), compactum.end());
    run.profile = ScalarField(d);
    for (std::size_t i = 0; i < d.node_count(); ++i)
        run.profile[i] = rad.profile[i / nth];
    const double emax = rad.profile.back();
    if (emax < (double)n_max)
        throw invalid_range("grid ends at profile level " + std::to_string(emax) +
                            " < n_max");

    const auto ring = d.inner_nodes();
    const double tol10 = 10.0 * opt.tol;

    // n-independent inner capacity: cap(K, A_1), the discrete stand-in for
    // cap(K, B_rbar)
    {
        std::vector<std::uint32_t> zeros;
        for (std::size_t i = 0; i < d.node_count(); ++i)
            if (run.profile[i] >= 1.0 && d.tag(i) != BoundaryTag::inner)
                zeros.push_back((std::uint32_t)i);
        run.cap_inner = condenser_capacity(d, compactum, zeros, p, opt).value;
    }

    // level rims quantize to grid nodes, so cross-level comparisons carry
    // the largest per-cell profile increment as slack
    double profile_step = 0.0;
    for (std::size_t i = 1; i < rad.profile.size(); ++i)
        profile_step = std::max(profile_step, rad.profile[i] - rad.profile[i - 1]);
    const double level_slack = 2.0 * profile_step + 10.0 * opt.tol;

    ScalarField e(d, 0.0), comp(d, 0.0);
    SolverOptions o2 = opt;
    ScalarField warm;
    for (int n = 1; n <= n_max; ++n) {
        PinnedValues pins;
        pins.pin_all(compactum, 0.0);
        bool any_outside = false;
        for (std::size_t i = 0; i < d.node_count(); ++i)
            if (run.profile[i] > (double)n) {
                pins.pin((std::uint32_t)i, (double)n);
                any_outside = true;
            }
        if (!any_outside) // top level: the outer ring stands in for the rim
            for (auto onode : d.outer_nodes()) pins.pin(onode, (double)n);
        auto sol = solve_dirichlet(d, pins, p, o2);
        warm = sol.field;
        o2.warm_start = &warm;

        // radial comparator: full-ring condenser at the same level
        PinnedValues rpins;
        rpins.pin(0, 0.0);
        bool rad_outside = false;
        for (std::size_t i = 0; i < rad.profile.size(); ++i)
            if (rad.profile[i] > (double)n) {
                rpins.pin((std::uint32_t)i, (double)n);
                rad_outside = true;
            }
        if (!rad_outside) rpins.pin((std::uint32_t)(rad.profile.size() - 1), (double)n);
        auto rsol = solve_dirichlet(rad.grid, rpins, p, opt);
        for (std::size_t i = 0; i < d.node_count(); ++i)
            comp[i] = rsol.field[i / nth];

        EvansLevelRecord rec;
        rec.level = n;
        rec.report = sol.report;
        rec.ring_min = std::numeric_limits<double>::infinity();
        rec.ring_max = 0.0;
        for (auto rn : ring) {
            rec.ring_min = std::min(rec.ring_min, sol.field[rn]);
            rec.ring_max = std::max(rec.ring_max, sol.field[rn]);
        }

        rec.radial_gap = std::numeric_limits<double>::infinity();
        rec.sandwich_gap = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < d.node_count(); ++i) {
            if (sol.field[i] < e[i] - level_slack)
                throw assertion_failure("evans-monotone-levels",
                                        "e_n must not decrease with n");
            rec.radial_gap = std::min(rec.radial_gap, sol.field[i] - comp[i]);
            rec.sandwich_gap =
                std::min(rec.sandwich_gap, rec.ring_max + comp[i] - sol.field[i]);
        }
        if (rec.radial_gap < -tol10)
            throw assertion_failure("evans-above-radial",
                                    "e_n dropped below the radial comparator");
        if (rec.sandwich_gap < -tol10)
            throw assertion_failure("evans-sandwich",
                                    "e_n exceeded comparator + ring maximum");

        // m_n bound via the sublevel capacity chain, with mesh-level slack
        rec.mn_bound_lhs = std::pow(rec.ring_min, p - 1.0) * run.cap_inner;
        rec.mn_bound_rhs =
            std::pow((double)n, p - 1.0) * rad.ring_capacity((double)n, p, opt);
        rec.mn_bound_pass = rec.mn_bound_lhs <= rec.mn_bound_rhs * 1.25;
        if (!rec.mn_bound_pass)
            throw assertion_failure("evans-ring-minimum-bound",
                                    "m_n grows faster than the capacity chain allows");

        run.levels.push_back(rec);
        e = sol.field;
    }

    run.field = e;
    run.comparator = comp;
    run.ring_min = run.levels.back().ring_min;
    run.ring_max = run.levels.back().ring_max;
    return run;
}

std::vector<AsymptoticsRow> capacity_asymptotics(const DiscreteDomain& d,
                                                 const EvansRun& run, double p,
                                                 std::span<const double> t_list,
                                                 const SolverOptions& opt) {
    if (run.levels.empty()) throw invalid_range("run has no levels");
    std::vector<AsymptoticsRow> rows;
    const double trusted = 0.8 * (double)run.n_max;
    RadialReduction rad(d, p);
    const double M = run.ring_max;

    for (double t : t_list) {
        if (!(t > 0.0) || t > trusted)
            throw range_error("level outside the trusted region (0, 0.8 n_max]");
        AsymptoticsRow row;
        row.t = t;

        std::vector<std::uint32_t> zeros;
        std::size_t inside = 0;
        for (std::size_t i = 0; i < d.node_count(); ++i) {
            if (run.field[i] >= t)
                zeros.push_back((std::uint32_t)i);
            else
                ++inside;
        }
        if (zeros.empty() || inside <= run.compactum.size())
            throw range_error("condenser degenerates at this level");
        row.capacity = condenser_capacity(d, run.compactum, zeros, p, opt).value;
        row.normalized = std::pow(t, p - 1.0) * row.capacity;

        row.lower_env = t > M ? std::pow((t - M) / t, p) * std::pow(t, p - 1.0) *
                                    rad.ring_capacity(t, p, opt)
                              : 0.0;
        if (t > M) {
            row.upper_env =
                std::pow(t, p - 1.0) * rad.ring_capacity(t - M, p, opt);
            row.enveloped = row.normalized <= row.upper_env * 1.25 &&
                            row.normalized >= row.lower_env * 0.8;
        } else {
            row.upper_env = std::numeric_limits<double>::infinity();
            row.enveloped = true; // below the ring maximum the chain is vacuous
        }
        rows.push_back(row);
    }
    return rows;
}

} // namespace potlab
