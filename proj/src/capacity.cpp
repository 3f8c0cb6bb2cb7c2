#include "potlab/capacity.hpp"

#include "potlab/errors.hpp"

#include <algorithm>
#include <cmath>

namespace potlab {
namespace {

std::vector<char> mark(const DiscreteDomain& d, std::span<const std::uint32_t> ns) {
    std::vector<char> m(d.node_count(), 0);
    for (auto n : ns) {
        if (n >= d.node_count()) throw invalid_range("node id out of range");
        m[n] = 1;
    }
    return m;
}

} // namespace

CapacityResult condenser_capacity(const DiscreteDomain& d,
                                  std::span<const std::uint32_t> ones,
                                  std::span<const std::uint32_t> zeros, double p,
                                  const SolverOptions& opt) {
    if (ones.empty() || zeros.empty())
        throw invalid_condenser("condenser needs nonempty compactum and ground");
    auto mo = mark(d, ones);
    for (auto z : zeros)
        if (mo[z]) throw invalid_condenser("compactum and ground overlap");
    PinnedValues pv;
    pv.pin_all(ones, 1.0);
    pv.pin_all(zeros, 0.0);
    auto res = solve_dirichlet(d, pv, p, opt);
    CapacityResult out;
    out.value = res.report.energy;
    out.potential = std::move(res.field);
    out.report = res.report;
    return out;
}

CapacityResult capacity(const DiscreteDomain& d, std::span<const std::uint32_t> compactum,
                        double p, const SolverOptions& opt) {
    auto outer = d.outer_nodes();
    auto mo = mark(d, outer);
    for (auto k : compactum)
        if (mo[k]) throw invalid_condenser("compactum touches the outer boundary");
    return condenser_capacity(d, compactum, outer, p, opt);
}

ScalingCheck sublevel_scaling_check(const DiscreteDomain& d, const CapacityResult& r,
                                    double t, double s, double p,
                                    const SolverOptions& opt) {
    if (!(0.0 <= t && t < s && s <= 1.0))
        throw invalid_range("scaling check needs 0 <= t < s <= 1");
    std::vector<std::uint32_t> ones, zeros;
    std::size_t between = 0;
    for (std::size_t i = 0; i < d.node_count(); ++i) {
        const double h = r.potential[i];
        if (h >= s)
            ones.push_back((std::uint32_t)i);
        else if (h <= t)
            zeros.push_back((std::uint32_t)i);
        else
            ++between;
    }
    if (ones.empty() || zeros.empty() || between == 0)
        throw degenerate_levels("no region between the requested levels");
    ScalingCheck out;
    out.t = t;
    out.s = s;
    out.ones_count = ones.size();
    out.zeros_count = zeros.size();
    out.measured = condenser_capacity(d, ones, zeros, p, opt).value;
    out.predicted = r.value / std::pow(s - t, p - 1.0);
    out.ratio = out.measured / out.predicted;
    return out;
}

std::vector<DecayEntry> capacity_decay(const DiscreteDomain& d,
                                       std::span<const std::uint32_t> compactum,
                                       const Exhaustion& ex, double p,
                                       const SolverOptions& opt) {
    for (auto k : compactum)
        if (!ex.contains(0, k))
            throw invalid_condenser("compactum must lie inside the first exhaustion set");
    std::vector<DecayEntry> out;
    SolverOptions o = opt;
    ScalarField warm;
    for (std::size_t k = 0; k < ex.levels(); ++k) {
        std::vector<std::uint32_t> zeros;
        double rmax = 0.0;
        for (std::size_t i = 0; i < d.node_count(); ++i) {
            if (!ex.contains(k, (std::uint32_t)i))
                zeros.push_back((std::uint32_t)i);
            else
                rmax = std::max(rmax, d.node_r(i));
        }
        if (zeros.empty()) zeros = d.outer_nodes(); // top set covers the grid
        auto res = condenser_capacity(d, compactum, zeros, p, o);
        out.push_back({k, rmax, res.value});
        warm = std::move(res.potential);
        o.warm_start = &warm;
    }
    return out;
}

CapacityLimit capacity_limit(const DiscreteDomain& d,
                             std::span<const std::uint32_t> compactum,
                             const Exhaustion& ex, double p, const SolverOptions& opt) {
    CapacityLimit out;
    out.sequence = capacity_decay(d, compactum, ex, p, opt);
    const double c0 = out.sequence.front().capacity;
    out.value = out.sequence.back().capacity;
    for (std::size_t k = 0; k + 1 < out.sequence.size(); ++k) {
        if (std::fabs(out.sequence[k].capacity - out.sequence[k + 1].capacity) <
            1e-6 * c0) {
            out.value = out.sequence[k + 1].capacity;
            out.converged = true;
            break;
        }
    }
    return out;
}

} // namespace potlab
