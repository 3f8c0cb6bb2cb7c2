#include "potlab/discrete_domain.hpp"

#include "potlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace potlab {
namespace {

// radii of a graded grid: cell sizes scale by `ratio` toward r_max
std::vector<double> graded_radii(double a, double b, int m, double ratio) {
    if (!(ratio > 0.0)) throw invalid_range("grading ratio must be > 0");
    std::vector<double> r(m + 1);
    r[0] = a;
    if (std::fabs(ratio - 1.0) < 1e-14) {
        for (int i = 1; i <= m; ++i) r[i] = a + (b - a) * i / m;
    } else {
        // dr_0 * (ratio^m - 1)/(ratio - 1) = b - a, in log space for big m
        const double lr = std::log(ratio);
        const double lsum = m * lr + std::log1p(-std::exp(-m * lr)) - std::log(ratio - 1.0);
        for (int i = 1; i < m; ++i) {
            const double lpart =
                i * lr + std::log1p(-std::exp(-i * lr)) - std::log(ratio - 1.0);
            r[i] = a + (b - a) * std::exp(lpart - lsum);
        }
    }
    r[m] = b;
    return r;
}

} // namespace

DiscreteDomain DiscreteDomain::build_radial_grid(const ModelManifold& m, double p_hint,
                                                 double r_max, int cells,
                                                 double grading_ratio) {
    (void)p_hint; // weights assemble per-p from logs; the hint is accepted
                  // for callers that want to record intent
    if (!(r_max > m.base_radius())) throw invalid_range("r_max must exceed base radius");
    if (cells < 1) throw invalid_range("need at least one cell");

    DiscreteDomain d(m);
    d.kind_ = DomainKind::radial1d;
    d.nr_ = cells;
    d.r_ = graded_radii(m.base_radius(), r_max, cells, grading_ratio);
    d.tag_.assign(cells + 1, BoundaryTag::none);
    d.tag_.front() = BoundaryTag::inner;
    d.tag_.back() = BoundaryTag::outer;

    const double lomega = std::log(m.sphere_area());
    d.fa_.resize(cells);
    d.fb_.resize(cells);
    d.flv_.resize(cells);
    d.flc_.resize(cells);
    double h = 0.0;
    for (int i = 0; i < cells; ++i) {
        const double dr = d.r_[i + 1] - d.r_[i];
        if (!(dr > 0.0)) throw invalid_range("node radii must strictly increase");
        const double ldr = std::log(dr);
        d.fa_[i] = i + 1;
        d.fb_[i] = i;
        d.flv_[i] = lomega + m.log_area(0.5 * (d.r_[i] + d.r_[i + 1])) + ldr;
        d.flc_[i] = -ldr;
        h = std::max(h, dr);
    }
    d.mesh_size_ = h;
    return d;
}

DiscreteDomain DiscreteDomain::build_surface_grid(const ModelManifold& m, double r_max,
                                                  int cells_r, int cells_theta,
                                                  double grading_ratio) {
    if (m.dimension() != 2)
        throw unsupported_dimension("surface grids cover dimension 2 models only");
    if (!(r_max > m.base_radius())) throw invalid_range("r_max must exceed base radius");
    if (cells_r < 1) throw invalid_range("need at least one radial cell");
    if (cells_theta < 8 || cells_theta % 2 != 0)
        throw invalid_range("angular resolution must be even and >= 8");

    DiscreteDomain d(m);
    d.kind_ = DomainKind::surface2d;
    d.nr_ = cells_r;
    d.nth_ = cells_theta;
    const auto radii = graded_radii(m.base_radius(), r_max, cells_r, grading_ratio);
    const double dth = 2.0 * std::numbers::pi / cells_theta;
    const double ldth = std::log(dth);

    const std::size_t nn = (std::size_t)(cells_r + 1) * cells_theta;
    d.r_.resize(nn);
    d.theta_.resize(nn);
    d.tag_.assign(nn, BoundaryTag::none);
    for (int i = 0; i <= cells_r; ++i) {
        for (int j = 0; j < cells_theta; ++j) {
            const std::size_t id = (std::size_t)i * cells_theta + j;
            d.r_[id] = radii[i];
            d.theta_[id] = dth * j;
            if (i == 0) d.tag_[id] = BoundaryTag::inner;
            if (i == cells_r) d.tag_[id] = BoundaryTag::outer;
        }
    }

    const std::size_t nfr = (std::size_t)cells_r * cells_theta;
    const std::size_t nft = (std::size_t)(cells_r + 1) * cells_theta;
    d.fa_.reserve(nfr + nft);
    d.fb_.reserve(nfr + nft);
    d.flv_.reserve(nfr + nft);
    d.flc_.reserve(nfr + nft);
    double h = 0.0;

    // radial faces: (i,j) -- (i+1,j), c = 1/dr, vol = A(mid) dr dtheta
    for (int i = 0; i < cells_r; ++i) {
        const double dr = radii[i + 1] - radii[i];
        const double ldr = std::log(dr);
        const double lvol = m.log_area(0.5 * (radii[i] + radii[i + 1])) + ldr + ldth;
        for (int j = 0; j < cells_theta; ++j) {
            d.fa_.push_back((std::uint32_t)((std::size_t)(i + 1) * cells_theta + j));
            d.fb_.push_back((std::uint32_t)((std::size_t)i * cells_theta + j));
            d.flv_.push_back(lvol);
            d.flc_.push_back(-ldr);
        }
        h = std::max(h, dr);
    }

    // angular faces: (i,j) -- (i,j+1 mod), c = 1/(A(r_i) dtheta),
    // vol = A(r_i) drbar dtheta with the node-centered radial width
    for (int i = 0; i <= cells_r; ++i) {
        const double below = i > 0 ? radii[i] - radii[i - 1] : 0.0;
        const double above = i < cells_r ? radii[i + 1] - radii[i] : 0.0;
        const double drbar = 0.5 * (below + above);
        const double la = m.log_area(radii[i]);
        const double lvol = la + std::log(drbar) + ldth;
        const double lc = -(la + ldth);
        for (int j = 0; j < cells_theta; ++j) {
            d.fa_.push_back((std::uint32_t)((std::size_t)i * cells_theta + (j + 1) % cells_theta));
            d.fb_.push_back((std::uint32_t)((std::size_t)i * cells_theta + j));
            d.flv_.push_back(lvol);
            d.flc_.push_back(lc);
        }
        h = std::max(h, m.area(radii[i]) * dth); // arc length of angular step
    }
    d.mesh_size_ = h;
    return d;
}

std::uint32_t DiscreteDomain::node_id(int ir, int itheta) const {
    if (kind_ == DomainKind::radial1d) return (std::uint32_t)ir;
    const int j = ((itheta % nth_) + nth_) % nth_;
    return (std::uint32_t)((std::size_t)ir * nth_ + j);
}

std::vector<std::uint32_t> DiscreteDomain::inner_nodes() const {
    std::vector<std::uint32_t> out;
    for (std::size_t i = 0; i < tag_.size(); ++i)
        if (tag_[i] == BoundaryTag::inner) out.push_back((std::uint32_t)i);
    return out;
}

std::vector<std::uint32_t> DiscreteDomain::outer_nodes() const {
    std::vector<std::uint32_t> out;
    for (std::size_t i = 0; i < tag_.size(); ++i)
        if (tag_[i] == BoundaryTag::outer) out.push_back((std::uint32_t)i);
    return out;
}

DiscreteDomain::FaceWeights DiscreteDomain::face_weights(double p) const {
    FaceWeights fw;
    const std::size_t m = fa_.size();
    fw.w.resize(m);
    fw.sigma2.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        fw.w[i] = std::exp(flv_[i] + p * flc_[i]);
        const double ls2 = -2.0 * flc_[i];
        fw.sigma2[i] = ls2 > 690.0 ? 1e300 : std::exp(ls2);
    }
    return fw;
}

double DiscreteDomain::total_volume() const {
    double v = 0.0;
    for (double lv : flv_) v += std::exp(lv);
    return v;
}

std::vector<std::uint32_t> sublevel_region(const ScalarField& u, double t, bool strict) {
    std::vector<std::uint32_t> out;
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        const double v = u.values[i];
        if (!std::isfinite(v)) throw invalid_range("sublevel region needs finite field");
        if (strict ? v < t : v <= t) out.push_back((std::uint32_t)i);
    }
    return out;
}

Exhaustion Exhaustion::from_sublevels(const ScalarField& level_field,
                                      std::vector<double> thresholds) {
    if (thresholds.empty()) throw invalid_range("exhaustion needs thresholds");
    for (std::size_t k = 1; k < thresholds.size(); ++k)
        if (!(thresholds[k] > thresholds[k - 1]))
            throw invalid_range("exhaustion thresholds must strictly increase");
    Exhaustion e;
    e.level_.assign(level_field.values.begin(), level_field.values.end());
    e.tau_ = std::move(thresholds);
    return e;
}

Exhaustion Exhaustion::from_sets(const DiscreteDomain& d,
                                 const std::vector<std::vector<std::uint32_t>>& sets) {
    if (sets.empty()) throw invalid_range("exhaustion needs at least one set");
    Exhaustion e;
    e.level_.assign(d.node_count(), (double)sets.size());
    for (std::size_t k = sets.size(); k-- > 0;)
        for (auto n : sets[k]) e.level_[n] = (double)k;
    e.tau_.resize(sets.size());
    for (std::size_t k = 0; k < sets.size(); ++k) e.tau_[k] = (double)k;
    return e;
}

std::vector<std::uint32_t> Exhaustion::set(std::size_t k) const {
    std::vector<std::uint32_t> out;
    for (std::size_t i = 0; i < level_.size(); ++i)
        if (level_[i] <= tau_[k]) out.push_back((std::uint32_t)i);
    return out;
}

void Exhaustion::validate(const DiscreteDomain& d) const {
    if (level_.size() != d.node_count())
        throw invalid_range("exhaustion level field does not match domain");
    std::size_t prev = 0;
    for (std::size_t k = 0; k < tau_.size(); ++k) {
        std::size_t cnt = 0;
        for (double v : level_)
            if (v <= tau_[k]) ++cnt;
        if (k > 0 && cnt <= prev) throw invalid_range("exhaustion sets must strictly nest");
        prev = cnt;
    }
    for (auto n : d.inner_nodes())
        if (!contains(0, n))
            throw invalid_range("first exhaustion set must contain the inner boundary");
    if (prev != d.node_count())
        throw invalid_range("last exhaustion set must cover the domain");
}

} // namespace potlab
