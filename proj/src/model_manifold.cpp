#include "potlab/model_manifold.hpp"

#include "potlab/errors.hpp"
#include "potlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace potlab {
namespace {

double parse_named_value(const std::string& kv, const std::string& key) {
    auto pos = kv.find('=');
    if (pos == std::string::npos || kv.substr(0, pos) != key)
        throw parse_error("expected '" + key + "=<value>', got '" + kv + "'");
    try {
        return std::stod(kv.substr(pos + 1));
    } catch (const std::exception&) {
        throw parse_error("bad numeric value in '" + kv + "'");
    }
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    return out;
}

// Fritsch-Carlson monotone cubic slopes for data (x_i, y_i), x increasing.
std::vector<double> monotone_slopes(const std::vector<double>& x,
                                    const std::vector<double>& y) {
    const std::size_t n = x.size();
    std::vector<double> d(n - 1), m(n);
    for (std::size_t i = 0; i + 1 < n; ++i) d[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
    m[0] = d[0];
    m[n - 1] = d[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i)
        m[i] = (d[i - 1] * d[i] <= 0.0) ? 0.0 : 0.5 * (d[i - 1] + d[i]);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (d[i] == 0.0) {
            m[i] = m[i + 1] = 0.0;
            continue;
        }
        const double a = m[i] / d[i], b = m[i + 1] / d[i];
        const double s = a * a + b * b;
        if (s > 9.0) {
            const double tau = 3.0 / std::sqrt(s);
            m[i] = tau * a * d[i];
            m[i + 1] = tau * b * d[i];
        }
    }
    return m;
}

} // namespace

void ModelManifold::finish_init() {
    if (n_ < 2) throw invalid_range("dimension must be >= 2");
    if (!(rbar_ > 0.0)) throw invalid_range("base_radius must be > 0");
    if (!(quad_tol_ > 0.0)) throw invalid_range("quad_tol must be > 0");
    omega_ = 2.0 * std::pow(std::numbers::pi, 0.5 * n_) / std::tgamma(0.5 * n_);
    // base radius must be queryable
    const double a0 = area(rbar_);
    if (!(a0 > 0.0) || !std::isfinite(a0))
        throw invalid_range("area function not positive/finite at base radius");
}

ModelManifold ModelManifold::euclidean(int n, double rbar, double tol) {
    ModelManifold m;
    m.form_ = AreaForm::euclidean;
    m.n_ = n;
    m.rbar_ = rbar;
    m.quad_tol_ = tol;
    m.finish_init();
    return m;
}

ModelManifold ModelManifold::hyperbolic(int n, double rbar, double tol) {
    ModelManifold m;
    m.form_ = AreaForm::hyperbolic;
    m.n_ = n;
    m.rbar_ = rbar;
    m.quad_tol_ = tol;
    m.finish_init();
    return m;
}

ModelManifold ModelManifold::power(int n, double alpha, double rbar, double tol) {
    ModelManifold m;
    m.form_ = AreaForm::power;
    m.n_ = n;
    m.alpha_ = alpha;
    m.rbar_ = rbar;
    m.quad_tol_ = tol;
    m.finish_init();
    return m;
}

ModelManifold ModelManifold::logpower(int n, double alpha, double beta, double rbar,
                                      double tol) {
    ModelManifold m;
    m.form_ = AreaForm::logpower;
    m.n_ = n;
    m.alpha_ = alpha;
    m.beta_ = beta;
    m.rbar_ = rbar;
    m.quad_tol_ = tol;
    m.finish_init();
    return m;
}

ModelManifold ModelManifold::from_table(std::vector<double> r, std::vector<double> a,
                                        int n, double rbar, double tol) {
    if (r.size() != a.size() || r.size() < 4)
        throw parse_error("table needs >= 4 matching (r, A) rows");
    ModelManifold m;
    m.form_ = AreaForm::table;
    m.n_ = n;
    m.rbar_ = rbar;
    m.quad_tol_ = tol;
    m.tx_.resize(r.size());
    m.ty_.resize(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (!(r[i] > 0.0) || !(a[i] > 0.0))
            throw parse_error("table rows must have r > 0 and A > 0");
        if (i > 0 && r[i] <= r[i - 1]) throw parse_error("table radii must increase");
        m.tx_[i] = std::log(r[i]);
        m.ty_[i] = std::log(a[i]);
    }
    m.tm_ = monotone_slopes(m.tx_, m.ty_);
    if (rbar < r.front() || rbar > r.back())
        throw table_range("base_radius outside tabulated range");
    m.finish_init();
    return m;
}

ModelManifold ModelManifold::parse(const std::string& spec, double rbar, double tol) {
    const auto pos = spec.find(':');
    if (pos == std::string::npos) throw parse_error("manifold spec needs '<form>:<params>'");
    const std::string form = spec.substr(0, pos);
    const std::string rest = spec.substr(pos + 1);
    if (form == "euclidean" || form == "hyperbolic") {
        const int n = (int)parse_named_value(rest, "n");
        return form == "euclidean" ? euclidean(n, rbar, tol) : hyperbolic(n, rbar, tol);
    }
    if (form == "power") {
        auto kv = split(rest, ',');
        if (kv.size() != 2) throw parse_error("power form needs n=<int>,alpha=<real>");
        return power((int)parse_named_value(kv[0], "n"), parse_named_value(kv[1], "alpha"),
                     rbar, tol);
    }
    if (form == "logpower") {
        auto kv = split(rest, ',');
        if (kv.size() != 3)
            throw parse_error("logpower form needs n=<int>,alpha=<real>,beta=<real>");
        return logpower((int)parse_named_value(kv[0], "n"), parse_named_value(kv[1], "alpha"),
                        parse_named_value(kv[2], "beta"), rbar, tol);
    }
    if (form == "table") {
        auto kv = split(rest, ',');
        const std::string path = kv[0];
        int n = 2;
        if (kv.size() > 1) n = (int)parse_named_value(kv[1], "n");
        std::ifstream in(path);
        if (!in) throw parse_error("cannot open table file '" + path + "'");
        std::string line;
        if (!std::getline(in, line)) throw parse_error("empty table file");
        // header row required
        if (line.find_first_not_of("rA, \t\"") != std::string::npos &&
            (std::isdigit((unsigned char)line[0]) || line[0] == '.' || line[0] == '-'))
            throw parse_error("table file must start with a header row");
        std::vector<double> rs, as;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            auto cols = split(line, ',');
            if (cols.size() != 2) throw parse_error("table rows must be 'r,A'");
            rs.push_back(std::stod(cols[0]));
            as.push_back(std::stod(cols[1]));
        }
        return from_table(std::move(rs), std::move(as), n, rbar, tol);
    }
    throw parse_error("unknown area form '" + form + "'");
}

std::string ModelManifold::describe() const {
    std::ostringstream o;
    switch (form_) {
    case AreaForm::euclidean: o << "euclidean:n=" << n_; break;
    case AreaForm::hyperbolic: o << "hyperbolic:n=" << n_; break;
    case AreaForm::power: o << "power:n=" << n_ << ",alpha=" << alpha_; break;
    case AreaForm::logpower:
        o << "logpower:n=" << n_ << ",alpha=" << alpha_ << ",beta=" << beta_;
        break;
    case AreaForm::table: o << "table:<" << tx_.size() << " rows>,n=" << n_; break;
    }
    return o.str();
}

double ModelManifold::area(double r) const {
    if (!(r > 0.0)) throw invalid_range("area query needs r > 0");
    switch (form_) {
    case AreaForm::euclidean: return std::pow(r, n_ - 1);
    case AreaForm::hyperbolic: return std::pow(std::sinh(r), n_ - 1);
    case AreaForm::power: return std::pow(r, alpha_);
    case AreaForm::logpower: return std::pow(r, alpha_) * std::pow(std::log1p(r), beta_);
    case AreaForm::table: {
        const double x = std::log(r);
        if (x < tx_.front() - 1e-12 || x > tx_.back() + 1e-12)
            throw table_range("area query outside tabulated range (no extrapolation)");
        auto it = std::upper_bound(tx_.begin(), tx_.end(), x);
        std::size_t i = it == tx_.begin() ? 0 : (std::size_t)(it - tx_.begin()) - 1;
        i = std::min(i, tx_.size() - 2);
        const double h = tx_[i + 1] - tx_[i];
        const double t = std::clamp((x - tx_[i]) / h, 0.0, 1.0);
        const double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
        const double h10 = t * (1 - t) * (1 - t);
        const double h01 = t * t * (3 - 2 * t);
        const double h11 = t * t * (t - 1);
        const double y =
            h00 * ty_[i] + h * h10 * tm_[i] + h01 * ty_[i + 1] + h * h11 * tm_[i + 1];
        return std::exp(y);
    }
    }
    return 0.0; // unreachable
}

double ModelManifold::log_area(double r) const {
    if (!(r > 0.0)) throw invalid_range("area query needs r > 0");
    switch (form_) {
    case AreaForm::euclidean: return (n_ - 1) * std::log(r);
    case AreaForm::hyperbolic:
        // log sinh(r) = r + log((1 - e^(-2r))/2), stable for large r
        return (n_ - 1) * (r + std::log1p(-std::exp(-2.0 * r)) - std::log(2.0));
    case AreaForm::power: return alpha_ * std::log(r);
    case AreaForm::logpower:
        return alpha_ * std::log(r) + beta_ * std::log(std::log1p(r));
    case AreaForm::table: return std::log(area(r));
    }
    return 0.0; // unreachable
}

double ModelManifold::radial_p_harmonic_from(double p, double a, double r) const {
    if (!(p > 1.0)) throw invalid_range("p must be > 1");
    if (a < rbar_ * (1.0 - 1e-14)) throw invalid_range("anchor below base radius");
    if (r < a) throw invalid_range("radial_p_harmonic needs r >= anchor");
    if (r == a) return 0.0;
    const double e = -1.0 / (p - 1.0);
    QuadOptions opt;
    opt.rel_tol = quad_tol_;
    return integrate([this, e](double t) { return std::pow(area(t), e); }, a, r, opt).value;
}

double ModelManifold::radial_p_harmonic(double p, double r) const {
    return radial_p_harmonic_from(p, rbar_, r);
}

RadialProfile ModelManifold::radial_profile(double p, std::span<const double> grid) const {
    if (grid.empty() || std::fabs(grid.front() - rbar_) > 1e-12 * rbar_)
        throw invalid_range("profile grid must start at the base radius");
    RadialProfile prof;
    prof.p = p;
    prof.grid.assign(grid.begin(), grid.end());
    prof.values.resize(grid.size());
    prof.values[0] = 0.0;
    const double e = -1.0 / (p - 1.0);
    QuadOptions opt;
    opt.rel_tol = quad_tol_;
    opt.left_grading = 2;
    double acc = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (grid[i] <= grid[i - 1]) throw invalid_range("profile grid must increase");
        acc += integrate([this, e](double t) { return std::pow(area(t), e); }, grid[i - 1],
                         grid[i], opt)
                   .value;
        prof.values[i] = acc;
    }
    return prof;
}

ParabolicityReport ModelManifold::classify_parabolicity(double p) const {
    if (!(p > 1.0)) throw invalid_range("p must be > 1");
    ParabolicityReport rep;
    const double pm1 = p - 1.0;
    const double borderline_tol = 1e-12;
    switch (form_) {
    case AreaForm::euclidean: {
        const double e = (n_ - 1) / pm1;
        rep.verdict = e <= 1.0 + borderline_tol ? Parabolicity::parabolic
                                                : Parabolicity::nonparabolic;
        rep.reason = "integrand ~ r^(-(n-1)/(p-1)); diverges iff (n-1)/(p-1) <= 1";
        break;
    }
    case AreaForm::power: {
        const double e = alpha_ / pm1;
        rep.verdict = e <= 1.0 + borderline_tol ? Parabolicity::parabolic
                                                : Parabolicity::nonparabolic;
        rep.reason = "integrand ~ r^(-alpha/(p-1)); diverges iff alpha/(p-1) <= 1";
        break;
    }
    case AreaForm::logpower: {
        const double e = alpha_ / pm1;
        if (e < 1.0 - borderline_tol)
            rep.verdict = Parabolicity::parabolic;
        else if (e > 1.0 + borderline_tol)
            rep.verdict = Parabolicity::nonparabolic;
        else
            rep.verdict = beta_ / pm1 <= 1.0 + borderline_tol ? Parabolicity::parabolic
                                                              : Parabolicity::nonparabolic;
        rep.reason = "r^(-alpha/(p-1)) log^(-beta/(p-1)) tail test";
        break;
    }
    case AreaForm::hyperbolic:
        rep.verdict = Parabolicity::nonparabolic;
        rep.reason = "integrand decays exponentially for every p > 1";
        break;
    case AreaForm::table:
        rep.verdict = Parabolicity::inconclusive;
        rep.reason = "tabulated area: tail behavior cannot be bounded beyond the table";
        break;
    }

    // numeric evidence: f at growing cutoffs plus a Richardson-style ratio
    // extrapolation of the remaining tail
    const double e = -1.0 / pm1;
    QuadOptions opt;
    opt.rel_tol = std::max(quad_tol_, 1e-9);
    double hi = rbar_;
    double f = 0.0;
    double d1 = 0.0, d2 = 0.0;
    const double cap = form_ == AreaForm::table ? std::exp(tx_.back()) : rbar_ * 1048576.0;
    for (int k = 0; k < 40 && hi < cap; ++k) {
        const double next = std::min(hi * 2.0, cap);
        const double inc =
            integrate([this, e](double t) { return std::pow(area(t), e); }, hi, next, opt)
                .value;
        f += inc;
        d1 = d2;
        d2 = inc;
        hi = next;
    }
    rep.rmax_probed = hi;
    rep.f_at_rmax = f;
    if (d1 > 0.0 && d2 < d1 * 0.999) {
        const double rho = d2 / d1;
        rep.tail_estimate = d2 * rho / (1.0 - rho);
    } else {
        rep.tail_estimate = std::numeric_limits<double>::infinity();
    }
    return rep;
}

double ModelManifold::annulus_capacity(double p, double a, double b) const {
    if (!(a < b)) throw invalid_annulus("annulus needs a < b");
    const double f = radial_p_harmonic_from(p, a, b);
    return omega_ * std::pow(f, 1.0 - p);
}

double ModelManifold::capacity_to_infinity(double p, double a) const {
    if (form_ == AreaForm::table)
        throw table_range("capacity to infinity undefined for tabulated area");
    if (classify_parabolicity(p).verdict == Parabolicity::parabolic) return 0.0;
    if (a < rbar_ * (1.0 - 1e-14)) throw invalid_range("anchor below base radius");
    const double e = -1.0 / (p - 1.0);
    QuadOptions opt;
    opt.rel_tol = quad_tol_;
    const double f =
        integrate_to_infinity([this, e](double t) { return std::pow(area(t), e); }, a, opt)
            .value;
    return omega_ * std::pow(f, 1.0 - p);
}

double ModelManifold::evans_radius(double p, double t) const {
    if (t < 0.0) throw invalid_range("level must be >= 0");
    if (t == 0.0) return rbar_;
    const double e = -1.0 / (p - 1.0);
    QuadOptions opt;
    opt.rel_tol = quad_tol_;
    opt.left_grading = 2;
    auto inc = [&](double lo, double hi) {
        return integrate([this, e](double r) { return std::pow(area(r), e); }, lo, hi, opt)
            .value;
    };
    double lo = rbar_, flo = 0.0;
    double hi = rbar_ * 2.0;
    double fhi = inc(lo, hi);
    while (fhi < t) {
        if (hi > 1e290)
            throw range_error("level unreachable within double radius range");
        lo = hi;
        flo = fhi;
        hi *= 2.0;
        fhi += inc(lo, hi);
    }
    // bisect on [lo, hi]
    for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = flo + inc(lo, mid);
        if (fm < t) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

RadialEvansResult ModelManifold::radial_evans(double p, std::span<const double> levels,
                                              int profile_points) const {
    const auto cls = classify_parabolicity(p);
    if (cls.verdict != Parabolicity::parabolic)
        throw evans_undefined("radial Evans potential needs a parabolic (manifold, p) pair");
    double tmax = 0.0;
    for (double t : levels) {
        if (t < 0.0) throw invalid_range("levels must be >= 0");
        tmax = std::max(tmax, t);
    }
    const double rmax = tmax > 0.0 ? evans_radius(p, tmax) : rbar_ * 2.0;

    RadialEvansResult res;
    std::vector<double> grid(std::max(profile_points, 2));
    const double g = std::pow(rmax / rbar_, 1.0 / (grid.size() - 1));
    for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = rbar_ * std::pow(g, (double)i);
    grid.front() = rbar_;
    grid.back() = rmax;
    res.profile = radial_profile(p, grid);

    const double ep = -p / (p - 1.0); // energy integrand exponent on A
    QuadOptions opt;
    opt.rel_tol = quad_tol_;
    for (double t : levels) {
        EvansLevelCheck c;
        c.t = t;
        c.radius = evans_radius(p, t);
        if (t == 0.0) {
            c.energy_integral = 0.0;
            c.energy_expected = 0.0;
            c.cap_value = std::numeric_limits<double>::infinity();
            c.cap_expected = std::numeric_limits<double>::infinity();
        } else {
            c.energy_integral =
                omega_ * integrate([this, ep](double r) {
                             return std::pow(area(r), ep) * area(r);
                         },
                                   rbar_, c.radius, opt)
                             .value;
            c.energy_expected = omega_ * t;
            c.cap_value = annulus_capacity(p, rbar_, c.radius);
            c.cap_expected = omega_ * std::pow(t, 1.0 - p);
            const double tol = std::max(quad_tol_, 1e-12);
            if (std::fabs(c.energy_integral / c.energy_expected - 1.0) > tol ||
                std::fabs(c.cap_value / c.cap_expected - 1.0) > tol)
                throw assertion_failure("evans-radial-identity",
                                        "level identities drifted beyond quad_tol");
        }
        res.levels.push_back(c);
    }
    return res;
}

} // namespace potlab
