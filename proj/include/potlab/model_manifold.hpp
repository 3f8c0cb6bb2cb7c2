#pragma once

#include <span>
#include <string>
#include <vector>

namespace potlab {

enum class AreaForm { euclidean, hyperbolic, power, logpower, table };

enum class Parabolicity { parabolic, nonparabolic, inconclusive };

struct ParabolicityReport {
    Parabolicity verdict = Parabolicity::inconclusive;
    std::string reason;     // symbolic exponent test, human readable
    double rmax_probed = 0; // evidence: largest cutoff integrated to
    double f_at_rmax = 0;
    double tail_estimate = 0; // Richardson-style; inf when the probes diverge
};

/// Sampled radial profile r_0 < r_1 < ... with values f(r_i); values are
/// nondecreasing since the defining integrand is positive.
struct RadialProfile {
    std::vector<double> grid;
    std::vector<double> values;
    double p = 2.0;
};

struct EvansLevelCheck {
    double t = 0;
    double radius = 0;          // R with f(R) = t
    double energy_integral = 0; // quadrature of the gradient-power volume integral
    double energy_expected = 0; // omega * t
    double cap_value = 0;       // annulus capacity of (B_rbar, {E < t}); inf at t = 0
    double cap_expected = 0;    // omega * t^(1-p)
};

struct RadialEvansResult {
    RadialProfile profile;
    std::vector<EvansLevelCheck> levels;
};

/// Spherically symmetric manifold given by dimension and radial area
/// function A(r). Immutable after construction; all queries are pure.
class ModelManifold {
public:
    /// Named forms parse from strings: "euclidean:n=3", "hyperbolic:n=2",
    /// "power:n=2,alpha=1.5", "logpower:n=2,alpha=1,beta=2",
    /// "table:path.csv" (optionally ",n=2"). Two-column CSV, header row
    /// required.
    static ModelManifold parse(const std::string& spec, double base_radius = 1.0,
                               double quad_tol = 1e-10);

    static ModelManifold euclidean(int n, double base_radius = 1.0, double quad_tol = 1e-10);
    static ModelManifold hyperbolic(int n, double base_radius = 1.0, double quad_tol = 1e-10);
    static ModelManifold power(int n, double alpha, double base_radius = 1.0,
                               double quad_tol = 1e-10);
    static ModelManifold logpower(int n, double alpha, double beta, double base_radius = 1.0,
                                  double quad_tol = 1e-10);
    /// Table form; interpolates monotone-cubically in (log r, log A) and
    /// refuses queries outside the tabulated range.
    static ModelManifold from_table(std::vector<double> r, std::vector<double> a, int n = 2,
                                    double base_radius = 1.0, double quad_tol = 1e-10);

    int dimension() const { return n_; }
    double base_radius() const { return rbar_; }
    double quad_tol() const { return quad_tol_; }
    AreaForm form() const { return form_; }
    std::string describe() const;

    /// A(r); throws table-range for table forms queried outside the table.
    double area(double r) const;

    /// log A(r), exact where A(r) itself would overflow a double (needed by
    /// the strongly graded grids, whose face weights are assembled in log
    /// space).
    double log_area(double r) const;

    /// omega_{n-1}, the (n-1)-sphere area constant carried by all volume
    /// integrals in this project.
    double sphere_area() const { return omega_; }

    /// f_{p,a}(r) = integral over [a, r] of A^(-1/(p-1)); anchor defaults
    /// to the base radius. Requires p > 1 and r >= a >= base_radius.
    double radial_p_harmonic(double p, double r) const;
    double radial_p_harmonic_from(double p, double a, double r) const;

    /// Cumulative profile of f_{p,rbar} on an increasing grid starting at
    /// the base radius (one cell-wise quadrature per interval).
    RadialProfile radial_profile(double p, std::span<const double> grid) const;

    /// Divergence test for f_{p,rbar}(infinity): symbolic exponent test for
    /// named forms, inconclusive for tables (tail behavior unbounded).
    ParabolicityReport classify_parabolicity(double p) const;

    /// omega * f_{p,a}(b)^(1-p) for base_radius <= a < b.
    double annulus_capacity(double p, double a, double b) const;

    /// Limit b -> infinity of annulus_capacity: 0 in the parabolic case,
    /// omega * f_{p,a}(inf)^(1-p) otherwise; error for table forms.
    double capacity_to_infinity(double p, double a) const;

    /// R such that f_{p,rbar}(R) = t (t >= 0).
    double evans_radius(double p, double t) const;

    /// Radial Evans potential E = f_{p,rbar} with per-level quadrature checks
    /// of the energy identity and the capacity identity. Requires a
    /// parabolic (m, p) pair.
    RadialEvansResult radial_evans(double p, std::span<const double> levels,
                                   int profile_points = 257) const;

private:
    ModelManifold() = default;

    AreaForm form_ = AreaForm::euclidean;
    int n_ = 2;
    double alpha_ = 0, beta_ = 0;
    double rbar_ = 1.0;
    double omega_ = 0;
    double quad_tol_ = 1e-10;
    // table form: monotone cubic in log-log
    std::vector<double> tx_, ty_, tm_;

    void finish_init();
};

} // namespace potlab
