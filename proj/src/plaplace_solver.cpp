#include "potlab/plaplace_solver.hpp"

#include "potlab/errors.hpp"
#include "potlab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace potlab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class Minimizer {
public:
    Minimizer(const DiscreteDomain& d, double p, const PinnedValues& pins,
              const ScalarField* lower)
        : d_(d), p_(p), q_(0.5 * p), qm1_(0.5 * (p - 2.0)), fw_(d.face_weights(p)),
          K_(kernels::active()) {
        if (!(p > 1.0)) throw invalid_range("p must be > 1");
        const std::size_t n = d.node_count();
        const std::size_t m = d.face_count();
        pinned_.assign(n, 0);
        u_.assign(n, 0.0);
        lb_.assign(n, -kInf);
        if (lower != nullptr) {
            if (lower->values.size() != n)
                throw invalid_range("obstacle field does not match domain");
            lb_ = lower->values;
        }
        for (std::size_t k = 0; k < pins.nodes.size(); ++k) {
            const auto i = pins.nodes[k];
            if (i >= n) throw invalid_range("pinned node out of range");
            pinned_[i] = 1;
            u_[i] = pins.values[k];
        }
        aeps_.assign(m, 0.0);
        du_.resize(m);
        fface_.resize(m);
        hface_.resize(m);
        grad_.resize(n);
        diag_.resize(n);
        dir_.resize(n);
        mask_.resize(n);
        cg_r_.resize(n);
        cg_z_.resize(n);
        cg_p_.resize(n);
        cg_ap_.resize(n);
        utrial_.resize(n);
        dutrial_.resize(m);
    }

    bool feasible() const {
        for (std::size_t i = 0; i < u_.size(); ++i)
            if (pinned_[i] && u_[i] < lb_[i] - 1e-15 * std::max(1.0, std::fabs(lb_[i])))
                return false;
        return true;
    }

    void init_start(const ScalarField* warm) {
        double avg = 0.0;
        std::size_t cnt = 0;
        for (std::size_t i = 0; i < u_.size(); ++i)
            if (pinned_[i]) {
                avg += u_[i];
                ++cnt;
            }
        avg = cnt > 0 ? avg / (double)cnt : 0.0;
        for (std::size_t i = 0; i < u_.size(); ++i) {
            if (pinned_[i]) continue;
            double v = warm != nullptr ? warm->values[i] : avg;
            u_[i] = std::max(v, lb_[i]);
        }
    }

    SolveReport run(const SolverOptions& opt) {
        SolveReport rep;
        rep.epsilon = opt.eps_final;
        std::vector<double> stages;
        if (p_ != 2.0 && opt.eps_start > opt.eps_final) {
            for (double e = opt.eps_start; e > opt.eps_final * 1.0001; e *= 1e-2)
                stages.push_back(e);
        }
        stages.push_back(opt.eps_final);

        const double act = 10.0 * opt.tol;
        double res = kInf;
        for (std::size_t s = 0; s < stages.size(); ++s) {
            set_eps(stages[s]);
            const bool last = s + 1 == stages.size();
            const double target = last ? opt.tol : std::max(opt.tol, 1e-5);
            res = newton_loop(target, act, opt, rep.iterations);
        }
        rep.residual = res;
        rep.status = res <= opt.tol ? SolveStatus::converged : SolveStatus::max_iter;
        return rep;
    }

    const std::vector<double>& solution() const { return u_; }

    double unregularized_energy() {
        K_.gather_diff(u_.data(), d_.face_a().data(), d_.face_b().data(), du_.data(),
                       du_.size());
        return K_.energy(fw_.w.data(), du_.data(), nullptr, du_.size(), q_);
    }

private:
    void set_eps(double eps) {
        const double e2 = eps * eps;
        for (std::size_t f = 0; f < aeps_.size(); ++f) {
            const double a = e2 * fw_.sigma2[f];
            aeps_[f] = std::min(a, 1e300);
        }
        eps_ = eps;
    }

    void compute_grad() {
        K_.gather_diff(u_.data(), d_.face_a().data(), d_.face_b().data(), du_.data(),
                       du_.size());
        K_.flux(fw_.w.data(), du_.data(), aeps_.data(), fface_.data(), du_.size(), qm1_);
        std::fill(grad_.begin(), grad_.end(), 0.0);
        const auto fa = d_.face_a();
        const auto fb = d_.face_b();
        for (std::size_t f = 0; f < fface_.size(); ++f) {
            const double g = p_ * fface_[f];
            grad_[fa[f]] += g;
            grad_[fb[f]] -= g;
        }
    }

    // mask: 1 on free nodes off the lower bound (or pushing away from it)
    double residual_and_mask(double act) {
        double s = 0.0;
        for (std::size_t i = 0; i < u_.size(); ++i) {
            if (pinned_[i]) {
                mask_[i] = 0;
                continue;
            }
            const bool at_bound = u_[i] <= lb_[i] + act;
            const double r = at_bound ? std::min(grad_[i], 0.0) : grad_[i];
            mask_[i] = (at_bound && grad_[i] > 0.0) ? 0 : 1;
            s += r * r;
        }
        return std::sqrt(s);
    }

    void compute_hessian_pieces() {
        K_.hess(fw_.w.data(), du_.data(), aeps_.data(), hface_.data(), du_.size(), qm1_);
        std::fill(diag_.begin(), diag_.end(), 0.0);
        const auto fa = d_.face_a();
        const auto fb = d_.face_b();
        double dmax = 0.0;
        for (std::size_t f = 0; f < hface_.size(); ++f) {
            const double h = p_ * hface_[f];
            diag_[fa[f]] += h;
            diag_[fb[f]] += h;
        }
        for (double v : diag_) dmax = std::max(dmax, v);
        diag_floor_ = dmax > 0.0 ? 1e-14 * dmax : 1e-300;
        for (auto& v : diag_) v = std::max(v, diag_floor_);
    }

    void hess_apply(const std::vector<double>& v, std::vector<double>& out) {
        std::fill(out.begin(), out.end(), 0.0);
        const auto fa = d_.face_a();
        const auto fb = d_.face_b();
        for (std::size_t f = 0; f < hface_.size(); ++f) {
            const double hv = p_ * hface_[f] * (v[fa[f]] - v[fb[f]]);
            out[fa[f]] += hv;
            out[fb[f]] -= hv;
        }
        for (std::size_t i = 0; i < out.size(); ++i)
            if (!mask_[i]) out[i] = 0.0;
    }

    // Newton direction into dir_ (zero off-mask). Radial chains solve the
    // reduced tridiagonal system exactly; surface grids run Jacobi-CG.
    void newton_direction(double gnorm, double tol, const SolverOptions& opt) {
        compute_hessian_pieces();
        std::fill(dir_.begin(), dir_.end(), 0.0);
        if (d_.kind() == DomainKind::radial1d) {
            thomas_direction();
            return;
        }
        const double cgtol = p_ == 2.0 ? 0.45 * tol : std::max(0.1 * gnorm, 0.45 * tol);
        cg_direction(cgtol, opt.cg_max);
    }

    // Exact reduced tridiagonal solve; face f joins nodes f and f+1, and
    // fixed neighbors (pinned or active) contribute only to the diagonal,
    // which diag_ already holds in full.
    void thomas_direction() {
        const std::size_t n = u_.size();
        std::vector<double>& cmod = cg_p_; // scratch: super-diagonal
        std::vector<double>& rhs = cg_r_;  // scratch: eliminated rhs
        if (dmod_.size() != n) dmod_.resize(n);
        std::size_t i = 0;
        while (i < n) {
            if (!mask_[i]) {
                ++i;
                continue;
            }
            std::size_t e = i;
            while (e + 1 < n && mask_[e + 1]) ++e;
            for (std::size_t k = i; k <= e; ++k) {
                double b = diag_[k];
                double r = -grad_[k];
                if (k > i) {
                    const double a = -p_ * hface_[k - 1];
                    const double w = a / dmod_[k - 1];
                    b -= w * cmod[k - 1];
                    r -= w * rhs[k - 1];
                }
                dmod_[k] = b;
                cmod[k] = k < e ? -p_ * hface_[k] : 0.0;
                rhs[k] = r;
            }
            dir_[e] = rhs[e] / dmod_[e];
            for (std::size_t k = e; k-- > i;)
                dir_[k] = (rhs[k] - cmod[k] * dir_[k + 1]) / dmod_[k];
            i = e + 1;
        }
    }

    void cg_direction(double cgtol, int cg_max) {
        const std::size_t n = u_.size();
        double rr = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            cg_r_[i] = mask_[i] ? -grad_[i] : 0.0;
            rr += cg_r_[i] * cg_r_[i];
        }
        if (rr == 0.0) return;
        double rho = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            cg_z_[i] = mask_[i] ? cg_r_[i] / diag_[i] : 0.0;
            rho += cg_r_[i] * cg_z_[i];
        }
        cg_p_ = cg_z_;
        for (int it = 0; it < cg_max; ++it) {
            hess_apply(cg_p_, cg_ap_);
            double pap = 0.0;
            for (std::size_t i = 0; i < n; ++i) pap += cg_p_[i] * cg_ap_[i];
            if (!(pap > 0.0)) break;
            const double alpha = rho / pap;
            double rr2 = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                dir_[i] += alpha * cg_p_[i];
                cg_r_[i] -= alpha * cg_ap_[i];
                rr2 += cg_r_[i] * cg_r_[i];
            }
            if (std::sqrt(rr2) <= cgtol) break;
            double rho2 = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                cg_z_[i] = mask_[i] ? cg_r_[i] / diag_[i] : 0.0;
                rho2 += cg_r_[i] * cg_z_[i];
            }
            const double beta = rho2 / rho;
            rho = rho2;
            for (std::size_t i = 0; i < n; ++i) cg_p_[i] = cg_z_[i] + beta * cg_p_[i];
        }
    }

    double shifted_energy(const std::vector<double>& u) {
        K_.gather_diff(u.data(), d_.face_a().data(), d_.face_b().data(), dutrial_.data(),
                       dutrial_.size());
        return K_.energy_shifted(fw_.w.data(), dutrial_.data(), aeps_.data(),
                                 dutrial_.size(), q_);
    }

    double newton_loop(double target, double act, const SolverOptions& opt, int& iters) {
        double res = kInf;
        for (int it = 0; it < opt.max_iter; ++it) {
            compute_grad();
            res = residual_and_mask(act);
            if (res <= target) return res;
            ++iters;
            newton_direction(res, target, opt);

            double dg = 0.0;
            for (std::size_t i = 0; i < u_.size(); ++i) dg += grad_[i] * dir_[i];
            if (dg >= 0.0) { // fall back to a projected gradient step
                for (std::size_t i = 0; i < u_.size(); ++i)
                    dir_[i] = mask_[i] ? -grad_[i] / diag_[i] : 0.0;
                dg = 0.0;
                for (std::size_t i = 0; i < u_.size(); ++i) dg += grad_[i] * dir_[i];
                if (dg >= 0.0) return res; // no descent available
            }

            const double e0 = shifted_energy(u_);
            // Near the minimum the Armijo decrement drops below the rounding
            // noise of e0; accept the plain Newton step there.
            const bool noise = std::fabs(dg) < 1e-13 * std::max(1.0, std::fabs(e0));
            double alpha = 1.0;
            bool accepted = false;
            for (int ls = 0; ls < 60; ++ls) {
                for (std::size_t i = 0; i < u_.size(); ++i) {
                    double v = u_[i] + alpha * dir_[i];
                    utrial_[i] = pinned_[i] ? u_[i] : std::max(v, lb_[i]);
                }
                if (noise) {
                    accepted = true;
                    break;
                }
                double pred = 0.0;
                for (std::size_t i = 0; i < u_.size(); ++i)
                    pred += grad_[i] * (utrial_[i] - u_[i]);
                const double e1 = shifted_energy(utrial_);
                if (e1 <= e0 + 1e-4 * pred ||
                    std::fabs(e1 - e0) < 1e-14 * std::max(1.0, std::fabs(e0))) {
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if (!accepted) return res;
            u_.swap(utrial_);
        }
        return res;
    }

    const DiscreteDomain& d_;
    double p_, q_, qm1_;
    DiscreteDomain::FaceWeights fw_;
    const kernels::Kernels& K_;
    double eps_ = 0.0;
    double diag_floor_ = 0.0;
    std::vector<char> pinned_;
    std::vector<char> mask_;
    std::vector<double> u_, lb_, aeps_, du_, fface_, hface_, grad_, diag_, dir_;
    std::vector<double> cg_r_, cg_z_, cg_p_, cg_ap_, utrial_, dutrial_, dmod_;
};

} // namespace

std::string to_string(SolveStatus s) {
    switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iter: return "max_iter";
    case SolveStatus::infeasible: return "infeasible";
    }
    return "unknown";
}

ObstacleProblemSpec obstacle_default_boundary(const DiscreteDomain& d, double p,
                                              ScalarField psi) {
    ObstacleProblemSpec spec;
    spec.domain = &d;
    spec.p = p;
    spec.boundary = {};
    for (std::size_t i = 0; i < d.node_count(); ++i)
        if (d.tag(i) != BoundaryTag::none)
            spec.boundary.pin((std::uint32_t)i, psi.values[i]);
    spec.obstacle = std::move(psi);
    return spec;
}

double p_energy(const DiscreteDomain& d, const ScalarField& u, double p) {
    if (!(p > 1.0)) throw invalid_range("p must be > 1");
    if (u.values.size() != d.node_count())
        throw invalid_range("field does not match domain");
    const auto& K = kernels::active();
    auto fw = d.face_weights(p);
    std::vector<double> du(d.face_count());
    K.gather_diff(u.values.data(), d.face_a().data(), d.face_b().data(), du.data(),
                  du.size());
    return K.energy(fw.w.data(), du.data(), nullptr, du.size(), 0.5 * p);
}

DirichletResult solve_dirichlet(const DiscreteDomain& d, const PinnedValues& boundary,
                                double p, const SolverOptions& opt) {
    if (boundary.nodes.empty()) throw invalid_range("no boundary values pinned");
    Minimizer m(d, p, boundary, nullptr);
    m.init_start(opt.warm_start);
    DirichletResult out;
    out.report = m.run(opt);
    out.report.energy = m.unregularized_energy();
    out.field = ScalarField(d);
    out.field.values = m.solution();
    return out;
}

ObstacleResult solve_obstacle(const ObstacleProblemSpec& spec, const SolverOptions& opt) {
    const DiscreteDomain& d = *spec.domain;
    Minimizer m(d, spec.p, spec.boundary, &spec.obstacle);
    ObstacleResult out;
    if (!m.feasible()) {
        out.report.status = SolveStatus::infeasible;
        out.report.residual = kInf;
        out.field = ScalarField(d);
        out.field.values = m.solution();
        return out;
    }
    m.init_start(opt.warm_start);
    out.report = m.run(opt);
    out.report.energy = m.unregularized_energy();
    out.field = ScalarField(d);
    out.field.values = m.solution();

    std::vector<char> pinned(d.node_count(), 0);
    for (auto n : spec.boundary.nodes) pinned[n] = 1;
    const double act = 10.0 * opt.tol;
    for (std::size_t i = 0; i < d.node_count(); ++i) {
        if (pinned[i]) continue;
        const double lb = spec.obstacle.values[i];
        if (std::isfinite(lb) && out.field.values[i] - lb <= act)
            out.contact.push_back((std::uint32_t)i);
        else
            out.non_contact.push_back((std::uint32_t)i);
    }
    return out;
}

std::vector<double> weak_plaplacian(const DiscreteDomain& d, const ScalarField& u,
                                    double p) {
    const auto& K = kernels::active();
    auto fw = d.face_weights(p);
    std::vector<double> du(d.face_count()), fl(d.face_count());
    K.gather_diff(u.values.data(), d.face_a().data(), d.face_b().data(), du.data(),
                  du.size());
    K.flux(fw.w.data(), du.data(), nullptr, fl.data(), du.size(), 0.5 * (p - 2.0));
    std::vector<double> v(d.node_count(), 0.0);
    const auto fa = d.face_a();
    const auto fb = d.face_b();
    for (std::size_t f = 0; f < fl.size(); ++f) {
        v[fa[f]] += fl[f];
        v[fb[f]] -= fl[f];
    }
    return v;
}

namespace {

SupersolutionCheck check_sign(const DiscreteDomain& d, const ScalarField& u, double p,
                              double tol, std::span<const std::uint32_t> exclude,
                              bool super) {
    auto v = weak_plaplacian(d, u, p);
    std::vector<char> skip(d.node_count(), 0);
    for (std::size_t i = 0; i < d.node_count(); ++i)
        if (d.tag(i) != BoundaryTag::none) skip[i] = 1;
    for (auto n : exclude) skip[n] = 1;
    SupersolutionCheck out;
    for (std::size_t i = 0; i < d.node_count(); ++i) {
        if (skip[i]) continue;
        const double t = super ? v[i] : -v[i];
        out.worst = std::min(out.worst, t);
        if (t < -tol) {
            out.pass = false;
            out.failing.push_back((std::uint32_t)i);
        }
    }
    return out;
}

} // namespace

SupersolutionCheck check_supersolution(const DiscreteDomain& d, const ScalarField& u,
                                       double p, double tol,
                                       std::span<const std::uint32_t> exclude) {
    return check_sign(d, u, p, tol, exclude, true);
}

SupersolutionCheck check_subsolution(const DiscreteDomain& d, const ScalarField& u,
                                     double p, double tol,
                                     std::span<const std::uint32_t> exclude) {
    return check_sign(d, u, p, tol, exclude, false);
}

} // namespace potlab
