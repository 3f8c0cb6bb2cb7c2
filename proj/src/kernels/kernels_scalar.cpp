#include "potlab/kernels.hpp"

#include <cmath>

namespace potlab::kernels {
namespace {

double energy_scalar(const double* w, const double* d, const double* a,
                     std::size_t m, double q) {
    double acc = 0.0;
    if (q == 1.0) {
        if (a == nullptr) {
            for (std::size_t i = 0; i < m; ++i) acc += w[i] * d[i] * d[i];
        } else {
            for (std::size_t i = 0; i < m; ++i) acc += w[i] * (d[i] * d[i] + a[i]);
        }
        return acc;
    }
    if (a == nullptr) {
        const double tq = 2.0 * q;
        for (std::size_t i = 0; i < m; ++i) {
            const double ad = std::fabs(d[i]);
            if (ad != 0.0) acc += w[i] * std::pow(ad, tq);
        }
        return acc;
    }
    for (std::size_t i = 0; i < m; ++i) {
        const double t = d[i] * d[i] + a[i];
        if (t != 0.0) acc += w[i] * std::pow(t, q);
    }
    return acc;
}

double energy_shifted_scalar(const double* w, const double* d, const double* a,
                             std::size_t m, double q) {
    if (a == nullptr) return energy_scalar(w, d, nullptr, m, q);
    double acc = 0.0;
    if (q == 1.0) {
        for (std::size_t i = 0; i < m; ++i) acc += w[i] * d[i] * d[i];
        return acc;
    }
    for (std::size_t i = 0; i < m; ++i) {
        const double t = d[i] * d[i] + a[i];
        if (t == 0.0) continue;
        const double base = a[i] == 0.0 ? 0.0 : std::pow(a[i], q);
        acc += w[i] * (std::pow(t, q) - base);
    }
    return acc;
}

void flux_scalar(const double* w, const double* d, const double* a,
                 double* out, std::size_t m, double qm1) {
    if (qm1 == 0.0) { // p == 2
        for (std::size_t i = 0; i < m; ++i) out[i] = w[i] * d[i];
        return;
    }
    if (a == nullptr) {
        // w * sign(d) * |d|^(2*qm1+1)
        const double e = 2.0 * qm1 + 1.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double ad = std::fabs(d[i]);
            out[i] = ad == 0.0 ? 0.0 : w[i] * std::copysign(std::pow(ad, e), d[i]);
        }
        return;
    }
    for (std::size_t i = 0; i < m; ++i) {
        const double t = d[i] * d[i] + a[i];
        out[i] = t == 0.0 ? 0.0 : w[i] * std::pow(t, qm1) * d[i];
    }
}

void hess_scalar(const double* w, const double* d, const double* a,
                 double* out, std::size_t m, double qm1) {
    if (qm1 == 0.0) {
        for (std::size_t i = 0; i < m; ++i) out[i] = w[i];
        return;
    }
    const double pm1 = 2.0 * qm1 + 1.0;
    if (a == nullptr) {
        for (std::size_t i = 0; i < m; ++i) {
            const double ad = std::fabs(d[i]);
            out[i] = ad == 0.0 ? 0.0 : w[i] * pm1 * std::pow(ad, 2.0 * qm1);
        }
        return;
    }
    for (std::size_t i = 0; i < m; ++i) {
        const double d2 = d[i] * d[i];
        const double t = d2 + a[i];
        out[i] = t == 0.0 ? 0.0 : w[i] * std::pow(t, qm1 - 1.0) * (pm1 * d2 + a[i]);
    }
}

double wabspow_scalar(const double* w, const double* x, std::size_t m, double p) {
    double acc = 0.0;
    if (p == 2.0) {
        for (std::size_t i = 0; i < m; ++i) acc += w[i] * x[i] * x[i];
        return acc;
    }
    for (std::size_t i = 0; i < m; ++i) {
        const double ax = std::fabs(x[i]);
        if (ax != 0.0) acc += w[i] * std::pow(ax, p);
    }
    return acc;
}

void gather_diff_scalar(const double* u, const std::uint32_t* ia,
                        const std::uint32_t* ib, double* out, std::size_t m) {
    for (std::size_t i = 0; i < m; ++i) out[i] = u[ia[i]] - u[ib[i]];
}

} // namespace

const Kernels& scalar() {
    static const Kernels k{"scalar",       energy_scalar, energy_shifted_scalar,
                           flux_scalar,    hess_scalar,   wabspow_scalar,
                           gather_diff_scalar};
    return k;
}

} // namespace potlab::kernels
