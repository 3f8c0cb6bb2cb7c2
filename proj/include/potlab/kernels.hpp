#pragma once

#include <cstddef>
#include <cstdint>

namespace potlab::kernels {

// Face-local arithmetic kernels. Every discrete p-energy in this project is
// a sum over faces of  w * (d^2 + a)^q  with d the node-value difference,
// w > 0 a combined metric/volume weight and a >= 0 a per-face regularizer,
// so these loops are the hot path of every solve. Scalar reference
// implementations and an AVX2 variant are selected at runtime; the two are
// equivalence-tested against each other.
//
// Shared contract (both variants must agree, bit-for-bit on the branch
// taken, to ~1e-13 relative on accumulated sums):
//  - arrays are contiguous, length m, no aliasing between inputs and out.
//  - `a == nullptr` means a == 0 identically; powers are then taken of |d|
//    directly, which keeps extreme magnitudes (|d| ~ 1e-200) exact where
//    squaring would under/overflow.
//  - a zero base with a nonpositive exponent yields 0, not inf: flux and
//    hess are the derivatives of d -> (d^2+a)^q, whose limits at d = 0,
//    a = 0 vanish for q > 1/2 (i.e. p > 1).
//  - q == 1 (p == 2) is special-cased to plain arithmetic in both variants.
struct Kernels {
    const char* name;

    // sum_i w[i] * (d[i]^2 + a[i])^q
    double (*energy)(const double* w, const double* d, const double* a,
                     std::size_t m, double q);

    // sum_i w[i] * ((d[i]^2 + a[i])^q - a[i]^q)
    // Same minimizer as `energy`, finite even when a[i] is huge; used as the
    // line-search objective on strongly graded grids.
    double (*energy_shifted)(const double* w, const double* d, const double* a,
                             std::size_t m, double q);

    // out[i] = w[i] * (d[i]^2 + a[i])^qm1 * d[i]
    void (*flux)(const double* w, const double* d, const double* a,
                 double* out, std::size_t m, double qm1);

    // out[i] = w[i] * (d[i]^2 + a[i])^(qm1-1) * ((2*qm1+1)*d[i]^2 + a[i])
    // = d/dd of the flux factor; positive for p > 1.
    void (*hess)(const double* w, const double* d, const double* a,
                 double* out, std::size_t m, double qm1);

    // sum_i w[i] * |x[i]|^p
    double (*wabspow)(const double* w, const double* x, std::size_t m, double p);

    // out[i] = u[ia[i]] - u[ib[i]]
    void (*gather_diff)(const double* u, const std::uint32_t* ia,
                        const std::uint32_t* ib, double* out, std::size_t m);
};

/// Portable reference implementation.
const Kernels& scalar();

/// AVX2+FMA implementation, or nullptr when the binary or the CPU lacks it.
const Kernels* avx2();

/// The active implementation: AVX2 when available, else scalar. Overridable
/// with set_active() or the POTLAB_KERNELS environment variable
/// ("scalar" | "avx2" | "auto"), read once at first use.
const Kernels& active();

/// Force a variant by name ("scalar", "avx2", "auto"). Throws InputError on
/// an unknown name or when "avx2" is requested but unavailable.
void set_active(const char* name);

} // namespace potlab::kernels
