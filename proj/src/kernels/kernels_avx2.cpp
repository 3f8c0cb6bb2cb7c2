// AVX2+FMA variants of the face kernels. Compiled only on x86-64 with
// -mavx2 -mfma; selected at runtime by the dispatcher after a CPUID probe.
//
// pow(x, q) is computed as exp(q * log(x)) with Cody-Waite split constants
// and polynomial tails chosen so the accumulated relative error stays below
// ~5e-14 even for |q*log x| near the overflow boundary; the equivalence
// suite pins scalar-vs-AVX2 agreement at 1e-12.

#include "potlab/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include <cmath>
#include <cstring>

namespace potlab::kernels {
namespace {

const __m256d kOne = _mm256_set1_pd(1.0);
const __m256d kHalf = _mm256_set1_pd(0.5);

// log(2) split so that e*ln2_hi is exact for |e| < 2^26 (fdlibm constants).
const __m256d kLn2Hi = _mm256_set1_pd(6.93147180369123816490e-01);
const __m256d kLn2Lo = _mm256_set1_pd(1.90821492927058770002e-10);
const __m256d kLog2e = _mm256_set1_pd(1.44269504088896338700e+00);
const __m256d kSqrt2 = _mm256_set1_pd(1.41421356237309514547e+00);

inline __m256d abs_pd(__m256d x) {
    const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7FFFFFFFFFFFFFFFLL));
    return _mm256_and_pd(x, mask);
}

// Natural log of positive finite x, lane-wise. Subnormal lanes are
// pre-scaled by 2^54. Lanes with x == 0 produce a large negative value;
// callers mask those lanes out of the final result.
inline __m256d log_pd(__m256d x) {
    const __m256d tiny = _mm256_set1_pd(2.2250738585072014e-308);
    const __m256d sub = _mm256_cmp_pd(x, tiny, _CMP_LT_OQ);
    const __m256d scale = _mm256_set1_pd(1.8014398509481984e+16); // 2^54
    x = _mm256_blendv_pd(x, _mm256_mul_pd(x, scale), sub);
    const __m256d ebias = _mm256_blendv_pd(_mm256_setzero_pd(), _mm256_set1_pd(54.0), sub);

    __m256i bits = _mm256_castpd_si256(x);
    __m256i expi = _mm256_srli_epi64(bits, 52);
    expi = _mm256_and_si256(expi, _mm256_set1_epi64x(0x7FF));
    // exponent as double via the 2^52 trick (values fit in 11 bits)
    __m256i magic = _mm256_set1_epi64x(0x4330000000000000LL); // 2^52
    __m256d e = _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(expi, magic)),
                              _mm256_castsi256_pd(magic));
    e = _mm256_sub_pd(e, _mm256_set1_pd(1023.0));

    // mantissa in [1,2)
    __m256i man = _mm256_or_si256(
        _mm256_and_si256(bits, _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL)),
        _mm256_set1_epi64x(0x3FF0000000000000LL));
    __m256d m = _mm256_castsi256_pd(man);

    // fold into [sqrt(2)/2, sqrt(2))
    const __m256d big = _mm256_cmp_pd(m, kSqrt2, _CMP_GE_OQ);
    m = _mm256_blendv_pd(m, _mm256_mul_pd(m, kHalf), big);
    e = _mm256_add_pd(e, _mm256_and_pd(big, kOne));
    e = _mm256_sub_pd(e, ebias);

    // log(m) = 2 atanh(s), s = (m-1)/(m+1), |s| <= 0.1716
    const __m256d s =
        _mm256_div_pd(_mm256_sub_pd(m, kOne), _mm256_add_pd(m, kOne));
    const __m256d t = _mm256_mul_pd(s, s);
    __m256d poly = _mm256_set1_pd(1.0 / 21.0);
    poly = _mm256_fmadd_pd(poly, t, _mm256_set1_pd(1.0 / 19.0));
    poly = _mm256_fmadd_pd(poly, t, _mm256_set1_pd(1.0 / 17.0));
    poly = _mm256_fmadd_pd(poly, t, _mm256_set1_pd(1.0 / 15.0));
    poly = _mm256_fmadd_pd(poly, t, _mm256_set1_pd(1.0 / 13.0));
    poly = _mm256_fmadd_pd(poly, t, _mm256_set1_pd(1.0 / 11.0));
    poly = _mm256_fmadd_pd(poly, t, _mm256_set1_pd(1.0 / 9.0));
    poly = _mm256_fmadd_pd(poly, t, _mm256_set1_pd(1.0 / 7.0));
    poly = _mm256_fmadd_pd(poly, t, _mm256_set1_pd(1.0 / 5.0));
    poly = _mm256_fmadd_pd(poly, t, _mm256_set1_pd(1.0 / 3.0));
    const __m256d two_s = _mm256_add_pd(s, s);
    __m256d logm = _mm256_fmadd_pd(_mm256_mul_pd(two_s, t), poly, two_s);

    // e*ln2_hi + (logm + e*ln2_lo)
    return _mm256_fmadd_pd(e, kLn2Hi, _mm256_fmadd_pd(e, kLn2Lo, logm));
}

// 2^k for integer-valued k in [-1022, 1023], lane-wise.
inline __m256d exp2i_pd(__m256d k) {
    const __m256d magic = _mm256_set1_pd(6755399441055744.0); // 2^52 + 2^51
    __m256i ki = _mm256_castpd_si256(_mm256_add_pd(k, magic));
    ki = _mm256_slli_epi64(
        _mm256_add_epi64(_mm256_and_si256(ki, _mm256_set1_epi64x(0xFFFFFFFF)),
                         _mm256_set1_epi64x(1023)),
        52);
    return _mm256_castsi256_pd(ki);
}

// exp(y) lane-wise.
inline __m256d exp_pd(__m256d y) {
    const __m256d kf =
        _mm256_round_pd(_mm256_mul_pd(y, kLog2e), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(kf, kLn2Hi, y);
    r = _mm256_fnmadd_pd(kf, kLn2Lo, r);

    // Taylor to r^14/14!, |r| <= 0.3466
    __m256d p = _mm256_set1_pd(1.0 / 87178291200.0); // 1/14!
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 6227020800.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 479001600.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 39916800.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 3628800.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 362880.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 40320.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 5040.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 720.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 120.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 24.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 6.0));
    p = _mm256_fmadd_pd(p, r, kHalf);
    p = _mm256_fmadd_pd(p, r, kOne);
    p = _mm256_fmadd_pd(p, r, kOne);

    // scale by 2^k in two steps so k in (-1074, 1024) survives (single-step
    // exponent injection cannot represent 2^1024, and gradual underflow
    // needs the product form); lanes beyond the clamp are 0/inf anyway.
    const __m256d kc = _mm256_min_pd(_mm256_max_pd(kf, _mm256_set1_pd(-2044.0)),
                                     _mm256_set1_pd(2046.0));
    const __m256d k1 = _mm256_round_pd(_mm256_mul_pd(kc, kHalf),
                                       _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    const __m256d k2 = _mm256_sub_pd(kc, k1);
    return _mm256_mul_pd(_mm256_mul_pd(p, exp2i_pd(k1)), exp2i_pd(k2));
}

// x^q for x >= 0; lanes with x == 0 yield 0.
inline __m256d pow_pd(__m256d x, __m256d q) {
    const __m256d zero = _mm256_cmp_pd(x, _mm256_setzero_pd(), _CMP_EQ_OQ);
    const __m256d safe = _mm256_blendv_pd(x, kOne, zero);
    __m256d r = exp_pd(_mm256_mul_pd(q, log_pd(safe)));
    return _mm256_andnot_pd(zero, r);
}

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

// ---- kernels ---------------------------------------------------------------

double energy_avx2(const double* w, const double* d, const double* a,
                   std::size_t m, double q) {
    std::size_t i = 0;
    __m256d acc = _mm256_setzero_pd();
    double tail = 0.0;
    if (q == 1.0) {
        if (a == nullptr) {
            for (; i + 4 <= m; i += 4) {
                const __m256d dv = _mm256_loadu_pd(d + i);
                acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), _mm256_mul_pd(dv, dv), acc);
            }
            for (; i < m; ++i) tail += w[i] * d[i] * d[i];
        } else {
            for (; i + 4 <= m; i += 4) {
                const __m256d dv = _mm256_loadu_pd(d + i);
                const __m256d t = _mm256_fmadd_pd(dv, dv, _mm256_loadu_pd(a + i));
                acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), t, acc);
            }
            for (; i < m; ++i) tail += w[i] * (d[i] * d[i] + a[i]);
        }
        return hsum(acc) + tail;
    }
    if (a == nullptr) {
        const __m256d e = _mm256_set1_pd(2.0 * q);
        for (; i + 4 <= m; i += 4) {
            const __m256d ad = abs_pd(_mm256_loadu_pd(d + i));
            acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), pow_pd(ad, e), acc);
        }
        for (; i < m; ++i) {
            const double ad = std::fabs(d[i]);
            if (ad != 0.0) tail += w[i] * std::pow(ad, 2.0 * q);
        }
        return hsum(acc) + tail;
    }
    const __m256d qv = _mm256_set1_pd(q);
    for (; i + 4 <= m; i += 4) {
        const __m256d dv = _mm256_loadu_pd(d + i);
        const __m256d t = _mm256_fmadd_pd(dv, dv, _mm256_loadu_pd(a + i));
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), pow_pd(t, qv), acc);
    }
    for (; i < m; ++i) {
        const double t = d[i] * d[i] + a[i];
        if (t != 0.0) tail += w[i] * std::pow(t, q);
    }
    return hsum(acc) + tail;
}

double energy_shifted_avx2(const double* w, const double* d, const double* a,
                           std::size_t m, double q) {
    if (a == nullptr) return energy_avx2(w, d, nullptr, m, q);
    std::size_t i = 0;
    __m256d acc = _mm256_setzero_pd();
    double tail = 0.0;
    if (q == 1.0) {
        for (; i + 4 <= m; i += 4) {
            const __m256d dv = _mm256_loadu_pd(d + i);
            acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), _mm256_mul_pd(dv, dv), acc);
        }
        for (; i < m; ++i) tail += w[i] * d[i] * d[i];
        return hsum(acc) + tail;
    }
    const __m256d qv = _mm256_set1_pd(q);
    for (; i + 4 <= m; i += 4) {
        const __m256d dv = _mm256_loadu_pd(d + i);
        const __m256d av = _mm256_loadu_pd(a + i);
        const __m256d t = _mm256_fmadd_pd(dv, dv, av);
        const __m256d diff = _mm256_sub_pd(pow_pd(t, qv), pow_pd(av, qv));
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), diff, acc);
    }
    for (; i < m; ++i) {
        const double t = d[i] * d[i] + a[i];
        if (t == 0.0) continue;
        const double base = a[i] == 0.0 ? 0.0 : std::pow(a[i], q);
        tail += w[i] * (std::pow(t, q) - base);
    }
    return hsum(acc) + tail;
}

void flux_avx2(const double* w, const double* d, const double* a, double* out,
               std::size_t m, double qm1) {
    std::size_t i = 0;
    if (qm1 == 0.0) {
        for (; i + 4 <= m; i += 4)
            _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(w + i),
                                                    _mm256_loadu_pd(d + i)));
        for (; i < m; ++i) out[i] = w[i] * d[i];
        return;
    }
    if (a == nullptr) {
        const double e = 2.0 * qm1 + 1.0;
        const __m256d ev = _mm256_set1_pd(e);
        const __m256d sign_mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x8000000000000000ULL));
        for (; i + 4 <= m; i += 4) {
            const __m256d dv = _mm256_loadu_pd(d + i);
            __m256d r = _mm256_mul_pd(_mm256_loadu_pd(w + i), pow_pd(abs_pd(dv), ev));
            r = _mm256_or_pd(r, _mm256_and_pd(dv, sign_mask));
            _mm256_storeu_pd(out + i, r);
        }
        for (; i < m; ++i) {
            const double ad = std::fabs(d[i]);
            out[i] = ad == 0.0 ? 0.0 : w[i] * std::copysign(std::pow(ad, e), d[i]);
        }
        return;
    }
    const __m256d qv = _mm256_set1_pd(qm1);
    for (; i + 4 <= m; i += 4) {
        const __m256d dv = _mm256_loadu_pd(d + i);
        const __m256d t = _mm256_fmadd_pd(dv, dv, _mm256_loadu_pd(a + i));
        const __m256d r =
            _mm256_mul_pd(_mm256_mul_pd(_mm256_loadu_pd(w + i), pow_pd(t, qv)), dv);
        _mm256_storeu_pd(out + i, r);
    }
    for (; i < m; ++i) {
        const double t = d[i] * d[i] + a[i];
        out[i] = t == 0.0 ? 0.0 : w[i] * std::pow(t, qm1) * d[i];
    }
}

void hess_avx2(const double* w, const double* d, const double* a, double* out,
               std::size_t m, double qm1) {
    std::size_t i = 0;
    if (qm1 == 0.0) {
        for (; i < m; ++i) out[i] = w[i];
        return;
    }
    const double pm1 = 2.0 * qm1 + 1.0;
    if (a == nullptr) {
        const __m256d ev = _mm256_set1_pd(2.0 * qm1);
        const __m256d pm1v = _mm256_set1_pd(pm1);
        for (; i + 4 <= m; i += 4) {
            const __m256d ad = abs_pd(_mm256_loadu_pd(d + i));
            const __m256d r = _mm256_mul_pd(
                _mm256_mul_pd(_mm256_loadu_pd(w + i), pm1v), pow_pd(ad, ev));
            _mm256_storeu_pd(out + i, r);
        }
        for (; i < m; ++i) {
            const double ad = std::fabs(d[i]);
            out[i] = ad == 0.0 ? 0.0 : w[i] * pm1 * std::pow(ad, 2.0 * qm1);
        }
        return;
    }
    const __m256d qv = _mm256_set1_pd(qm1 - 1.0);
    const __m256d pm1v = _mm256_set1_pd(pm1);
    for (; i + 4 <= m; i += 4) {
        const __m256d dv = _mm256_loadu_pd(d + i);
        const __m256d d2 = _mm256_mul_pd(dv, dv);
        const __m256d av = _mm256_loadu_pd(a + i);
        const __m256d t = _mm256_add_pd(d2, av);
        const __m256d lin = _mm256_fmadd_pd(pm1v, d2, av);
        const __m256d r =
            _mm256_mul_pd(_mm256_mul_pd(_mm256_loadu_pd(w + i), pow_pd(t, qv)), lin);
        _mm256_storeu_pd(out + i, r);
    }
    for (; i < m; ++i) {
        const double d2 = d[i] * d[i];
        const double t = d2 + a[i];
        out[i] = t == 0.0 ? 0.0 : w[i] * std::pow(t, qm1 - 1.0) * (pm1 * d2 + a[i]);
    }
}

double wabspow_avx2(const double* w, const double* x, std::size_t m, double p) {
    std::size_t i = 0;
    __m256d acc = _mm256_setzero_pd();
    double tail = 0.0;
    if (p == 2.0) {
        for (; i + 4 <= m; i += 4) {
            const __m256d xv = _mm256_loadu_pd(x + i);
            acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), _mm256_mul_pd(xv, xv), acc);
        }
        for (; i < m; ++i) tail += w[i] * x[i] * x[i];
        return hsum(acc) + tail;
    }
    const __m256d pv = _mm256_set1_pd(p);
    for (; i + 4 <= m; i += 4) {
        const __m256d ax = abs_pd(_mm256_loadu_pd(x + i));
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), pow_pd(ax, pv), acc);
    }
    for (; i < m; ++i) {
        const double ax = std::fabs(x[i]);
        if (ax != 0.0) tail += w[i] * std::pow(ax, p);
    }
    return hsum(acc) + tail;
}

void gather_diff_avx2(const double* u, const std::uint32_t* ia,
                      const std::uint32_t* ib, double* out, std::size_t m) {
    std::size_t i = 0;
    for (; i + 4 <= m; i += 4) {
        const __m128i via = _mm_loadu_si128(reinterpret_cast<const __m128i*>(ia + i));
        const __m128i vib = _mm_loadu_si128(reinterpret_cast<const __m128i*>(ib + i));
        const __m256d ua = _mm256_i32gather_pd(u, via, 8);
        const __m256d ub = _mm256_i32gather_pd(u, vib, 8);
        _mm256_storeu_pd(out + i, _mm256_sub_pd(ua, ub));
    }
    for (; i < m; ++i) out[i] = u[ia[i]] - u[ib[i]];
}

} // namespace

const Kernels* avx2_impl() {
    static const Kernels k{"avx2",     energy_avx2, energy_shifted_avx2,
                           flux_avx2,  hess_avx2,   wabspow_avx2,
                           gather_diff_avx2};
    return &k;
}

} // namespace potlab::kernels

#else

namespace potlab::kernels {
const Kernels* avx2_impl() { return nullptr; }
} // namespace potlab::kernels

#endif
