#if defined(__x86_64__) || defined(_M_X64)

#include "iontrap/kernels.hpp"

#include <immintrin.h>

#include <cmath>

// AVX2+FMA kernels, 4 field points per vector, rectangles broadcast in the
// inner loop. Arithmetic mirrors rect_kernels_scalar.cpp; the arctangent is a
// Cephes-style rational minimax approximation (~1 ulp), so scalar and vector
// paths agree to ~1e-15 relative per corner term.

namespace iontrap::kernels {

namespace {

constexpr double inv_two_pi = 0.15915494309189533577;

inline __m256d abs_pd(__m256d x) {
    const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
    return _mm256_and_pd(x, mask);
}

inline __m256d copysign_pd(__m256d mag, __m256d sgn) {
    const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x8000000000000000LL));
    return _mm256_or_pd(abs_pd(mag), _mm256_and_pd(sgn, mask));
}

// atan on [-inf, inf], Cephes coefficients.
inline __m256d atan_pd(__m256d x) {
    const __m256d sign = x;
    __m256d t = abs_pd(x);

    const __m256d t3p8 = _mm256_set1_pd(2.41421356237309504880); // tan(3 pi/8)
    const __m256d tp8 = _mm256_set1_pd(0.66);                    // cephes split
    const __m256d one = _mm256_set1_pd(1.0);

    const __m256d m1 = _mm256_cmp_pd(t, t3p8, _CMP_GT_OQ);
    const __m256d m2 = _mm256_andnot_pd(m1, _mm256_cmp_pd(t, tp8, _CMP_GT_OQ));

    // branch 1: t -> -1/t ; branch 2: t -> (t-1)/(t+1)
    const __m256d t_b1 = _mm256_div_pd(_mm256_set1_pd(-1.0), t);
    const __m256d t_b2 = _mm256_div_pd(_mm256_sub_pd(t, one), _mm256_add_pd(t, one));
    t = _mm256_blendv_pd(t, t_b2, m2);
    t = _mm256_blendv_pd(t, t_b1, m1);

    __m256d y0 = _mm256_setzero_pd();
    y0 = _mm256_blendv_pd(y0, _mm256_set1_pd(0.78539816339744830962), m2);
    y0 = _mm256_blendv_pd(y0, _mm256_set1_pd(1.57079632679489661923), m1);
    __m256d bias = _mm256_setzero_pd();
    bias = _mm256_blendv_pd(bias, _mm256_set1_pd(3.061616997868382943e-17), m2);
    bias = _mm256_blendv_pd(bias, _mm256_set1_pd(6.123233995736765886e-17), m1);

    const __m256d z = _mm256_mul_pd(t, t);
    __m256d p = _mm256_set1_pd(-8.750608600031904122785e-1);
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(-1.615753718733365076637e1));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(-7.500855792314704667340e1));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(-1.228866684490136173410e2));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(-6.485021904942025371773e1));
    __m256d q = _mm256_add_pd(z, _mm256_set1_pd(2.485846490142306297962e1));
    q = _mm256_fmadd_pd(q, z, _mm256_set1_pd(1.650270098316988542046e2));
    q = _mm256_fmadd_pd(q, z, _mm256_set1_pd(4.328810604912902668951e2));
    q = _mm256_fmadd_pd(q, z, _mm256_set1_pd(4.853903996359136964868e2));
    q = _mm256_fmadd_pd(q, z, _mm256_set1_pd(1.945506571482613964425e2));

    __m256d y = _mm256_mul_pd(z, _mm256_div_pd(p, q));
    y = _mm256_fmadd_pd(t, y, t);
    y = _mm256_add_pd(y, bias);
    y = _mm256_add_pd(y, y0);
    return copysign_pd(y, sign);
}

void potential_avx2(const RectSoA& rects, const double* px, const double* py,
                    const double* pz, std::size_t n, double* phi) {
    const std::size_t nr = rects.size();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d x = _mm256_loadu_pd(px + i);
        const __m256d y = _mm256_loadu_pd(py + i);
        const __m256d z = _mm256_loadu_pd(pz + i);
        const __m256d y2 = _mm256_mul_pd(y, y);
        __m256d acc = _mm256_setzero_pd();
        for (std::size_t r = 0; r < nr; ++r) {
            const __m256d a1 = _mm256_sub_pd(_mm256_set1_pd(rects.x1[r]), x);
            const __m256d a2 = _mm256_sub_pd(_mm256_set1_pd(rects.x2[r]), x);
            const __m256d b1 = _mm256_sub_pd(_mm256_set1_pd(rects.z1[r]), z);
            const __m256d b2 = _mm256_sub_pd(_mm256_set1_pd(rects.z2[r]), z);
            const __m256d a1s = _mm256_fmadd_pd(a1, a1, y2);
            const __m256d a2s = _mm256_fmadd_pd(a2, a2, y2);
            auto term = [&](__m256d a, __m256d as, __m256d b) {
                const __m256d rr = _mm256_sqrt_pd(_mm256_fmadd_pd(b, b, as));
                return atan_pd(_mm256_div_pd(_mm256_mul_pd(a, b),
                                             _mm256_mul_pd(y, rr)));
            };
            __m256d s = term(a2, a2s, b2);
            s = _mm256_sub_pd(s, term(a1, a1s, b2));
            s = _mm256_sub_pd(s, term(a2, a2s, b1));
            s = _mm256_add_pd(s, term(a1, a1s, b1));
            acc = _mm256_fmadd_pd(_mm256_set1_pd(rects.w[r]), s, acc);
        }
        _mm256_storeu_pd(phi + i, _mm256_mul_pd(acc, _mm256_set1_pd(inv_two_pi)));
    }
    if (i < n)
        scalar_impl().potential(rects, px + i, py + i, pz + i, n - i, phi + i);
}

void field_avx2(const RectSoA& rects, const double* px, const double* py,
                const double* pz, std::size_t n, double* gxo, double* gyo,
                double* gzo) {
    const std::size_t nr = rects.size();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d x = _mm256_loadu_pd(px + i);
        const __m256d y = _mm256_loadu_pd(py + i);
        const __m256d z = _mm256_loadu_pd(pz + i);
        const __m256d y2 = _mm256_mul_pd(y, y);
        __m256d sx = _mm256_setzero_pd(), sy = _mm256_setzero_pd(),
                sz = _mm256_setzero_pd();
        for (std::size_t r = 0; r < nr; ++r) {
            const __m256d a1 = _mm256_sub_pd(_mm256_set1_pd(rects.x1[r]), x);
            const __m256d a2 = _mm256_sub_pd(_mm256_set1_pd(rects.x2[r]), x);
            const __m256d b1 = _mm256_sub_pd(_mm256_set1_pd(rects.z1[r]), z);
            const __m256d b2 = _mm256_sub_pd(_mm256_set1_pd(rects.z2[r]), z);
            __m256d tx = _mm256_setzero_pd(), ty = _mm256_setzero_pd(),
                    tz = _mm256_setzero_pd();
            auto corner = [&](__m256d a, __m256d b, double sgn) {
                const __m256d u = _mm256_fmadd_pd(a, a, y2);
                const __m256d w = _mm256_fmadd_pd(b, b, y2);
                const __m256d r2 = _mm256_fmadd_pd(b, b, u);
                const __m256d rr = _mm256_sqrt_pd(r2);
                const __m256d s = _mm256_set1_pd(sgn);
                const __m256d gx = _mm256_div_pd(
                    _mm256_mul_pd(_mm256_mul_pd(y, b), s),
                    _mm256_mul_pd(rr, u));
                const __m256d gy = _mm256_div_pd(
                    _mm256_mul_pd(_mm256_mul_pd(_mm256_mul_pd(a, b),
                                                _mm256_add_pd(r2, y2)),
                                  s),
                    _mm256_mul_pd(rr, _mm256_mul_pd(u, w)));
                const __m256d gz = _mm256_div_pd(
                    _mm256_mul_pd(_mm256_mul_pd(y, a), s),
                    _mm256_mul_pd(rr, w));
                tx = _mm256_sub_pd(tx, gx);
                ty = _mm256_sub_pd(ty, gy);
                tz = _mm256_sub_pd(tz, gz);
            };
            corner(a2, b2, 1.0);
            corner(a1, b2, -1.0);
            corner(a2, b1, -1.0);
            corner(a1, b1, 1.0);
            const __m256d wv = _mm256_set1_pd(rects.w[r]);
            sx = _mm256_fmadd_pd(wv, tx, sx);
            sy = _mm256_fmadd_pd(wv, ty, sy);
            sz = _mm256_fmadd_pd(wv, tz, sz);
        }
        const __m256d k = _mm256_set1_pd(inv_two_pi);
        _mm256_storeu_pd(gxo + i, _mm256_mul_pd(sx, k));
        _mm256_storeu_pd(gyo + i, _mm256_mul_pd(sy, k));
        _mm256_storeu_pd(gzo + i, _mm256_mul_pd(sz, k));
    }
    if (i < n)
        scalar_impl().gradient(rects, px + i, py + i, pz + i, n - i, gxo + i,
                               gyo + i, gzo + i);
}

void hessian_avx2(const RectSoA& rects, const double* px, const double* py,
                  const double* pz, std::size_t n, const HessOut& out) {
    const std::size_t nr = rects.size();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d x = _mm256_loadu_pd(px + i);
        const __m256d y = _mm256_loadu_pd(py + i);
        const __m256d z = _mm256_loadu_pd(pz + i);
        const __m256d y2 = _mm256_mul_pd(y, y);
        __m256d axx = _mm256_setzero_pd(), ayy = _mm256_setzero_pd(),
                azz = _mm256_setzero_pd(), axy = _mm256_setzero_pd(),
                axz = _mm256_setzero_pd(), ayz = _mm256_setzero_pd();
        for (std::size_t r = 0; r < nr; ++r) {
            const __m256d a1 = _mm256_sub_pd(_mm256_set1_pd(rects.x1[r]), x);
            const __m256d a2 = _mm256_sub_pd(_mm256_set1_pd(rects.x2[r]), x);
            const __m256d b1 = _mm256_sub_pd(_mm256_set1_pd(rects.z1[r]), z);
            const __m256d b2 = _mm256_sub_pd(_mm256_set1_pd(rects.z2[r]), z);
            __m256d txx = _mm256_setzero_pd(), tyy = _mm256_setzero_pd(),
                    tzz = _mm256_setzero_pd(), txy = _mm256_setzero_pd(),
                    txz = _mm256_setzero_pd(), tyz = _mm256_setzero_pd();
            auto corner = [&](__m256d a, __m256d b, double sgn) {
                const __m256d u = _mm256_fmadd_pd(a, a, y2);
                const __m256d w = _mm256_fmadd_pd(b, b, y2);
                const __m256d r2 = _mm256_fmadd_pd(b, b, u);
                const __m256d rr = _mm256_sqrt_pd(r2);
                const __m256d r3 = _mm256_mul_pd(rr, r2);
                const __m256d ab = _mm256_mul_pd(a, b);
                const __m256d a2b2 = _mm256_fmadd_pd(a, a, _mm256_mul_pd(b, b));
                const __m256d two_r2 = _mm256_add_pd(r2, r2);
                const __m256d u2 = _mm256_mul_pd(u, u);
                const __m256d w2 = _mm256_mul_pd(w, w);
                const __m256d s = _mm256_set1_pd(sgn);
                const __m256d yab = _mm256_mul_pd(y, ab);
                const __m256d hxx = _mm256_div_pd(
                    _mm256_mul_pd(yab, _mm256_add_pd(u, two_r2)),
                    _mm256_mul_pd(r3, u2));
                const __m256d hzz = _mm256_div_pd(
                    _mm256_mul_pd(yab, _mm256_add_pd(w, two_r2)),
                    _mm256_mul_pd(r3, w2));
                const __m256d hxz = _mm256_div_pd(y, r3);
                const __m256d core =
                    _mm256_fmsub_pd(u, a2b2, _mm256_mul_pd(_mm256_add_pd(y2, y2), r2));
                const __m256d corew =
                    _mm256_fmsub_pd(w, a2b2, _mm256_mul_pd(_mm256_add_pd(y2, y2), r2));
                const __m256d hxy =
                    _mm256_div_pd(_mm256_mul_pd(b, core), _mm256_mul_pd(r3, u2));
                const __m256d hyz =
                    _mm256_div_pd(_mm256_mul_pd(a, corew), _mm256_mul_pd(r3, w2));
                const __m256d hyy = _mm256_div_pd(
                    _mm256_mul_pd(yab,
                                  _mm256_fmadd_pd(u2, _mm256_add_pd(w, two_r2),
                                                  _mm256_mul_pd(w2, _mm256_add_pd(u, two_r2)))),
                    _mm256_mul_pd(r3, _mm256_mul_pd(u2, w2)));
                txx = _mm256_fnmadd_pd(s, hxx, txx);
                tzz = _mm256_fnmadd_pd(s, hzz, tzz);
                txz = _mm256_fmadd_pd(s, hxz, txz);
                txy = _mm256_fnmadd_pd(s, hxy, txy);
                tyz = _mm256_fnmadd_pd(s, hyz, tyz);
                tyy = _mm256_fmadd_pd(s, hyy, tyy);
            };
            corner(a2, b2, 1.0);
            corner(a1, b2, -1.0);
            corner(a2, b1, -1.0);
            corner(a1, b1, 1.0);
            const __m256d wv = _mm256_set1_pd(rects.w[r]);
            axx = _mm256_fmadd_pd(wv, txx, axx);
            ayy = _mm256_fmadd_pd(wv, tyy, ayy);
            azz = _mm256_fmadd_pd(wv, tzz, azz);
            axy = _mm256_fmadd_pd(wv, txy, axy);
            axz = _mm256_fmadd_pd(wv, txz, axz);
            ayz = _mm256_fmadd_pd(wv, tyz, ayz);
        }
        const __m256d k = _mm256_set1_pd(inv_two_pi);
        _mm256_storeu_pd(out.xx + i, _mm256_mul_pd(axx, k));
        _mm256_storeu_pd(out.yy + i, _mm256_mul_pd(ayy, k));
        _mm256_storeu_pd(out.zz + i, _mm256_mul_pd(azz, k));
        _mm256_storeu_pd(out.xy + i, _mm256_mul_pd(axy, k));
        _mm256_storeu_pd(out.xz + i, _mm256_mul_pd(axz, k));
        _mm256_storeu_pd(out.yz + i, _mm256_mul_pd(ayz, k));
    }
    if (i < n) {
        HessOut tail{out.xx + i, out.yy + i, out.zz + i,
                     out.xy + i, out.xz + i, out.yz + i};
        scalar_impl().hessian(rects, px + i, py + i, pz + i, n - i, tail);
    }
}

} // namespace

const Impl& avx2_impl() {
    static const Impl impl{potential_avx2, field_avx2, hessian_avx2, "avx2"};
    return impl;
}

bool avx2_supported() {
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

} // namespace iontrap::kernels

#endif // x86_64
