// Copyright 2026 The qfk-lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// AVX2 variants of the statevector kernels. One __m256d holds two complex
// doubles: [re0, im0, re1, im1]. The element-wise kernels reproduce the
// scalar reference arithmetic operation-for-operation (mul/addsub, no FMA),
// so their outputs are bit-identical to the scalar path; the reduction
// kernels differ only in summation order.

#include "qfk/simd.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

namespace qfk::simd::detail {

namespace {

// x * c where both lanes of x are multiplied by the same complex scalar
// given as broadcast vectors cr = [c.re x4], ci = [c.im x4].
inline __m256d cmul_bcast(__m256d x, __m256d cr, __m256d ci) {
    const __m256d xswap = _mm256_permute_pd(x, 0b0101); // [im0 re0 im1 re1]
    return _mm256_addsub_pd(_mm256_mul_pd(x, cr), _mm256_mul_pd(xswap, ci));
}

inline __m256d bcast_re(cplx c) { return _mm256_set1_pd(c.real()); }
inline __m256d bcast_im(cplx c) { return _mm256_set1_pd(c.imag()); }

// Per-half coefficients: lower 128-bit lane multiplied by c0, upper by c1.
inline __m256d halves_re(cplx c0, cplx c1) {
    return _mm256_setr_pd(c0.real(), c0.real(), c1.real(), c1.real());
}
inline __m256d halves_im(cplx c0, cplx c1) {
    return _mm256_setr_pd(c0.imag(), c0.imag(), c1.imag(), c1.imag());
}

inline double *dptr(cplx *p) { return reinterpret_cast<double *>(p); }
inline const double *dptr(const cplx *p) {
    return reinterpret_cast<const double *>(p);
}

} // namespace

void apply_matrix2_avx2(cplx *amps, std::size_t dim, int target,
                        const cplx m[4]) {
    if (target == 0) {
        // Gate pairs are adjacent: one vector holds both amplitudes.
        const __m256d c_ar = halves_re(m[0], m[3]), c_ai = halves_im(m[0], m[3]);
        const __m256d c_br = halves_re(m[1], m[2]), c_bi = halves_im(m[1], m[2]);
        for (std::size_t i = 0; i < dim; i += 2) {
            const __m256d v = _mm256_loadu_pd(dptr(amps + i));
            const __m256d w = _mm256_permute2f128_pd(v, v, 0x01); // [a1, a0]
            const __m256d r = _mm256_add_pd(cmul_bcast(v, c_ar, c_ai),
                                            cmul_bcast(w, c_br, c_bi));
            _mm256_storeu_pd(dptr(amps + i), r);
        }
        return;
    }
    const std::size_t step = std::size_t{1} << target;
    const __m256d m00r = bcast_re(m[0]), m00i = bcast_im(m[0]);
    const __m256d m01r = bcast_re(m[1]), m01i = bcast_im(m[1]);
    const __m256d m10r = bcast_re(m[2]), m10i = bcast_im(m[2]);
    const __m256d m11r = bcast_re(m[3]), m11i = bcast_im(m[3]);
    for (std::size_t base = 0; base < dim; base += 2 * step) {
        for (std::size_t j = 0; j < step; j += 2) {
            cplx *p0 = amps + base + j;
            cplx *p1 = p0 + step;
            const __m256d v0 = _mm256_loadu_pd(dptr(p0));
            const __m256d v1 = _mm256_loadu_pd(dptr(p1));
            const __m256d n0 = _mm256_add_pd(cmul_bcast(v0, m00r, m00i),
                                             cmul_bcast(v1, m01r, m01i));
            const __m256d n1 = _mm256_add_pd(cmul_bcast(v0, m10r, m10i),
                                             cmul_bcast(v1, m11r, m11i));
            _mm256_storeu_pd(dptr(p0), n0);
            _mm256_storeu_pd(dptr(p1), n1);
        }
    }
}

void apply_diag1_avx2(cplx *amps, std::size_t dim, int target, cplx d0,
                      cplx d1) {
    if (target == 0) {
        const __m256d cr = halves_re(d0, d1), ci = halves_im(d0, d1);
        for (std::size_t i = 0; i < dim; i += 2) {
            const __m256d v = _mm256_loadu_pd(dptr(amps + i));
            _mm256_storeu_pd(dptr(amps + i), cmul_bcast(v, cr, ci));
        }
        return;
    }
    const std::size_t step = std::size_t{1} << target;
    const __m256d c0r = bcast_re(d0), c0i = bcast_im(d0);
    const __m256d c1r = bcast_re(d1), c1i = bcast_im(d1);
    for (std::size_t base = 0; base < dim; base += 2 * step) {
        for (std::size_t j = 0; j < step; j += 2) {
            cplx *p0 = amps + base + j;
            cplx *p1 = p0 + step;
            _mm256_storeu_pd(dptr(p0),
                             cmul_bcast(_mm256_loadu_pd(dptr(p0)), c0r, c0i));
            _mm256_storeu_pd(dptr(p1),
                             cmul_bcast(_mm256_loadu_pd(dptr(p1)), c1r, c1i));
        }
    }
}

void apply_diag_zz_avx2(cplx *amps, std::size_t dim, int qa, int qb, cplx even,
                        cplx odd) {
    const int lo = qa < qb ? qa : qb;
    const int hi = qa < qb ? qb : qa;
    const std::size_t hstep = std::size_t{1} << hi;
    if (lo == 0) {
        // Adjacent amplitudes alternate the low bit; the hi bit is constant
        // over runs of 2^hi >= 2 amplitudes.
        const __m256d e_r = halves_re(even, odd), e_i = halves_im(even, odd);
        const __m256d o_r = halves_re(odd, even), o_i = halves_im(odd, even);
        for (std::size_t base = 0; base < dim; base += 2 * hstep) {
            for (std::size_t j = 0; j < hstep; j += 2) {
                cplx *p0 = amps + base + j;
                cplx *p1 = p0 + hstep;
                _mm256_storeu_pd(
                    dptr(p0), cmul_bcast(_mm256_loadu_pd(dptr(p0)), e_r, e_i));
                _mm256_storeu_pd(
                    dptr(p1), cmul_bcast(_mm256_loadu_pd(dptr(p1)), o_r, o_i));
            }
        }
        return;
    }
    // lo >= 1: runs of 2^lo >= 2 amplitudes share a phase.
    const std::size_t lstep = std::size_t{1} << lo;
    const __m256d er = bcast_re(even), ei = bcast_im(even);
    const __m256d orr = bcast_re(odd), oi = bcast_im(odd);
    for (std::size_t bh = 0; bh < dim; bh += 2 * hstep) {
        for (int hbit = 0; hbit < 2; ++hbit) {
            const std::size_t hoff = bh + (hbit ? hstep : 0);
            for (std::size_t bl = 0; bl < hstep; bl += 2 * lstep) {
                for (int lbit = 0; lbit < 2; ++lbit) {
                    const bool parity = (hbit != 0) != (lbit != 0);
                    const __m256d cr = parity ? orr : er;
                    const __m256d ci = parity ? oi : ei;
                    cplx *run = amps + hoff + bl + (lbit ? lstep : 0);
                    for (std::size_t j = 0; j < lstep; j += 2) {
                        _mm256_storeu_pd(
                            dptr(run + j),
                            cmul_bcast(_mm256_loadu_pd(dptr(run + j)), cr, ci));
                    }
                }
            }
        }
    }
}

cplx inner_product_avx2(const cplx *a, const cplx *b, std::size_t dim) {
    __m256d acc_re = _mm256_setzero_pd();
    __m256d acc_im = _mm256_setzero_pd();
    const __m256d sign = _mm256_setr_pd(1.0, -1.0, 1.0, -1.0);
    for (std::size_t i = 0; i < dim; i += 2) {
        const __m256d va = _mm256_loadu_pd(dptr(a + i));
        const __m256d vb = _mm256_loadu_pd(dptr(b + i));
        const __m256d vbs = _mm256_permute_pd(vb, 0b0101);
        // re: ar*br + ai*bi   im: ar*bi - ai*br
        acc_re = _mm256_add_pd(acc_re, _mm256_mul_pd(va, vb));
        acc_im = _mm256_add_pd(
            acc_im, _mm256_mul_pd(sign, _mm256_mul_pd(va, vbs)));
    }
    alignas(32) double re4[4], im4[4];
    _mm256_store_pd(re4, acc_re);
    _mm256_store_pd(im4, acc_im);
    return {re4[0] + re4[1] + re4[2] + re4[3],
            im4[0] + im4[1] + im4[2] + im4[3]};
}

double norm_sq_avx2(const cplx *a, std::size_t dim) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t i = 0; i < dim; i += 2) {
        const __m256d v = _mm256_loadu_pd(dptr(a + i));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(v, v));
    }
    alignas(32) double s4[4];
    _mm256_store_pd(s4, acc);
    return s4[0] + s4[1] + s4[2] + s4[3];
}

} // namespace qfk::simd::detail

#endif // x86-64
