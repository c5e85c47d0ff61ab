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

#include "qfk/simd.hpp"

namespace qfk::simd::detail {

namespace {
// Explicit complex product so the scalar and AVX2 paths perform the exact
// same floating-point operations per amplitude (no libm __muldc3 detours).
inline cplx cmul(cplx a, cplx b) {
    return {a.real() * b.real() - a.imag() * b.imag(),
            a.real() * b.imag() + a.imag() * b.real()};
}
} // namespace

void apply_matrix2_scalar(cplx *amps, std::size_t dim, int target,
                          const cplx m[4]) {
    const std::size_t step = std::size_t{1} << target;
    for (std::size_t base = 0; base < dim; base += 2 * step) {
        for (std::size_t j = 0; j < step; ++j) {
            cplx a0 = amps[base + j];
            cplx a1 = amps[base + j + step];
            amps[base + j] = cmul(m[0], a0) + cmul(m[1], a1);
            amps[base + j + step] = cmul(m[2], a0) + cmul(m[3], a1);
        }
    }
}

void apply_diag1_scalar(cplx *amps, std::size_t dim, int target, cplx d0,
                        cplx d1) {
    const std::size_t step = std::size_t{1} << target;
    for (std::size_t base = 0; base < dim; base += 2 * step) {
        for (std::size_t j = 0; j < step; ++j) {
            amps[base + j] = cmul(d0, amps[base + j]);
            amps[base + j + step] = cmul(d1, amps[base + j + step]);
        }
    }
}

void apply_diag_zz_scalar(cplx *amps, std::size_t dim, int qa, int qb,
                          cplx even, cplx odd) {
    const std::size_t ma = std::size_t{1} << qa;
    const std::size_t mb = std::size_t{1} << qb;
    for (std::size_t i = 0; i < dim; ++i) {
        const bool parity = ((i & ma) != 0) != ((i & mb) != 0);
        amps[i] = cmul(parity ? odd : even, amps[i]);
    }
}

cplx inner_product_scalar(const cplx *a, const cplx *b, std::size_t dim) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        re += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
        im += a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
    }
    return {re, im};
}

double norm_sq_scalar(const cplx *a, std::size_t dim) {
    double s = 0.0;
    for (std::size_t i = 0; i < dim; ++i)
        s += a[i].real() * a[i].real() + a[i].imag() * a[i].imag();
    return s;
}

} // namespace qfk::simd::detail
