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

/// \file simd.hpp
/// Runtime-dispatched arithmetic kernels for the statevector engine.
///
/// Every kernel exists as a scalar reference implementation and, on x86-64
/// hosts with AVX2, a vectorized variant. The two are arithmetic-identical
/// for the element-wise kernels (same multiply/add sequence per amplitude),
/// and equivalence-tested in tests/test_statevec.cpp. Reductions
/// (inner_product, norm_sq) differ only in summation order.

#pragma once

#include <complex>
#include <cstddef>

namespace qfk::simd {

using cplx = std::complex<double>;

enum class Backend { Scalar, Avx2 };

/// Backend chosen at startup: AVX2 when the CPU supports it, else scalar.
/// The QFK_SIMD environment variable ("scalar"/"avx2") overrides.
Backend active_backend();

/// Force a backend (throws qfk::ArgumentError if unsupported on this host).
void set_backend(Backend b);

bool backend_supported(Backend b);

const char *backend_name(Backend b);

/// In-place 2x2 unitary on `target`: m is row-major [m00 m01 m10 m11].
void apply_matrix2(cplx *amps, std::size_t dim, int target, const cplx m[4]);

/// In-place diagonal single-qubit gate diag(d0, d1) on `target`.
void apply_diag1(cplx *amps, std::size_t dim, int target, cplx d0, cplx d1);

/// In-place two-qubit parity phase: amp *= (bit(qa)^bit(qb) ? odd : even).
void apply_diag_zz(cplx *amps, std::size_t dim, int qa, int qb, cplx even,
                   cplx odd);

/// <a|b> = sum_i conj(a_i) b_i  (conjugate-linear in a).
cplx inner_product(const cplx *a, const cplx *b, std::size_t dim);

/// Squared 2-norm.
double norm_sq(const cplx *a, std::size_t dim);

// Permutation/sign kernels; memory-bound, shared by both backends.
void apply_cnot(cplx *amps, std::size_t dim, int control, int target);
void apply_cz(cplx *amps, std::size_t dim, int qa, int qb);

namespace detail {
// Scalar reference kernels (always available; used directly by tests).
void apply_matrix2_scalar(cplx *amps, std::size_t dim, int target,
                          const cplx m[4]);
void apply_diag1_scalar(cplx *amps, std::size_t dim, int target, cplx d0,
                        cplx d1);
void apply_diag_zz_scalar(cplx *amps, std::size_t dim, int qa, int qb,
                          cplx even, cplx odd);
cplx inner_product_scalar(const cplx *a, const cplx *b, std::size_t dim);
double norm_sq_scalar(const cplx *a, std::size_t dim);

#if defined(__x86_64__) || defined(_M_X64)
#define QFK_HAVE_AVX2_BUILD 1
void apply_matrix2_avx2(cplx *amps, std::size_t dim, int target,
                        const cplx m[4]);
void apply_diag1_avx2(cplx *amps, std::size_t dim, int target, cplx d0,
                      cplx d1);
void apply_diag_zz_avx2(cplx *amps, std::size_t dim, int qa, int qb, cplx even,
                        cplx odd);
cplx inner_product_avx2(const cplx *a, const cplx *b, std::size_t dim);
double norm_sq_avx2(const cplx *a, std::size_t dim);
#endif
} // namespace detail

} // namespace qfk::simd
