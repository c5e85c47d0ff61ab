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

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <utility>

#include "qfk/errors.hpp"

namespace qfk::simd {

namespace {

bool cpu_has_avx2() {
#if defined(QFK_HAVE_AVX2_BUILD)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

Backend pick_default() {
    if (const char *env = std::getenv("QFK_SIMD")) {
        if (std::strcmp(env, "scalar") == 0)
            return Backend::Scalar;
        if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2())
            return Backend::Avx2;
        return Backend::Scalar;
    }
    return cpu_has_avx2() ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<Backend> g_backend{pick_default()};

} // namespace

Backend active_backend() { return g_backend.load(std::memory_order_relaxed); }

bool backend_supported(Backend b) {
    return b == Backend::Scalar || (b == Backend::Avx2 && cpu_has_avx2());
}

void set_backend(Backend b) {
    if (!backend_supported(b))
        throw ArgumentError("simd backend not supported on this host");
    g_backend.store(b, std::memory_order_relaxed);
}

const char *backend_name(Backend b) {
    return b == Backend::Avx2 ? "avx2" : "scalar";
}

void apply_matrix2(cplx *amps, std::size_t dim, int target, const cplx m[4]) {
#if defined(QFK_HAVE_AVX2_BUILD)
    if (active_backend() == Backend::Avx2)
        return detail::apply_matrix2_avx2(amps, dim, target, m);
#endif
    detail::apply_matrix2_scalar(amps, dim, target, m);
}

void apply_diag1(cplx *amps, std::size_t dim, int target, cplx d0, cplx d1) {
#if defined(QFK_HAVE_AVX2_BUILD)
    if (active_backend() == Backend::Avx2)
        return detail::apply_diag1_avx2(amps, dim, target, d0, d1);
#endif
    detail::apply_diag1_scalar(amps, dim, target, d0, d1);
}

void apply_diag_zz(cplx *amps, std::size_t dim, int qa, int qb, cplx even,
                   cplx odd) {
#if defined(QFK_HAVE_AVX2_BUILD)
    if (active_backend() == Backend::Avx2)
        return detail::apply_diag_zz_avx2(amps, dim, qa, qb, even, odd);
#endif
    detail::apply_diag_zz_scalar(amps, dim, qa, qb, even, odd);
}

cplx inner_product(const cplx *a, const cplx *b, std::size_t dim) {
#if defined(QFK_HAVE_AVX2_BUILD)
    if (active_backend() == Backend::Avx2)
        return detail::inner_product_avx2(a, b, dim);
#endif
    return detail::inner_product_scalar(a, b, dim);
}

double norm_sq(const cplx *a, std::size_t dim) {
#if defined(QFK_HAVE_AVX2_BUILD)
    if (active_backend() == Backend::Avx2)
        return detail::norm_sq_avx2(a, dim);
#endif
    return detail::norm_sq_scalar(a, dim);
}

void apply_cnot(cplx *amps, std::size_t dim, int control, int target) {
    const std::size_t cm = std::size_t{1} << control;
    const std::size_t tm = std::size_t{1} << target;
    for (std::size_t i = 0; i < dim; ++i) {
        if ((i & cm) && !(i & tm))
            std::swap(amps[i], amps[i | tm]);
    }
}

void apply_cz(cplx *amps, std::size_t dim, int qa, int qb) {
    const std::size_t m = (std::size_t{1} << qa) | (std::size_t{1} << qb);
    for (std::size_t i = 0; i < dim; ++i) {
        if ((i & m) == m)
            amps[i] = -amps[i];
    }
}

} // namespace qfk::simd
