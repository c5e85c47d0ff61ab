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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "qfk/errors.hpp"
#include "qfk/rng.hpp"
#include "qfk/simd.hpp"
#include "qfk/statevec.hpp"

using namespace qfk;
using sv::Axis;
using sv::GateOp;
using sv::Statevector;
using cplx = std::complex<double>;

namespace {

Statevector random_state(int n, std::uint64_t seed) {
    Rng rng(seed);
    Statevector st = Statevector::zero(n);
    double norm = 0.0;
    for (auto &a : st.amplitudes()) {
        a = cplx(rng.normal(), rng.normal());
        norm += std::norm(a);
    }
    const double inv = 1.0 / std::sqrt(norm);
    for (auto &a : st.amplitudes())
        a *= inv;
    return st;
}

GateOp random_gate(int n, Rng &rng) {
    const int kind = static_cast<int>(rng.uniform_int(7));
    const int q0 = static_cast<int>(rng.uniform_int(n));
    int q1 = static_cast<int>(rng.uniform_int(n));
    while (q1 == q0 && n > 1)
        q1 = static_cast<int>(rng.uniform_int(n));
    const double angle = rng.angle();
    switch (kind) {
    case 0:
        return GateOp::rotation(Axis::X, q0, angle);
    case 1:
        return GateOp::rotation(Axis::Y, q0, angle);
    case 2:
        return GateOp::rotation(Axis::Z, q0, angle);
    case 3:
        return GateOp::hadamard(q0);
    case 4:
        return n > 1 ? GateOp::zz(q0, q1, angle)
                     : GateOp::rotation(Axis::Z, q0, angle);
    case 5:
        return n > 1 ? GateOp::cnot(q0, q1) : GateOp::hadamard(q0);
    default:
        return n > 1 ? GateOp::cz(q0, q1) : GateOp::rotation(Axis::X, q0, angle);
    }
}

} // namespace

TEST_CASE("zero state basis amplitudes") {
    const Statevector s1 = Statevector::zero(1);
    CHECK(s1.dim() == 2);
    CHECK(s1[0] == cplx(1.0, 0.0));
    CHECK(s1[1] == cplx(0.0, 0.0));

    const Statevector s2 = Statevector::zero(2);
    CHECK(s2.dim() == 4);
    CHECK(s2[0] == cplx(1.0, 0.0));
    for (int i = 1; i < 4; ++i)
        CHECK(s2[i] == cplx(0.0, 0.0));

    const Statevector s3 = Statevector::zero(3);
    CHECK(s3.dim() == 8);
    CHECK(s3.norm_sq() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("zero state rejects bad sizes") {
    CHECK_THROWS_AS(Statevector::zero(0), ArgumentError);
    const int old = sv::max_qubits();
    sv::set_max_qubits(4);
    CHECK_THROWS_AS(Statevector::zero(5), ResourceError);
    sv::set_max_qubits(old);
}

TEST_CASE("single-qubit gate examples") {
    // Ry(pi)|0> = |1>
    Statevector st = Statevector::zero(1);
    sv::apply_gate(st, GateOp::rotation(Axis::Y, 0, std::numbers::pi));
    CHECK(std::abs(st[0]) < 1e-15);
    CHECK(st[1].real() == doctest::Approx(1.0).epsilon(1e-12));

    // H|0> = (|0> + |1>)/sqrt(2)
    st = Statevector::zero(1);
    sv::apply_gate(st, GateOp::hadamard(0));
    CHECK(st[0].real() == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(st[1].real() == doctest::Approx(1.0 / std::sqrt(2.0)));

    // Rz(x)|0> = e^{-ix/2}|0>
    const double x = 0.8317;
    st = Statevector::zero(1);
    sv::apply_gate(st, GateOp::rotation(Axis::Z, 0, x));
    CHECK(st[0].real() == doctest::Approx(std::cos(x / 2)));
    CHECK(st[0].imag() == doctest::Approx(-std::sin(x / 2)));
    CHECK(std::abs(st[1]) == 0.0);
}

TEST_CASE("gate matrices are unitary") {
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const GateOp g = random_gate(2, rng);
        const auto m = g.dense_matrix();
        const int side = g.two_qubit() ? 4 : 2;
        // max |U^dag U - I|
        double worst = 0.0;
        for (int r = 0; r < side; ++r)
            for (int c = 0; c < side; ++c) {
                cplx acc = 0.0;
                for (int k = 0; k < side; ++k)
                    acc += std::conj(m[k * side + r]) * m[k * side + c];
                const cplx expect = r == c ? cplx(1.0) : cplx(0.0);
                worst = std::max(worst, std::abs(acc - expect));
            }
        CHECK(worst < 1e-12);
    }
}

TEST_CASE("norm preserved by random gate sequences") {
    Rng rng(11);
    for (int n : {1, 2, 4}) {
        Statevector st = Statevector::zero(n);
        for (int i = 0; i < 200; ++i)
            sv::apply_gate(st, random_gate(n, rng));
        CHECK(std::abs(st.norm_sq() - 1.0) < 1e-10);
    }
}

TEST_CASE("gate application matches dense matrix multiplication") {
    // Oracle: dense kron-expanded matrix applied to the raw vector.
    Rng rng(23);
    const int n = 3;
    for (int trial = 0; trial < 40; ++trial) {
        const Statevector st = random_state(n, 1000 + trial);
        const GateOp g = random_gate(n, rng);
        Statevector fast = st.clone();
        sv::apply_gate(fast, g);

        const auto m = g.dense_matrix();
        const std::size_t dim = st.dim();
        std::vector<cplx> expect(dim, 0.0);
        if (!g.two_qubit()) {
            const std::size_t mask = std::size_t{1} << g.q0;
            for (std::size_t i = 0; i < dim; ++i) {
                const int b = (i & mask) ? 1 : 0;
                expect[i] = m[b * 2 + 0] * st[i & ~mask] +
                            m[b * 2 + 1] * st[i | mask];
            }
        } else {
            const std::size_t m0 = std::size_t{1} << g.q0;
            const std::size_t m1 = std::size_t{1} << g.q1;
            for (std::size_t i = 0; i < dim; ++i) {
                const int r = ((i & m0) ? 1 : 0) + ((i & m1) ? 2 : 0);
                const std::size_t base = i & ~(m0 | m1);
                for (int c = 0; c < 4; ++c) {
                    const std::size_t src =
                        base | ((c & 1) ? m0 : 0) | ((c & 2) ? m1 : 0);
                    expect[i] += m[r * 4 + c] * st[src];
                }
            }
        }
        for (std::size_t i = 0; i < dim; ++i)
            CHECK(std::abs(fast[i] - expect[i]) < 1e-12);
    }
}

TEST_CASE("pauli application and involution") {
    Statevector st = Statevector::zero(1);
    sv::apply_pauli(st, Axis::X, 0);
    CHECK(st[1] == cplx(1.0, 0.0)); // X|0> = |1>

    st = Statevector::zero(1);
    sv::apply_gate(st, GateOp::hadamard(0));
    sv::apply_pauli(st, Axis::Z, 0);
    CHECK(st[0].real() == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(st[1].real() == doctest::Approx(-1.0 / std::sqrt(2.0)));

    st = Statevector::zero(1);
    sv::apply_pauli(st, Axis::Y, 0);
    CHECK(st[1] == cplx(0.0, 1.0)); // Y|0> = i|1>

    // Applying any Pauli twice restores the state bit-exactly.
    for (Axis ax : {Axis::X, Axis::Y, Axis::Z}) {
        Statevector s = random_state(3, 99);
        const Statevector ref = s.clone();
        sv::apply_pauli(s, ax, 1);
        sv::apply_pauli(s, ax, 1);
        for (std::size_t i = 0; i < s.dim(); ++i)
            CHECK(s[i] == ref[i]);
    }
}

TEST_CASE("inner product") {
    const Statevector a = random_state(3, 5);
    CHECK(sv::inner_product(a, a).real() == doctest::Approx(1.0));
    CHECK(std::abs(sv::inner_product(a, a).imag()) < 1e-15);

    Statevector zero = Statevector::zero(1);
    Statevector one = Statevector::zero(1);
    sv::apply_pauli(one, Axis::X, 0);
    CHECK(std::abs(sv::inner_product(zero, one)) == 0.0);

    // <0| Ry(theta)|0> = cos(theta/2), from 2x2 algebra.
    const double theta = 1.234;
    Statevector rot = Statevector::zero(1);
    sv::apply_gate(rot, GateOp::rotation(Axis::Y, 0, theta));
    CHECK(sv::inner_product(rot, zero).real() ==
          doctest::Approx(std::cos(theta / 2)));

    const Statevector b4 = random_state(4, 6);
    CHECK_THROWS_AS(sv::inner_product(a, b4), ArgumentError);
}

TEST_CASE("partial trace examples") {
    // |0> (x) |+>: keeping qubit 0 gives |0><0|.
    Statevector st = Statevector::zero(2);
    sv::apply_gate(st, GateOp::hadamard(1));
    const int keep0[] = {0};
    auto frag = sv::partial_trace(st, keep0);
    CHECK(frag.at(0, 0).real() == doctest::Approx(1.0));
    CHECK(std::abs(frag.at(0, 1)) < 1e-12);
    CHECK(std::abs(frag.at(1, 1)) < 1e-12);

    // Bell state: either marginal is I/2.
    st = Statevector::zero(2);
    sv::apply_gate(st, GateOp::hadamard(0));
    sv::apply_gate(st, GateOp::cnot(0, 1));
    frag = sv::partial_trace(st, keep0);
    CHECK(frag.at(0, 0).real() == doctest::Approx(0.5));
    CHECK(frag.at(1, 1).real() == doctest::Approx(0.5));
    CHECK(std::abs(frag.at(0, 1)) < 1e-12);

    CHECK_THROWS_AS(sv::partial_trace(st, std::span<const int>{}),
                    ArgumentError);
}

TEST_CASE("partial trace against brute-force contraction") {
    const Statevector st = random_state(3, 321);
    const int keep[] = {0, 1};
    const auto frag = sv::partial_trace(st, keep);
    CHECK(frag.dims == 2);
    CHECK(std::abs(frag.trace() - cplx(1.0)) < 1e-10);

    // Brute force: rho = |psi><psi| as an 8x8 outer product, then contract
    // the environment qubit 2.
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) {
            cplx acc = 0.0;
            for (int e = 0; e < 2; ++e)
                acc += st[r + 4 * e] * std::conj(st[c + 4 * e]);
            CHECK(std::abs(frag.at(r, c) - acc) < 1e-12);
        }

    // Hermiticity.
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
            CHECK(std::abs(frag.at(r, c) - std::conj(frag.at(c, r))) < 1e-10);
}

TEST_CASE("reduced state purity bounds") {
    Rng rng(55);
    for (int trial = 0; trial < 20; ++trial) {
        Statevector st = random_state(4, 7000 + trial);
        for (int i = 0; i < 30; ++i)
            sv::apply_gate(st, random_gate(4, rng));
        const int keep[] = {1, 3};
        const auto frag = sv::partial_trace(st, keep);
        const double p = frag.purity();
        CHECK(p >= 0.25 - 1e-10);
        CHECK(p <= 1.0 + 1e-10);
    }
}

#if defined(QFK_HAVE_AVX2_BUILD)
TEST_CASE("simd backends agree") {
    if (!simd::backend_supported(simd::Backend::Avx2)) {
        MESSAGE("avx2 not supported on this host; skipping");
        return;
    }
    const simd::Backend saved = simd::active_backend();
    Rng rng(1234);
    for (int n : {1, 2, 3, 5}) {
        for (int trial = 0; trial < 25; ++trial) {
            const Statevector base = random_state(n, 42 * n + trial);
            const GateOp g = random_gate(n, rng);

            simd::set_backend(simd::Backend::Scalar);
            Statevector s_scalar = base.clone();
            sv::apply_gate(s_scalar, g);

            simd::set_backend(simd::Backend::Avx2);
            Statevector s_avx = base.clone();
            sv::apply_gate(s_avx, g);

            // Element-wise kernels run the same arithmetic per amplitude.
            for (std::size_t i = 0; i < base.dim(); ++i)
                CHECK(s_scalar[i] == s_avx[i]);

            const Statevector other = random_state(n, 77 * n + trial);
            simd::set_backend(simd::Backend::Scalar);
            const cplx ip_scalar = sv::inner_product(s_scalar, other);
            simd::set_backend(simd::Backend::Avx2);
            const cplx ip_avx = sv::inner_product(s_scalar, other);
            CHECK(std::abs(ip_scalar - ip_avx) < 1e-12);
        }
    }
    simd::set_backend(saved);
}
#endif

TEST_CASE("argument errors") {
    Statevector st = Statevector::zero(2);
    CHECK_THROWS_AS(sv::apply_gate(st, GateOp::rotation(Axis::X, 5, 0.1)),
                    ArgumentError);
    CHECK_THROWS_AS(sv::apply_gate(st, GateOp::cnot(0, 0)), ArgumentError);
    CHECK_THROWS_AS(sv::apply_pauli(st, Axis::Z, -1), ArgumentError);
}
