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

#include "qfk/statevec.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <string>

#include "qfk/errors.hpp"

namespace qfk::sv {

namespace {

constexpr int kDefaultMaxQubits = 24;

int initial_max_qubits() {
    if (const char *env = std::getenv("QFK_MAX_QUBITS")) {
        const int v = std::atoi(env);
        if (v >= 1)
            return v;
    }
    return kDefaultMaxQubits;
}

std::atomic<int> g_max_qubits{initial_max_qubits()};

void check_qubit(const Statevector &state, int q, const char *what) {
    if (q < 0 || q >= state.n_qubits())
        throw ArgumentError(std::string(what) + ": qubit index " +
                            std::to_string(q) + " out of range for " +
                            std::to_string(state.n_qubits()) + " qubits");
}

void check_pair(const Statevector &state, int a, int b, const char *what) {
    check_qubit(state, a, what);
    check_qubit(state, b, what);
    if (a == b)
        throw ArgumentError(std::string(what) + ": qubit indices must differ");
}

constexpr cplx kI{0.0, 1.0};

} // namespace

int max_qubits() { return g_max_qubits.load(std::memory_order_relaxed); }

void set_max_qubits(int n) {
    if (n < 1)
        throw ArgumentError("max_qubits must be >= 1");
    g_max_qubits.store(n, std::memory_order_relaxed);
}

GateOp GateOp::rotation(Axis axis, int qubit, double angle) {
    switch (axis) {
    case Axis::X:
        return {Kind::RotX, qubit, -1, angle};
    case Axis::Y:
        return {Kind::RotY, qubit, -1, angle};
    default:
        return {Kind::RotZ, qubit, -1, angle};
    }
}

GateOp GateOp::adjoint() const {
    GateOp g = *this;
    switch (kind) {
    case Kind::RotX:
    case Kind::RotY:
    case Kind::RotZ:
    case Kind::RotZZ:
        g.angle = -angle;
        break;
    case Kind::Hadamard:
    case Kind::Cnot:
    case Kind::Cz:
        break;
    }
    return g;
}

std::vector<cplx> GateOp::dense_matrix() const {
    const double c = std::cos(angle / 2.0);
    const double s = std::sin(angle / 2.0);
    switch (kind) {
    case Kind::RotX:
        return {c, -kI * s, -kI * s, c};
    case Kind::RotY:
        return {c, -s, s, c};
    case Kind::RotZ:
        return {std::exp(-kI * (angle / 2.0)), 0.0, 0.0,
                std::exp(kI * (angle / 2.0))};
    case Kind::Hadamard: {
        const double r = 1.0 / std::sqrt(2.0);
        return {r, r, r, -r};
    }
    case Kind::RotZZ: {
        const cplx e = std::exp(-kI * (angle / 2.0));
        const cplx o = std::exp(kI * (angle / 2.0));
        std::vector<cplx> m(16, 0.0);
        m[0] = e;
        m[5] = o;
        m[10] = o;
        m[15] = e;
        return m;
    }
    case Kind::Cnot: {
        // Little-endian on (q0=control, q1=target) restricted to those qubits:
        // basis index bit0 = control, bit1 = target.
        std::vector<cplx> m(16, 0.0);
        m[0 * 4 + 0] = 1.0;
        m[1 * 4 + 3] = 1.0;
        m[2 * 4 + 2] = 1.0;
        m[3 * 4 + 1] = 1.0;
        return m;
    }
    case Kind::Cz: {
        std::vector<cplx> m(16, 0.0);
        m[0] = 1.0;
        m[5] = 1.0;
        m[10] = 1.0;
        m[15] = -1.0;
        return m;
    }
    }
    return {};
}

Statevector Statevector::zero(int n_qubits) {
    if (n_qubits < 1)
        throw ArgumentError("zero_state: need at least 1 qubit");
    if (n_qubits > max_qubits())
        throw ResourceError("zero_state: " + std::to_string(n_qubits) +
                            " qubits exceeds the ceiling of " +
                            std::to_string(max_qubits()) +
                            " (set QFK_MAX_QUBITS to raise)");
    Statevector st(n_qubits, std::size_t{1} << n_qubits);
    st.amps_[0] = 1.0;
    return st;
}

Statevector &apply_gate(Statevector &state, const GateOp &gate) {
    cplx *a = state.amplitudes().data();
    const std::size_t dim = state.dim();
    switch (gate.kind) {
    case GateOp::Kind::RotX: {
        check_qubit(state, gate.q0, "RotX");
        const double c = std::cos(gate.angle / 2.0);
        const double s = std::sin(gate.angle / 2.0);
        const cplx m[4] = {c, -kI * s, -kI * s, c};
        simd::apply_matrix2(a, dim, gate.q0, m);
        break;
    }
    case GateOp::Kind::RotY: {
        check_qubit(state, gate.q0, "RotY");
        const double c = std::cos(gate.angle / 2.0);
        const double s = std::sin(gate.angle / 2.0);
        const cplx m[4] = {c, -s, s, c};
        simd::apply_matrix2(a, dim, gate.q0, m);
        break;
    }
    case GateOp::Kind::RotZ: {
        check_qubit(state, gate.q0, "RotZ");
        simd::apply_diag1(a, dim, gate.q0, std::exp(-kI * (gate.angle / 2.0)),
                          std::exp(kI * (gate.angle / 2.0)));
        break;
    }
    case GateOp::Kind::RotZZ: {
        check_pair(state, gate.q0, gate.q1, "RotZZ");
        simd::apply_diag_zz(a, dim, gate.q0, gate.q1,
                            std::exp(-kI * (gate.angle / 2.0)),
                            std::exp(kI * (gate.angle / 2.0)));
        break;
    }
    case GateOp::Kind::Hadamard: {
        check_qubit(state, gate.q0, "Hadamard");
        const double r = 1.0 / std::sqrt(2.0);
        const cplx m[4] = {r, r, r, -r};
        simd::apply_matrix2(a, dim, gate.q0, m);
        break;
    }
    case GateOp::Kind::Cnot:
        check_pair(state, gate.q0, gate.q1, "Cnot");
        simd::apply_cnot(a, dim, gate.q0, gate.q1);
        break;
    case GateOp::Kind::Cz:
        check_pair(state, gate.q0, gate.q1, "Cz");
        simd::apply_cz(a, dim, gate.q0, gate.q1);
        break;
    }
    return state;
}

Statevector &apply_gates(Statevector &state, std::span<const GateOp> gates) {
    for (const GateOp &g : gates)
        apply_gate(state, g);
    return state;
}

Statevector &apply_pauli(Statevector &state, Axis axis, int qubit) {
    check_qubit(state, qubit, "apply_pauli");
    cplx *a = state.amplitudes().data();
    const std::size_t dim = state.dim();
    switch (axis) {
    case Axis::X: {
        const cplx m[4] = {0.0, 1.0, 1.0, 0.0};
        simd::apply_matrix2(a, dim, qubit, m);
        break;
    }
    case Axis::Y: {
        const cplx m[4] = {0.0, -kI, kI, 0.0};
        simd::apply_matrix2(a, dim, qubit, m);
        break;
    }
    case Axis::Z:
        simd::apply_diag1(a, dim, qubit, 1.0, -1.0);
        break;
    }
    return state;
}

Statevector &apply_dense_2q(Statevector &state, int qa, int qb,
                            std::span<const cplx> m) {
    check_pair(state, qa, qb, "apply_dense_2q");
    if (m.size() != 16)
        throw ArgumentError("apply_dense_2q: matrix must be 4x4");
    cplx *a = state.amplitudes().data();
    const std::size_t dim = state.dim();
    const std::size_t ma = std::size_t{1} << qa;
    const std::size_t mb = std::size_t{1} << qb;
    for (std::size_t i = 0; i < dim; ++i) {
        if (i & (ma | mb))
            continue; // visit each 4-amplitude group once, at its base index
        const std::size_t idx[4] = {i, i | ma, i | mb, i | ma | mb};
        cplx v[4];
        for (int r = 0; r < 4; ++r)
            v[r] = a[idx[r]];
        for (int r = 0; r < 4; ++r) {
            cplx acc = 0.0;
            for (int c = 0; c < 4; ++c)
                acc += m[r * 4 + c] * v[c];
            a[idx[r]] = acc;
        }
    }
    return state;
}

cplx inner_product(const Statevector &a, const Statevector &b) {
    if (a.n_qubits() != b.n_qubits())
        throw ArgumentError("inner_product: qubit counts differ");
    return simd::inner_product(a.amplitudes().data(), b.amplitudes().data(),
                               a.dim());
}

cplx DensityFragment::trace() const {
    cplx t = 0.0;
    for (std::size_t r = 0; r < side(); ++r)
        t += matrix[r * side() + r];
    return t;
}

double DensityFragment::purity() const {
    // Tr[rho^2] = sum |rho_ij|^2 for Hermitian rho.
    double p = 0.0;
    for (const cplx &v : matrix)
        p += std::norm(v);
    return p;
}

DensityFragment partial_trace(const Statevector &state,
                              std::span<const int> keep) {
    if (keep.empty())
        throw ArgumentError("partial_trace: keep set must be nonempty");
    std::vector<int> kq(keep.begin(), keep.end());
    for (int q : kq)
        check_qubit(state, q, "partial_trace");
    std::sort(kq.begin(), kq.end());
    for (std::size_t i = 1; i < kq.size(); ++i)
        if (kq[i] == kq[i - 1])
            throw ArgumentError("partial_trace: duplicate qubit in keep set");

    const int nk = static_cast<int>(kq.size());
    std::vector<int> env;
    for (int q = 0; q < state.n_qubits(); ++q)
        if (!std::binary_search(kq.begin(), kq.end(), q))
            env.push_back(q);

    const std::size_t kside = std::size_t{1} << nk;
    const std::size_t eside = std::size_t{1} << env.size();
    DensityFragment frag{nk, std::vector<cplx>(kside * kside, 0.0)};

    auto scatter = [](std::size_t bits, const std::vector<int> &pos) {
        std::size_t idx = 0;
        for (std::size_t j = 0; j < pos.size(); ++j)
            if (bits & (std::size_t{1} << j))
                idx |= std::size_t{1} << pos[j];
        return idx;
    };

    const cplx *a = state.amplitudes().data();
    for (std::size_t r = 0; r < kside; ++r) {
        const std::size_t rbits = scatter(r, kq);
        for (std::size_t c = 0; c < kside; ++c) {
            const std::size_t cbits = scatter(c, kq);
            cplx acc = 0.0;
            for (std::size_t e = 0; e < eside; ++e) {
                const std::size_t ebits = scatter(e, env);
                acc += a[rbits | ebits] * std::conj(a[cbits | ebits]);
            }
            frag.matrix[r * kside + c] = acc;
        }
    }
    return frag;
}

} // namespace qfk::sv
