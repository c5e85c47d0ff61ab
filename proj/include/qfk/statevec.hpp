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

/// \file statevec.hpp
/// Dense statevector engine: state allocation, gate application, inner
/// products and partial traces. Amplitude ordering is little-endian: qubit 0
/// is the least significant bit of the basis index. Rotation convention is
/// R_sigma(theta) = exp(-i theta sigma / 2).

#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "qfk/simd.hpp"

namespace qfk::sv {

using cplx = std::complex<double>;

enum class Axis : std::uint8_t { X, Y, Z };

/// Memory ceiling for state allocation. Default 24 qubits; the QFK_MAX_QUBITS
/// environment variable or set_max_qubits() overrides.
int max_qubits();
void set_max_qubits(int n);

/// One gate in a circuit. Two-qubit kinds use q0/q1; rotations carry `angle`.
struct GateOp {
    enum class Kind : std::uint8_t { RotX, RotY, RotZ, RotZZ, Hadamard, Cnot, Cz };

    Kind kind{Kind::Hadamard};
    int q0 = 0;
    int q1 = -1;
    double angle = 0.0;

    static GateOp rotation(Axis axis, int qubit, double angle);
    static GateOp zz(int qa, int qb, double angle) {
        return {Kind::RotZZ, qa, qb, angle};
    }
    static GateOp hadamard(int qubit) { return {Kind::Hadamard, qubit, -1, 0.0}; }
    static GateOp cnot(int control, int target) {
        return {Kind::Cnot, control, target, 0.0};
    }
    static GateOp cz(int qa, int qb) { return {Kind::Cz, qa, qb, 0.0}; }

    bool two_qubit() const {
        return kind == Kind::RotZZ || kind == Kind::Cnot || kind == Kind::Cz;
    }

    /// U^dagger of this gate (rotations negate the angle; the rest are their
    /// own inverses).
    GateOp adjoint() const;

    /// Dense matrix of this gate on its own qubits (2x2 or 4x4, row-major),
    /// used by the unitarity tests and the dense kernel oracles.
    std::vector<cplx> dense_matrix() const;
};

class Statevector {
  public:
    /// |0...0> on n qubits. Throws ResourceError above the qubit ceiling.
    static Statevector zero(int n_qubits);

    int n_qubits() const { return n_qubits_; }
    std::size_t dim() const { return amps_.size(); }

    std::span<cplx> amplitudes() { return amps_; }
    std::span<const cplx> amplitudes() const { return amps_; }
    cplx &operator[](std::size_t i) { return amps_[i]; }
    const cplx &operator[](std::size_t i) const { return amps_[i]; }

    Statevector clone() const { return *this; }

    double norm_sq() const {
        return simd::norm_sq(amps_.data(), amps_.size());
    }

  private:
    Statevector(int n, std::size_t dim) : n_qubits_(n), amps_(dim) {}
    int n_qubits_ = 0;
    std::vector<cplx> amps_;
};

/// Apply `gate` in place; returns the state for chaining.
Statevector &apply_gate(Statevector &state, const GateOp &gate);

/// Apply a gate sequence in order.
Statevector &apply_gates(Statevector &state, std::span<const GateOp> gates);

/// Multiply by the single-qubit Pauli X/Y/Z on `qubit` (an involution).
Statevector &apply_pauli(Statevector &state, Axis axis, int qubit);

/// Apply an arbitrary 4x4 matrix (row-major) on the qubit pair (qa, qb);
/// local basis index = bit(qa) + 2*bit(qb). Used by the Haar-block closures
/// and the dense test oracles.
Statevector &apply_dense_2q(Statevector &state, int qa, int qb,
                            std::span<const cplx> m);

/// <a|b>, conjugate-linear in a. Throws on dimension mismatch.
cplx inner_product(const Statevector &a, const Statevector &b);

/// Reduced density matrix over a subset of qubits.
struct DensityFragment {
    int dims = 0;                  // number of kept qubits
    std::vector<cplx> matrix;      // row-major, side 2^dims

    std::size_t side() const { return std::size_t{1} << dims; }
    cplx at(std::size_t r, std::size_t c) const { return matrix[r * side() + c]; }
    cplx trace() const;
    double purity() const;         // Tr[rho^2]
};

/// Trace out every qubit not in `keep`. Kept qubits are reordered ascending;
/// the first kept qubit becomes the least significant bit of the fragment.
DensityFragment partial_trace(const Statevector &state,
                              std::span<const int> keep);

} // namespace qfk::sv
