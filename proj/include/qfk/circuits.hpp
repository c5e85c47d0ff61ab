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

/// \file circuits.hpp
/// Builders for the four circuit families (tensor-product, IQP, ALA, HEA),
/// data-re-uploading composition, parameter binding, and prefix/generator
/// extraction for the Fisher kernels.
///
/// Every family follows U(x, theta) = prod_d U(theta_d) U(x): within each
/// layer the data sub-circuit is applied first, then the parameterized one.

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "qfk/statevec.hpp"

namespace qfk::circ {

enum class Family : std::uint8_t { TensorProduct, Iqp, Ala, Hea };

const char *family_name(Family f);
Family family_from_name(const std::string &name);

/// One gate descriptor. Data/Param slots resolve their angle at bind time as
///   angle = scale * v + offset,
/// where v = x[index] (or x[index] * x[index2] for bilinear data slots) or
/// v = theta[index].
struct Slot {
    enum class Role : std::uint8_t { Fixed, Data, Param };

    sv::GateOp gate;
    Role role = Role::Fixed;
    int index = -1;
    int index2 = -1;
    double scale = 1.0;
    double offset = 0.0;
};

/// Bookkeeping for one parameter-carrying rotation occurrence: the Pauli
/// generator B of the gate and the prefix U_{1:i} = gates[0..prefix_length).
/// A parameter shared by several gates (tensor-product family) contributes
/// one entry per occurrence. IQP parameter slots on ZZ rotations carry a
/// two-qubit Z(x)Z generator, recorded via `qubit2`.
struct GeneratorInfo {
    int param_index = -1;
    sv::Axis axis = sv::Axis::Z;
    int qubit = 0;
    int qubit2 = -1;               // second qubit of a ZZ generator, else -1
    std::size_t prefix_length = 0; // index just past the theta_i gate
    double scale = 1.0;            // d(angle)/d(theta) of the slot
};

class BoundCircuit;

class CircuitTemplate {
  public:
    /// U_TP layers: per layer one data sub-layer (Ry(x_q) Rz(x_q) per qubit)
    /// then one parameter sub-layer (Ry(theta) Rz(theta) per qubit, the two
    /// rotations sharing the angle). p = n*L distinct parameters.
    static CircuitTemplate tensor_product(int n, int depth);

    /// IQP layers: H wall, Z rotations with phi_i(x) = x_i, ZZ rotations with
    /// phi_{j,j+1}(x) = x_j x_{j+1} / pi; the parameter half uses
    /// phi_i(theta) = theta_i and phi_{j,j+1}(theta) = theta_{n+j}, giving
    /// 2n-1 parameters per layer. Gate angles carry a factor 2 so that each
    /// phi term realizes exp(-i phi Z) / exp(-i phi ZZ).
    static CircuitTemplate iqp(int n, int depth);

    /// Alternating layered ansatz with m-qubit blocks; odd layers tile all
    /// qubits, even layers are shifted by m/2 and leave the edge qubits idle.
    /// Each block holds one (CNOT, Ry(data), Rz(param)) triple per qubit.
    /// m = 1 degenerates to the tensor-product structure.
    static CircuitTemplate ala(int n, int m, int depth,
                               std::uint64_t structure_seed);

    /// Hardware-efficient ansatz: per layer one data rotation per qubit, a
    /// CNOT ladder, and one parameter rotation per qubit; all rotation axes
    /// are a pure function of structure_seed.
    static CircuitTemplate hea(int n, int depth, std::uint64_t structure_seed);

    Family family() const { return family_; }
    int n_qubits() const { return n_; }
    int block_width() const { return m_; }
    int depth() const { return depth_; }
    std::uint64_t structure_seed() const { return seed_; }
    int feature_count() const { return n_; }
    int param_count() const { return param_count_; }
    std::span<const Slot> slots() const { return slots_; }

    /// Number of parameter-carrying gate occurrences (the ALDQFK term count;
    /// equals param_count() except for the tensor-product structure where
    /// each parameter feeds an Ry and an Rz).
    int generator_count() const { return static_cast<int>(gens_.size()); }

    /// Generator bookkeeping per parameter-carrying occurrence, in gate
    /// order. Independent of any particular binding.
    std::span<const GeneratorInfo> generator_table() const { return gens_; }

    /// Resolve all slots against concrete (x, theta). Throws ArgumentError on
    /// length mismatch.
    BoundCircuit bind(std::span<const double> x,
                      std::span<const double> theta) const;

    nlohmann::json to_json() const;
    static CircuitTemplate from_json(const nlohmann::json &j);

    /// Short stable descriptor (family/n/m/L/seed + slot hash) for report
    /// provenance.
    std::string descriptor() const;

  private:
    CircuitTemplate() = default;
    void finalize(); // derives param/generator counts, validates indices

    Family family_ = Family::TensorProduct;
    int n_ = 0;
    int m_ = 0;
    int depth_ = 0;
    std::uint64_t seed_ = 0;
    std::vector<Slot> slots_;
    std::vector<GeneratorInfo> gens_;
    int param_count_ = 0;
};

class BoundCircuit {
  public:
    const CircuitTemplate &circuit_template() const { return *tpl_; }
    int n_qubits() const { return tpl_->n_qubits(); }
    std::span<const double> x() const { return x_; }
    std::span<const double> theta() const { return theta_; }
    std::span<const sv::GateOp> gates() const { return gates_; }
    std::span<const GeneratorInfo> generators() const {
        return tpl_->generator_table();
    }

    /// Evolve |0...0> through the full gate list.
    sv::Statevector evolve() const;

    /// Evolve with the angle of the gate at `gate_pos` shifted by `delta`
    /// (parameter-shift evaluations).
    sv::Statevector evolve_shifted(std::size_t gate_pos, double delta) const;

  private:
    friend class CircuitTemplate;
    const CircuitTemplate *tpl_ = nullptr;
    std::vector<double> x_, theta_;
    std::vector<sv::GateOp> gates_;
};

/// d<psi|O|psi>/d(theta[param_index]) by the +-pi/2 shift applied at the gate
/// angle of every occurrence (chain rule over the slot's affine map), for a
/// single-qubit Pauli observable O. Validates the generator bookkeeping.
double parameter_shift_derivative(const BoundCircuit &bound, int param_index,
                                  sv::Axis obs_axis, int obs_qubit);

/// Same derivative by central finite differences in theta (step h).
double finite_difference_derivative(const CircuitTemplate &tpl,
                                    std::span<const double> x,
                                    std::span<const double> theta,
                                    int param_index, sv::Axis obs_axis,
                                    int obs_qubit, double h = 1e-5);

} // namespace qfk::circ
