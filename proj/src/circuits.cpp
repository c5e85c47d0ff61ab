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

#include "qfk/circuits.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qfk/errors.hpp"
#include "qfk/rng.hpp"

namespace qfk::circ {

using sv::Axis;
using sv::GateOp;

const char *family_name(Family f) {
    switch (f) {
    case Family::TensorProduct:
        return "tensor_product";
    case Family::Iqp:
        return "iqp";
    case Family::Ala:
        return "ala";
    case Family::Hea:
        return "hea";
    }
    return "?";
}

Family family_from_name(const std::string &name) {
    if (name == "tensor_product")
        return Family::TensorProduct;
    if (name == "iqp")
        return Family::Iqp;
    if (name == "ala")
        return Family::Ala;
    if (name == "hea")
        return Family::Hea;
    throw ArgumentError("unknown circuit family: " + name);
}

namespace {

Slot data_rot(Axis axis, int qubit, int feature, double scale = 1.0) {
    Slot s;
    s.gate = GateOp::rotation(axis, qubit, 0.0);
    s.role = Slot::Role::Data;
    s.index = feature;
    s.scale = scale;
    return s;
}

Slot data_zz(int qa, int qb, int fa, int fb, double scale) {
    Slot s;
    s.gate = GateOp::zz(qa, qb, 0.0);
    s.role = Slot::Role::Data;
    s.index = fa;
    s.index2 = fb;
    s.scale = scale;
    return s;
}

Slot param_rot(Axis axis, int qubit, int param, double scale = 1.0) {
    Slot s;
    s.gate = GateOp::rotation(axis, qubit, 0.0);
    s.role = Slot::Role::Param;
    s.index = param;
    s.scale = scale;
    return s;
}

Slot param_zz(int qa, int qb, int param, double scale) {
    Slot s;
    s.gate = GateOp::zz(qa, qb, 0.0);
    s.role = Slot::Role::Param;
    s.index = param;
    s.scale = scale;
    return s;
}

Slot fixed(GateOp g) {
    Slot s;
    s.gate = g;
    return s;
}

void emit_tensor_product_slots(std::vector<Slot> &slots, int n, int depth) {
    for (int d = 0; d < depth; ++d) {
        for (int q = 0; q < n; ++q) {
            slots.push_back(data_rot(Axis::Y, q, q));
            slots.push_back(data_rot(Axis::Z, q, q));
        }
        for (int q = 0; q < n; ++q) {
            const int p = d * n + q;
            slots.push_back(param_rot(Axis::Y, q, p));
            slots.push_back(param_rot(Axis::Z, q, p));
        }
    }
}

Axis axis_from(Rng &rng) {
    switch (rng.uniform_int(3)) {
    case 0:
        return Axis::X;
    case 1:
        return Axis::Y;
    default:
        return Axis::Z;
    }
}

// Data-rotation axes exclude Z: a Z rotation acts trivially on |0...0> and
// would leave the first layer of a qubit data-independent.
Axis data_axis_from(Rng &rng) {
    return rng.uniform_int(2) == 0 ? Axis::X : Axis::Y;
}

} // namespace

void CircuitTemplate::finalize() {
    int max_param = -1;
    std::vector<bool> seen;
    gens_.clear();
    for (std::size_t i = 0; i < slots_.size(); ++i) {
        const Slot &s = slots_[i];
        if (s.role == Slot::Role::Data) {
            if (s.index < 0 || s.index >= n_ ||
                (s.index2 >= 0 && s.index2 >= n_))
                throw ArgumentError("data slot feature index out of range");
        } else if (s.role == Slot::Role::Param) {
            if (s.index < 0)
                throw ArgumentError("negative parameter index");
            if (s.index >= static_cast<int>(seen.size()))
                seen.resize(s.index + 1, false);
            seen[s.index] = true;
            max_param = std::max(max_param, s.index);

            GeneratorInfo gen;
            gen.param_index = s.index;
            gen.qubit = s.gate.q0;
            gen.prefix_length = i + 1;
            gen.scale = s.scale;
            switch (s.gate.kind) {
            case GateOp::Kind::RotX:
                gen.axis = Axis::X;
                break;
            case GateOp::Kind::RotY:
                gen.axis = Axis::Y;
                break;
            case GateOp::Kind::RotZ:
                gen.axis = Axis::Z;
                break;
            case GateOp::Kind::RotZZ:
                gen.axis = Axis::Z;
                gen.qubit2 = s.gate.q1;
                break;
            default:
                throw ArgumentError("parameter slot on a non-rotation gate");
            }
            gens_.push_back(gen);
        }
    }
    param_count_ = max_param + 1;
    for (int p = 0; p < param_count_; ++p)
        if (!seen[p])
            throw ArgumentError("parameter indices have gaps");
}

CircuitTemplate CircuitTemplate::tensor_product(int n, int depth) {
    if (n < 1 || depth < 1)
        throw ArgumentError("tensor_product: need n >= 1 and depth >= 1");
    CircuitTemplate t;
    t.family_ = Family::TensorProduct;
    t.n_ = n;
    t.m_ = 1;
    t.depth_ = depth;
    emit_tensor_product_slots(t.slots_, n, depth);
    t.finalize();
    return t;
}

CircuitTemplate CircuitTemplate::iqp(int n, int depth) {
    if (n < 2)
        throw ArgumentError("iqp: the ZZ terms need n >= 2");
    if (depth < 1)
        throw ArgumentError("iqp: need depth >= 1");
    CircuitTemplate t;
    t.family_ = Family::Iqp;
    t.n_ = n;
    t.m_ = 0;
    t.depth_ = depth;
    const double two_over_pi = 2.0 / std::numbers::pi;
    for (int d = 0; d < depth; ++d) {
        // Data half: U_phi(x) H^n with phi_i = x_i, phi_{j,j+1} = x_j x_{j+1}/pi.
        for (int q = 0; q < n; ++q)
            t.slots_.push_back(fixed(GateOp::hadamard(q)));
        for (int q = 0; q < n; ++q)
            t.slots_.push_back(data_rot(Axis::Z, q, q, 2.0));
        for (int j = 0; j + 1 < n; ++j)
            t.slots_.push_back(data_zz(j, j + 1, j, j + 1, two_over_pi));
        // Parameter half: phi_i = theta_i, phi_{j,j+1} = theta_{n+j}.
        const int base = d * (2 * n - 1);
        for (int q = 0; q < n; ++q)
            t.slots_.push_back(fixed(GateOp::hadamard(q)));
        for (int q = 0; q < n; ++q)
            t.slots_.push_back(param_rot(Axis::Z, q, base + q, 2.0));
        for (int j = 0; j + 1 < n; ++j)
            t.slots_.push_back(param_zz(j, j + 1, base + n + j, 2.0));
    }
    t.finalize();
    return t;
}

CircuitTemplate CircuitTemplate::ala(int n, int m, int depth,
                                     std::uint64_t structure_seed) {
    if (n < 1 || depth < 1)
        throw ArgumentError("ala: need n >= 1 and depth >= 1");
    if (m != 1 && m % 2 != 0)
        throw ArgumentError("ala: block width must be 1 or even");
    if (m < 1 || n % m != 0)
        throw ArgumentError("ala: qubit count must be divisible by the block width");
    CircuitTemplate t;
    t.family_ = Family::Ala;
    t.n_ = n;
    t.m_ = m;
    t.depth_ = depth;
    t.seed_ = structure_seed;
    if (m == 1) {
        // Stated degeneration: the m=1 ALA is the tensor-product circuit.
        emit_tensor_product_slots(t.slots_, n, depth);
        t.finalize();
        return t;
    }
    int param = 0;
    for (int d = 1; d <= depth; ++d) {
        const bool shifted = (d % 2 == 0);
        const int first = shifted ? m / 2 : 0;
        const int blocks = shifted ? n / m - 1 : n / m;
        for (int b = 0; b < blocks; ++b) {
            const int s = first + b * m;
            for (int a = 0; a < m; ++a) {
                if (a + 1 < m) {
                    // CNOT direction alternates between odd and even layers.
                    t.slots_.push_back(fixed(shifted
                                                 ? GateOp::cnot(s + a + 1, s + a)
                                                 : GateOp::cnot(s + a, s + a + 1)));
                }
                t.slots_.push_back(data_rot(Axis::Y, s + a, s + a));
                t.slots_.push_back(param_rot(Axis::Z, s + a, param++));
            }
        }
    }
    t.finalize();
    return t;
}

CircuitTemplate CircuitTemplate::hea(int n, int depth,
                                     std::uint64_t structure_seed) {
    if (n < 2 || depth < 1)
        throw ArgumentError("hea: need n >= 2 and depth >= 1");
    CircuitTemplate t;
    t.family_ = Family::Hea;
    t.n_ = n;
    t.m_ = 0;
    t.depth_ = depth;
    t.seed_ = structure_seed;
    Rng rng(structure_seed);
    for (int d = 0; d < depth; ++d) {
        for (int q = 0; q < n; ++q)
            t.slots_.push_back(data_rot(data_axis_from(rng), q, q));
        // Ring of CNOTs; direction alternates per layer to spread the light
        // cone both ways.
        if (d % 2 == 0) {
            for (int q = 0; q < n; ++q)
                t.slots_.push_back(fixed(GateOp::cnot(q, (q + 1) % n)));
        } else {
            for (int q = n - 1; q >= 0; --q)
                t.slots_.push_back(fixed(GateOp::cnot((q + 1) % n, q)));
        }
        for (int q = 0; q < n; ++q)
            t.slots_.push_back(param_rot(axis_from(rng), q, d * n + q));
    }
    t.finalize();
    return t;
}

BoundCircuit CircuitTemplate::bind(std::span<const double> x,
                                   std::span<const double> theta) const {
    if (static_cast<int>(x.size()) != feature_count())
        throw ArgumentError("bind: expected " + std::to_string(feature_count()) +
                            " features, got " + std::to_string(x.size()));
    if (static_cast<int>(theta.size()) != param_count())
        throw ArgumentError("bind: expected " + std::to_string(param_count()) +
                            " parameters, got " + std::to_string(theta.size()));
    BoundCircuit b;
    b.tpl_ = this;
    b.x_.assign(x.begin(), x.end());
    b.theta_.assign(theta.begin(), theta.end());
    b.gates_.reserve(slots_.size());
    for (const Slot &s : slots_) {
        GateOp g = s.gate;
        switch (s.role) {
        case Slot::Role::Fixed:
            break;
        case Slot::Role::Data: {
            const double v =
                s.index2 >= 0 ? x[s.index] * x[s.index2] : x[s.index];
            g.angle = s.scale * v + s.offset;
            break;
        }
        case Slot::Role::Param:
            g.angle = s.scale * theta[s.index] + s.offset;
            break;
        }
        b.gates_.push_back(g);
    }
    return b;
}

sv::Statevector BoundCircuit::evolve() const {
    sv::Statevector st = sv::Statevector::zero(n_qubits());
    sv::apply_gates(st, gates());
    return st;
}

sv::Statevector BoundCircuit::evolve_shifted(std::size_t gate_pos,
                                             double delta) const {
    if (gate_pos >= gates_.size())
        throw ArgumentError("evolve_shifted: gate position out of range");
    sv::Statevector st = sv::Statevector::zero(n_qubits());
    for (std::size_t i = 0; i < gates_.size(); ++i) {
        if (i == gate_pos) {
            GateOp g = gates_[i];
            g.angle += delta;
            sv::apply_gate(st, g);
        } else {
            sv::apply_gate(st, gates_[i]);
        }
    }
    return st;
}

nlohmann::json CircuitTemplate::to_json() const {
    nlohmann::json j;
    j["family"] = family_name(family_);
    j["n_qubits"] = n_;
    j["block_width"] = m_;
    j["depth"] = depth_;
    j["structure_seed"] = seed_;
    j["param_count"] = param_count_;
    nlohmann::json slots = nlohmann::json::array();
    for (const Slot &s : slots_) {
        slots.push_back({{"kind", static_cast<int>(s.gate.kind)},
                         {"q0", s.gate.q0},
                         {"q1", s.gate.q1},
                         {"angle", s.gate.angle},
                         {"role", static_cast<int>(s.role)},
                         {"index", s.index},
                         {"index2", s.index2},
                         {"scale", s.scale},
                         {"offset", s.offset}});
    }
    j["slots"] = std::move(slots);
    return j;
}

CircuitTemplate CircuitTemplate::from_json(const nlohmann::json &j) {
    CircuitTemplate t;
    t.family_ = family_from_name(j.at("family").get<std::string>());
    t.n_ = j.at("n_qubits").get<int>();
    t.m_ = j.at("block_width").get<int>();
    t.depth_ = j.at("depth").get<int>();
    t.seed_ = j.at("structure_seed").get<std::uint64_t>();
    for (const auto &js : j.at("slots")) {
        Slot s;
        s.gate.kind = static_cast<GateOp::Kind>(js.at("kind").get<int>());
        s.gate.q0 = js.at("q0").get<int>();
        s.gate.q1 = js.at("q1").get<int>();
        s.gate.angle = js.at("angle").get<double>();
        s.role = static_cast<Slot::Role>(js.at("role").get<int>());
        s.index = js.at("index").get<int>();
        s.index2 = js.at("index2").get<int>();
        s.scale = js.at("scale").get<double>();
        s.offset = js.at("offset").get<double>();
        t.slots_.push_back(s);
    }
    t.finalize();
    return t;
}

std::string CircuitTemplate::descriptor() const {
    // FNV-1a over a canonical slot rendering.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](const std::string &s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
    };
    for (const Slot &s : slots_) {
        std::ostringstream os;
        os << static_cast<int>(s.gate.kind) << ',' << s.gate.q0 << ','
           << s.gate.q1 << ',' << s.gate.angle << ','
           << static_cast<int>(s.role) << ',' << s.index << ',' << s.index2
           << ',' << s.scale << ',' << s.offset << ';';
        mix(os.str());
    }
    std::ostringstream os;
    os << family_name(family_) << "/n=" << n_ << "/m=" << m_
       << "/L=" << depth_ << "/seed=" << seed_ << "#" << std::hex << h;
    return os.str();
}

namespace {

double pauli_expectation(const sv::Statevector &psi, Axis axis, int qubit) {
    sv::Statevector phi = psi.clone();
    sv::apply_pauli(phi, axis, qubit);
    return sv::inner_product(psi, phi).real();
}

} // namespace

double parameter_shift_derivative(const BoundCircuit &bound, int param_index,
                                  sv::Axis obs_axis, int obs_qubit) {
    if (param_index < 0 ||
        param_index >= bound.circuit_template().param_count())
        throw ArgumentError("parameter_shift_derivative: parameter index out of range");
    const double half_pi = std::numbers::pi / 2.0;
    double deriv = 0.0;
    for (const GeneratorInfo &gen : bound.generators()) {
        if (gen.param_index != param_index)
            continue;
        const std::size_t pos = gen.prefix_length - 1;
        const sv::Statevector plus = bound.evolve_shifted(pos, half_pi);
        const sv::Statevector minus = bound.evolve_shifted(pos, -half_pi);
        deriv += gen.scale *
                 (pauli_expectation(plus, obs_axis, obs_qubit) -
                  pauli_expectation(minus, obs_axis, obs_qubit)) /
                 2.0;
    }
    return deriv;
}

double finite_difference_derivative(const CircuitTemplate &tpl,
                                    std::span<const double> x,
                                    std::span<const double> theta,
                                    int param_index, sv::Axis obs_axis,
                                    int obs_qubit, double h) {
    std::vector<double> th(theta.begin(), theta.end());
    th[param_index] += h;
    const sv::Statevector plus = tpl.bind(x, th).evolve();
    th[param_index] -= 2.0 * h;
    const sv::Statevector minus = tpl.bind(x, th).evolve();
    return (pauli_expectation(plus, obs_axis, obs_qubit) -
            pauli_expectation(minus, obs_axis, obs_qubit)) /
           (2.0 * h);
}

} // namespace qfk::circ
