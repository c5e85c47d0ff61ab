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

#include "qfk/kernels.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include <nlohmann/json.hpp>

#include "qfk/errors.hpp"
#include "qfk/parallel.hpp"

namespace qfk::kern {

using sv::Statevector;

const char *kernel_name(KernelKind k) {
    switch (k) {
    case KernelKind::Fidelity:
        return "fidelity";
    case KernelKind::Aldqfk:
        return "aldqfk";
    case KernelKind::AldqfkNormalized:
        return "aldqfk_normalized";
    case KernelKind::SldqfkParamShift:
        return "sldqfk_param_shift";
    }
    return "?";
}

KernelKind kernel_from_name(const std::string &name) {
    if (name == "fidelity")
        return KernelKind::Fidelity;
    if (name == "aldqfk")
        return KernelKind::Aldqfk;
    if (name == "aldqfk_normalized")
        return KernelKind::AldqfkNormalized;
    if (name == "sldqfk_param_shift")
        return KernelKind::SldqfkParamShift;
    throw ArgumentError("unknown kernel kind: " + name);
}

KernelSpec::KernelSpec(KernelKind kind_,
                       std::shared_ptr<const circ::CircuitTemplate> tpl_,
                       std::vector<double> theta_)
    : kind(kind_), tpl(std::move(tpl_)), theta(std::move(theta_)) {
    if (!tpl)
        throw ArgumentError("KernelSpec: null circuit template");
    if (static_cast<int>(theta.size()) != tpl->param_count())
        throw ArgumentError("KernelSpec: theta length does not match the template");
    if (kind != KernelKind::Fidelity && tpl->param_count() == 0)
        throw ArgumentError("KernelSpec: Fisher kernels need at least one parameter");
}

namespace {

void apply_generator_pauli(Statevector &st, const circ::GeneratorInfo &gen) {
    sv::apply_pauli(st, gen.axis, gen.qubit);
    if (gen.qubit2 >= 0)
        sv::apply_pauli(st, sv::Axis::Z, gen.qubit2);
}

/// All |u_i(x)> = U_{1:i}^dag B_i U_{1:i} |0>, built with one incremental
/// forward pass; the inverse prefix is re-applied per term.
std::vector<Statevector> aldqfk_features(const circ::BoundCircuit &bound) {
    const auto gates = bound.gates();
    const auto gens = bound.generators();
    std::vector<Statevector> out;
    out.reserve(gens.size());
    Statevector prefix_state = Statevector::zero(bound.n_qubits());
    std::size_t gi = 0;
    for (std::size_t pos = 0; pos <= gates.size(); ++pos) {
        while (gi < gens.size() && gens[gi].prefix_length == pos) {
            Statevector u = prefix_state.clone();
            apply_generator_pauli(u, gens[gi]);
            for (std::size_t j = pos; j-- > 0;)
                sv::apply_gate(u, gates[j].adjoint());
            out.push_back(std::move(u));
            ++gi;
        }
        if (pos < gates.size())
            sv::apply_gate(prefix_state, gates[pos]);
    }
    return out;
}

/// Shifted states for the SLDQFK: per generator occurrence g the pair
/// (psi_{g,+}, psi_{g,-}) with the gate angle shifted by +-pi/2.
std::vector<Statevector> sldqfk_features(const circ::BoundCircuit &bound) {
    const double half_pi = std::numbers::pi / 2.0;
    std::vector<Statevector> out;
    out.reserve(2 * bound.generators().size());
    for (const circ::GeneratorInfo &gen : bound.generators()) {
        const std::size_t pos = gen.prefix_length - 1;
        out.push_back(bound.evolve_shifted(pos, half_pi));
        out.push_back(bound.evolve_shifted(pos, -half_pi));
    }
    return out;
}

double fidelity(const Statevector &a, const Statevector &b) {
    return std::norm(sv::inner_product(a, b));
}

/// Tr[L_x L_x'] summed over parameters, from the shifted-state bundles.
/// L_{x,l} = sum_{g in occ(l)} s_g (rho_{g+} - rho_{g-}); every pure-state
/// product Tr[rho_a rho_b] is a fidelity.
double sldqfk_from_features(std::span<const circ::GeneratorInfo> gens,
                            const std::vector<Statevector> &fa,
                            const std::vector<Statevector> &fb) {
    double total = 0.0;
    for (std::size_t g = 0; g < gens.size(); ++g) {
        for (std::size_t h = 0; h < gens.size(); ++h) {
            if (gens[g].param_index != gens[h].param_index)
                continue;
            const double w = gens[g].scale * gens[h].scale;
            const Statevector &gp = fa[2 * g], &gm = fa[2 * g + 1];
            const Statevector &hp = fb[2 * h], &hm = fb[2 * h + 1];
            total += w * (fidelity(gp, hp) - fidelity(gp, hm) -
                          fidelity(gm, hp) + fidelity(gm, hm));
        }
    }
    return total;
}

circ::BoundCircuit bind_spec(const KernelSpec &spec,
                             std::span<const double> x) {
    return spec.tpl->bind(x, spec.theta);
}

} // namespace

double fidelity_kernel(const KernelSpec &spec, std::span<const double> x,
                       std::span<const double> xp) {
    if (spec.kind != KernelKind::Fidelity)
        throw ArgumentError("fidelity_kernel: spec kind is not Fidelity");
    const Statevector a = bind_spec(spec, x).evolve();
    const Statevector b = bind_spec(spec, xp).evolve();
    return fidelity(a, b);
}

double aldqfk_term(const KernelSpec &spec, std::span<const double> x,
                   std::span<const double> xp, int i) {
    if (i < 0 || i >= spec.tpl->generator_count())
        throw ArgumentError("aldqfk_term: term index out of range");
    const auto fa = aldqfk_features(bind_spec(spec, x));
    const auto fb = aldqfk_features(bind_spec(spec, xp));
    return sv::inner_product(fa[i], fb[i]).real();
}

double aldqfk(const KernelSpec &spec, std::span<const double> x,
              std::span<const double> xp) {
    if (spec.kind != KernelKind::Aldqfk &&
        spec.kind != KernelKind::AldqfkNormalized)
        throw ArgumentError("aldqfk: spec kind is not an ALDQFK kind");
    const auto fa = aldqfk_features(bind_spec(spec, x));
    const auto fb = aldqfk_features(bind_spec(spec, xp));
    double sum = 0.0;
    for (std::size_t i = 0; i < fa.size(); ++i)
        sum += sv::inner_product(fa[i], fb[i]).real();
    if (spec.kind == KernelKind::AldqfkNormalized)
        sum /= static_cast<double>(fa.size());
    return sum;
}

double sldqfk_param_shift(const KernelSpec &spec, std::span<const double> x,
                          std::span<const double> xp) {
    if (spec.kind != KernelKind::SldqfkParamShift)
        throw ArgumentError("sldqfk_param_shift: wrong spec kind");
    const circ::BoundCircuit ba = bind_spec(spec, x);
    const circ::BoundCircuit bb = bind_spec(spec, xp);
    return sldqfk_from_features(spec.tpl->generator_table(),
                                sldqfk_features(ba), sldqfk_features(bb));
}

double evaluate(const KernelSpec &spec, std::span<const double> x,
                std::span<const double> xp) {
    switch (spec.kind) {
    case KernelKind::Fidelity:
        return fidelity_kernel(spec, x, xp);
    case KernelKind::Aldqfk:
    case KernelKind::AldqfkNormalized:
        return aldqfk(spec, x, xp);
    case KernelKind::SldqfkParamShift:
        return sldqfk_param_shift(spec, x, xp);
    }
    throw ArgumentError("evaluate: unknown kernel kind");
}

FeatureSet FeatureSet::compute(const KernelSpec &spec,
                               std::span<const double> x) {
    FeatureSet f;
    const circ::BoundCircuit bound = bind_spec(spec, x);
    switch (spec.kind) {
    case KernelKind::Fidelity:
        f.states_.push_back(bound.evolve());
        break;
    case KernelKind::Aldqfk:
    case KernelKind::AldqfkNormalized:
        f.states_ = aldqfk_features(bound);
        break;
    case KernelKind::SldqfkParamShift:
        f.states_ = sldqfk_features(bound);
        break;
    }
    return f;
}

double FeatureSet::kernel_value(const KernelSpec &spec, const FeatureSet &a,
                                const FeatureSet &b) {
    switch (spec.kind) {
    case KernelKind::Fidelity:
        return fidelity(a.states_[0], b.states_[0]);
    case KernelKind::Aldqfk:
    case KernelKind::AldqfkNormalized: {
        double sum = 0.0;
        for (std::size_t i = 0; i < a.states_.size(); ++i)
            sum += sv::inner_product(a.states_[i], b.states_[i]).real();
        if (spec.kind == KernelKind::AldqfkNormalized)
            sum /= static_cast<double>(a.states_.size());
        return sum;
    }
    case KernelKind::SldqfkParamShift:
        return sldqfk_from_features(spec.tpl->generator_table(), a.states_,
                                    b.states_);
    }
    throw ArgumentError("kernel_value: unknown kernel kind");
}

GramMatrix gram_matrix(const KernelSpec &spec, std::span<const double> data,
                       int point_count, int threads) {
    if (point_count <= 0)
        throw ArgumentError("gram_matrix: empty data");
    const int fc = spec.tpl->feature_count();
    if (data.size() != static_cast<std::size_t>(point_count) * fc)
        throw ArgumentError("gram_matrix: data size does not match point count");

    std::vector<FeatureSet> features(point_count);
    parallel_for(point_count, threads, [&](std::size_t i) {
        features[i] = FeatureSet::compute(spec, data.subspan(i * fc, fc));
    });

    GramMatrix g;
    g.size = point_count;
    g.entries.assign(static_cast<std::size_t>(point_count) * point_count, 0.0);
    g.kind = spec.kind;
    g.circuit_descriptor = spec.tpl->descriptor();
    parallel_for(point_count, threads, [&](std::size_t i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const double v =
                FeatureSet::kernel_value(spec, features[i], features[j]);
            g.entries[i * point_count + j] = v;
            g.entries[j * point_count + i] = v;
        }
    });
    return g;
}

void GramMatrix::write_csv(const std::string &path) const {
    std::ofstream out(path);
    if (!out)
        throw DiagnosticError("cannot open " + path + " for writing");
    out << "# qfk-lab gram matrix\n";
    out << "# kind=" << kernel_name(kind) << " size=" << size
        << " data_seed=" << data_seed << " theta_seed=" << theta_seed
        << " circuit=" << circuit_descriptor << "\n";
    out.precision(17);
    for (int i = 0; i < size; ++i) {
        for (int j = 0; j < size; ++j) {
            out << at(i, j);
            out << (j + 1 == size ? '\n' : ',');
        }
    }
}

void GramMatrix::write_json_sidecar(const std::string &path,
                                    const KernelSpec &spec) const {
    nlohmann::json j;
    j["kind"] = kernel_name(kind);
    j["size"] = size;
    j["data_seed"] = data_seed;
    j["theta_seed"] = theta_seed;
    j["circuit"] = spec.tpl->to_json();
    j["theta"] = spec.theta;
    std::ofstream out(path);
    if (!out)
        throw DiagnosticError("cannot open " + path + " for writing");
    out << j.dump(2) << "\n";
}

} // namespace qfk::kern
