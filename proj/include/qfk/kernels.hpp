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

/// \file kernels.hpp
/// Kernel estimators: the fidelity quantum kernel, the ALD quantum Fisher
/// kernel (per-term / summed / normalized), the SLD quantum Fisher kernel via
/// parameter shift, and Gram-matrix assembly.
///
/// The ALDQFK term i is Re<u_i(x)|u_i(x')> with
///   |u_i(x)> = U_{1:i}^dag(x, theta) B_i U_{1:i}(x, theta) |0...0>,
/// the statevector form of Tr[rho_0 {B~_x, B~_x'}]/2 for pure rho_0.

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "qfk/circuits.hpp"
#include "qfk/statevec.hpp"

namespace qfk::kern {

enum class KernelKind : std::uint8_t {
    Fidelity,
    Aldqfk,
    AldqfkNormalized,
    SldqfkParamShift,
};

const char *kernel_name(KernelKind k);
KernelKind kernel_from_name(const std::string &name);

struct KernelSpec {
    KernelSpec(KernelKind kind, std::shared_ptr<const circ::CircuitTemplate> tpl,
               std::vector<double> theta);

    KernelKind kind;
    std::shared_ptr<const circ::CircuitTemplate> tpl;
    std::vector<double> theta;
};

/// |<psi(x)|psi(x')>|^2. Requires spec.kind == Fidelity.
double fidelity_kernel(const KernelSpec &spec, std::span<const double> x,
                       std::span<const double> xp);

/// Single ALDQFK term for generator occurrence i (0 <= i < term count).
double aldqfk_term(const KernelSpec &spec, std::span<const double> x,
                   std::span<const double> xp, int i);

/// Sum of all ALDQFK terms; divided by the term count when
/// spec.kind == AldqfkNormalized.
double aldqfk(const KernelSpec &spec, std::span<const double> x,
              std::span<const double> xp);

/// SLDQFK via the parameter-shift identity:
/// sum_l Tr[(rho_{x,l+} - rho_{x,l-})(rho_{x',l+} - rho_{x',l-})], each
/// pure-state product expanded into fidelity evaluations.
double sldqfk_param_shift(const KernelSpec &spec, std::span<const double> x,
                          std::span<const double> xp);

/// Evaluate spec's kernel on one pair.
double evaluate(const KernelSpec &spec, std::span<const double> x,
                std::span<const double> xp);

/// Per-point feature bundle reused across Gram cells. Holds the embedded
/// state (fidelity), the |u_i> list (ALDQFK), or the shifted states (SLDQFK).
class FeatureSet {
  public:
    static FeatureSet compute(const KernelSpec &spec,
                              std::span<const double> x);
    static double kernel_value(const KernelSpec &spec, const FeatureSet &a,
                               const FeatureSet &b);

  private:
    std::vector<sv::Statevector> states_;
};

struct GramMatrix {
    int size = 0;
    std::vector<double> entries; // row-major, size*size
    KernelKind kind = KernelKind::Fidelity;
    std::string circuit_descriptor;
    std::uint64_t data_seed = 0;
    std::uint64_t theta_seed = 0;

    double at(int i, int j) const { return entries[static_cast<std::size_t>(i) * size + j]; }

    /// Row-major CSV with a provenance header; JSON sidecar with the spec.
    void write_csv(const std::string &path) const;
    void write_json_sidecar(const std::string &path,
                            const KernelSpec &spec) const;
};

/// entries[i][j] = k(x_i, x_j), computed for j <= i and mirrored.
/// `data` is a flat row-major array of N feature vectors of length
/// tpl->feature_count(). Deterministic for fixed (spec, data) and any thread
/// count.
GramMatrix gram_matrix(const KernelSpec &spec, std::span<const double> data,
                       int point_count, int threads = 1);

} // namespace qfk::kern
