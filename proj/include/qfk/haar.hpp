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

/// \file haar.hpp
/// Haar-random unitary sampling, first/second-moment oracles over the
/// unitary group, and the closed-form expectation/variance formulas for the
/// fidelity kernel and the ALDQFK term under (1) global random circuits and
/// (2) alternating-layered-ansatz blocks.

#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qfk/rng.hpp"

namespace qfk::haar {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

/// Haar-distributed d x d unitary: QR of a complex Ginibre matrix with the
/// R diagonal phases folded into Q.
Matrix sample_haar_unitary(int d, Rng &rng);

/// int dmu(W) Tr[W A W^dag B] = Tr[A] Tr[B] / d.
cplx first_moment(const Matrix &A, const Matrix &B, int d);

/// int dmu(W) Tr[W A W^dag B W C W^dag D].
cplx second_moment_cyclic(const Matrix &A, const Matrix &B, const Matrix &C,
                          const Matrix &D, int d);

/// int dmu(W) Tr[W A W^dag B] Tr[W C W^dag D].
cplx second_moment_product(const Matrix &A, const Matrix &B, const Matrix &C,
                           const Matrix &D, int d);

/// int dmu(W) Tr[(I (x) W) A (I (x) W^dag) B] = Tr[Tr_w[A] Tr_w[B]] / d_w,
/// where W acts on the trailing (least significant) factor of dimension d_w.
cplx embedded_first_moment(const Matrix &A, const Matrix &B, int d_w);

/// Partial trace over the trailing d_w-dimensional factor.
Matrix trace_out_w(const Matrix &A, int d_w);

/// Analytic value paired with a Monte-Carlo estimate and its standard error.
struct MomentResult {
    cplx analytic{};
    cplx mc_estimate{};
    double mc_stderr = 0.0;
    long sample_count = 0;

    double z_score() const {
        return mc_stderr > 0.0 ? std::abs(mc_estimate - analytic) / mc_stderr
                               : 0.0;
    }
};

MomentResult mc_first_moment(const Matrix &A, const Matrix &B, long samples,
                             std::uint64_t seed);
MomentResult mc_second_moment_cyclic(const Matrix &A, const Matrix &B,
                                     const Matrix &C, const Matrix &D,
                                     long samples, std::uint64_t seed);
MomentResult mc_second_moment_product(const Matrix &A, const Matrix &B,
                                      const Matrix &C, const Matrix &D,
                                      long samples, std::uint64_t seed);
MomentResult mc_embedded_first_moment(const Matrix &A, const Matrix &B,
                                      int d_w, long samples,
                                      std::uint64_t seed);

enum class CircuitCase : std::uint8_t { GlobalRandom, Ala };
enum class VarianceKind : std::uint8_t { Exact, UpperBound, LowerBound };

struct ScalingFormula {
    const char *kernel = "";
    CircuitCase circuit_case = CircuitCase::GlobalRandom;
    int n = 0;
    int m = 0;           // ALA block width (0 outside the ALA case)
    int block_depth = 0; // ALA: depth d of the block holding the parameter
    double mean = 0.0;
    VarianceKind variance_kind = VarianceKind::Exact;
    double variance_value = 0.0;   // the formula as written
    double pre_subtraction = 0.0;  // ALA fidelity bound before -1/2^{2m}

    /// Comparator used by experiments: the raw bound, except that the ALA
    /// fidelity bound falls back to its positive pre-subtraction term when
    /// the written formula goes negative at small n.
    double comparator() const {
        return variance_value >= 0.0 ? variance_value : pre_subtraction;
    }
};

/// Fidelity kernel: mean 1/2^n; GlobalRandom variance
/// (2^n - 1)/(2^{2n} (2^n + 1)) exactly; Ala upper bound
/// 2^kappa/(2^{2m}-1)^kappa - 1/2^{2m} with kappa = n/m.
ScalingFormula analytic_fidelity_stats(int n, CircuitCase c, int m = 0);

/// ALDQFK term: mean 0; GlobalRandom variance
/// 2^n/(2 (2^{2n}-1)) (1 + (2^n-2)/(2^n (2^n+1))) exactly; Ala lower bound
/// 2^{2md} (2^{md}-1) / (2 (2^{2m}-1)^2 (2^m+1)^{4(d-1)}) for product pure
/// initial states.
ScalingFormula analytic_aldqfk_stats(int n, CircuitCase c, int m = 0,
                                     int d = 1);

/// Mean/variance of Monte-Carlo samples with jackknife standard errors over
/// `batches` equal batches.
struct ClosureStats {
    double mean = 0.0;
    double mean_stderr = 0.0;
    double variance = 0.0;
    double variance_stderr = 0.0;
    long sample_count = 0;
};

ClosureStats summarize(std::span<const double> samples, int batches = 100);

/// k_Q with U(x,theta), U(x',theta) replaced by independent Haar unitaries.
ClosureStats mc_fidelity_global(int n, long samples, std::uint64_t seed,
                                int batches = 100);

/// ALDQFK term with Haar-sampled prefixes on all n qubits (B = Z on qubit 0).
ClosureStats mc_aldqfk_term_global(int n, long samples, std::uint64_t seed,
                                   int batches = 100);

/// ALDQFK term with every depth-1 ALA block Haar-sampled on m qubits, for a
/// seeded random product pure initial state; the parameter's Pauli sits in
/// the first block.
ClosureStats mc_aldqfk_term_ala(int n, int m, long samples, std::uint64_t seed,
                                int batches = 100);

} // namespace qfk::haar
