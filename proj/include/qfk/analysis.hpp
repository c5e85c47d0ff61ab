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

/// \file analysis.hpp
/// Statistics pooling over Gram matrices, truncated double-Fourier fits of
/// 1-D kernels, and the geometric difference between Gram matrices.

#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qfk/kernels.hpp"

namespace qfk::analysis {

using cplx = std::complex<double>;

struct PooledStats {
    double mean = 0.0;
    double variance = 0.0; // population convention (divide by count)
    long count = 0;
};

/// Mean/variance over the strict off-diagonal entries of all matrices, each
/// unordered pair counted once.
PooledStats pooled_offdiag_stats(std::span<const kern::GramMatrix> grams);

/// Same, over plain double matrices (row-major upper triangles).
PooledStats pooled_offdiag_stats(std::span<const Eigen::MatrixXd> grams);

/// Truncated double Fourier representation
///   k(x, x') ~= sum_{|w|,|w'| <= cutoff} c_{w,w'} e^{iwx} e^{iw'x'},
/// with the Hermitian constraint c_{w,w'} = conj(c_{-w,-w'}).
struct FourierTable {
    int cutoff = 0;
    Eigen::MatrixXcd coeffs; // (2c+1) x (2c+1); row w+c, column w'+c
    double fit_mae = 0.0;

    cplx at(int w, int wp) const { return coeffs(w + cutoff, wp + cutoff); }
};

/// Least-squares fit (normal equations with ridge `ridge`) of the kernel
/// samples K(a,b) = k(xs[a], xs[b]) to the truncated Fourier model. Requires
/// xs.size() >= 2*cutoff + 1 per axis; throws DiagnosticError otherwise.
FourierTable fourier_fit(std::span<const double> xs, const Eigen::MatrixXd &K,
                         int cutoff, double ridge = 1e-12);

/// Real part of the truncated double Fourier sum at (x, x').
double fourier_reconstruct(const FourierTable &table, double x, double xp);

struct SymEig {
    Eigen::VectorXd values;  // ascending
    Eigen::MatrixXd vectors; // orthonormal columns
};

/// Symmetric eigendecomposition; validates symmetry within 1e-8.
SymEig sym_eig(const Eigen::MatrixXd &M);

struct GeoDiffResult {
    double g = 0.0;             // sqrt(||sqrt(Kb) pinv(Ka) sqrt(Kb)||_S)
    double g_normalized = 0.0;  // g / sqrt(N)
    int discarded = 0;          // Ka eigenvalues below the floor
    double floor_used = 0.0;    // absolute eigenvalue threshold applied
};

/// Geometric difference g(Ka || Kb). `eigen_floor_rel` scales lambda_max(Ka)
/// to form the pseudo-inverse threshold.
GeoDiffResult geometric_difference(const Eigen::MatrixXd &Ka,
                                   const Eigen::MatrixXd &Kb,
                                   double eigen_floor_rel = 1e-10);

GeoDiffResult geometric_difference(const kern::GramMatrix &Ka,
                                   const kern::GramMatrix &Kb,
                                   double eigen_floor_rel = 1e-10);

Eigen::MatrixXd to_eigen(const kern::GramMatrix &g);

/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> a, std::span<const double> b);

} // namespace qfk::analysis
