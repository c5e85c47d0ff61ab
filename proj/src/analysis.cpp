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

#include "qfk/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qfk/errors.hpp"

namespace qfk::analysis {

namespace {

PooledStats pool(const std::vector<double> &vals) {
    if (vals.empty())
        throw ArgumentError("pooled stats: no off-diagonal entries");
    double sum = 0.0, sum2 = 0.0;
    for (double v : vals) {
        sum += v;
        sum2 += v * v;
    }
    PooledStats st;
    st.count = static_cast<long>(vals.size());
    st.mean = sum / st.count;
    st.variance = std::max(0.0, sum2 / st.count - st.mean * st.mean);
    return st;
}

} // namespace

PooledStats pooled_offdiag_stats(std::span<const kern::GramMatrix> grams) {
    std::vector<double> vals;
    for (const kern::GramMatrix &g : grams) {
        if (g.size < 2)
            throw ArgumentError("pooled_offdiag_stats: matrix smaller than 2x2");
        for (int i = 0; i < g.size; ++i)
            for (int j = i + 1; j < g.size; ++j)
                vals.push_back(g.at(i, j));
    }
    return pool(vals);
}

PooledStats pooled_offdiag_stats(std::span<const Eigen::MatrixXd> grams) {
    std::vector<double> vals;
    for (const Eigen::MatrixXd &g : grams) {
        if (g.rows() < 2 || g.rows() != g.cols())
            throw ArgumentError("pooled_offdiag_stats: matrix smaller than 2x2");
        for (int i = 0; i < g.rows(); ++i)
            for (int j = i + 1; j < g.cols(); ++j)
                vals.push_back(g(i, j));
    }
    return pool(vals);
}

FourierTable fourier_fit(std::span<const double> xs, const Eigen::MatrixXd &K,
                         int cutoff, double ridge) {
    const int g = static_cast<int>(xs.size());
    const int nf = 2 * cutoff + 1;
    if (cutoff < 1)
        throw ArgumentError("fourier_fit: cutoff must be >= 1");
    if (K.rows() != g || K.cols() != g)
        throw ArgumentError("fourier_fit: sample matrix does not match the grid");
    if (g < nf)
        throw DiagnosticError(
            "fourier_fit: grid of " + std::to_string(g) +
            " points per axis is rank-deficient for cutoff " +
            std::to_string(cutoff) + "; need at least " + std::to_string(nf));

    // K = F C F^T with F(a, w) = e^{i w x_a}. The tensor structure turns the
    // ridge normal equations into two small solves:
    //   C = (F^H F + ridge I)^{-1} F^H K conj(F) (F^T conj(F) + ridge I)^{-1}.
    Eigen::MatrixXcd F(g, nf);
    for (int a = 0; a < g; ++a)
        for (int w = -cutoff; w <= cutoff; ++w)
            F(a, w + cutoff) = std::exp(cplx(0.0, w * xs[a]));

    const Eigen::MatrixXcd M =
        F.adjoint() * F + ridge * Eigen::MatrixXcd::Identity(nf, nf);
    const Eigen::MatrixXcd rhs = F.adjoint() * K.cast<cplx>() * F.conjugate();
    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(M);
    Eigen::MatrixXcd C = lu.solve(rhs);
    C = lu.solve(C.transpose()).transpose(); // right-multiply by M^{-T}

    // Real kernels force c_{w,w'} = conj(c_{-w,-w'}); make it exact.
    Eigen::MatrixXcd sym(nf, nf);
    for (int r = 0; r < nf; ++r)
        for (int c = 0; c < nf; ++c)
            sym(r, c) =
                0.5 * (C(r, c) + std::conj(C(nf - 1 - r, nf - 1 - c)));

    FourierTable table;
    table.cutoff = cutoff;
    table.coeffs = std::move(sym);
    const Eigen::MatrixXcd recon = F * table.coeffs * F.transpose();
    table.fit_mae =
        (recon - K.cast<cplx>()).cwiseAbs().sum() / (double(g) * double(g));
    return table;
}

double fourier_reconstruct(const FourierTable &table, double x, double xp) {
    const int c = table.cutoff;
    cplx sum = 0.0;
    for (int w = -c; w <= c; ++w)
        for (int wp = -c; wp <= c; ++wp)
            sum += table.at(w, wp) * std::exp(cplx(0.0, w * x + wp * xp));
    return sum.real();
}

SymEig sym_eig(const Eigen::MatrixXd &M) {
    if (M.rows() != M.cols())
        throw ArgumentError("sym_eig: matrix is not square");
    const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
    if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale)
        throw ArgumentError("sym_eig: matrix is not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
        0.5 * (M + M.transpose()));
    if (solver.info() != Eigen::Success)
        throw DiagnosticError("sym_eig: eigendecomposition failed");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

Eigen::MatrixXd to_eigen(const kern::GramMatrix &g) {
    Eigen::MatrixXd m(g.size, g.size);
    for (int i = 0; i < g.size; ++i)
        for (int j = 0; j < g.size; ++j)
            m(i, j) = g.at(i, j);
    return m;
}

GeoDiffResult geometric_difference(const Eigen::MatrixXd &Ka,
                                   const Eigen::MatrixXd &Kb,
                                   double eigen_floor_rel) {
    if (Ka.rows() != Kb.rows() || Ka.cols() != Kb.cols())
        throw DiagnosticError("geometric_difference: size mismatch");
    const int n = static_cast<int>(Ka.rows());
    const double psd_floor = -1e-8 * n;

    const SymEig ea = sym_eig(Ka);
    const SymEig eb = sym_eig(Kb);
    if (ea.values.minCoeff() < psd_floor || eb.values.minCoeff() < psd_floor)
        throw DiagnosticError("geometric_difference: input is not PSD within tolerance");

    // sqrt(Kb) from the eigendecomposition, clamping tiny negatives.
    Eigen::VectorXd sq = eb.values.cwiseMax(0.0).cwiseSqrt();
    const Eigen::MatrixXd root_b =
        eb.vectors * sq.asDiagonal() * eb.vectors.transpose();

    const double lmax = ea.values.maxCoeff();
    const double floor_abs = eigen_floor_rel * std::max(lmax, 0.0);
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(n);
    int kept = 0;
    for (int i = 0; i < n; ++i) {
        if (ea.values(i) > floor_abs && ea.values(i) > 0.0) {
            inv(i) = 1.0 / ea.values(i);
            ++kept;
        }
    }
    if (kept == 0)
        throw DiagnosticError(
            "geometric_difference: every eigenvalue of Ka is below the floor");
    const Eigen::MatrixXd pinv_a =
        ea.vectors * inv.asDiagonal() * ea.vectors.transpose();

    Eigen::MatrixXd prod = root_b * pinv_a * root_b;
    prod = 0.5 * (prod + prod.transpose());
    const SymEig ep = sym_eig(prod);
    const double spectral =
        std::max(std::abs(ep.values.minCoeff()), std::abs(ep.values.maxCoeff()));

    GeoDiffResult r;
    r.g = std::sqrt(spectral);
    r.g_normalized = r.g / std::sqrt(static_cast<double>(n));
    r.discarded = n - kept;
    r.floor_used = floor_abs;
    return r;
}

GeoDiffResult geometric_difference(const kern::GramMatrix &Ka,
                                   const kern::GramMatrix &Kb,
                                   double eigen_floor_rel) {
    return geometric_difference(to_eigen(Ka), to_eigen(Kb), eigen_floor_rel);
}

double spearman(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2)
        throw ArgumentError("spearman: need two equal-length series of size >= 2");
    auto ranks = [](std::span<const double> v) {
        const int n = static_cast<int>(v.size());
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](int i, int j) { return v[i] < v[j]; });
        std::vector<double> r(n);
        int i = 0;
        while (i < n) {
            int j = i;
            while (j + 1 < n && v[order[j + 1]] == v[order[i]])
                ++j;
            const double avg = 0.5 * (i + j) + 1.0; // average rank for ties
            for (int k = i; k <= j; ++k)
                r[order[k]] = avg;
            i = j + 1;
        }
        return r;
    };
    const std::vector<double> ra = ranks(a), rb = ranks(b);
    const int n = static_cast<int>(a.size());
    double ma = 0.0, mb = 0.0;
    for (int i = 0; i < n; ++i) {
        ma += ra[i];
        mb += rb[i];
    }
    ma /= n;
    mb /= n;
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (int i = 0; i < n; ++i) {
        cov += (ra[i] - ma) * (rb[i] - mb);
        va += (ra[i] - ma) * (ra[i] - ma);
        vb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (va <= 0.0 || vb <= 0.0)
        return 0.0;
    return cov / std::sqrt(va * vb);
}

} // namespace qfk::analysis
