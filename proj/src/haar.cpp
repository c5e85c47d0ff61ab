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

#include "qfk/haar.hpp"

#include <cmath>
#include <functional>
#include <numbers>

#include "qfk/errors.hpp"
#include "qfk/statevec.hpp"

namespace qfk::haar {

Matrix sample_haar_unitary(int d, Rng &rng) {
    if (d < 2)
        throw ArgumentError("sample_haar_unitary: need d >= 2");
    Matrix z(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            z(i, j) = cplx(rng.normal(), rng.normal());
    Eigen::HouseholderQR<Matrix> qr(z);
    Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    // Fold the R diagonal phases into Q so the distribution is Haar.
    for (int j = 0; j < d; ++j) {
        const cplx rjj = r(j, j);
        const double mag = std::abs(rjj);
        q.col(j) *= (mag > 0.0 ? rjj / mag : cplx(1.0, 0.0));
    }
    return q;
}

namespace {

void check_square(const Matrix &A, int d, const char *what) {
    if (A.rows() != d || A.cols() != d)
        throw ArgumentError(std::string(what) + ": operator is not " +
                            std::to_string(d) + "x" + std::to_string(d));
}

cplx tr(const Matrix &A) { return A.trace(); }

cplx tr_prod(const Matrix &A, const Matrix &B) {
    // Tr[AB] without forming the product.
    return (A.transpose().cwiseProduct(B)).sum();
}

/// Generic Monte-Carlo mean of a complex statistic over Haar samples.
MomentResult mc_mean(long samples, std::uint64_t seed,
                     const std::function<cplx(Rng &)> &stat, cplx analytic) {
    if (samples < 1)
        throw ArgumentError("Monte-Carlo needs at least 1 sample");
    Rng rng(seed);
    cplx sum = 0.0;
    double sum_re2 = 0.0, sum_im2 = 0.0;
    for (long s = 0; s < samples; ++s) {
        const cplx v = stat(rng);
        sum += v;
        sum_re2 += v.real() * v.real();
        sum_im2 += v.imag() * v.imag();
    }
    const double inv = 1.0 / static_cast<double>(samples);
    const cplx mean = sum * inv;
    const double var_re = std::max(0.0, sum_re2 * inv - mean.real() * mean.real());
    const double var_im = std::max(0.0, sum_im2 * inv - mean.imag() * mean.imag());
    MomentResult r;
    r.analytic = analytic;
    r.mc_estimate = mean;
    r.mc_stderr = std::sqrt((var_re + var_im) / static_cast<double>(samples));
    r.sample_count = samples;
    return r;
}

} // namespace

cplx first_moment(const Matrix &A, const Matrix &B, int d) {
    check_square(A, d, "first_moment");
    check_square(B, d, "first_moment");
    return tr(A) * tr(B) / static_cast<double>(d);
}

cplx second_moment_cyclic(const Matrix &A, const Matrix &B, const Matrix &C,
                          const Matrix &D, int d) {
    if (d < 2)
        throw ArgumentError("second_moment_cyclic: 1/(d^2-1) needs d >= 2");
    check_square(A, d, "second_moment_cyclic");
    check_square(B, d, "second_moment_cyclic");
    check_square(C, d, "second_moment_cyclic");
    check_square(D, d, "second_moment_cyclic");
    const double dd = d;
    const cplx lead = (tr(A) * tr(C) * tr_prod(B, D) +
                       tr_prod(A, C) * tr(B) * tr(D)) /
                      (dd * dd - 1.0);
    const cplx corr = (tr(A) * tr(B) * tr(C) * tr(D) +
                       tr_prod(A, C) * tr_prod(B, D)) /
                      (dd * (dd * dd - 1.0));
    return lead - corr;
}

cplx second_moment_product(const Matrix &A, const Matrix &B, const Matrix &C,
                           const Matrix &D, int d) {
    if (d < 2)
        throw ArgumentError("second_moment_product: 1/(d^2-1) needs d >= 2");
    check_square(A, d, "second_moment_product");
    check_square(B, d, "second_moment_product");
    check_square(C, d, "second_moment_product");
    check_square(D, d, "second_moment_product");
    const double dd = d;
    const cplx lead = (tr(A) * tr(B) * tr(C) * tr(D) +
                       tr_prod(A, C) * tr_prod(B, D)) /
                      (dd * dd - 1.0);
    const cplx corr = (tr(A) * tr(C) * tr_prod(B, D) +
                       tr_prod(A, C) * tr(B) * tr(D)) /
                      (dd * (dd * dd - 1.0));
    return lead - corr;
}

Matrix trace_out_w(const Matrix &A, int d_w) {
    if (d_w < 1 || A.rows() != A.cols() || A.rows() % d_w != 0)
        throw ArgumentError("trace_out_w: full dimension not divisible by d_w");
    const int d_bar = static_cast<int>(A.rows()) / d_w;
    Matrix out = Matrix::Zero(d_bar, d_bar);
    for (int i = 0; i < d_bar; ++i)
        for (int j = 0; j < d_bar; ++j) {
            cplx acc = 0.0;
            for (int k = 0; k < d_w; ++k)
                acc += A(i * d_w + k, j * d_w + k);
            out(i, j) = acc;
        }
    return out;
}

cplx embedded_first_moment(const Matrix &A, const Matrix &B, int d_w) {
    if (A.rows() != B.rows() || A.cols() != B.cols() || A.rows() != A.cols())
        throw ArgumentError("embedded_first_moment: operator shapes differ");
    if (d_w < 1 || A.rows() % d_w != 0)
        throw ArgumentError("embedded_first_moment: dimension not divisible by d_w");
    return tr_prod(trace_out_w(A, d_w), trace_out_w(B, d_w)) /
           static_cast<double>(d_w);
}

MomentResult mc_first_moment(const Matrix &A, const Matrix &B, long samples,
                             std::uint64_t seed) {
    const int d = static_cast<int>(A.rows());
    const cplx analytic = first_moment(A, B, d);
    return mc_mean(
        samples, seed,
        [&](Rng &rng) {
            const Matrix w = sample_haar_unitary(d, rng);
            return tr_prod(w * A * w.adjoint(), B);
        },
        analytic);
}

MomentResult mc_second_moment_cyclic(const Matrix &A, const Matrix &B,
                                     const Matrix &C, const Matrix &D,
                                     long samples, std::uint64_t seed) {
    const int d = static_cast<int>(A.rows());
    const cplx analytic = second_moment_cyclic(A, B, C, D, d);
    return mc_mean(
        samples, seed,
        [&](Rng &rng) {
            const Matrix w = sample_haar_unitary(d, rng);
            const Matrix wa = w * A * w.adjoint();
            const Matrix wc = w * C * w.adjoint();
            return (wa * B * wc * D).trace();
        },
        analytic);
}

MomentResult mc_second_moment_product(const Matrix &A, const Matrix &B,
                                      const Matrix &C, const Matrix &D,
                                      long samples, std::uint64_t seed) {
    const int d = static_cast<int>(A.rows());
    const cplx analytic = second_moment_product(A, B, C, D, d);
    return mc_mean(
        samples, seed,
        [&](Rng &rng) {
            const Matrix w = sample_haar_unitary(d, rng);
            return tr_prod(w * A * w.adjoint(), B) *
                   tr_prod(w * C * w.adjoint(), D);
        },
        analytic);
}

MomentResult mc_embedded_first_moment(const Matrix &A, const Matrix &B,
                                      int d_w, long samples,
                                      std::uint64_t seed) {
    const int full = static_cast<int>(A.rows());
    const int d_bar = full / d_w;
    const cplx analytic = embedded_first_moment(A, B, d_w);
    return mc_mean(
        samples, seed,
        [&](Rng &rng) {
            const Matrix w = sample_haar_unitary(d_w, rng);
            Matrix iw = Matrix::Zero(full, full);
            for (int i = 0; i < d_bar; ++i)
                iw.block(i * d_w, i * d_w, d_w, d_w) = w;
            return tr_prod(iw * A * iw.adjoint(), B);
        },
        analytic);
}

ScalingFormula analytic_fidelity_stats(int n, CircuitCase c, int m) {
    if (n < 1)
        throw ArgumentError("analytic_fidelity_stats: need n >= 1");
    ScalingFormula f;
    f.kernel = "fidelity";
    f.circuit_case = c;
    f.n = n;
    const double dn = std::pow(2.0, n);
    f.mean = 1.0 / dn;
    if (c == CircuitCase::GlobalRandom) {
        f.variance_kind = VarianceKind::Exact;
        f.variance_value = (dn - 1.0) / (dn * dn * (dn + 1.0));
        f.pre_subtraction = f.variance_value;
        return f;
    }
    if (m < 1 || n % m != 0)
        throw ArgumentError("analytic_fidelity_stats: ALA case needs n divisible by m");
    f.m = m;
    const int kappa = n / m;
    const double dm2 = std::pow(2.0, 2 * m);
    f.variance_kind = VarianceKind::UpperBound;
    f.pre_subtraction = std::pow(2.0, kappa) / std::pow(dm2 - 1.0, kappa);
    f.variance_value = f.pre_subtraction - 1.0 / dm2;
    return f;
}

ScalingFormula analytic_aldqfk_stats(int n, CircuitCase c, int m, int d) {
    if (n < 1)
        throw ArgumentError("analytic_aldqfk_stats: need n >= 1");
    ScalingFormula f;
    f.kernel = "aldqfk_term";
    f.circuit_case = c;
    f.n = n;
    f.mean = 0.0;
    if (c == CircuitCase::GlobalRandom) {
        const double dn = std::pow(2.0, n);
        f.variance_kind = VarianceKind::Exact;
        f.variance_value = dn / (2.0 * (dn * dn - 1.0)) *
                           (1.0 + (dn - 2.0) / (dn * (dn + 1.0)));
        f.pre_subtraction = f.variance_value;
        return f;
    }
    if (m < 1 || d < 1)
        throw ArgumentError("analytic_aldqfk_stats: ALA case needs m >= 1 and d >= 1");
    f.m = m;
    f.block_depth = d;
    const double dm = std::pow(2.0, m);
    const double dmd = std::pow(2.0, m * d);
    f.variance_kind = VarianceKind::LowerBound;
    f.variance_value = dmd * dmd * (dmd - 1.0) /
                       (2.0 * std::pow(dm * dm - 1.0, 2) *
                        std::pow(dm + 1.0, 4 * (d - 1)));
    f.pre_subtraction = f.variance_value;
    return f;
}

ClosureStats summarize(std::span<const double> samples, int batches) {
    const long n = static_cast<long>(samples.size());
    if (n < 2)
        throw ArgumentError("summarize: need at least 2 samples");
    if (batches > n)
        batches = static_cast<int>(n);
    if (batches < 2)
        batches = 2;

    double sum = 0.0, sum2 = 0.0;
    for (double v : samples) {
        sum += v;
        sum2 += v * v;
    }
    const double mean = sum / n;
    const double variance = std::max(0.0, sum2 / n - mean * mean);

    // Leave-one-batch-out jackknife for both moments.
    const long base = n / batches;
    const long rem = n % batches;
    std::vector<double> jk_mean(batches), jk_var(batches);
    long start = 0;
    for (int b = 0; b < batches; ++b) {
        const long len = base + (b < rem ? 1 : 0);
        double bsum = 0.0, bsum2 = 0.0;
        for (long i = start; i < start + len; ++i) {
            bsum += samples[i];
            bsum2 += samples[i] * samples[i];
        }
        const double rn = static_cast<double>(n - len);
        const double rmean = (sum - bsum) / rn;
        jk_mean[b] = rmean;
        jk_var[b] = std::max(0.0, (sum2 - bsum2) / rn - rmean * rmean);
        start += len;
    }
    auto jk_se = [batches](const std::vector<double> &vals) {
        double m = 0.0;
        for (double v : vals)
            m += v;
        m /= batches;
        double s = 0.0;
        for (double v : vals)
            s += (v - m) * (v - m);
        return std::sqrt(s * (batches - 1.0) / batches);
    };

    ClosureStats st;
    st.mean = mean;
    st.mean_stderr = jk_se(jk_mean);
    st.variance = variance;
    st.variance_stderr = jk_se(jk_var);
    st.sample_count = n;
    return st;
}

ClosureStats mc_fidelity_global(int n, long samples, std::uint64_t seed,
                                int batches) {
    const int d = 1 << n;
    Rng rng(seed);
    std::vector<double> vals(samples);
    for (long s = 0; s < samples; ++s) {
        const Matrix u = sample_haar_unitary(d, rng);
        const Matrix v = sample_haar_unitary(d, rng);
        // k_Q = |<0| U^dag V |0>|^2 — the overlap of the two first columns.
        const cplx ov = u.col(0).dot(v.col(0));
        vals[s] = std::norm(ov);
    }
    return summarize(vals, batches);
}

ClosureStats mc_aldqfk_term_global(int n, long samples, std::uint64_t seed,
                                   int batches) {
    const int d = 1 << n;
    Rng rng(seed);
    // B = Z on qubit 0: diagonal sign by the least significant bit.
    Eigen::VectorXcd zsign(d);
    for (int i = 0; i < d; ++i)
        zsign(i) = (i & 1) ? -1.0 : 1.0;
    auto u_vec = [&](const Matrix &w) {
        Eigen::VectorXcd t = w.col(0);
        t = zsign.cwiseProduct(t);
        return (w.adjoint() * t).eval();
    };
    std::vector<double> vals(samples);
    for (long s = 0; s < samples; ++s) {
        const Matrix wx = sample_haar_unitary(d, rng);
        const Matrix wy = sample_haar_unitary(d, rng);
        vals[s] = u_vec(wx).dot(u_vec(wy)).real();
    }
    return summarize(vals, batches);
}

ClosureStats mc_aldqfk_term_ala(int n, int m, long samples, std::uint64_t seed,
                                int batches) {
    if (m < 1 || n % m != 0)
        throw ArgumentError("mc_aldqfk_term_ala: n must be divisible by m");
    if (m > 2)
        throw ArgumentError("mc_aldqfk_term_ala: block width supports m in {1, 2}");
    const int blocks = n / m;
    const int bd = 1 << m;
    Rng rng(seed);

    // Fixed product pure initial state: per-qubit (Ry Rz)|0> with seeded
    // angles.
    sv::Statevector psi0 = sv::Statevector::zero(n);
    for (int q = 0; q < n; ++q) {
        sv::apply_gate(psi0, sv::GateOp::rotation(sv::Axis::Y, q, rng.angle()));
        sv::apply_gate(psi0, sv::GateOp::rotation(sv::Axis::Z, q, rng.angle()));
    }

    auto side_state = [&](Rng &r) {
        sv::Statevector st = psi0.clone();
        std::vector<Matrix> ws(blocks);
        for (int b = 0; b < blocks; ++b)
            ws[b] = sample_haar_unitary(bd, r);
        // U = tensor of blocks over qubit pairs (m*b .. m*b+m-1).
        for (int b = 0; b < blocks; ++b) {
            if (m == 1) {
                const cplx g[4] = {ws[b](0, 0), ws[b](0, 1), ws[b](1, 0),
                                   ws[b](1, 1)};
                simd::apply_matrix2(st.amplitudes().data(), st.dim(), b, g);
            } else {
                std::vector<cplx> g(bd * bd);
                for (int r2 = 0; r2 < bd; ++r2)
                    for (int c2 = 0; c2 < bd; ++c2)
                        g[r2 * bd + c2] = ws[b](r2, c2);
                sv::apply_dense_2q(st, m * b, m * b + 1, g);
            }
        }
        sv::apply_pauli(st, sv::Axis::Z, 0); // B of the parameter in block 0
        for (int b = 0; b < blocks; ++b) {
            const Matrix wd = ws[b].adjoint();
            if (m == 1) {
                const cplx g[4] = {wd(0, 0), wd(0, 1), wd(1, 0), wd(1, 1)};
                simd::apply_matrix2(st.amplitudes().data(), st.dim(), b, g);
            } else {
                std::vector<cplx> g(bd * bd);
                for (int r2 = 0; r2 < bd; ++r2)
                    for (int c2 = 0; c2 < bd; ++c2)
                        g[r2 * bd + c2] = wd(r2, c2);
                sv::apply_dense_2q(st, m * b, m * b + 1, g);
            }
        }
        return st;
    };

    std::vector<double> vals(samples);
    for (long s = 0; s < samples; ++s) {
        const sv::Statevector ux = side_state(rng);
        const sv::Statevector uy = side_state(rng);
        vals[s] = sv::inner_product(ux, uy).real();
    }
    return summarize(vals, batches);
}

} // namespace qfk::haar
