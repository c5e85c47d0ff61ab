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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "qfk/analysis.hpp"
#include "qfk/circuits.hpp"
#include "qfk/errors.hpp"
#include "qfk/kernels.hpp"
#include "qfk/rng.hpp"

using namespace qfk;
using analysis::FourierTable;
using cplx = std::complex<double>;

namespace {

std::vector<double> grid(int points) {
    std::vector<double> xs(points);
    for (int a = 0; a < points; ++a)
        xs[a] = -std::numbers::pi + 2.0 * std::numbers::pi * a / points;
    return xs;
}

Eigen::MatrixXd sample_kernel(const std::vector<double> &xs,
                              double (*k)(double, double)) {
    const int g = static_cast<int>(xs.size());
    Eigen::MatrixXd K(g, g);
    for (int a = 0; a < g; ++a)
        for (int b = 0; b < g; ++b)
            K(a, b) = k(xs[a], xs[b]);
    return K;
}

} // namespace

TEST_CASE("pooled off-diagonal stats") {
    // Constant off-diagonals.
    kern::GramMatrix g;
    g.size = 3;
    g.entries = {1.0, 0.4, 0.4, 0.4, 1.0, 0.4, 0.4, 0.4, 1.0};
    const kern::GramMatrix grams1[] = {g};
    auto st = analysis::pooled_offdiag_stats(grams1);
    CHECK(st.mean == doctest::Approx(0.4));
    CHECK(st.variance == doctest::Approx(0.0));
    CHECK(st.count == 3);

    // Off-diagonal multiset {1,2,3}: mean 2, population variance 2/3.
    kern::GramMatrix h;
    h.size = 3;
    h.entries = {0, 1, 2, 1, 0, 3, 2, 3, 0};
    const kern::GramMatrix grams2[] = {h};
    st = analysis::pooled_offdiag_stats(grams2);
    CHECK(st.mean == doctest::Approx(2.0));
    CHECK(st.variance == doctest::Approx(2.0 / 3.0));

    // Single-pass two-moment equals the brute-force double loop.
    Rng rng(8);
    kern::GramMatrix r;
    r.size = 6;
    r.entries.assign(36, 0.0);
    for (int i = 0; i < 6; ++i)
        for (int j = i + 1; j < 6; ++j) {
            const double v = rng.uniform01();
            r.entries[i * 6 + j] = v;
            r.entries[j * 6 + i] = v;
        }
    const kern::GramMatrix grams3[] = {r};
    st = analysis::pooled_offdiag_stats(grams3);
    std::vector<double> vals;
    for (int i = 0; i < 6; ++i)
        for (int j = i + 1; j < 6; ++j)
            vals.push_back(r.at(i, j));
    double brute = 0.0;
    for (double a : vals)
        for (double b : vals)
            brute += (a - b) * (a - b);
    brute /= 2.0 * vals.size() * vals.size();
    CHECK(std::abs(st.variance - brute) < 1e-14);

    kern::GramMatrix tiny;
    tiny.size = 1;
    tiny.entries = {1.0};
    const kern::GramMatrix grams4[] = {tiny};
    CHECK_THROWS_AS(analysis::pooled_offdiag_stats(grams4), ArgumentError);
}

TEST_CASE("hea fidelity off-diagonal mean matches 1/2^n within 3 sigma") {
    const int n = 4, points = 30;
    std::vector<double> combo_means;
    std::vector<kern::GramMatrix> grams;
    for (int b = 0; b < 5; ++b) {
        auto tpl = std::make_shared<circ::CircuitTemplate>(
            circ::CircuitTemplate::hea(n, 3, 900 + b));
        Rng trng(1700 + b);
        std::vector<double> theta(tpl->param_count());
        for (double &t : theta)
            t = trng.angle();
        const kern::KernelSpec spec(kern::KernelKind::Fidelity, tpl, theta);
        for (int a = 0; a < 5; ++a) {
            Rng drng(2900 + 31 * a + b);
            std::vector<double> data(points * n);
            for (double &v : data)
                v = drng.angle();
            grams.push_back(kern::gram_matrix(spec, data, points, 4));
            const kern::GramMatrix one[] = {grams.back()};
            combo_means.push_back(analysis::pooled_offdiag_stats(one).mean);
        }
    }
    const auto pooled = analysis::pooled_offdiag_stats(grams);
    // Jackknife standard error over the 25 combos.
    const int c = static_cast<int>(combo_means.size());
    double m = 0.0;
    for (double v : combo_means)
        m += v;
    m /= c;
    double s2 = 0.0;
    for (double v : combo_means)
        s2 += (v - m) * (v - m);
    const double se = std::sqrt(s2 * (c - 1.0) / c / c);
    CHECK(std::abs(pooled.mean - 1.0 / 16.0) < 3.0 * se);
}

TEST_CASE("fourier fit: analytic kernels") {
    const auto xs = grid(40);
    // cos(x - x') has c_{1,-1} = c_{-1,1} = 1/2 and nothing else.
    const auto K = sample_kernel(
        xs, +[](double x, double xp) { return std::cos(x - xp); });
    const FourierTable t = analysis::fourier_fit(xs, K, 3);
    CHECK(std::abs(t.at(1, -1) - cplx(0.5)) < 1e-10);
    CHECK(std::abs(t.at(-1, 1) - cplx(0.5)) < 1e-10);
    for (int w = -3; w <= 3; ++w)
        for (int wp = -3; wp <= 3; ++wp) {
            if ((w == 1 && wp == -1) || (w == -1 && wp == 1))
                continue;
            CHECK(std::abs(t.at(w, wp)) < 1e-10);
        }
    CHECK(t.fit_mae < 1e-12);

    // Constant kernel.
    const auto Kc = sample_kernel(
        xs, +[](double, double) { return 0.7; });
    const FourierTable tc = analysis::fourier_fit(xs, Kc, 2);
    CHECK(std::abs(tc.at(0, 0) - cplx(0.7)) < 1e-10);
    CHECK(std::abs(tc.at(1, 0)) < 1e-10);

    // Reconstruction at a grid point and at the cos zero.
    CHECK(std::abs(analysis::fourier_reconstruct(t, xs[3], xs[7]) -
                   std::cos(xs[3] - xs[7])) < 1e-10);
    CHECK(std::abs(analysis::fourier_reconstruct(t, 0.0,
                                                 std::numbers::pi / 2)) <
          1e-10);
    CHECK(analysis::fourier_reconstruct(tc, 1.234, -2.0) ==
          doctest::Approx(0.7));
}

TEST_CASE("fourier fit: rank deficiency diagnostics") {
    const auto xs = grid(5);
    const auto K = sample_kernel(
        xs, +[](double x, double xp) { return std::cos(x - xp); });
    try {
        analysis::fourier_fit(xs, K, 12);
        FAIL("expected DiagnosticError");
    } catch (const DiagnosticError &e) {
        const std::string msg = e.what();
        CHECK(msg.find("25") != std::string::npos); // names the minimum size
    }
}

TEST_CASE("fourier fit: hermitian symmetry and idempotence") {
    // A real but asymmetric-in-(x,x') kernel exercises the constraint.
    const auto xs = grid(30);
    const auto K = sample_kernel(xs, +[](double x, double xp) {
        return std::cos(2 * x - xp) + 0.3 * std::sin(x) * std::cos(xp);
    });
    const FourierTable t = analysis::fourier_fit(xs, K, 4);
    for (int w = -4; w <= 4; ++w)
        for (int wp = -4; wp <= 4; ++wp)
            CHECK(std::abs(t.at(w, wp) - std::conj(t.at(-w, -wp))) < 1e-10);

    // Fit of the reconstruction returns the same coefficients.
    const int g = static_cast<int>(xs.size());
    Eigen::MatrixXd K2(g, g);
    for (int a = 0; a < g; ++a)
        for (int b = 0; b < g; ++b)
            K2(a, b) = analysis::fourier_reconstruct(t, xs[a], xs[b]);
    const FourierTable t2 = analysis::fourier_fit(xs, K2, 4);
    for (int w = -4; w <= 4; ++w)
        for (int wp = -4; wp <= 4; ++wp)
            CHECK(std::abs(t.at(w, wp) - t2.at(w, wp)) < 1e-10);
}

TEST_CASE("fourier fit of a real circuit kernel reaches 1e-6 MAE") {
    // Fidelity kernel on the ALA with (L, n) = (2, 1).
    auto tpl = std::make_shared<circ::CircuitTemplate>(
        circ::CircuitTemplate::ala(1, 1, 2, 0));
    Rng rng(5150);
    std::vector<double> theta(tpl->param_count());
    for (double &t : theta)
        t = rng.angle();
    const kern::KernelSpec spec(kern::KernelKind::Fidelity, tpl, theta);
    const auto xs = grid(60);
    const auto gram = kern::gram_matrix(spec, xs, 60, 4);
    const FourierTable t = analysis::fourier_fit(xs, analysis::to_eigen(gram), 12);
    CHECK(t.fit_mae <= 1e-6);
}

TEST_CASE("sym_eig basics") {
    Eigen::MatrixXd d(2, 2);
    d << 3, 0, 0, 1;
    auto e = analysis::sym_eig(d);
    CHECK(e.values(0) == doctest::Approx(1.0));
    CHECK(e.values(1) == doctest::Approx(3.0));

    Eigen::MatrixXd x(2, 2);
    x << 0, 1, 1, 0;
    e = analysis::sym_eig(x);
    CHECK(e.values(0) == doctest::Approx(-1.0));
    CHECK(e.values(1) == doctest::Approx(1.0));

    Rng rng(17);
    Eigen::MatrixXd m(8, 8);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j <= i; ++j) {
            m(i, j) = rng.normal();
            m(j, i) = m(i, j);
        }
    e = analysis::sym_eig(m);
    const Eigen::MatrixXd recon =
        e.vectors * e.values.asDiagonal() * e.vectors.transpose();
    CHECK((recon - m).cwiseAbs().maxCoeff() <
          1e-8 * m.cwiseAbs().maxCoeff());
    CHECK((e.vectors.transpose() * e.vectors -
           Eigen::MatrixXd::Identity(8, 8))
              .cwiseAbs()
              .maxCoeff() < 1e-10);

    Eigen::MatrixXd bad(2, 2);
    bad << 0, 1, 0, 0;
    CHECK_THROWS_AS(analysis::sym_eig(bad), ArgumentError);
}

TEST_CASE("geometric difference: identities and scaling") {
    Rng rng(19);
    // Full-rank K against itself: g = 1.
    Eigen::MatrixXd a(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j <= i; ++j) {
            a(i, j) = rng.normal();
            a(j, i) = a(i, j);
        }
    const Eigen::MatrixXd K = a * a.transpose() +
                              0.5 * Eigen::MatrixXd::Identity(4, 4);
    const auto self = analysis::geometric_difference(K, K);
    CHECK(self.g == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(self.discarded == 0);

    // Identity vs diag(1.5, 0.5): g = sqrt(1.5).
    Eigen::MatrixXd kb(2, 2);
    kb << 1.5, 0, 0, 0.5;
    const auto r = analysis::geometric_difference(
        Eigen::MatrixXd::Identity(2, 2), kb);
    CHECK(r.g == doctest::Approx(std::sqrt(1.5)).epsilon(1e-10));
    CHECK(r.g_normalized == doctest::Approx(std::sqrt(1.5 / 2.0)));
}

TEST_CASE("geometric difference: oracle and errors") {
    Rng rng(21);
    auto rand_psd = [&rng](int n) {
        Eigen::MatrixXd a(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                a(i, j) = rng.normal();
        return Eigen::MatrixXd(a * a.transpose() +
                               0.1 * Eigen::MatrixXd::Identity(n, n));
    };
    const Eigen::MatrixXd Ka = rand_psd(4);
    const Eigen::MatrixXd Kb = rand_psd(4);
    const auto got = analysis::geometric_difference(Ka, Kb, 0.0);

    // Brute-force dense evaluation with a full-precision inverse.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eb(Kb);
    const Eigen::MatrixXd root_b = eb.operatorSqrt();
    const Eigen::MatrixXd prod = root_b * Ka.inverse() * root_b;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ep(
        0.5 * (prod + prod.transpose()));
    const double expect = std::sqrt(ep.eigenvalues().cwiseAbs().maxCoeff());
    CHECK(got.g == doctest::Approx(expect).epsilon(1e-8));

    // Scale covariance within 1e-10.
    for (double c : {0.5, 2.0, 7.0}) {
        const auto scaled = analysis::geometric_difference(Ka, c * Kb, 0.0);
        CHECK(scaled.g == doctest::Approx(std::sqrt(c) * got.g).epsilon(1e-10));
    }

    CHECK_THROWS_AS(
        analysis::geometric_difference(Ka, Eigen::MatrixXd::Identity(3, 3)),
        DiagnosticError);
    // All of Ka below the floor.
    const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(3, 3);
    CHECK_THROWS_AS(analysis::geometric_difference(
                        zero, Eigen::MatrixXd::Identity(3, 3)),
                    DiagnosticError);
}

TEST_CASE("spearman rank correlation") {
    const std::vector<double> a{1, 2, 3, 4, 5};
    const std::vector<double> up{2, 4, 5, 7, 11};
    const std::vector<double> down{5, 4, 3, 2, 1};
    CHECK(analysis::spearman(a, up) == doctest::Approx(1.0));
    CHECK(analysis::spearman(a, down) == doctest::Approx(-1.0));

    // Ties get average ranks.
    const std::vector<double> t1{1, 1, 2, 2};
    const std::vector<double> t2{1, 1, 2, 2};
    CHECK(analysis::spearman(t1, t2) == doctest::Approx(1.0));

    const std::vector<double> noisy{1, 3, 2, 5, 4};
    const double rho = analysis::spearman(a, noisy);
    CHECK(rho > 0.5);
    CHECK(rho < 1.0);
}
