// Copyright 2026 The carlfb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <complex>

#include <gtest/gtest.h>

#include "carlfb/lindblad.hpp"
#include "carlfb/model.hpp"
#include "carlfb/observables.hpp"
#include "carlfb/semiclassical.hpp"

using namespace carlfb;

namespace {

PhysParams defaults(double eta = 0.3, double k = 0.0) {
    PhysParams p;
    p.eta = eta;
    p.feedback_k = k;
    return p;
}

// Gain giving a kick amplitude theta at u0 = 0.1, N = 1e4.
double gain_for_theta(double theta) { return theta / (0.1 * std::sqrt(5000.0)); }

double interior_block_residual(const Matrix& m, const TruncationSpec& t, int excluded_top_c) {
    double worst = 0.0;
    for (long i = 0; i < t.dim(); ++i)
        for (long j = 0; j < t.dim(); ++j) {
            if (t.occupation(i, Mode::cosine) >= t.d_c - excluded_top_c) continue;
            if (t.occupation(j, Mode::cosine) >= t.d_c - excluded_top_c) continue;
            worst = std::max(worst, std::abs(m(i, j)));
        }
    return worst;
}

} // namespace

TEST(BuildH0, NoPumpIsDiagonal) {
    const TruncationSpec t{3, 4, 4};
    const Matrix h = Matrix(build_h0(defaults(0.0), t));
    for (long i = 0; i < t.dim(); ++i)
        for (long j = 0; j < t.dim(); ++j) {
            const double expected =
                i == j ? 4.0 * (t.occupation(i, Mode::cosine) + t.occupation(i, Mode::sine)) : 0.0;
            EXPECT_NEAR(std::abs(h(i, j) - expected), 0.0, 1e-15);
        }
}

TEST(BuildH0, PhotonCosineMatrixElement) {
    const TruncationSpec t{3, 3, 3};
    const Matrix h = Matrix(build_h0(defaults(0.3), t));
    const cplx elem = h(t.index(1, 0, 0), t.index(0, 1, 0));
    EXPECT_NEAR(elem.real(), 3.0, 1e-12);
    EXPECT_NEAR(elem.imag(), 0.0, 1e-12);
}

TEST(BuildH0, PhotonSineMatrixElementIsImaginary) {
    const TruncationSpec t{3, 3, 3};
    const Matrix h = Matrix(build_h0(defaults(0.3), t));
    // <1,0,0| i g/2 (a - a^dag)(s + s^dag) |0,0,1> = -i g/2
    const cplx elem = h(t.index(1, 0, 0), t.index(0, 0, 1));
    EXPECT_NEAR(elem.real(), 0.0, 1e-12);
    EXPECT_NEAR(elem.imag(), -3.0, 1e-12);
}

TEST(BuildH0, Hermitian) {
    const Matrix h = Matrix(build_h0(defaults(0.3), TruncationSpec{}));
    EXPECT_LT(hermiticity_residual(h), 1e-12);
}

TEST(FeedbackUnitary, IdentityWithoutGain) {
    const TruncationSpec t{3, 5, 3};
    EXPECT_EQ(Matrix(build_feedback_unitary(defaults(0.3, 0.0), t)), Matrix::Identity(t.dim(), t.dim()));
}

TEST(FeedbackUnitary, ShiftsCosineMode) {
    const TruncationSpec t{1, 16, 1};
    const Matrix f = Matrix(build_feedback_unitary(defaults(0.3, gain_for_theta(0.2)), t));
    const Matrix c = embed(lower(16), Mode::cosine, t);
    const Matrix residual = f.adjoint() * c * f - (c + cplx(0.0, 0.2) * Matrix::Identity(t.dim(), t.dim()));
    EXPECT_LT(residual.topLeftCorner(10, 10).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(FeedbackUnitary, VacuumBecomesCoherent) {
    const TruncationSpec t{2, 16, 2};
    const Matrix f = Matrix(build_feedback_unitary(defaults(0.3, gain_for_theta(0.3)), t));
    const Vector psi = f * vacuum(t);
    const auto ops = quadrature_ops(t);
    const Moments m = moments(psi, ops);
    EXPECT_NEAR(m[1].n, 0.09, 1e-4);
    EXPECT_NEAR(m[1].amp.imag(), 0.3, 1e-4);
    EXPECT_NEAR(m[0].n, 0.0, 1e-15);
}

TEST(FeedbackUnitary, UnitaryOnInterior) {
    const TruncationSpec t{2, 8, 2};
    const Matrix f = Matrix(build_feedback_unitary(defaults(0.3, 0.75), t));
    const Matrix residual = f.adjoint() * f - Matrix::Identity(t.dim(), t.dim());
    EXPECT_LT(interior_block_residual(residual, t, 2), 1e-8);
}

TEST(FeedbackUnitary, SignOverrideFlipsShift) {
    const TruncationSpec t{1, 16, 1};
    auto p = defaults(0.3, gain_for_theta(0.2));
    p.theta_sign = -1;
    const Vector psi = Matrix(build_feedback_unitary(p, t)) * vacuum(t);
    EXPECT_NEAR(moments(psi, quadrature_ops(t))[1].amp.imag(), -0.2, 1e-4);
}

TEST(CollapseOps, NoDissipation) {
    auto p = defaults(0.3, 0.5);
    p.kappa = 0.0;
    p.gamma = 0.0;
    const auto m = build_collapse_ops(p, TruncationSpec{3, 3, 3});
    for (const auto& c : m.collapse) EXPECT_EQ(Matrix(c).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_LT(max_abs(Matrix(m.h_eff) - Matrix(m.h0)), 1e-15);
}

TEST(CollapseOps, CavityJumpWithoutFeedback) {
    const TruncationSpec t{4, 3, 3};
    const auto m = build_collapse_ops(defaults(0.3, 0.0), t);
    const Matrix expected = std::sqrt(10.0) * embed(lower(4), Mode::cavity, t);
    EXPECT_EQ(Matrix(m.c_cavity()), expected);
}

TEST(CollapseOps, PhotonLossRate) {
    const TruncationSpec t{4, 3, 3};
    const auto m = build_collapse_ops(defaults(0.3, 0.75), t);
    const Matrix rho = projector(basis_state(t, 1, 0, 0));
    const Matrix cdc = Matrix(m.c_cavity()).adjoint() * Matrix(m.c_cavity());
    EXPECT_NEAR(expectation(rho, cdc).real(), 10.0, 1e-12);
}

TEST(CollapseOps, GlobalPhaseOfFeedbackIsInvisible) {
    const TruncationSpec t{3, 4, 3};
    const auto p = defaults(0.4, gain_for_theta(0.3));
    const auto m = build_collapse_ops(p, t);
    ModelOperators rotated = m;
    const cplx phase = std::polar(1.0, M_PI / 3.0);
    rotated.f_unitary = phase * m.f_unitary;
    rotated.collapse[0] = phase * m.collapse[0];
    rotated.collapse_norm[0] = SparseMatrix(rotated.collapse[0].adjoint()) * rotated.collapse[0];

    const Matrix rho0 = density_from(coherent_product(t, cplx(0.3, 0.1), cplx(0.2, 0.0), cplx(0.0, 0.1)));
    const TimeGrid grid = TimeGrid::covering(0.2, 0.002, 100);
    const auto a = propagate(m, rho0, grid);
    const auto b = propagate(rotated, rho0, grid);
    EXPECT_LT(max_abs(a.final_rho - b.final_rho), 1e-9);
}

// The jump-averaged feedback must push <Yc> upward at rate kappa * theta * <n>,
// the sign carried by the mean-field equations.
TEST(SignConsistency, LindbladMatchesMeanFieldYcRate) {
    const TruncationSpec t{6, 12, 6};
    const double theta = 0.2;
    const auto p = defaults(0.3, gain_for_theta(theta));
    const auto m = build_collapse_ops(p, t);
    const cplx aa(0.3, 0.2), ac(0.1, 0.1), as(0.1, -0.05);
    const Matrix rho0 = density_from(coherent_product(t, aa, ac, as));
    const auto ops = quadrature_ops(t);
    const SemiclassicalState s0{aa.real(), aa.imag(), ac.real(), ac.imag(), as.real(), as.imag()};

    const double predicted = rhs(s0, p).yc;
    const double instantaneous = expectation(liouvillian_apply(m, rho0), ops.modes[1].y).real();
    EXPECT_NEAR(instantaneous, predicted, 0.05 * std::abs(predicted));

    // Finite difference over 0.05 / kappa against the mean-field integration.
    const double h = 0.05 / p.kappa;
    const TimeGrid grid = TimeGrid::covering(h, h / 20.0, 20);
    const auto quantum = propagate(m, rho0, grid);
    const double dq = quantum.series.records.back()[Mode::cosine].y_mean - quantum.series.records.front()[Mode::cosine].y_mean;
    const auto classical = integrate(s0, p, grid);
    const double dc = classical.states.back().yc - s0.yc;
    EXPECT_NEAR(dq / h, dc / h, 0.05 * std::abs(dc / h));
    EXPECT_NEAR(dq / h, predicted, 0.05 * std::abs(predicted));

    auto flipped = p;
    flipped.theta_sign = -1;
    const double wrong = expectation(liouvillian_apply(build_collapse_ops(flipped, t), rho0), ops.modes[1].y).real();
    EXPECT_GT(std::abs(wrong - predicted), 0.05 * std::abs(predicted));
}
