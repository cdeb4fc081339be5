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
#include <random>

#include <gtest/gtest.h>

#include "carlfb/observables.hpp"

using namespace carlfb;

namespace {

Matrix thermal(int d, double nbar) {
    Matrix rho = Matrix::Zero(d, d);
    const double r = nbar / (1.0 + nbar);
    double z = 0.0;
    for (int n = 0; n < d; ++n) z += std::pow(r, n);
    for (int n = 0; n < d; ++n) rho(n, n) = std::pow(r, n) / z;
    return rho;
}

// Random density matrix with no weight on the top Fock level of any mode.
Matrix random_interior_density(const TruncationSpec& t, std::mt19937_64& gen) {
    std::normal_distribution<double> nd;
    Matrix g = Matrix::Zero(t.dim(), t.dim());
    for (long i = 0; i < t.dim(); ++i) {
        bool top = false;
        for (Mode m : kModes) top = top || t.occupation(i, m) == t.cutoff(m) - 1;
        if (top) continue;
        for (long j = 0; j < t.dim(); ++j) g(i, j) = cplx(nd(gen), nd(gen));
    }
    Matrix rho = g * g.adjoint();
    return rho / rho.trace().real();
}

} // namespace

TEST(Quadratures, Vacuum) {
    const TruncationSpec t{4, 4, 4};
    const auto rec = extract(0.0, vacuum(t), quadrature_ops(t));
    for (Mode m : kModes) {
        EXPECT_EQ(rec[m].n_mean, 0.0);
        EXPECT_FALSE(rec[m].mandel_q.has_value());
        EXPECT_EQ(rec[m].x_mean, 0.0);
        EXPECT_EQ(rec[m].y_mean, 0.0);
        EXPECT_NEAR(*rec[m].x_var, 0.25, 1e-15);
        EXPECT_NEAR(*rec[m].y_var, 0.25, 1e-15);
    }
}

TEST(Quadratures, SinglePhotonFock) {
    const TruncationSpec t{4, 3, 3};
    const auto rec = extract(0.0, basis_state(t, 1, 0, 0), quadrature_ops(t));
    EXPECT_NEAR(rec[Mode::cavity].n_mean, 1.0, 1e-15);
    EXPECT_NEAR(*rec[Mode::cavity].mandel_q, -1.0, 1e-15);
    EXPECT_NEAR(rec[Mode::cavity].x_mean, 0.0, 1e-15);
    EXPECT_NEAR(*rec[Mode::cavity].x_var, 0.75, 1e-15);
    EXPECT_NEAR(*rec[Mode::cavity].y_var, 0.75, 1e-15);
    for (Mode m : {Mode::cosine, Mode::sine}) {
        EXPECT_EQ(rec[m].n_mean, 0.0);
        EXPECT_NEAR(*rec[m].x_var, 0.25, 1e-15);
    }
}

TEST(Quadratures, CoherentState) {
    const TruncationSpec t{16, 1, 1};
    const auto rec = extract(0.0, coherent_product(t, 0.5, 0.0, 0.0), quadrature_ops(t));
    EXPECT_NEAR(rec[Mode::cavity].x_mean, 0.5, 1e-6);
    EXPECT_NEAR(rec[Mode::cavity].y_mean, 0.0, 1e-12);
    EXPECT_NEAR(*rec[Mode::cavity].x_var, 0.25, 1e-6);
    EXPECT_NEAR(*rec[Mode::cavity].y_var, 0.25, 1e-6);
    EXPECT_NEAR(*rec[Mode::cavity].mandel_q, 0.0, 1e-6);
}

TEST(MandelQ, ReferenceStatistics) {
    EXPECT_NEAR(*mandel_q(0.5, 1.0), 0.5, 1e-15);
    EXPECT_NEAR(*mandel_q(0.25, 0.25 * 0.25 + 0.25), 0.0, 1e-15);
    EXPECT_NEAR(*mandel_q(1.0, 1.0), -1.0, 1e-15);
    EXPECT_FALSE(mandel_q(1e-10, 0.0).has_value());
    EXPECT_FALSE(mandel_q(0.0, 0.0).has_value());
}

TEST(MandelQ, ThermalEqualsMeanOccupation) {
    // Cutoff 60: at 24 the truncated geometric tail for nbar = 1 shifts Q by ~3e-5.
    const int d = 60;
    const TruncationSpec t{d, 1, 1};
    const auto ops = quadrature_ops(t);
    for (double nbar : {0.2, 0.5, 1.0}) {
        const auto rec = extract(0.0, thermal(d, nbar), ops);
        EXPECT_NEAR(rec[Mode::cavity].n_mean, nbar, 1e-8);
        EXPECT_NEAR(*rec[Mode::cavity].mandel_q, nbar, 1e-8);
        EXPECT_NEAR(rec[Mode::cavity].x_mean, 0.0, 1e-15);
    }
    const auto small = extract(0.0, thermal(24, 0.2), quadrature_ops(TruncationSpec{24, 1, 1}));
    EXPECT_NEAR(*small[Mode::cavity].mandel_q, 0.2, 1e-8);
}

TEST(MandelQ, InvariantUnderPhaseRotation) {
    const int d = 20;
    const TruncationSpec t{1, d, 1};
    const auto ops = quadrature_ops(t);
    const Vector psi = coherent_product(t, 0.0, cplx(0.6, 0.2), 0.0) + 0.3 * basis_state(t, 0, 3, 0);
    const Vector base = psi / psi.norm();
    const double q0 = *extract(0.0, base, ops)[Mode::cosine].mandel_q;
    for (double phi : {0.3, 1.1, 2.9}) {
        Vector rotated = base;
        for (int n = 0; n < d; ++n) rotated(n) *= std::polar(1.0, phi * n);
        EXPECT_NEAR(*extract(0.0, rotated, ops)[Mode::cosine].mandel_q, q0, 1e-12);
    }
}

TEST(Uncertainty, ProductBoundOnRandomStates) {
    const TruncationSpec t{3, 4, 3};
    const auto ops = quadrature_ops(t);
    std::mt19937_64 gen(7);
    for (int trial = 0; trial < 25; ++trial) {
        const auto rec = extract(0.0, random_interior_density(t, gen), ops);
        for (Mode m : kModes) {
            EXPECT_GE(*rec[m].x_var * *rec[m].y_var, 1.0 / 16.0 - 1e-6);
            EXPECT_GE(rec[m].n_mean, -1e-9);
        }
    }
}

TEST(Extract, DensityAndPureAgree) {
    const TruncationSpec t{4, 4, 4};
    const auto ops = quadrature_ops(t);
    const Vector psi = coherent_product(t, cplx(0.2, 0.4), cplx(-0.1, 0.3), cplx(0.5, 0.0));
    const auto a = extract(0.0, psi, ops);
    const auto b = extract(0.0, Matrix(psi * psi.adjoint()), ops);
    for (Mode m : kModes) {
        EXPECT_NEAR(a[m].n_mean, b[m].n_mean, 1e-14);
        EXPECT_NEAR(*a[m].mandel_q, *b[m].mandel_q, 1e-12);
        EXPECT_NEAR(a[m].x_mean, b[m].x_mean, 1e-14);
        EXPECT_NEAR(*a[m].y_var, *b[m].y_var, 1e-14);
    }
}

TEST(Extract, RejectsDimensionMismatch) {
    EXPECT_THROW(moments(Vector(Vector::Zero(5)), quadrature_ops(TruncationSpec{2, 2, 2})), ConfigError);
}

TEST(EnsembleStats, LinearQuantitiesUseSampleError) {
    std::vector<Moments> samples(4);
    const double ns[] = {1.0, 2.0, 3.0, 6.0};
    for (int i = 0; i < 4; ++i) {
        samples[i][0].n = ns[i];
        samples[i][0].n2 = ns[i] * ns[i];
    }
    const auto stats = ensemble_stats(0.0, samples);
    EXPECT_DOUBLE_EQ(stats.mean[Mode::cavity].n_mean, 3.0);
    // sample sd = sqrt(14/3), stderr = sd / 2
    EXPECT_NEAR(stats.stderr_[Mode::cavity].n_mean, std::sqrt(14.0 / 3.0) / 2.0, 1e-14);
}

TEST(EnsembleStats, SingleSampleHasZeroError) {
    std::vector<Moments> samples(1);
    samples[0][1].n = 0.7;
    samples[0][1].n2 = 1.1;
    const auto stats = ensemble_stats(0.0, samples);
    EXPECT_DOUBLE_EQ(stats.mean[Mode::cosine].n_mean, 0.7);
    EXPECT_EQ(stats.stderr_[Mode::cosine].n_mean, 0.0);
}

TEST(EnsembleStats, DeltaMethodMatchesJackknife) {
    std::mt19937_64 gen(11);
    std::gamma_distribution<double> gd(2.0, 0.3);
    std::normal_distribution<double> nd(0.1, 0.2);
    const int n = 4000;
    std::vector<Moments> samples(n);
    for (auto& s : samples) {
        const double v = gd(gen);
        s[0].n = v;
        s[0].n2 = v * v + v + 0.5 * v * gd(gen);
        s[0].amp = cplx(nd(gen), nd(gen));
        s[0].x2 = 0.25 + std::norm(s[0].amp) + 0.1 * gd(gen);
        s[0].y2 = 0.25 + 0.1 * gd(gen);
    }
    const auto stats = ensemble_stats(0.0, samples);

    // Jackknife reference for Q and x_var.
    double sn = 0, sn2 = 0, sx = 0, sx2 = 0;
    for (const auto& s : samples) {
        sn += s[0].n;
        sn2 += s[0].n2;
        sx += s[0].amp.real();
        sx2 += s[0].x2;
    }
    std::vector<double> q(n), xv(n);
    for (int i = 0; i < n; ++i) {
        const double m = n - 1.0;
        const double an = (sn - samples[i][0].n) / m, an2 = (sn2 - samples[i][0].n2) / m;
        const double ax = (sx - samples[i][0].amp.real()) / m, ax2 = (sx2 - samples[i][0].x2) / m;
        q[i] = (an2 - an * an - an) / an;
        xv[i] = ax2 - ax * ax;
    }
    auto jack = [n](const std::vector<double>& v) {
        double mean = 0;
        for (double x : v) mean += x / n;
        double ss = 0;
        for (double x : v) ss += (x - mean) * (x - mean);
        return std::sqrt((n - 1.0) / n * ss);
    };
    EXPECT_NEAR(*stats.stderr_[Mode::cavity].mandel_q, jack(q), 0.05 * jack(q));
    EXPECT_NEAR(*stats.stderr_[Mode::cavity].x_var, jack(xv), 0.05 * jack(xv));
}

TEST(SeriesCsv, SchemaAndBlankOptionalFields) {
    ObservableSeries s;
    ObservableRecord r;
    r.t = 0.5;
    r[Mode::cavity] = {2.0, 1.5, 0.1, -0.2, 0.3, 0.4};
    s.records.push_back(r);
    std::ostringstream os;
    write_series_csv(os, s, 10.0);
    const std::string text = os.str();
    EXPECT_EQ(text.substr(0, text.find('\n')), "t,t_kappa,mode,n_mean,mandel_q,x_mean,y_mean,x_var,y_var");
    EXPECT_NE(text.find("0.5,5,photon,2,1.5,0.1,-0.2,0.3,0.4\n"), std::string::npos);
    EXPECT_NE(text.find("0.5,5,cosine,0,,0,0,,\n"), std::string::npos);
}
