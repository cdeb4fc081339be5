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

#pragma once

// Mean quanta, Mandel Q and quadrature moments of the three modes.
// Quadratures follow x = (a + a^dag)/2, y = (a - a^dag)/(2i), so the
// vacuum variance is 1/4.

#include <array>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "carlfb/hilbert.hpp"

namespace carlfb {

inline constexpr double kMandelFloor = 1e-9;

/// (Var n - <n>) / <n>; undefined for an empty mode.
inline std::optional<double> mandel_q(double n_mean, double n2_mean) {
    if (n_mean <= kMandelFloor) return std::nullopt;
    return (n2_mean - n_mean * n_mean - n_mean) / n_mean;
}

/// Raw quantum moments of one mode: <n>, <n^2>, <a>, <X^2>, <Y^2>.
struct ModeMoments {
    double n = 0.0;
    double n2 = 0.0;
    cplx amp{};
    double x2 = 0.0;
    double y2 = 0.0;

    static constexpr int kSize = 6;

    std::array<double, kSize> flat() const { return {n, n2, amp.real(), amp.imag(), x2, y2}; }
    static ModeMoments from_flat(const std::array<double, kSize>& v) {
        return {v[0], v[1], cplx{v[2], v[3]}, v[4], v[5]};
    }
};

using Moments = std::array<ModeMoments, 3>;

struct ModeRecord {
    double n_mean = 0.0;
    std::optional<double> mandel_q;
    double x_mean = 0.0;
    double y_mean = 0.0;
    std::optional<double> x_var;
    std::optional<double> y_var;
};

struct ObservableRecord {
    double t = 0.0;
    std::array<ModeRecord, 3> modes;

    const ModeRecord& operator[](Mode m) const { return modes[static_cast<int>(m)]; }
    ModeRecord& operator[](Mode m) { return modes[static_cast<int>(m)]; }
};

struct ObservableSeries {
    std::vector<ObservableRecord> records;
    std::string solver;
    std::string config_hash;
    std::uint64_t seed = 0;
};

inline double clamp_floor(double v) { return (v < 0.0 && v >= -1e-9) ? 0.0 : v; }

inline ModeRecord mode_record(const ModeMoments& m) {
    ModeRecord r;
    r.n_mean = clamp_floor(m.n);
    r.mandel_q = mandel_q(m.n, m.n2);
    r.x_mean = m.amp.real();
    r.y_mean = m.amp.imag();
    r.x_var = clamp_floor(m.x2 - r.x_mean * r.x_mean);
    r.y_var = clamp_floor(m.y2 - r.y_mean * r.y_mean);
    return r;
}

inline ObservableRecord make_record(double t, const Moments& m) {
    ObservableRecord r;
    r.t = t;
    for (int k = 0; k < 3; ++k) r.modes[k] = mode_record(m[k]);
    return r;
}

/// Embedded per-mode operators used to evaluate moments.
struct QuadratureOps {
    TruncationSpec trunc;
    struct PerMode {
        SparseMatrix a, n, n2, x, y, x2, y2;
    };
    std::array<PerMode, 3> modes;
};

inline QuadratureOps quadrature_ops(const TruncationSpec& trunc) {
    trunc.validate();
    QuadratureOps ops;
    ops.trunc = trunc;
    for (Mode m : kModes) {
        const int d = trunc.cutoff(m);
        const Matrix a = lower(d);
        const Matrix x = 0.5 * (a + a.adjoint());
        const Matrix y = cplx{0.0, -0.5} * (a - a.adjoint());
        const Matrix n = number(d);
        auto& pm = ops.modes[static_cast<int>(m)];
        pm.a = embed_sparse(a, m, trunc);
        pm.n = embed_sparse(n, m, trunc);
        pm.n2 = embed_sparse(n * n, m, trunc);
        pm.x = embed_sparse(x, m, trunc);
        pm.y = embed_sparse(y, m, trunc);
        pm.x2 = embed_sparse(x * x, m, trunc);
        pm.y2 = embed_sparse(y * y, m, trunc);
    }
    return ops;
}

template <typename State>
Moments moments(const State& state, const QuadratureOps& ops) {
    if (state.rows() != ops.trunc.dim()) throw ConfigError("moments: dimension mismatch");
    Moments out;
    for (int k = 0; k < 3; ++k) {
        const auto& pm = ops.modes[k];
        out[k].n = expectation(state, pm.n).real();
        out[k].n2 = expectation(state, pm.n2).real();
        out[k].amp = expectation(state, pm.a);
        out[k].x2 = expectation(state, pm.x2).real();
        out[k].y2 = expectation(state, pm.y2).real();
    }
    return out;
}

template <typename State>
ObservableRecord extract(double t, const State& state, const QuadratureOps& ops) {
    return make_record(t, moments(state, ops));
}

/**
 * Ensemble statistics over per-trajectory moments.
 *
 * Observables are smooth functions of the trajectory-averaged moments
 * (e.g. Var n = E[<n^2>] - E[<n>]^2). Standard errors use the delta method:
 * each trajectory contributes grad f . (m_i - mean), and the error is the
 * sample standard deviation of those contributions over sqrt(n).
 */
struct EnsembleStats {
    ObservableRecord mean;
    ObservableRecord stderr_;
};

inline EnsembleStats ensemble_stats(double t, const std::vector<Moments>& samples) {
    const std::size_t n = samples.size();
    if (n == 0) throw ConfigError("ensemble_stats: empty ensemble");

    Moments avg{};
    for (int k = 0; k < 3; ++k) {
        std::array<double, ModeMoments::kSize> acc{};
        for (const auto& s : samples) {
            const auto f = s[k].flat();
            for (int i = 0; i < ModeMoments::kSize; ++i) acc[i] += f[i];
        }
        for (auto& v : acc) v /= static_cast<double>(n);
        avg[k] = ModeMoments::from_flat(acc);
    }

    EnsembleStats out;
    out.mean = make_record(t, avg);
    out.stderr_.t = t;

    auto stderr_of = [&](auto&& influence) {
        if (n < 2) return 0.0;
        double ss = 0.0;
        for (const auto& s : samples) {
            const double v = influence(s);
            ss += v * v;
        }
        return std::sqrt(ss / (static_cast<double>(n) * static_cast<double>(n - 1)));
    };

    for (int k = 0; k < 3; ++k) {
        const ModeMoments& m = avg[k];
        ModeRecord& se = out.stderr_.modes[k];
        se.n_mean = stderr_of([&](const Moments& s) { return s[k].n - m.n; });
        se.x_mean = stderr_of([&](const Moments& s) { return s[k].amp.real() - m.amp.real(); });
        se.y_mean = stderr_of([&](const Moments& s) { return s[k].amp.imag() - m.amp.imag(); });
        se.x_var = stderr_of([&](const Moments& s) {
            return (s[k].x2 - m.x2) - 2.0 * m.amp.real() * (s[k].amp.real() - m.amp.real());
        });
        se.y_var = stderr_of([&](const Moments& s) {
            return (s[k].y2 - m.y2) - 2.0 * m.amp.imag() * (s[k].amp.imag() - m.amp.imag());
        });
        if (m.n > kMandelFloor) {
            // Q = n2/n - n - 1
            const double dq_dn = -m.n2 / (m.n * m.n) - 1.0;
            const double dq_dn2 = 1.0 / m.n;
            se.mandel_q = stderr_of([&](const Moments& s) {
                return dq_dn * (s[k].n - m.n) + dq_dn2 * (s[k].n2 - m.n2);
            });
        }
    }
    return out;
}

// CSV: t,t_kappa,mode,n_mean,mandel_q,x_mean,y_mean,x_var,y_var

inline std::string format_number(double v) {
    std::ostringstream os;
    os << std::setprecision(12) << v;
    return os.str();
}

inline std::string format_optional(const std::optional<double>& v) {
    return v ? format_number(*v) : std::string{};
}

inline void write_series_csv(std::ostream& os, const ObservableSeries& series, double kappa) {
    os << "t,t_kappa,mode,n_mean,mandel_q,x_mean,y_mean,x_var,y_var\n";
    for (const auto& rec : series.records) {
        for (Mode m : kModes) {
            const ModeRecord& r = rec[m];
            os << format_number(rec.t) << ',' << format_number(rec.t * kappa) << ',' << mode_name(m) << ','
               << format_number(r.n_mean) << ',' << format_optional(r.mandel_q) << ','
               << format_number(r.x_mean) << ',' << format_number(r.y_mean) << ','
               << format_optional(r.x_var) << ',' << format_optional(r.y_var) << '\n';
        }
    }
}

} // namespace carlfb
