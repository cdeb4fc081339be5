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

// Mean-field quadrature equations, their linearization at the uniform
// state, and the pump-threshold scan.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <ostream>
#include <vector>

#include <Eigen/Dense>

#include "carlfb/observables.hpp"
#include "carlfb/params.hpp"
#include "carlfb/time_grid.hpp"

namespace carlfb {

struct SemiclassicalState {
    double x = 0.0, y = 0.0;   // cavity
    double xc = 0.0, yc = 0.0; // cosine mode
    double xs = 0.0, ys = 0.0; // sine mode

    using Array = Eigen::Matrix<double, 6, 1>;

    Array array() const { return (Array() << x, y, xc, yc, xs, ys).finished(); }
    static SemiclassicalState from(const Array& v) { return {v(0), v(1), v(2), v(3), v(4), v(5)}; }
    static SemiclassicalState uniform(double v) { return {v, v, v, v, v, v}; }

    double n() const { return x * x + y * y; }
    double n_c() const { return xc * xc + yc * yc; }
    double n_s() const { return xs * xs + ys * ys; }
    double max_abs() const { return array().cwiseAbs().maxCoeff(); }
    double norm() const { return array().norm(); }
};

/// Time derivative of the quadrature equations; the feedback enters only Yc.
inline SemiclassicalState rhs(const SemiclassicalState& s, const PhysParams& p) {
    const DerivedParams d = derive(p);
    const double w = 4.0 * PhysParams::omega_r;
    const double hk = 0.5 * p.kappa;
    const double hg = 0.5 * p.gamma;
    const double feedback = p.kappa * d.theta; // kappa K U0 sqrt(N/2)
    SemiclassicalState out;
    out.x = -d.g * s.xs - hk * s.x;
    out.y = -d.g * s.xc - hk * s.y;
    out.xc = w * s.yc - hg * s.xc;
    out.yc = -w * s.xc - hg * s.yc - d.g * s.x + feedback * (s.x * s.x + s.y * s.y);
    out.xs = w * s.ys - hg * s.xs;
    out.ys = -w * s.xs - hg * s.ys - d.g * s.y;
    return out;
}

using Jacobian = Eigen::Matrix<double, 6, 6>;

/// Linearization of rhs at the origin. The feedback term is quadratic and drops out.
inline Jacobian jacobian_at_origin(const PhysParams& p) {
    const DerivedParams d = derive(p);
    const double w = 4.0 * PhysParams::omega_r;
    Jacobian j = Jacobian::Zero();
    j(0, 0) = -0.5 * p.kappa;
    j(0, 4) = -d.g;
    j(1, 1) = -0.5 * p.kappa;
    j(1, 2) = -d.g;
    j(2, 2) = -0.5 * p.gamma;
    j(2, 3) = w;
    j(3, 2) = -w;
    j(3, 3) = -0.5 * p.gamma;
    j(3, 0) = -d.g;
    j(4, 4) = -0.5 * p.gamma;
    j(4, 5) = w;
    j(5, 4) = -w;
    j(5, 5) = -0.5 * p.gamma;
    j(5, 1) = -d.g;
    return j;
}

/// Eigenvalues ordered by descending real part (then descending imaginary part).
inline std::array<std::complex<double>, 6> sorted_eigenvalues(const Jacobian& j) {
    Eigen::EigenSolver<Jacobian> solver(j, false);
    std::array<std::complex<double>, 6> ev;
    for (int k = 0; k < 6; ++k) ev[k] = solver.eigenvalues()(k);
    std::sort(ev.begin(), ev.end(), [](const auto& a, const auto& b) {
        return a.real() != b.real() ? a.real() > b.real() : a.imag() > b.imag();
    });
    return ev;
}

inline double max_real_eigenvalue(const PhysParams& p) { return sorted_eigenvalues(jacobian_at_origin(p))[0].real(); }

struct StabilityPoint {
    double eta = 0.0;
    std::array<std::complex<double>, 6> eigenvalues;
    double max_real = 0.0;
};

struct StabilityReport {
    std::vector<StabilityPoint> points;
    std::optional<double> threshold_eta;
};

inline constexpr double kThresholdTolerance = 1e-4;

/**
 * Eigenvalues on a uniform pump grid. The first grid interval where
 * max_real changes sign from negative to non-negative is refined by
 * bisection to a bracket narrower than 1e-4; its midpoint is reported.
 */
inline StabilityReport threshold_scan(PhysParams p, double eta_min, double eta_max, int n_points) {
    if (!(eta_min < eta_max)) throw ConfigError("threshold_scan: eta_min must be < eta_max");
    if (n_points < 2) throw ConfigError("threshold_scan: need at least 2 grid points");
    StabilityReport report;
    for (int i = 0; i < n_points; ++i) {
        p.eta = eta_min + (eta_max - eta_min) * static_cast<double>(i) / static_cast<double>(n_points - 1);
        StabilityPoint pt;
        pt.eta = p.eta;
        pt.eigenvalues = sorted_eigenvalues(jacobian_at_origin(p));
        pt.max_real = pt.eigenvalues[0].real();
        report.points.push_back(pt);
    }
    for (std::size_t i = 0; i + 1 < report.points.size(); ++i) {
        if (report.points[i].max_real < 0.0 && report.points[i + 1].max_real >= 0.0) {
            double lo = report.points[i].eta;
            double hi = report.points[i + 1].eta;
            while (hi - lo > kThresholdTolerance) {
                p.eta = 0.5 * (lo + hi);
                (max_real_eigenvalue(p) < 0.0 ? lo : hi) = p.eta;
            }
            report.threshold_eta = 0.5 * (lo + hi);
            break;
        }
    }
    return report;
}

/// CSV with columns eta,re1..re6,im1..im6,max_real.
inline void write_stability_csv(std::ostream& os, const StabilityReport& report) {
    os << "eta";
    for (int k = 1; k <= 6; ++k) os << ",re" << k;
    for (int k = 1; k <= 6; ++k) os << ",im" << k;
    os << ",max_real\n";
    for (const auto& pt : report.points) {
        os << format_number(pt.eta);
        for (const auto& e : pt.eigenvalues) os << ',' << format_number(e.real());
        for (const auto& e : pt.eigenvalues) os << ',' << format_number(e.imag());
        os << ',' << format_number(pt.max_real) << '\n';
    }
}

inline constexpr double kOverflowGuard = 1e9;

struct SemiclassicalRun {
    std::vector<double> times;
    std::vector<SemiclassicalState> states;
    /// Set when a component exceeded the overflow guard or became non-finite.
    bool unstable_growth = false;
    double t_end = 0.0;

    ObservableSeries series() const {
        ObservableSeries out;
        out.solver = "semiclassical-rk4";
        for (std::size_t i = 0; i < times.size(); ++i) {
            const auto& s = states[i];
            ObservableRecord r;
            r.t = times[i];
            r[Mode::cavity] = {s.n(), std::nullopt, s.x, s.y, std::nullopt, std::nullopt};
            r[Mode::cosine] = {s.n_c(), std::nullopt, s.xc, s.yc, std::nullopt, std::nullopt};
            r[Mode::sine] = {s.n_s(), std::nullopt, s.xs, s.ys, std::nullopt, std::nullopt};
            out.records.push_back(r);
        }
        return out;
    }
};

inline SemiclassicalState rk4_step(const SemiclassicalState& s, const PhysParams& p, double dt) {
    using A = SemiclassicalState::Array;
    const A y = s.array();
    const A k1 = rhs(s, p).array();
    const A k2 = rhs(SemiclassicalState::from(y + 0.5 * dt * k1), p).array();
    const A k3 = rhs(SemiclassicalState::from(y + 0.5 * dt * k2), p).array();
    const A k4 = rhs(SemiclassicalState::from(y + dt * k3), p).array();
    return SemiclassicalState::from(y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

/// Fixed-step RK4. Stops early, keeping the last finite state, on overflow.
inline SemiclassicalRun integrate(const SemiclassicalState& s0, const PhysParams& p, const TimeGrid& grid) {
    grid.validate();
    SemiclassicalRun run;
    SemiclassicalState s = s0;
    for (long step = 0;; ++step) {
        const double t = grid.time(step);
        const double mag = s.max_abs();
        const bool blown = !std::isfinite(mag) || mag > kOverflowGuard;
        if (blown) {
            run.unstable_growth = true;
            if (std::isfinite(mag)) {
                run.times.push_back(t);
                run.states.push_back(s);
            }
            break;
        }
        run.t_end = t;
        if (grid.records(step)) {
            run.times.push_back(t);
            run.states.push_back(s);
        }
        if (step == grid.n_steps) break;
        s = rk4_step(s, p, grid.dt);
    }
    if (!run.times.empty()) run.t_end = run.times.back();
    return run;
}

enum class Fate { decays, diverges, undetermined };

inline constexpr double kDecayNorm = 1e-6;

/// Integrates until the state decays below 1e-6 in norm, trips the overflow guard, or t_max passes.
inline Fate classify_fate(const SemiclassicalState& s0, const PhysParams& p, double t_max, double dt) {
    SemiclassicalState s = s0;
    const long n = std::lround(t_max / dt);
    for (long step = 0; step <= n; ++step) {
        const double mag = s.max_abs();
        if (!std::isfinite(mag) || mag > kOverflowGuard) return Fate::diverges;
        if (s.norm() < kDecayNorm) return Fate::decays;
        s = rk4_step(s, p, dt);
    }
    return Fate::undetermined;
}

struct GainBracket {
    double decays_below = 0.0; ///< largest gain seen to decay
    double diverges_above = 0.0; ///< smallest gain seen to diverge
    bool bracketed = false;
    double width() const { return diverges_above - decays_below; }
};

/**
 * Bisects the feedback gain separating decay from divergence for a fixed
 * initial condition. Requires decay at k_low and divergence at k_high.
 */
inline GainBracket critical_feedback_gain(PhysParams p, const SemiclassicalState& s0, double k_low, double k_high,
                                          double tolerance, double t_max, double dt) {
    auto fate_at = [&](double k) {
        p.feedback_k = k;
        return classify_fate(s0, p, t_max, dt);
    };
    GainBracket b;
    b.decays_below = k_low;
    b.diverges_above = k_high;
    if (fate_at(k_low) != Fate::decays || fate_at(k_high) != Fate::diverges) return b;
    while (b.width() > tolerance) {
        const double mid = 0.5 * (b.decays_below + b.diverges_above);
        switch (fate_at(mid)) {
        case Fate::decays: b.decays_below = mid; break;
        case Fate::diverges: b.diverges_above = mid; break;
        case Fate::undetermined: return b;
        }
    }
    b.bracketed = true;
    return b;
}

} // namespace carlfb
