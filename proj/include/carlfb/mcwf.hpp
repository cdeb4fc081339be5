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

// Monte-Carlo wave-function unraveling of the feedback master equation.
// Cavity-channel jumps are the simulated photocounts; each one applies the
// feedback kick because the cavity collapse operator already contains F.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>
#include <vector>

#include "carlfb/model.hpp"
#include "carlfb/observables.hpp"
#include "carlfb/rng.hpp"
#include "carlfb/time_grid.hpp"

namespace carlfb {

struct JumpEvent {
    double t = 0.0;
    Channel channel = Channel::cavity;
};

using JumpRecord = std::vector<JumpEvent>;

struct TrajectoryResult {
    std::vector<double> times;
    std::vector<Moments> moments;
    JumpRecord jumps;
    std::array<double, 3> tail_mass{};
    Vector final_state;
};

inline constexpr double kMaxJumpProbability = 0.1;

namespace detail {

inline Vector heff_rk4_step(const SparseMatrix& h_eff, const Vector& psi, double dt) {
    const cplx mi{0.0, -1.0};
    const Vector k1 = mi * (h_eff * psi);
    const Vector k2 = mi * (h_eff * (psi + (0.5 * dt) * k1));
    const Vector k3 = mi * (h_eff * (psi + (0.5 * dt) * k2));
    const Vector k4 = mi * (h_eff * (psi + dt * k3));
    return psi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline void renormalize(Vector& psi, double t) {
    const double norm = psi.norm();
    if (!std::isfinite(norm) || norm < 1e-150) {
        std::ostringstream msg;
        msg << "state norm underflow (" << norm << ") at t=" << t;
        throw NumericalError(msg.str());
    }
    psi /= norm;
}

} // namespace detail

/**
 * One quantum trajectory with first-order jump sampling.
 *
 * Per step: p_j = dt <C_j^dag C_j>. One uniform draw u decides whether a
 * jump happens (u < sum p_j); a second draw picks the channel with
 * probability p_j / sum p_j. Without a jump the state takes an RK4 step
 * under H_eff and is renormalized. Jump times are stamped at the end of
 * the step in which they occur.
 */
inline TrajectoryResult evolve_trajectory(const ModelOperators& m, const Vector& psi0, const TimeGrid& grid,
                                          std::uint64_t seed, const QuadratureOps* shared_ops = nullptr) {
    grid.validate();
    if (psi0.size() != m.trunc.dim()) throw ConfigError("evolve_trajectory: state has wrong dimension");
    if (std::abs(psi0.norm() - 1.0) > 1e-9) throw ConfigError("evolve_trajectory: initial state not normalized");

    QuadratureOps local;
    if (shared_ops == nullptr) {
        local = quadrature_ops(m.trunc);
        shared_ops = &local;
    }

    CounterRng rng(seed);
    TrajectoryResult out;
    Vector psi = psi0;
    const double dt = grid.dt;

    for (long step = 0;; ++step) {
        const double t = grid.time(step);
        if (grid.records(step)) {
            out.times.push_back(t);
            out.moments.push_back(moments(psi, *shared_ops));
            const auto top = top_level_population(m.trunc, psi);
            for (int k = 0; k < 3; ++k) out.tail_mass[k] = std::max(out.tail_mass[k], top[k]);
        }
        if (step == grid.n_steps) break;

        std::array<double, 3> p{};
        double p_total = 0.0;
        for (int j = 0; j < 3; ++j) {
            p[j] = dt * expectation(psi, m.collapse_norm[j]).real();
            p[j] = std::max(p[j], 0.0);
            p_total += p[j];
        }
        if (p_total > kMaxJumpProbability) {
            std::ostringstream msg;
            msg << "jump probability " << p_total << " per step exceeds " << kMaxJumpProbability << " at t=" << t
                << "; reduce dt (currently " << dt << ")";
            throw NumericalError(msg.str());
        }

        const double u = rng.uniform();
        if (u < p_total) {
            const double v = rng.uniform() * p_total;
            int channel = -1;
            double acc = 0.0;
            for (int j = 0; j < 3; ++j) {
                acc += p[j];
                if (p[j] > 0.0) {
                    channel = j;
                    if (v < acc) break;
                }
            }
            psi = m.collapse[channel] * psi;
            detail::renormalize(psi, t);
            out.jumps.push_back({grid.time(step + 1), static_cast<Channel>(channel)});
        } else {
            psi = detail::heff_rk4_step(m.h_eff, psi, dt);
            detail::renormalize(psi, t);
        }
    }
    out.final_state = std::move(psi);
    return out;
}

struct EnsembleOptions {
    bool keep_jumps = false;
    /// 0 selects std::thread::hardware_concurrency().
    unsigned n_threads = 0;
};

struct TrajectoryEnsembleResult {
    ObservableSeries mean;
    ObservableSeries standard_error;
    int n_trajectories = 0;
    std::uint64_t base_seed = 0;
    std::array<double, 3> tail_mass{};
    /// Cavity-channel jumps per trajectory.
    std::vector<long> cavity_jumps;
    /// Retained only with keep_jumps.
    std::vector<JumpRecord> jumps;
    /// Per-trajectory moments, indexed [trajectory][record].
    std::vector<std::vector<Moments>> samples;
};

/**
 * Runs n_traj independent trajectories in parallel.
 *
 * Trajectory i uses seed split_seed(base_seed, i), and results are
 * aggregated in index order, so the output depends only on
 * (base_seed, n_traj, grid) and not on thread scheduling.
 */
inline TrajectoryEnsembleResult run_ensemble(const ModelOperators& m, const Vector& psi0, const TimeGrid& grid,
                                             int n_traj, std::uint64_t base_seed, const EnsembleOptions& opts = {}) {
    if (n_traj < 1) throw ConfigError("run_ensemble: n_trajectories must be >= 1");
    const QuadratureOps ops = quadrature_ops(m.trunc);

    std::vector<TrajectoryResult> results(static_cast<std::size_t>(n_traj));
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n_traj) return;
            try {
                results[i] = evolve_trajectory(m, psi0, grid, split_seed(base_seed, static_cast<std::uint64_t>(i)), &ops);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(n_traj);
                return;
            }
        }
    };

    unsigned n_threads = opts.n_threads != 0 ? opts.n_threads : std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(n_traj));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(n_threads);
        for (unsigned k = 0; k < n_threads; ++k) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    TrajectoryEnsembleResult out;
    out.n_trajectories = n_traj;
    out.base_seed = base_seed;
    out.mean.solver = "mcwf";
    out.mean.seed = base_seed;
    out.standard_error.solver = "mcwf-stderr";
    out.standard_error.seed = base_seed;

    const std::vector<double>& times = results.front().times;
    std::vector<Moments> column(static_cast<std::size_t>(n_traj));
    for (std::size_t r = 0; r < times.size(); ++r) {
        for (int i = 0; i < n_traj; ++i) column[i] = results[i].moments[r];
        EnsembleStats stats = ensemble_stats(times[r], column);
        out.mean.records.push_back(std::move(stats.mean));
        out.standard_error.records.push_back(std::move(stats.stderr_));
    }

    out.cavity_jumps.reserve(results.size());
    out.samples.reserve(results.size());
    for (auto& res : results) {
        for (int k = 0; k < 3; ++k) out.tail_mass[k] = std::max(out.tail_mass[k], res.tail_mass[k]);
        out.cavity_jumps.push_back(std::count_if(res.jumps.begin(), res.jumps.end(),
                                                 [](const JumpEvent& e) { return e.channel == Channel::cavity; }));
        out.samples.push_back(std::move(res.moments));
        if (opts.keep_jumps) out.jumps.push_back(std::move(res.jumps));
    }
    return out;
}

/// CSV with columns trajectory,time,channel.
inline void write_jumps_csv(std::ostream& os, const std::vector<JumpRecord>& jumps) {
    os << "trajectory,time,channel\n";
    for (std::size_t i = 0; i < jumps.size(); ++i)
        for (const JumpEvent& e : jumps[i]) os << i << ',' << format_number(e.t) << ',' << channel_name(e.channel) << '\n';
}

} // namespace carlfb
