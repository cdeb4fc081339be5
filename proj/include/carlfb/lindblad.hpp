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

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <ostream>
#include <sstream>
#include <vector>

#include "carlfb/model.hpp"
#include "carlfb/observables.hpp"
#include "carlfb/time_grid.hpp"

namespace carlfb {

/**
 * d rho/dt = -i [H0, rho] + sum_j ( C_j rho C_j^dag - {C_j^dag C_j, rho}/2 ).
 *
 * Evaluated as -i (H_eff rho - (H_eff rho)^dag) + sum_j C_j (C_j rho)^dag,
 * which assumes rho is Hermitian.
 */
inline Matrix liouvillian_apply(const ModelOperators& m, const Matrix& rho) {
    if (rho.rows() != m.trunc.dim() || rho.cols() != m.trunc.dim())
        throw ConfigError("liouvillian_apply: dimension mismatch");
    const Matrix heff_rho = m.h_eff * rho;
    Matrix out = cplx{0.0, -1.0} * heff_rho;
    out += cplx{0.0, 1.0} * heff_rho.adjoint();
    for (const SparseMatrix& c : m.collapse) {
        if (c.nonZeros() == 0) continue;
        const Matrix c_rho = c * rho;
        out += c * c_rho.adjoint();
    }
    return out;
}

struct LindbladOptions {
    double trace_tolerance = 1e-5;
    /// Number of evenly spaced times at which the minimum eigenvalue is computed.
    int positivity_samples = 5;
    /// Invoked with (step, t, rho) every snapshot_stride steps when set.
    std::function<void(long, double, const Matrix&)> snapshot;
    long snapshot_stride = 0;
};

struct LindbladResult {
    ObservableSeries series;
    std::array<double, 3> tail_mass{};
    double max_trace_drift = 0.0;
    double max_hermiticity_residual = 0.0;
    double min_eigenvalue = std::numeric_limits<double>::infinity();
    Matrix final_rho;
};

inline Matrix density_from(const Vector& psi) { return psi * psi.adjoint(); }

/// Classical RK4 with fixed step over the grid.
inline LindbladResult propagate(const ModelOperators& m, const Matrix& rho0, const TimeGrid& grid,
                                const LindbladOptions& opts = {}) {
    grid.validate();
    if (rho0.rows() != m.trunc.dim() || rho0.cols() != m.trunc.dim())
        throw ConfigError("propagate: initial state has wrong dimension");

    const QuadratureOps ops = quadrature_ops(m.trunc);
    LindbladResult out;
    out.series.solver = "lindblad-rk4";

    std::vector<long> positivity_steps;
    for (int k = 0; k < opts.positivity_samples; ++k) {
        const long step = opts.positivity_samples == 1
                              ? grid.n_steps
                              : grid.n_steps * k / (opts.positivity_samples - 1);
        positivity_steps.push_back(step);
    }

    Matrix rho = rho0;
    const double dt = grid.dt;
    for (long step = 0;; ++step) {
        const double t = grid.time(step);
        const double drift = std::abs(rho.trace() - cplx{1.0});
        if (!std::isfinite(drift) || drift > opts.trace_tolerance) {
            std::ostringstream msg;
            msg << "trace drift " << drift << " at t=" << t << " exceeds " << opts.trace_tolerance
                << "; reduce dt (currently " << dt << ", dt*kappa=" << dt * m.params.kappa << ")";
            throw NumericalError(msg.str());
        }
        out.max_trace_drift = std::max(out.max_trace_drift, drift);

        if (grid.records(step)) {
            out.series.records.push_back(extract(t, rho, ops));
            out.max_hermiticity_residual = std::max(out.max_hermiticity_residual, hermiticity_residual(rho));
            const auto top = top_level_population(m.trunc, rho);
            for (int k = 0; k < 3; ++k) out.tail_mass[k] = std::max(out.tail_mass[k], top[k]);
        }
        if (std::find(positivity_steps.begin(), positivity_steps.end(), step) != positivity_steps.end())
            out.min_eigenvalue = std::min(out.min_eigenvalue, min_eigenvalue(rho));
        if (opts.snapshot && opts.snapshot_stride > 0 && step % opts.snapshot_stride == 0)
            opts.snapshot(step, t, rho);

        if (step == grid.n_steps) break;

        const Matrix k1 = liouvillian_apply(m, rho);
        const Matrix k2 = liouvillian_apply(m, rho + (0.5 * dt) * k1);
        const Matrix k3 = liouvillian_apply(m, rho + (0.5 * dt) * k2);
        const Matrix k4 = liouvillian_apply(m, rho + dt * k3);
        rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    out.final_rho = std::move(rho);
    return out;
}

/**
 * Binary density snapshot: uint64 dimension D, then D*D (re, im) pairs of
 * 64-bit floats in row-major order, all little-endian.
 */
inline void write_density_snapshot(std::ostream& os, const Matrix& rho) {
    auto put_u64 = [&](std::uint64_t v) {
        for (int b = 0; b < 8; ++b) os.put(static_cast<char>((v >> (8 * b)) & 0xffu));
    };
    put_u64(static_cast<std::uint64_t>(rho.rows()));
    for (Eigen::Index i = 0; i < rho.rows(); ++i)
        for (Eigen::Index j = 0; j < rho.cols(); ++j) {
            put_u64(std::bit_cast<std::uint64_t>(rho(i, j).real()));
            put_u64(std::bit_cast<std::uint64_t>(rho(i, j).imag()));
        }
}

inline Matrix read_density_snapshot(std::istream& is) {
    auto get_u64 = [&]() {
        std::uint64_t v = 0;
        for (int b = 0; b < 8; ++b) {
            const int c = is.get();
            if (c == std::char_traits<char>::eof()) throw ConfigError("truncated density snapshot");
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * b);
        }
        return v;
    };
    const auto dim = static_cast<Eigen::Index>(get_u64());
    Matrix rho(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < dim; ++j) {
            const double re = std::bit_cast<double>(get_u64());
            const double im = std::bit_cast<double>(get_u64());
            rho(i, j) = cplx{re, im};
        }
    return rho;
}

} // namespace carlfb
