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

#include <array>
#include <cmath>

#include "carlfb/hilbert.hpp"
#include "carlfb/params.hpp"

namespace carlfb {

enum class Channel { cavity = 0, loss_c = 1, loss_s = 2 };

inline constexpr std::array<Channel, 3> kChannels{Channel::cavity, Channel::loss_c, Channel::loss_s};

inline const char* channel_name(Channel c) {
    switch (c) {
    case Channel::cavity: return "cavity";
    case Channel::loss_c: return "loss_c";
    case Channel::loss_s: return "loss_s";
    }
    return "?";
}

/// Operators of the feedback master equation on a fixed truncation.
struct ModelOperators {
    PhysParams params;
    TruncationSpec trunc;

    SparseMatrix h0;
    SparseMatrix f_unitary;
    /// sqrt(kappa) a F, sqrt(gamma) psi_c, sqrt(gamma) psi_s.
    std::array<SparseMatrix, 3> collapse;
    /// C_j^dag C_j for each channel.
    std::array<SparseMatrix, 3> collapse_norm;
    /// H0 - (i/2) sum_j C_j^dag C_j.
    SparseMatrix h_eff;

    const SparseMatrix& c_cavity() const { return collapse[0]; }
    const SparseMatrix& c_loss_c() const { return collapse[1]; }
    const SparseMatrix& c_loss_s() const { return collapse[2]; }
};

/**
 * H0 = 4 wR (nc + ns) + U0 sqrt(N) eta (a + a^dag)(psi_c^dag + psi_c)
 *      + i U0 sqrt(N) eta (a - a^dag)(psi_s^dag + psi_s).
 */
inline SparseMatrix build_h0(const PhysParams& p, const TruncationSpec& trunc) {
    trunc.validate();
    const SparseMatrix a = embed_sparse(lower(trunc.d_a), Mode::cavity, trunc);
    const SparseMatrix c = embed_sparse(lower(trunc.d_c), Mode::cosine, trunc);
    const SparseMatrix s = embed_sparse(lower(trunc.d_s), Mode::sine, trunc);
    const SparseMatrix nc = embed_sparse(number(trunc.d_c), Mode::cosine, trunc);
    const SparseMatrix ns = embed_sparse(number(trunc.d_s), Mode::sine, trunc);

    const SparseMatrix a_dag = a.adjoint();
    const SparseMatrix c_dag = c.adjoint();
    const SparseMatrix s_dag = s.adjoint();
    const double coupling = 0.5 * derive(p).g; // U0 sqrt(N) eta

    SparseMatrix h = cplx{4.0 * PhysParams::omega_r} * SparseMatrix(nc + ns);
    if (coupling != 0.0) {
        const SparseMatrix ax = a + a_dag;
        const SparseMatrix ay = a - a_dag;
        const SparseMatrix cx = c_dag + c;
        const SparseMatrix sx = s_dag + s;
        h += cplx{coupling} * SparseMatrix(ax * cx);
        h += cplx{0.0, coupling} * SparseMatrix(ay * sx);
    }
    h.prune(cplx{});
    h.makeCompressed();
    return h;
}

/// F = D(i theta) on the cosine mode, so that F^dag psi_c F = psi_c + i theta.
inline SparseMatrix build_feedback_unitary(const PhysParams& p, const TruncationSpec& trunc) {
    trunc.validate();
    const double theta = derive(p).theta * p.theta_sign;
    if (theta == 0.0) {
        SparseMatrix id(trunc.dim(), trunc.dim());
        id.setIdentity();
        return id;
    }
    SparseMatrix f = embed_sparse(displacement(trunc.d_c, cplx{0.0, theta}), Mode::cosine, trunc);
    f.prune(cplx{});
    return f;
}

inline ModelOperators build_collapse_ops(const PhysParams& p, const TruncationSpec& trunc) {
    p.validate();
    trunc.validate();
    ModelOperators m;
    m.params = p;
    m.trunc = trunc;
    m.h0 = build_h0(p, trunc);
    m.f_unitary = build_feedback_unitary(p, trunc);

    const SparseMatrix a = embed_sparse(lower(trunc.d_a), Mode::cavity, trunc);
    m.collapse[0] = cplx{std::sqrt(p.kappa)} * SparseMatrix(a * m.f_unitary);
    m.collapse[1] = cplx{std::sqrt(p.gamma)} * embed_sparse(lower(trunc.d_c), Mode::cosine, trunc);
    m.collapse[2] = cplx{std::sqrt(p.gamma)} * embed_sparse(lower(trunc.d_s), Mode::sine, trunc);

    m.h_eff = m.h0;
    for (int j = 0; j < 3; ++j) {
        m.collapse[j].prune(cplx{});
        m.collapse[j].makeCompressed();
        m.collapse_norm[j] = SparseMatrix(m.collapse[j].adjoint()) * m.collapse[j];
        m.collapse_norm[j].makeCompressed();
        m.h_eff -= cplx{0.0, 0.5} * m.collapse_norm[j];
    }
    m.h_eff.makeCompressed();
    return m;
}

} // namespace carlfb
