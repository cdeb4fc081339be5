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

// Truncated Fock space of the cavity (a), cosine (c) and sine (s) modes.
// Basis ordering is (a, c, s) with the sine occupation varying fastest.

#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "carlfb/params.hpp"

namespace carlfb {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using SparseMatrix = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

/// Dense operator on the truncated space.
using OperatorMatrix = Matrix;
using StateVector = Vector;
using DensityMatrix = Matrix;

enum class Mode { cavity = 0, cosine = 1, sine = 2 };

inline constexpr std::array<Mode, 3> kModes{Mode::cavity, Mode::cosine, Mode::sine};

inline const char* mode_name(Mode m) {
    switch (m) {
    case Mode::cavity: return "photon";
    case Mode::cosine: return "cosine";
    case Mode::sine: return "sine";
    }
    return "?";
}

struct TruncationSpec {
    int d_a = 8;
    int d_c = 8;
    int d_s = 8;

    long dim() const { return static_cast<long>(d_a) * d_c * d_s; }

    int cutoff(Mode m) const {
        switch (m) {
        case Mode::cavity: return d_a;
        case Mode::cosine: return d_c;
        case Mode::sine: return d_s;
        }
        return 0;
    }

    long index(int ia, int ic, int is) const {
        return static_cast<long>(ia) * d_c * d_s + static_cast<long>(ic) * d_s + is;
    }

    /// Occupation of mode m in basis state k.
    int occupation(long k, Mode m) const {
        switch (m) {
        case Mode::cavity: return static_cast<int>(k / (static_cast<long>(d_c) * d_s));
        case Mode::cosine: return static_cast<int>((k / d_s) % d_c);
        case Mode::sine: return static_cast<int>(k % d_s);
        }
        return 0;
    }

    void validate() const {
        if (d_a < 1 || d_c < 1 || d_s < 1) throw ConfigError("Fock cutoffs must be >= 1");
    }

    bool operator==(const TruncationSpec&) const = default;
};

inline Matrix identity(int d) { return Matrix::Identity(d, d); }

/// Single-mode annihilator with <n-1|a|n> = sqrt(n).
inline Matrix lower(int d) {
    if (d < 1) throw ConfigError("lower: cutoff must be >= 1");
    Matrix a = Matrix::Zero(d, d);
    for (int n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

inline Matrix raise(int d) { return lower(d).adjoint(); }

inline Matrix number(int d) {
    Matrix n = Matrix::Zero(d, d);
    for (int k = 0; k < d; ++k) n(k, k) = static_cast<double>(k);
    return n;
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

/// Sparse lift of a single-mode operator to the three-mode space.
inline SparseMatrix embed_sparse(const Matrix& op, Mode mode, const TruncationSpec& trunc) {
    const int d = trunc.cutoff(mode);
    if (op.rows() != d || op.cols() != d)
        throw ConfigError(std::string("embed: operator dimension does not match cutoff of mode ") +
                          mode_name(mode));
    const long dim = trunc.dim();
    std::vector<Eigen::Triplet<cplx>> triplets;
    for (long k = 0; k < dim; ++k) {
        const int ia = trunc.occupation(k, Mode::cavity);
        const int ic = trunc.occupation(k, Mode::cosine);
        const int is = trunc.occupation(k, Mode::sine);
        const int col = trunc.occupation(k, mode);
        for (int row = 0; row < d; ++row) {
            const cplx v = op(row, col);
            if (v == cplx{}) continue;
            long target = 0;
            switch (mode) {
            case Mode::cavity: target = trunc.index(row, ic, is); break;
            case Mode::cosine: target = trunc.index(ia, row, is); break;
            case Mode::sine: target = trunc.index(ia, ic, row); break;
            }
            triplets.emplace_back(target, k, v);
        }
    }
    SparseMatrix out(dim, dim);
    out.setFromTriplets(triplets.begin(), triplets.end());
    out.makeCompressed();
    return out;
}

inline Matrix embed(const Matrix& op, Mode mode, const TruncationSpec& trunc) {
    return Matrix(embed_sparse(op, mode, trunc));
}

/**
 * Truncated displacement exp(alpha a^dag - conj(alpha) a).
 *
 * The generator G = alpha a^dag - conj(alpha) a is anti-Hermitian, so
 * H = -i G is Hermitian and exp(G) = V diag(exp(i w)) V^dag from the
 * eigendecomposition H = V diag(w) V^dag. The result is exactly unitary
 * on the truncated space; it agrees with the true displacement only on
 * occupations well below the cutoff.
 */
inline Matrix displacement(int d, cplx alpha) {
    if (d < 1) throw ConfigError("displacement: cutoff must be >= 1");
    if (alpha == cplx{}) return identity(d);
    const Matrix a = lower(d);
    const Matrix gen = alpha * a.adjoint() - std::conj(alpha) * a;
    const Matrix herm = cplx{0.0, -1.0} * gen;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (herm + herm.adjoint()));
    const Eigen::VectorXd w = eig.eigenvalues();
    Vector phases(w.size());
    for (Eigen::Index k = 0; k < w.size(); ++k) phases(k) = std::polar(1.0, w(k));
    return eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint();
}

inline cplx expectation(const Vector& psi, const Matrix& op) {
    if (op.rows() != psi.size() || op.cols() != psi.size())
        throw ConfigError("expectation: dimension mismatch");
    return psi.dot(op * psi);
}

inline cplx expectation(const Vector& psi, const SparseMatrix& op) {
    if (op.rows() != psi.size() || op.cols() != psi.size())
        throw ConfigError("expectation: dimension mismatch");
    return psi.dot(op * psi);
}

/// Tr(rho A) for a dense operator.
inline cplx expectation(const Matrix& rho, const Matrix& op) {
    if (op.rows() != rho.rows() || op.cols() != rho.cols() || rho.rows() != rho.cols())
        throw ConfigError("expectation: dimension mismatch");
    return (op.transpose().array() * rho.array()).sum();
}

/// Tr(rho A) for a sparse operator, visiting only the stored entries of A.
inline cplx expectation(const Matrix& rho, const SparseMatrix& op) {
    if (op.rows() != rho.rows() || op.cols() != rho.cols() || rho.rows() != rho.cols())
        throw ConfigError("expectation: dimension mismatch");
    cplx acc{};
    for (Eigen::Index i = 0; i < op.outerSize(); ++i)
        for (SparseMatrix::InnerIterator it(op, i); it; ++it) acc += it.value() * rho(it.col(), it.row());
    return acc;
}

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline double hermiticity_residual(const Matrix& m) { return max_abs(m - m.adjoint()); }

inline double min_eigenvalue(const Matrix& rho) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
    return eig.eigenvalues().minCoeff();
}

inline Vector basis_state(const TruncationSpec& trunc, int ia, int ic, int is) {
    Vector psi = Vector::Zero(trunc.dim());
    psi(trunc.index(ia, ic, is)) = 1.0;
    return psi;
}

inline Vector vacuum(const TruncationSpec& trunc) { return basis_state(trunc, 0, 0, 0); }

/// Truncated coherent state D(alpha)|0>, renormalized on the cutoff space.
inline Vector coherent_mode(int d, cplx alpha) {
    Vector v = displacement(d, alpha).col(0);
    return v / v.norm();
}

/// Product of single-mode coherent states.
inline Vector coherent_product(const TruncationSpec& trunc, cplx alpha_a, cplx alpha_c, cplx alpha_s) {
    const Vector va = coherent_mode(trunc.d_a, alpha_a);
    const Vector vc = coherent_mode(trunc.d_c, alpha_c);
    const Vector vs = coherent_mode(trunc.d_s, alpha_s);
    Vector psi(trunc.dim());
    for (int ia = 0; ia < trunc.d_a; ++ia)
        for (int ic = 0; ic < trunc.d_c; ++ic)
            for (int is = 0; is < trunc.d_s; ++is) psi(trunc.index(ia, ic, is)) = va(ia) * vc(ic) * vs(is);
    return psi;
}

inline Matrix projector(const Vector& psi) { return psi * psi.adjoint(); }

/// Population in the highest retained Fock level of each mode.
inline std::array<double, 3> top_level_population(const TruncationSpec& trunc, const Vector& psi) {
    std::array<double, 3> out{};
    for (long k = 0; k < trunc.dim(); ++k) {
        const double p = std::norm(psi(k));
        for (Mode m : kModes)
            if (trunc.occupation(k, m) == trunc.cutoff(m) - 1) out[static_cast<int>(m)] += p;
    }
    return out;
}

inline std::array<double, 3> top_level_population(const TruncationSpec& trunc, const Matrix& rho) {
    std::array<double, 3> out{};
    for (long k = 0; k < trunc.dim(); ++k) {
        const double p = rho(k, k).real();
        for (Mode m : kModes)
            if (trunc.occupation(k, m) == trunc.cutoff(m) - 1) out[static_cast<int>(m)] += p;
    }
    return out;
}

} // namespace carlfb
