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

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace carlfb {

/// Raised for invalid user input (bad config values, dimension mismatches).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when an integrator or sampler leaves its validity regime.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * Physical constants of the three-mode model in recoil units.
 *
 * Frequencies and rates are measured in units of the recoil frequency
 * (omega_r = 1, hbar = 1), so times are in units of 1/omega_r.
 * The detuning Delta = u0 * n_atoms is already eliminated from the
 * Hamiltonian and is only reported for display.
 */
struct PhysParams {
    double u0 = 0.1;          ///< single-atom coupling U0
    long n_atoms = 10000;     ///< atoms in the uniform condensate
    double kappa = 10.0;      ///< cavity decay rate
    double gamma = 10.0;      ///< loss rate of the cosine and sine modes
    double eta = 0.3;         ///< real pump amplitude
    double feedback_k = 0.0;  ///< feedback gain K
    double theta_scale = 1.0; ///< multiplies the feedback kick amplitude
    int theta_sign = 1;       ///< orientation of the kick in the cosine mode

    static constexpr double omega_r = 1.0;

    double detuning() const { return u0 * static_cast<double>(n_atoms); }

    /// Throws ConfigError on hard violations; returns soft warnings.
    std::vector<std::string> validate() const {
        auto require = [](bool ok, const char* what) {
            if (!ok) throw ConfigError(what);
        };
        require(std::isfinite(u0), "u0 must be finite");
        require(n_atoms >= 1, "n_atoms must be >= 1");
        require(std::isfinite(kappa) && kappa >= 0.0, "kappa must be >= 0");
        require(std::isfinite(gamma) && gamma >= 0.0, "gamma must be >= 0");
        require(std::isfinite(eta) && eta >= 0.0, "eta must be >= 0");
        require(std::isfinite(feedback_k) && feedback_k >= 0.0, "feedback_k must be >= 0");
        require(std::isfinite(theta_scale), "theta_scale must be finite");
        require(theta_sign == 1 || theta_sign == -1, "theta_sign must be +1 or -1");

        std::vector<std::string> warnings;
        if (std::abs(u0) >= 0.5 * omega_r)
            warnings.emplace_back("u0 >= 0.5 omega_r: the feedback displacement picture "
                                  "requires u0 << omega_r");
        return warnings;
    }
};

/// Coefficients that appear repeatedly in the equations of motion.
struct DerivedParams {
    double g = 0.0;     ///< collective coupling 2 U0 sqrt(N) eta
    double theta = 0.0; ///< kick amplitude sqrt(N/2) K U0 (times theta_scale)
};

inline DerivedParams derive(const PhysParams& p) {
    const double n = static_cast<double>(p.n_atoms);
    DerivedParams d;
    d.g = 2.0 * p.u0 * std::sqrt(n) * p.eta;
    d.theta = std::sqrt(n / 2.0) * p.feedback_k * p.u0 * p.theta_scale;
    return d;
}

} // namespace carlfb
