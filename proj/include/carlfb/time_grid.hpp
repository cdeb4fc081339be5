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

#include "carlfb/params.hpp"

namespace carlfb {

/// Fixed-step grid starting at t = 0; times in units of 1/omega_r.
struct TimeGrid {
    double dt = 1e-3;
    long n_steps = 0;
    int record_stride = 1;

    /// Grid covering [0, t_max] with the step count rounded to the nearest integer.
    static TimeGrid covering(double t_max, double dt, int record_stride = 1) {
        if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be > 0");
        if (!(t_max >= 0.0) || !std::isfinite(t_max)) throw ConfigError("t_max must be >= 0");
        TimeGrid g;
        g.dt = dt;
        g.n_steps = std::lround(t_max / dt);
        g.record_stride = record_stride;
        g.validate();
        return g;
    }

    void validate() const {
        if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
        if (n_steps < 0) throw ConfigError("n_steps must be >= 0");
        if (record_stride < 1) throw ConfigError("record_stride must be >= 1");
    }

    double time(long step) const { return static_cast<double>(step) * dt; }
    double t_max() const { return time(n_steps); }

    /// Steps at which observables are recorded: every stride, plus the last step.
    bool records(long step) const { return step % record_stride == 0 || step == n_steps; }
};

} // namespace carlfb
