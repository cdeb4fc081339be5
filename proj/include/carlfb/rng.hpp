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

#include <cstdint>

namespace carlfb {

/// SplitMix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

/// Seed of trajectory `index` under base seed `base`: mix64(base ^ mix64((index + 1) * golden)).
constexpr std::uint64_t split_seed(std::uint64_t base, std::uint64_t index) {
    return mix64(base ^ mix64((index + 1) * kGolden));
}

/**
 * Counter-based stream: draw k of key s is mix64(s + (k + 1) * golden).
 *
 * The k-th value depends only on (key, k), so a trajectory's random
 * numbers do not depend on which worker runs it or in what order.
 */
class CounterRng {
public:
    explicit constexpr CounterRng(std::uint64_t key) : key_(key) {}

    constexpr std::uint64_t next_u64() { return mix64(key_ + (++counter_) * kGolden); }

    /// Uniform double in [0, 1) with 53 random bits.
    constexpr double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    constexpr std::uint64_t counter() const { return counter_; }
    constexpr std::uint64_t key() const { return key_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace carlfb
