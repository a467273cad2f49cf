// Copyright 2026 The topodecode Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TOPODECODE_NOISE_H
#define TOPODECODE_NOISE_H

#include <cstdint>
#include <string>

#include "topodecode/gf2.h"

namespace topodecode {

/// Counter-based generator: the stream for (seed, index, stream) is fixed, so
/// any worker can reproduce sample `index` without touching the others.
class CounterRng {
   public:
    CounterRng(uint64_t seed, uint64_t index, uint64_t stream = 0);
    uint64_t next();
    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    /// Uniform integer in [0, bound).
    uint64_t below(uint64_t bound);
    /// Standard normal (Box-Muller).
    double normal();

   private:
    uint64_t state_;
};

uint64_t mix64(uint64_t x);

enum class NoiseKind { bit_flip, depolarizing };

struct NoiseModel {
    NoiseKind kind = NoiseKind::bit_flip;
    double p = 0;

    NoiseModel() = default;
    NoiseModel(NoiseKind kind, double p);
};

std::string noise_kind_name(NoiseKind k);
NoiseKind parse_noise_kind(const std::string &name);

BitVec sample_error(const NoiseModel &model, size_t n, CounterRng &rng);
BitVec sample_error(const NoiseModel &model, size_t n, uint64_t seed, uint64_t index);

/// Log-probability of e; -infinity when the model cannot produce e.
double log_prob(const NoiseModel &model, const BitVec &e);

}  // namespace topodecode

#endif
