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

#include "topodecode/noise.h"

#include <cmath>
#include <limits>
#include <numbers>

namespace topodecode {

uint64_t mix64(uint64_t x) {
    // splitmix64 finalizer
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

CounterRng::CounterRng(uint64_t seed, uint64_t index, uint64_t stream)
    : state_(mix64(mix64(seed) ^ mix64(index * 0xD1B54A32D192ED03ull + stream))) {
}

uint64_t CounterRng::next() {
    state_ += 0x9E3779B97F4A7C15ull;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double CounterRng::uniform() {
    return (next() >> 11) * 0x1.0p-53;
}

uint64_t CounterRng::below(uint64_t bound) {
    if (bound == 0) {
        throw ContractViolation("below: bound must be positive");
    }
    // Rejection sampling keeps the result unbiased.
    uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    uint64_t x;
    do {
        x = next();
    } while (x >= limit);
    return x % bound;
}

double CounterRng::normal() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 <= 0) {
        u1 = 0x1.0p-53;
    }
    return std::sqrt(-2 * std::log(u1)) * std::cos(2 * std::numbers::pi * u2);
}

NoiseModel::NoiseModel(NoiseKind kind, double p) : kind(kind), p(p) {
    if (!(p >= 0 && p < 1)) {
        throw std::invalid_argument("error probability must lie in [0, 1)");
    }
}

std::string noise_kind_name(NoiseKind k) {
    return k == NoiseKind::bit_flip ? "bit_flip" : "depolarizing";
}

NoiseKind parse_noise_kind(const std::string &name) {
    if (name == "bit_flip") {
        return NoiseKind::bit_flip;
    }
    if (name == "depolarizing") {
        return NoiseKind::depolarizing;
    }
    throw std::invalid_argument("unknown noise kind '" + name + "'");
}

BitVec sample_error(const NoiseModel &model, size_t n, CounterRng &rng) {
    BitVec e(2 * n);
    if (model.p == 0) {
        return e;
    }
    for (size_t q = 0; q < n; q++) {
        double u = rng.uniform();
        if (u >= model.p) {
            continue;
        }
        if (model.kind == NoiseKind::bit_flip) {
            e.set(q, true);
            continue;
        }
        // u / p is uniform in [0, 1): thirds pick X, Y, Z.
        double r = 3 * u / model.p;
        if (r < 1) {
            e.set(q, true);
        } else if (r < 2) {
            e.set(q, true);
            e.set(q + n, true);
        } else {
            e.set(q + n, true);
        }
    }
    return e;
}

BitVec sample_error(const NoiseModel &model, size_t n, uint64_t seed, uint64_t index) {
    CounterRng rng(seed, index);
    return sample_error(model, n, rng);
}

double log_prob(const NoiseModel &model, const BitVec &e) {
    if (e.size() % 2) {
        throw ContractViolation("log_prob needs an even length");
    }
    size_t n = e.size() / 2;
    constexpr double neg_inf = -std::numeric_limits<double>::infinity();
    if (model.kind == NoiseKind::bit_flip && e.slice(n, n).any()) {
        return neg_inf;
    }
    size_t w = pauli_weight(e);
    if (w > 0 && model.p == 0) {
        return neg_inf;
    }
    double per = model.kind == NoiseKind::bit_flip ? model.p : model.p / 3;
    double lp = (double)(n - w) * std::log1p(-model.p);
    if (w > 0) {
        lp += (double)w * std::log(per);
    }
    return lp;
}

}  // namespace topodecode
