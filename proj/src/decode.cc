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

#include "topodecode/decode.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "topodecode/parallel.h"

namespace topodecode {

namespace {

constexpr size_t kEvalBatch = 256;

size_t argmax_class(const std::array<double, kNumClasses> &q, const std::array<size_t, kNumClasses> &order) {
    size_t best = order[0];
    for (size_t i = 1; i < kNumClasses; i++) {
        if (q[order[i]] > q[best] + kClassTieTolerance) {
            best = order[i];
        }
    }
    return best;
}

}  // namespace

std::vector<std::vector<double>> Predictor::predict_batch(const std::vector<BitVec> &ss) const {
    std::vector<std::vector<double>> out;
    out.reserve(ss.size());
    for (const auto &s : ss) {
        out.push_back(predict(s));
    }
    return out;
}

NetworkPredictor::NetworkPredictor(const StabilizerCode &code, ModelKind kind, const Network &net)
    : code_(code), kind_(kind), net_(net) {
    std::vector<size_t> shape{1};
    auto in = input_shape(code, kind);
    shape.insert(shape.end(), in.begin(), in.end());
    outputs_ = net.forward(Tensor(shape)).shape.back();
}

std::vector<double> NetworkPredictor::predict(const BitVec &s) const {
    return predict_batch({s}).front();
}

std::vector<std::vector<double>> NetworkPredictor::predict_batch(const std::vector<BitVec> &ss) const {
    std::vector<size_t> shape{ss.size()};
    auto in = input_shape(code_, kind_);
    shape.insert(shape.end(), in.begin(), in.end());
    Tensor x(shape);
    for (size_t b = 0; b < ss.size(); b++) {
        encode_syndrome(code_, kind_, ss[b], x, b);
    }
    Tensor y = net_.forward(x);
    std::vector<std::vector<double>> out(ss.size());
    for (size_t b = 0; b < ss.size(); b++) {
        out[b].assign(y.data.begin() + (long)(b * outputs_), y.data.begin() + (long)((b + 1) * outputs_));
    }
    return out;
}

BitVec faithful_diagnosis(const StabilizerCode &code, const DiagnosisScheme &scheme, const BitVec &s, size_t w) {
    return scheme.hg_lambda.apply(pure_error(code, s) ^ class_operator(code, w));
}

DecodeOutcome decode_prediction(const StabilizerCode &code, const DiagnosisScheme &scheme, const BitVec &s,
                                const std::vector<double> &gp) {
    if (!scheme.faithful || !scheme.decomposable) {
        throw ContractViolation("decoding needs a faithful, decomposable scheme");
    }
    if (gp.size() != scheme.num_labels()) {
        throw ContractViolation("prediction length " + std::to_string(gp.size()) + " != " +
                                std::to_string(scheme.num_labels()));
    }
    BitVec t = pure_error(code, s);
    BitVec delta = scheme.hg_lambda.apply(t);
    std::vector<double> aug = sigma_delta(delta, gp);
    aug.push_back(1.0);
    std::vector<double> q = scheme.d_inv.apply(aug);
    DecodeOutcome out;
    std::copy(q.begin(), q.end(), out.q.begin());
    out.chosen_class = argmax_class(out.q, scheme.class_order);
    out.recovery = t ^ class_operator(code, out.chosen_class);
    return out;
}

DecodeOutcome decode_one(const StabilizerCode &code, const DiagnosisScheme &scheme, const Predictor &predictor,
                         const BitVec &s) {
    return decode_prediction(code, scheme, s, predictor.predict(s));
}

bool is_success(const StabilizerCode &code, const BitVec &e, const BitVec &recovery) {
    if (e.size() != recovery.size() || e.size() != 2 * code.n) {
        throw ContractViolation("is_success: length mismatch");
    }
    BitVec r = e ^ recovery;
    if (syndrome(code, r).any()) {
        return false;
    }
    return logical_class(code, r) == 0;
}

RateEstimate wilson_estimate(size_t failures, size_t trials, double z) {
    if (trials == 0) {
        throw ContractViolation("trials must be at least 1");
    }
    RateEstimate r;
    r.failures = failures;
    r.trials = trials;
    double n = (double)trials;
    double p = (double)failures / n;
    r.rate = p;
    double z2 = z * z;
    double center = (p + z2 / (2 * n)) / (1 + z2 / n);
    double half = z / (1 + z2 / n) * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n));
    r.ci_low = std::max(0.0, center - half);
    r.ci_high = std::min(1.0, center + half);
    return r;
}

RateEstimate logical_error_rate(const StabilizerCode &code, const NoiseModel &model, size_t trials, uint64_t seed,
                                const Decoder &decoder) {
    if (trials == 0) {
        throw ContractViolation("trials must be at least 1");
    }
    std::vector<size_t> fails(worker_count(), 0);
    parallel_chunks(
        trials,
        [&](size_t w, size_t begin, size_t end) {
            for (size_t i = begin; i < end; i++) {
                BitVec e = sample_error(model, code.n, seed, i);
                if (!is_success(code, e, decoder(syndrome(code, e)))) {
                    fails[w]++;
                }
            }
        },
        fails.size());
    size_t total = 0;
    for (size_t f : fails) {
        total += f;
    }
    return wilson_estimate(total, trials);
}

RateEstimate logical_error_rate(const StabilizerCode &code, const DiagnosisScheme &scheme, const Predictor &predictor,
                                const NoiseModel &model, size_t trials, uint64_t seed) {
    if (trials == 0) {
        throw ContractViolation("trials must be at least 1");
    }
    std::vector<size_t> fails(worker_count(), 0);
    parallel_chunks(
        trials,
        [&](size_t w, size_t begin, size_t end) {
            for (size_t b0 = begin; b0 < end; b0 += kEvalBatch) {
                size_t b1 = std::min(end, b0 + kEvalBatch);
                std::vector<BitVec> errors, syndromes;
                for (size_t i = b0; i < b1; i++) {
                    errors.push_back(sample_error(model, code.n, seed, i));
                    syndromes.push_back(syndrome(code, errors.back()));
                }
                auto preds = predictor.predict_batch(syndromes);
                for (size_t j = 0; j < errors.size(); j++) {
                    auto out = decode_prediction(code, scheme, syndromes[j], preds[j]);
                    if (!is_success(code, errors[j], out.recovery)) {
                        fails[w]++;
                    }
                }
            }
        },
        fails.size());
    size_t total = 0;
    for (size_t f : fails) {
        total += f;
    }
    return wilson_estimate(total, trials);
}

std::array<double, kNumClasses> exact_class_probabilities(const StabilizerCode &code, const NoiseModel &model,
                                                          const BitVec &s) {
    if (code.n > kExactOracleMaxQubits) {
        throw TooLarge("exact enumeration supports n <= " + std::to_string(kExactOracleMaxQubits));
    }
    size_t gens = code.hc.rows();
    BitVec t = pure_error(code, s);
    std::array<double, kNumClasses> out{};
    for (size_t w = 0; w < kNumClasses; w++) {
        // Gray-code walk over the stabilizer group.
        BitVec e = t ^ class_operator(code, w);
        std::vector<double> logs;
        logs.reserve((size_t)1 << gens);
        for (uint64_t i = 0; i < ((uint64_t)1 << gens); i++) {
            if (i > 0) {
                e ^= code.hc.row((size_t)std::countr_zero(i));
            }
            double l = log_prob(model, e);
            if (l > -std::numeric_limits<double>::infinity()) {
                logs.push_back(l);
            }
        }
        if (logs.empty()) {
            continue;
        }
        double mx = *std::max_element(logs.begin(), logs.end());
        double acc = 0;
        for (double l : logs) {
            acc += std::exp(l - mx);
        }
        out[w] = std::exp(mx) * acc;
    }
    return out;
}

namespace {

std::array<double, kNumClasses> conditional_class_probabilities(const StabilizerCode &code, const NoiseModel &model,
                                                                const BitVec &s) {
    auto joint = exact_class_probabilities(code, model, s);
    double total = 0;
    for (double p : joint) {
        total += p;
    }
    if (!(total > 0)) {
        throw UnreachableSyndrome("syndrome has probability zero under the noise model");
    }
    for (double &p : joint) {
        p /= total;
    }
    return joint;
}

}  // namespace

std::vector<double> exact_l2_diagnosis(const StabilizerCode &code, const DiagnosisScheme &scheme,
                                       const NoiseModel &model, const BitVec &s) {
    auto q = conditional_class_probabilities(code, model, s);
    std::vector<double> g(scheme.num_labels(), 0.0);
    for (size_t w = 0; w < kNumClasses; w++) {
        if (q[w] == 0) {
            continue;
        }
        BitVec gw = faithful_diagnosis(code, scheme, s, w);
        for (size_t i : gw.ones()) {
            g[i] += q[w];
        }
    }
    return g;
}

size_t exact_optimal_class(const StabilizerCode &code, const NoiseModel &model, const BitVec &s) {
    return argmax_class(conditional_class_probabilities(code, model, s), {0, 1, 2, 3});
}

std::vector<double> ExactL2Predictor::predict(const BitVec &s) const {
    std::string key = s.str();
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = cache_.find(key);
        if (it != cache_.end()) {
            return it->second;
        }
    }
    auto g = exact_l2_diagnosis(code_, scheme_, model_, s);
    std::lock_guard<std::mutex> lock(mu_);
    cache_.emplace(key, g);
    return g;
}

}  // namespace topodecode
