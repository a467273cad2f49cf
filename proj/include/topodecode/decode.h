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

#ifndef TOPODECODE_DECODE_H
#define TOPODECODE_DECODE_H

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "topodecode/codes.h"
#include "topodecode/diagnosis.h"
#include "topodecode/nn.h"
#include "topodecode/noise.h"

namespace topodecode {

struct TooLarge : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnreachableSyndrome : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Ties in q are resolved toward the earlier class when within this margin.
constexpr double kClassTieTolerance = 1e-9;
/// Largest n the exact enumeration oracles accept.
constexpr size_t kExactOracleMaxQubits = 13;

/// Maps a syndrome to a real vector of length |g|. Must be safe to call from
/// several threads at once.
class Predictor {
   public:
    virtual ~Predictor() = default;
    virtual size_t output_size() const = 0;
    virtual std::vector<double> predict(const BitVec &s) const = 0;
    /// Default loops over predict().
    virtual std::vector<std::vector<double>> predict_batch(const std::vector<BitVec> &ss) const;
};

class NetworkPredictor : public Predictor {
   public:
    NetworkPredictor(const StabilizerCode &code, ModelKind kind, const Network &net);
    size_t output_size() const override {
        return outputs_;
    }
    std::vector<double> predict(const BitVec &s) const override;
    std::vector<std::vector<double>> predict_batch(const std::vector<BitVec> &ss) const override;

   private:
    const StabilizerCode &code_;
    ModelKind kind_;
    const Network &net_;
    size_t outputs_;
};

class FunctionPredictor : public Predictor {
   public:
    FunctionPredictor(size_t outputs, std::function<std::vector<double>(const BitVec &)> fn)
        : outputs_(outputs), fn_(std::move(fn)) {
    }
    size_t output_size() const override {
        return outputs_;
    }
    std::vector<double> predict(const BitVec &s) const override {
        return fn_(s);
    }

   private:
    size_t outputs_;
    std::function<std::vector<double>(const BitVec &)> fn_;
};

struct DecodeOutcome {
    BitVec recovery;
    size_t chosen_class = 0;
    std::array<double, kNumClasses> q{};
};

/// Class extraction from a prediction g^P for syndrome s.
DecodeOutcome decode_prediction(const StabilizerCode &code, const DiagnosisScheme &scheme, const BitVec &s,
                                const std::vector<double> &gp);
DecodeOutcome decode_one(const StabilizerCode &code, const DiagnosisScheme &scheme, const Predictor &predictor,
                         const BitVec &s);

/// Faithful diagnosis vector g_s(w) = H_gΛ(t(s) + wG).
BitVec faithful_diagnosis(const StabilizerCode &code, const DiagnosisScheme &scheme, const BitVec &s, size_t w);

bool is_success(const StabilizerCode &code, const BitVec &e, const BitVec &recovery);

struct RateEstimate {
    size_t failures = 0;
    size_t trials = 0;
    double rate = 0;
    double ci_low = 0;
    double ci_high = 0;
};

/// 95% Wilson score interval.
RateEstimate wilson_estimate(size_t failures, size_t trials, double z = 1.959963984540054);

/// Recovery operator for a syndrome.
using Decoder = std::function<BitVec(const BitVec &s)>;

/// Error i is sample_error(model, n, seed, i), so the estimate does not
/// depend on the number of workers.
RateEstimate logical_error_rate(const StabilizerCode &code, const NoiseModel &model, size_t trials, uint64_t seed,
                                const Decoder &decoder);
RateEstimate logical_error_rate(const StabilizerCode &code, const DiagnosisScheme &scheme, const Predictor &predictor,
                                const NoiseModel &model, size_t trials, uint64_t seed);

/// Coset probabilities Pr[s, w] by enumeration of stabilizers and classes.
std::array<double, kNumClasses> exact_class_probabilities(const StabilizerCode &code, const NoiseModel &model,
                                                          const BitVec &s);
std::vector<double> exact_l2_diagnosis(const StabilizerCode &code, const DiagnosisScheme &scheme,
                                       const NoiseModel &model, const BitVec &s);
size_t exact_optimal_class(const StabilizerCode &code, const NoiseModel &model, const BitVec &s);

/// exact_l2_diagnosis as a predictor, memoized per syndrome.
class ExactL2Predictor : public Predictor {
   public:
    ExactL2Predictor(const StabilizerCode &code, const DiagnosisScheme &scheme, const NoiseModel &model)
        : code_(code), scheme_(scheme), model_(model) {
    }
    size_t output_size() const override {
        return scheme_.num_labels();
    }
    std::vector<double> predict(const BitVec &s) const override;

   private:
    const StabilizerCode &code_;
    const DiagnosisScheme &scheme_;
    NoiseModel model_;
    mutable std::mutex mu_;
    mutable std::map<std::string, std::vector<double>> cache_;
};

}  // namespace topodecode

#endif
