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

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

using namespace topodecode;

namespace {

struct D3 {
    StabilizerCode code = build_code(Family::surface_rotated, 3);
    DiagnosisScheme uniform = make_scheme(code, uniform_construction(code), "uniform");
    DiagnosisScheme shortd = make_scheme(code, short_construction(code), "short");
};

const D3 &d3() {
    static D3 f;
    return f;
}

std::vector<double> to_real(const BitVec &v) {
    std::vector<double> out(v.size());
    for (size_t i = 0; i < v.size(); i++) {
        out[i] = v.get(i) ? 1.0 : 0.0;
    }
    return out;
}

BitVec from_mask(uint64_t mask, size_t len) {
    BitVec v(len);
    for (size_t i = 0; i < len; i++) {
        v.set(i, mask >> i & 1);
    }
    return v;
}

// Joint Pr[s, class] by walking every Pauli error on the code's qubits.
std::map<std::string, std::array<double, kNumClasses>> brute_class_probabilities(const StabilizerCode &code,
                                                                                 const NoiseModel &model) {
    std::map<std::string, std::array<double, kNumClasses>> out;
    size_t bits = model.kind == NoiseKind::bit_flip ? code.n : 2 * code.n;
    for (uint64_t mask = 0; mask < (uint64_t(1) << bits); mask++) {
        BitVec e = from_mask(mask, 2 * code.n);
        double pr = std::exp(log_prob(model, e));
        BitVec s = syndrome(code, e);
        size_t cls = logical_class(code, e ^ pure_error(code, s));
        auto [it, fresh] = out.try_emplace(s.str(), std::array<double, kNumClasses>{});
        it->second[cls] += pr;
    }
    return out;
}

// Nearest point to column w0 on the set where classes w0 and w1 tie, found by
// least squares over the two remaining directions.
std::vector<double> nearest_tie_point(const std::array<std::vector<double>, kNumClasses> &cols, size_t w0,
                                      size_t w1) {
    size_t g = cols[0].size();
    Eigen::VectorXd mid(g), c0(g);
    for (size_t i = 0; i < g; i++) {
        mid[i] = 0.5 * (cols[w0][i] + cols[w1][i]);
        c0[i] = cols[w0][i];
    }
    Eigen::MatrixXd a(g, 2);
    size_t k = 0;
    for (size_t w = 0; w < kNumClasses; w++) {
        if (w != w0 && w != w1) {
            for (size_t i = 0; i < g; i++) {
                a(i, k) = cols[w][i] - mid[i];
            }
            k++;
        }
    }
    Eigen::VectorXd x = a.colPivHouseholderQr().solve(c0 - mid);
    Eigen::VectorXd p = mid + a * x;
    return {p.data(), p.data() + g};
}

double dist_sq(const std::vector<double> &a, const std::vector<double> &b) {
    double s = 0;
    for (size_t i = 0; i < a.size(); i++) {
        s += (a[i] - b[i]) * (a[i] - b[i]);
    }
    return s;
}

}  // namespace

TEST(DecodeOne, IndicatorPredictionsRecoverClass) {
    CounterRng rng(4, 4);
    for (const DiagnosisScheme *scheme : {&d3().uniform, &d3().shortd}) {
        for (int trial = 0; trial < 50; trial++) {
            BitVec s = from_mask(rng.below(256), 8);
            for (size_t w = 0; w < kNumClasses; w++) {
                BitVec g = faithful_diagnosis(d3().code, *scheme, s, w);
                DecodeOutcome out = decode_prediction(d3().code, *scheme, s, to_real(g));
                EXPECT_EQ(out.chosen_class, w);
                for (size_t v = 0; v < kNumClasses; v++) {
                    EXPECT_NEAR(out.q[v], v == w ? 1.0 : 0.0, 1e-9);
                }
                EXPECT_EQ(out.recovery, pure_error(d3().code, s) ^ class_operator(d3().code, w));
            }
        }
    }
}

TEST(DecodeOne, ZeroPredictionShortSchemeGivesIdentity) {
    BitVec s(8);
    FunctionPredictor zero(d3().shortd.num_labels(), [](const BitVec &) { return std::vector<double>(3, 0.0); });
    DecodeOutcome out = decode_one(d3().code, d3().shortd, zero, s);
    EXPECT_EQ(out.chosen_class, 0u);
    EXPECT_FALSE(out.recovery.any());
    FunctionPredictor wrong(5, [](const BitVec &) { return std::vector<double>(5, 0.0); });
    EXPECT_THROW(decode_one(d3().code, d3().shortd, wrong, s), std::exception);
}

TEST(DecodeOne, QSumsToOne) {
    CounterRng rng(5, 5);
    for (int trial = 0; trial < 500; trial++) {
        BitVec s = from_mask(rng.below(256), 8);
        std::vector<double> gp(d3().uniform.num_labels());
        for (double &v : gp) {
            v = rng.uniform() * 3 - 1;
        }
        auto out = decode_prediction(d3().code, d3().uniform, s, gp);
        EXPECT_NEAR(out.q[0] + out.q[1] + out.q[2] + out.q[3], 1.0, 1e-9);
    }
}

TEST(DecodeOne, PerturbationsBelowMKeepClass) {
    const DiagnosisScheme &scheme = d3().uniform;
    const double M = scheme.metrics.M;
    size_t g = scheme.num_labels();
    CounterRng rng(6, 6);
    for (int trial = 0; trial < 1000; trial++) {
        BitVec s = from_mask(rng.below(256), 8);
        size_t w0 = rng.below(kNumClasses);
        std::vector<double> u(g);
        double norm = 0;
        for (double &v : u) {
            v = rng.normal();
            norm += v * v;
        }
        double scale = std::sqrt(0.999 * M * rng.uniform() / norm);
        std::vector<double> gp = to_real(faithful_diagnosis(d3().code, scheme, s, w0));
        for (size_t i = 0; i < g; i++) {
            gp[i] += scale * u[i];
        }
        EXPECT_EQ(decode_prediction(d3().code, scheme, s, gp).chosen_class, w0);
    }
}

TEST(DecodeOne, PerturbationOfFourMFlipsClass) {
    for (const DiagnosisScheme *scheme : {&d3().uniform, &d3().shortd}) {
        BitVec s(8);
        s.set(3, true);
        std::array<std::vector<double>, kNumClasses> cols;
        for (size_t w = 0; w < kNumClasses; w++) {
            cols[w] = to_real(faithful_diagnosis(d3().code, *scheme, s, w));
        }
        double best = std::numeric_limits<double>::infinity();
        size_t bw0 = 0, bw1 = 0;
        for (size_t w0 = 0; w0 < kNumClasses; w0++) {
            for (size_t w1 = 0; w1 < kNumClasses; w1++) {
                if (w0 != w1) {
                    double dd = dist_sq(cols[w0], nearest_tie_point(cols, w0, w1));
                    if (dd < best) {
                        best = dd;
                        bw0 = w0;
                        bw1 = w1;
                    }
                }
            }
        }
        EXPECT_NEAR(best, scheme->metrics.M, 1e-9);
        auto p = nearest_tie_point(cols, bw0, bw1);
        std::vector<double> gp(cols[bw0].size());
        for (size_t i = 0; i < gp.size(); i++) {
            gp[i] = cols[bw0][i] + 2 * (p[i] - cols[bw0][i]);
        }
        EXPECT_NEAR(dist_sq(gp, cols[bw0]), 4 * scheme->metrics.M, 1e-9);
        EXPECT_NE(decode_prediction(d3().code, *scheme, s, gp).chosen_class, bw0);
    }
}

TEST(IsSuccess, StabilizerAndLogical) {
    NoiseModel model(NoiseKind::depolarizing, 0.2);
    for (uint64_t i = 0; i < 50; i++) {
        BitVec e = sample_error(model, 9, 1, i);
        EXPECT_TRUE(is_success(d3().code, e, e));
        for (size_t r = 0; r < d3().code.hc.rows(); r++) {
            EXPECT_TRUE(is_success(d3().code, e, e ^ d3().code.hc.row(r)));
        }
        EXPECT_FALSE(is_success(d3().code, e, e ^ d3().code.g.row(0)));
        EXPECT_FALSE(is_success(d3().code, e, e ^ d3().code.g.row(1)));
    }
}

TEST(Wilson, KnownIntervals) {
    auto zero = wilson_estimate(0, 100);
    EXPECT_EQ(zero.rate, 0.0);
    EXPECT_NEAR(zero.ci_low, 0.0, 1e-15);
    EXPECT_NEAR(zero.ci_high, 0.036994, 1e-6);
    auto ten = wilson_estimate(10, 100);
    EXPECT_NEAR(ten.ci_low, 0.05523, 1e-5);
    EXPECT_NEAR(ten.ci_high, 0.17437, 1e-5);
}

TEST(LogicalErrorRate, NoiselessIsZero) {
    FunctionPredictor zero(d3().uniform.num_labels(), [&](const BitVec &s) {
        return to_real(faithful_diagnosis(d3().code, d3().uniform, s, 0));
    });
    auto r = logical_error_rate(d3().code, d3().uniform, zero, NoiseModel(NoiseKind::depolarizing, 0.0), 1000, 1);
    EXPECT_EQ(r.failures, 0u);
    EXPECT_EQ(r.trials, 1000u);
}

TEST(LogicalErrorRate, PerfectKnowledgeNeverFails) {
    for (NoiseKind kind : {NoiseKind::bit_flip, NoiseKind::depolarizing}) {
        NoiseModel model(kind, 0.2);
        for (const DiagnosisScheme *scheme : {&d3().uniform, &d3().shortd}) {
            for (uint64_t i = 0; i < 2000; i++) {
                BitVec e = sample_error(model, 9, 3, i);
                BitVec s = syndrome(d3().code, e);
                auto out = decode_prediction(d3().code, *scheme, s, to_real(diagnosis_of(*scheme, e)));
                EXPECT_TRUE(is_success(d3().code, e, out.recovery));
            }
        }
    }
}

TEST(LogicalErrorRate, IndependentOfWorkerSplit) {
    // The same decoder applied serially gives the same failure count.
    NoiseModel model(NoiseKind::bit_flip, 0.1);
    Decoder dec = [](const BitVec &s) { return pure_error(d3().code, s); };
    auto r = logical_error_rate(d3().code, model, 5000, 9, dec);
    size_t fails = 0;
    for (uint64_t i = 0; i < 5000; i++) {
        BitVec e = sample_error(model, 9, 9, i);
        fails += !is_success(d3().code, e, dec(syndrome(d3().code, e)));
    }
    EXPECT_EQ(r.failures, fails);
}

TEST(ExactOracle, ClassProbabilitiesMatchBruteForce) {
    for (NoiseModel model : {NoiseModel(NoiseKind::bit_flip, 0.1), NoiseModel(NoiseKind::depolarizing, 0.15)}) {
        auto brute = brute_class_probabilities(d3().code, model);
        for (uint64_t m = 0; m < 256; m++) {
            BitVec s = from_mask(m, 8);
            auto got = exact_class_probabilities(d3().code, model, s);
            auto it = brute.find(s.str());
            for (size_t w = 0; w < kNumClasses; w++) {
                double want = it == brute.end() ? 0.0 : it->second[w];
                EXPECT_NEAR(got[w], want, 1e-14);
            }
        }
    }
}

TEST(ExactOracle, L2DiagnosisIsPosteriorMixture) {
    NoiseModel model(NoiseKind::depolarizing, 0.15);
    auto brute = brute_class_probabilities(d3().code, model);
    for (const auto &[key, pr] : brute) {
        BitVec s = BitVec::from_string(key);
        double total = pr[0] + pr[1] + pr[2] + pr[3];
        std::vector<double> want(d3().uniform.num_labels(), 0.0);
        std::vector<double> lo(want.size(), 1.0), hi(want.size(), 0.0);
        for (size_t w = 0; w < kNumClasses; w++) {
            auto col = to_real(faithful_diagnosis(d3().code, d3().uniform, s, w));
            for (size_t i = 0; i < want.size(); i++) {
                want[i] += pr[w] / total * col[i];
                lo[i] = std::min(lo[i], col[i]);
                hi[i] = std::max(hi[i], col[i]);
            }
        }
        auto got = exact_l2_diagnosis(d3().code, d3().uniform, model, s);
        for (size_t i = 0; i < want.size(); i++) {
            EXPECT_NEAR(got[i], want[i], 1e-12);
            EXPECT_GE(got[i], lo[i] - 1e-12);
            EXPECT_LE(got[i], hi[i] + 1e-12);
        }
        // The extracted q is the class posterior.
        auto out = decode_prediction(d3().code, d3().uniform, s, got);
        for (size_t w = 0; w < kNumClasses; w++) {
            EXPECT_NEAR(out.q[w], pr[w] / total, 1e-9);
        }
    }
}

TEST(ExactOracle, NoiselessZeroSyndrome) {
    BitVec s(8);
    auto g = exact_l2_diagnosis(d3().code, d3().uniform, NoiseModel(NoiseKind::depolarizing, 0.0), s);
    EXPECT_EQ(g, to_real(faithful_diagnosis(d3().code, d3().uniform, s, 0)));
    EXPECT_EQ(exact_optimal_class(d3().code, NoiseModel(NoiseKind::bit_flip, 0.1), s), 0u);
}

TEST(ExactOracle, L2PipelineMatchesOptimalOnEverySyndrome) {
    for (NoiseModel model : {NoiseModel(NoiseKind::bit_flip, 0.1), NoiseModel(NoiseKind::depolarizing, 0.15)}) {
        for (const DiagnosisScheme *scheme : {&d3().uniform, &d3().shortd}) {
            for (uint64_t m = 0; m < 256; m++) {
                BitVec s = from_mask(m, 8);
                auto pr = exact_class_probabilities(d3().code, model, s);
                if (pr[0] + pr[1] + pr[2] + pr[3] == 0) {
                    continue;
                }
                auto gp = exact_l2_diagnosis(d3().code, *scheme, model, s);
                EXPECT_EQ(decode_prediction(d3().code, *scheme, s, gp).chosen_class,
                          exact_optimal_class(d3().code, model, s))
                    << s.str();
            }
        }
    }
}

TEST(ExactOracle, TinyNoisePicksMinimumWeightClass) {
    NoiseModel model(NoiseKind::depolarizing, 1e-4);
    std::map<std::string, std::array<size_t, kNumClasses>> best;
    for (uint64_t mask = 0; mask < (1u << 18); mask++) {
        BitVec e = from_mask(mask, 18);
        BitVec s = syndrome(d3().code, e);
        size_t cls = logical_class(d3().code, e ^ pure_error(d3().code, s));
        std::array<size_t, kNumClasses> none;
        none.fill(SIZE_MAX);
        auto &b = best.try_emplace(s.str(), none).first->second;
        b[cls] = std::min(b[cls], pauli_weight(e));
    }
    ASSERT_EQ(best.size(), 256u);
    size_t decided = 0;
    for (const auto &[key, b] : best) {
        size_t argmin = std::min_element(b.begin(), b.end()) - b.begin();
        if (std::count(b.begin(), b.end(), b[argmin]) > 1) {
            continue;  // degenerate minimum weight; the leading term does not decide
        }
        decided++;
        EXPECT_EQ(exact_optimal_class(d3().code, model, BitVec::from_string(key)), argmin) << key;
    }
    EXPECT_GT(decided, 50u);
}

TEST(ExactOracle, Errors) {
    StabilizerCode big = build_code(Family::surface_rotated, 5);
    EXPECT_THROW(exact_optimal_class(big, NoiseModel(NoiseKind::bit_flip, 0.1), BitVec(big.num_checks())), TooLarge);
    size_t xrow = 0;
    while (d3().code.stabilizers[xrow].type != 'X') {
        xrow++;
    }
    BitVec s(8);
    s.set(xrow, true);  // only Z errors trip an X check
    EXPECT_THROW(exact_optimal_class(d3().code, NoiseModel(NoiseKind::bit_flip, 0.1), s), UnreachableSyndrome);
}

TEST(ExactOracle, PipelineRateMatchesOptimalRate) {
    NoiseModel model(NoiseKind::bit_flip, 0.1);
    auto brute = brute_class_probabilities(d3().code, model);
    double optimal_failure = 1.0;
    for (const auto &[key, pr] : brute) {
        optimal_failure -= *std::max_element(pr.begin(), pr.end());
    }
    ExactL2Predictor oracle(d3().code, d3().uniform, model);
    auto r = logical_error_rate(d3().code, d3().uniform, oracle, model, 100000, 1);
    EXPECT_LE(r.ci_low, optimal_failure);
    EXPECT_GE(r.ci_high, optimal_failure);
}

TEST(Invariance, PureErrorAndLogicalChoice) {
    StabilizerCode alt = d3().code;
    for (size_t j = 0; j < alt.t_columns.size(); j++) {
        alt.t_columns[j] ^= j % 2 ? alt.g.row(0) : alt.hc.row(j % alt.hc.rows());
        for (size_t i = 0; i < 2 * alt.n; i++) {
            alt.t.set(i, j, alt.t_columns[j].get(i));
        }
    }
    alt.g.row(0) ^= alt.hc.row(1);
    alt.g.row(1) ^= alt.hc.row(2);
    for (size_t c = 0; c < kNumClasses; c++) {
        alt.logicals_by_class[c] = class_operator(alt, c);
    }
    ASSERT_EQ(check_code_invariants(alt), "");
    DiagnosisScheme alt_scheme = make_scheme(alt, d3().uniform.hg, "uniform");
    NoiseModel model(NoiseKind::depolarizing, 0.15);
    ExactL2Predictor a(d3().code, d3().uniform, model), b(alt, alt_scheme, model);
    // Exactly tied cosets are broken by class index, and relabeling moves the
    // index, so only untied syndromes must agree.
    size_t compared = 0, tied = 0;
    for (uint64_t i = 0; i < 3000; i++) {
        BitVec e = sample_error(model, 9, 17, i);
        BitVec s = syndrome(d3().code, e);
        auto pr = exact_class_probabilities(d3().code, model, s);
        std::sort(pr.begin(), pr.end());
        if (pr[3] - pr[2] <= 1e-9 * pr[3]) {
            tied++;
            continue;
        }
        compared++;
        bool ok_a = is_success(d3().code, e, decode_one(d3().code, d3().uniform, a, s).recovery);
        bool ok_b = is_success(alt, e, decode_one(alt, alt_scheme, b, s).recovery);
        EXPECT_EQ(ok_a, ok_b) << s.str();
    }
    EXPECT_GT(compared, 2500u);
    EXPECT_GT(tied, 0u);
}
