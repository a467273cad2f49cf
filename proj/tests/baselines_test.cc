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

#include "topodecode/baselines.h"

#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "topodecode/decode.h"

using namespace topodecode;

namespace {

const StabilizerCode &rot(size_t d) {
    static std::map<size_t, StabilizerCode> cache;
    auto it = cache.find(d);
    if (it == cache.end()) {
        it = cache.emplace(d, build_code(Family::surface_rotated, d)).first;
    }
    return it->second;
}

BitVec from_mask(uint64_t mask, size_t len) {
    BitVec v(len);
    for (size_t i = 0; i < len; i++) {
        v.set(i, mask >> i & 1);
    }
    return v;
}

size_t x_weight(const BitVec &e, size_t n) {
    return e.slice(0, n).popcount();
}

size_t z_weight(const BitVec &e, size_t n) {
    return e.slice(n, n).popcount();
}

}  // namespace

TEST(MdDecode, ZeroSyndrome) {
    EXPECT_FALSE(md_decode(rot(3), NoiseModel(NoiseKind::bit_flip, 0.1), BitVec(8)).any());
}

TEST(MdDecode, SingleXError) {
    NoiseModel model(NoiseKind::bit_flip, 0.1);
    for (size_t q = 0; q < 9; q++) {
        BitVec e(18);
        e.set(q, true);
        BitVec s = syndrome(rot(3), e);
        BitVec got = md_decode(rot(3), model, s);
        EXPECT_EQ(pauli_weight(got), 1u);
        EXPECT_EQ(z_weight(got, 9), 0u);
        EXPECT_EQ(syndrome(rot(3), got), s);
    }
}

TEST(MdDecode, MatchesFullEnumeration) {
    // For depolarizing noise every minimum-weight error is equally likely, so
    // the expected answer is the lexicographically smallest of them.
    NoiseModel model(NoiseKind::depolarizing, 0.1);
    std::map<std::string, BitVec> best;
    for (uint64_t mask = 0; mask < (1u << 18); mask++) {
        BitVec e = from_mask(mask, 18);
        std::string key = syndrome(rot(3), e).str();
        auto it = best.find(key);
        if (it == best.end()) {
            best.emplace(key, e);
        } else {
            size_t we = pauli_weight(e), wb = pauli_weight(it->second);
            if (we < wb || (we == wb && e.lex_less(it->second))) {
                it->second = e;
            }
        }
    }
    ASSERT_EQ(best.size(), 256u);
    for (const auto &[key, want] : best) {
        BitVec got = md_decode(rot(3), model, BitVec::from_string(key));
        EXPECT_EQ(pauli_weight(got), pauli_weight(want)) << key;
        EXPECT_EQ(got, want) << key;
    }
}

TEST(MdDecode, BitFlipPrefersFiniteProbability) {
    // Under bit_flip a solution with a Z component has probability zero, so
    // an X-only solution wins whenever one exists.
    NoiseModel model(NoiseKind::bit_flip, 0.1);
    for (uint64_t mask = 0; mask < (1u << 9); mask++) {
        BitVec e = from_mask(mask, 18);
        BitVec got = md_decode(rot(3), model, syndrome(rot(3), e));
        EXPECT_EQ(z_weight(got, 9), 0u);
        EXPECT_LE(pauli_weight(got), pauli_weight(e));
    }
}

TEST(MdDecode, NeverHeavierThanSampledError) {
    NoiseModel model(NoiseKind::depolarizing, 0.15);
    const StabilizerCode &code = rot(5);
    for (uint64_t i = 0; i < 1000; i++) {
        BitVec e = sample_error(model, code.n, 8, i);
        BitVec s = syndrome(code, e);
        BitVec got = md_decode(code, model, s);
        EXPECT_EQ(syndrome(code, got), s);
        EXPECT_LE(pauli_weight(got), pauli_weight(e));
    }
}

TEST(MdDecode, BoundExceeded) {
    BitVec e(18);
    e.set(0, true);
    e.set(8, true);
    BitVec s = syndrome(rot(3), e);
    EXPECT_THROW(md_decode(rot(3), NoiseModel(NoiseKind::bit_flip, 0.1), s, 1), BoundExceeded);
}

TEST(Mwpm, ZeroSyndrome) {
    EXPECT_FALSE(mwpm_decode(rot(5), BitVec(rot(5).num_checks())).any());
}

TEST(Mwpm, AdjacentDefectsMatchTogether) {
    const StabilizerCode &code = rot(5);
    BitVec e(2 * code.n);
    e.set(12, true);  // centre qubit
    BitVec s = syndrome(code, e);
    EXPECT_EQ(s.popcount(), 2u);
    DefectGraph g = defect_graph(code, s, 'Z');
    ASSERT_EQ(g.defects.size(), 2u);
    EXPECT_EQ(g.cost[0][1], 1u);
    EXPECT_GT(g.boundary_cost[0] + g.boundary_cost[1], 1u);
    Matching m = min_weight_matching(g);
    ASSERT_EQ(m.pairs.size(), 1u);
    EXPECT_NE(m.pairs[0].second, -1);
    EXPECT_EQ(m.cost, 1u);
    EXPECT_EQ(mwpm_decode(code, s), e);
}

TEST(Mwpm, GraphCostsSymmetricAndPathsConsistent) {
    NoiseModel model(NoiseKind::depolarizing, 0.2);
    const StabilizerCode &code = rot(5);
    for (uint64_t i = 0; i < 200; i++) {
        BitVec s = syndrome(code, sample_error(model, code.n, 4, i));
        for (char type : {'X', 'Z'}) {
            DefectGraph g = defect_graph(code, s, type);
            for (size_t a = 0; a < g.defects.size(); a++) {
                EXPECT_EQ(g.boundary_path[a].size(), g.boundary_cost[a]);
                for (size_t b = 0; b < g.defects.size(); b++) {
                    EXPECT_EQ(g.cost[a][b], g.cost[b][a]);
                    EXPECT_EQ(g.path[a][b].size(), g.cost[a][b]);
                }
            }
        }
    }
}

TEST(Mwpm, CostEqualsRecoveryWeightAndMinimumPerType) {
    for (size_t d : {3, 5}) {
        const StabilizerCode &code = rot(d);
        NoiseModel model(NoiseKind::depolarizing, 0.15);
        NoiseModel xonly(NoiseKind::bit_flip, 0.1);
        for (uint64_t i = 0; i < 300; i++) {
            BitVec e = sample_error(model, code.n, 21, i);
            BitVec s = syndrome(code, e);
            MwpmResult r = mwpm_decode_detailed(code, s);
            EXPECT_EQ(syndrome(code, r.recovery), s);
            EXPECT_EQ(r.cost_x, x_weight(r.recovery, code.n));
            EXPECT_EQ(r.cost_z, z_weight(r.recovery, code.n));
            // Independent minimum for the X part: the lightest X-only error
            // reproducing the Z-check bits.
            BitVec ex = e;
            for (size_t q = 0; q < code.n; q++) {
                ex.set(code.n + q, false);
            }
            BitVec md_x = md_decode(code, xonly, syndrome(code, ex));
            EXPECT_EQ(r.cost_x, pauli_weight(md_x));
        }
    }
}

TEST(Mwpm, TooManyDefects) {
    const StabilizerCode &code = rot(5);
    BitVec e(2 * code.n);
    for (size_t q : {0, 2, 10, 12, 14, 22, 24}) {
        e.set(q, true);
    }
    BitVec s = syndrome(code, e);
    EXPECT_THROW(mwpm_decode(code, s, 3), TooManyDefects);
    EXPECT_NO_THROW(mwpm_decode(code, s));
}

TEST(Mwpm, AgreesWithMdUnderBitFlip) {
    const StabilizerCode &code = rot(3);
    NoiseModel model(NoiseKind::bit_flip, 0.1);
    auto mw = logical_error_rate(code, model, 20000, 5, [&](const BitVec &s) { return mwpm_decode(code, s); });
    auto md = logical_error_rate(code, model, 20000, 5, [&](const BitVec &s) { return md_decode(code, model, s); });
    EXPECT_LE(mw.ci_low, md.ci_high);
    EXPECT_LE(md.ci_low, mw.ci_high);
}

TEST(Reconstruct, FullDiagnosisRecoversError) {
    const StabilizerCode &code = rot(3);
    BitMatrix hg = BitMatrix::lambda(code.n);
    EXPECT_EQ(gf2_rank(code.hc.stacked(hg)), 2 * code.n);
    NoiseModel model(NoiseKind::depolarizing, 0.3);
    for (uint64_t i = 0; i < 1000; i++) {
        BitVec e = sample_error(model, code.n, 30, i);
        auto got = reconstruct_error(code, hg, syndrome(code, e), hg.times_lambda().apply(e));
        ASSERT_TRUE(got.has_value());
        EXPECT_EQ(*got, e);
    }
    // A deficient H_g leaves the error undetermined.
    BitMatrix logicals = code.g;
    EXPECT_LT(gf2_rank(code.hc.stacked(logicals)), 2 * code.n);
}
