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

#include "topodecode/diagnosis.h"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

using namespace topodecode;

namespace {

const Family kFamilies[] = {Family::surface_unrotated, Family::surface_rotated, Family::color_488,
                            Family::color_666};

const StabilizerCode &cached_code(Family f, size_t d) {
    static std::map<std::pair<Family, size_t>, StabilizerCode> cache;
    auto key = std::make_pair(f, d);
    auto it = cache.find(key);
    if (it == cache.end()) {
        it = cache.emplace(key, build_code(f, d)).first;
    }
    return it->second;
}

// Squared distance from point a to {mid + b3 (c3 - mid) + b4 (c4 - mid)},
// solved through the 2x2 normal equations by Cramer's rule.
double plane_distance(const std::vector<double> &a, const std::vector<double> &mid, const std::vector<double> &c3,
                      const std::vector<double> &c4) {
    size_t n = a.size();
    std::vector<double> u(n), v(n), r(n);
    for (size_t i = 0; i < n; i++) {
        u[i] = c3[i] - mid[i];
        v[i] = c4[i] - mid[i];
        r[i] = a[i] - mid[i];
    }
    auto dot = [&](const std::vector<double> &x, const std::vector<double> &y) {
        double s = 0;
        for (size_t i = 0; i < n; i++) {
            s += x[i] * y[i];
        }
        return s;
    };
    double uu = dot(u, u), uv = dot(u, v), vv = dot(v, v), ur = dot(u, r), vr = dot(v, r);
    double det = uu * vv - uv * uv;
    double b3 = (ur * vv - vr * uv) / det;
    double b4 = (uu * vr - uv * ur) / det;
    double s = 0;
    for (size_t i = 0; i < n; i++) {
        double e = r[i] - b3 * u[i] - b4 * v[i];
        s += e * e;
    }
    return s;
}

double oracle_boundary_distance(const std::vector<std::vector<double>> &cols) {
    double best = 1e300;
    for (size_t w = 0; w < 4; w++) {
        for (size_t w2 = 0; w2 < 4; w2++) {
            if (w == w2) {
                continue;
            }
            std::vector<size_t> others;
            for (size_t k = 0; k < 4; k++) {
                if (k != w && k != w2) {
                    others.push_back(k);
                }
            }
            std::vector<double> mid(cols[w].size());
            for (size_t i = 0; i < mid.size(); i++) {
                mid[i] = 0.5 * (cols[w][i] + cols[w2][i]);
            }
            best = std::min(best, plane_distance(cols[w], mid, cols[others[0]], cols[others[1]]));
        }
    }
    return best;
}

std::vector<std::vector<double>> columns_of(const DiagnosisScheme &s) {
    std::vector<std::vector<double>> cols(4, std::vector<double>(s.num_labels()));
    for (size_t w = 0; w < 4; w++) {
        for (size_t i = 0; i < s.num_labels(); i++) {
            cols[w][i] = s.d(i, w);
        }
    }
    return cols;
}

}  // namespace

TEST(Faithful, StabilizersAloneAreNot) {
    const auto &code = cached_code(Family::surface_rotated, 3);
    EXPECT_FALSE(is_faithful(code, code.hc));
    EXPECT_FALSE(is_decomposable(code, code.hc));
    EXPECT_THROW(is_faithful(code, BitMatrix(2, 10)), ContractViolation);
}

TEST(Faithful, DuplicatedLogicalIsNotDecomposable) {
    const auto &code = cached_code(Family::surface_rotated, 3);
    BitMatrix hg(0, 18);
    hg.append_row(code.g.row(0));
    hg.append_row(code.g.row(0));
    EXPECT_FALSE(is_decomposable(code, hg));
}

TEST(ShortConstruction, ThreeRowsFaithfulDecomposable) {
    for (Family f : kFamilies) {
        for (size_t d : {3, 5}) {
            const auto &code = cached_code(f, d);
            BitMatrix hg = short_construction(code);
            ASSERT_EQ(hg.rows(), 3u);
            EXPECT_TRUE(is_faithful(code, hg)) << family_name(f);
            EXPECT_TRUE(is_decomposable(code, hg)) << family_name(f);
            for (size_t r = 0; r < 3; r++) {
                EXPECT_EQ(logical_class(code, hg.row(r)), r + 1);
                EXPECT_GE(pauli_weight(hg.row(r)), d);
            }
        }
    }
}

TEST(ShortConstruction, BoundaryDistanceIsOneHalf) {
    const auto &code = cached_code(Family::surface_rotated, 3);
    DiagnosisScheme s = make_scheme(code, short_construction(code), "short");
    ASSERT_TRUE(s.decomposable);
    auto cols = columns_of(s);
    EXPECT_NEAR(oracle_boundary_distance(cols), 0.5, 1e-12);
    EXPECT_NEAR(boundary_distance(s), 0.5, 1e-12);
    EXPECT_NEAR(normalized_sensitivity(s), (double)sensitivity(s.hg) / 0.5, 1e-9);
}

TEST(ShortConstruction, DiagnosisOfLogicalIsPairwiseProducts) {
    const auto &code = cached_code(Family::surface_rotated, 3);
    DiagnosisScheme s = make_scheme(code, short_construction(code), "short");
    BitVec l10 = s.hg.row(1);
    BitVec g = diagnosis_of(s, l10);
    EXPECT_EQ(g.get(0), symplectic_product(s.hg.row(0), l10));
    EXPECT_FALSE(g.get(1));
    EXPECT_EQ(g.get(2), symplectic_product(s.hg.row(2), l10));
    EXPECT_FALSE(diagnosis_of(s, BitVec(18)).any());
}

TEST(BoundaryDistance, DuplicatingRowsDoublesIt) {
    const auto &code = cached_code(Family::surface_rotated, 5);
    for (const char *kind : {"short", "uniform"}) {
        BitMatrix hg = std::string(kind) == "short" ? short_construction(code) : uniform_construction(code);
        BitMatrix twice = hg.stacked(hg);
        DiagnosisScheme a = make_scheme(code, hg), b = make_scheme(code, twice);
        EXPECT_NEAR(b.metrics.M, 2 * a.metrics.M, 1e-9) << kind;
        EXPECT_EQ(b.metrics.m, 2 * a.metrics.m);
    }
}

TEST(BoundaryDistance, MatchesCramerOracleOnUniformSchemes) {
    for (Family f : kFamilies) {
        const auto &code = cached_code(f, 3);
        DiagnosisScheme s = make_scheme(code, uniform_construction(code), "uniform");
        ASSERT_TRUE(s.decomposable);
        EXPECT_NEAR(boundary_distance(s), oracle_boundary_distance(columns_of(s)), 1e-9) << family_name(f);
    }
}

TEST(BoundaryDistance, InvariantUnderSigmaDelta) {
    const auto &code = cached_code(Family::surface_rotated, 5);
    DiagnosisScheme s = make_scheme(code, uniform_construction(code), "uniform");
    auto cols = columns_of(s);
    std::mt19937 rng(4);
    for (int trial = 0; trial < 20; trial++) {
        BitVec delta(s.num_labels());
        for (size_t i = 0; i < delta.size(); i++) {
            delta.set(i, rng() & 1);
        }
        auto moved = cols;
        for (auto &c : moved) {
            c = sigma_delta(delta, c);
        }
        EXPECT_NEAR(oracle_boundary_distance(moved), s.metrics.M, 1e-9);
    }
}

TEST(SigmaDelta, InvolutoryAndIsometric) {
    std::mt19937 rng(2);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 100; trial++) {
        size_t n = 1 + rng() % 12;
        BitVec delta(n);
        std::vector<double> u(n), v(n);
        for (size_t i = 0; i < n; i++) {
            delta.set(i, rng() & 1);
            u[i] = nd(rng);
            v[i] = nd(rng);
        }
        auto su = sigma_delta(delta, u), sv = sigma_delta(delta, v);
        auto back = sigma_delta(delta, su);
        double d0 = 0, d1 = 0;
        for (size_t i = 0; i < n; i++) {
            EXPECT_NEAR(back[i], u[i], 1e-12);
            d0 += (u[i] - v[i]) * (u[i] - v[i]);
            d1 += (su[i] - sv[i]) * (su[i] - sv[i]);
        }
        EXPECT_NEAR(d0, d1, 1e-9);
    }
}

TEST(Sensitivity, CheckMatrices) {
    EXPECT_EQ(sensitivity(BitMatrix(3, 10)), 0u);
    for (Family f : kFamilies) {
        const auto &code = cached_code(f, 5);
        EXPECT_EQ(sensitivity(code.hc), is_surface(f) ? 2u : 3u) << family_name(f);
    }
}

TEST(UniformConstruction, RowCountsAndLogicality) {
    for (Family f : kFamilies) {
        for (size_t d : {3, 5}) {
            const auto &code = cached_code(f, d);
            BitMatrix hg = uniform_construction(code);
            size_t expected = is_surface(f) ? 3 * d : f == Family::color_488 ? 6 * (d + 1) : 9 * (d + 1) / 2;
            EXPECT_EQ(hg.rows(), expected) << family_name(f) << " d=" << d;
            for (size_t r = 0; r < hg.rows(); r++) {
                EXPECT_FALSE(syndrome(code, hg.row(r)).any());
                EXPECT_NE(logical_class(code, hg.row(r)), 0u);
            }
            EXPECT_TRUE(is_faithful(code, hg));
            EXPECT_TRUE(is_decomposable(code, hg));
        }
    }
}

TEST(UniformConstruction, SensitivityConstantAndBoundaryGrows) {
    for (Family f : kFamilies) {
        std::vector<DiagnosisScheme> schemes;
        for (size_t d : {3, 5, 7, 9}) {
            const auto &code = cached_code(f, d);
            schemes.push_back(make_scheme(code, uniform_construction(code), "uniform"));
        }
        for (size_t i = 0; i < schemes.size(); i++) {
            size_t d = 3 + 2 * i;
            EXPECT_EQ(schemes[i].metrics.m, schemes[0].metrics.m) << family_name(f);
            if (i > 0) {
                EXPECT_GE(schemes[i].metrics.M, schemes[i - 1].metrics.M - 1e-9);
                // M grows by the same step each time d grows by 2.
                double step = schemes[1].metrics.M - schemes[0].metrics.M;
                EXPECT_GT(step, 0.0);
                EXPECT_NEAR(schemes[i].metrics.M - schemes[i - 1].metrics.M, step, 1e-9) << family_name(f);
            }
            const auto &code = cached_code(f, d);
            EXPECT_GE(schemes[i].metrics.N, 2.0 * (double)d / (double)code.n - 1e-12);
        }
        EXPECT_LT(schemes[2].metrics.N, schemes[0].metrics.N) << family_name(f);
        EXPECT_GE(schemes[2].metrics.M / schemes[0].metrics.M, 1.5) << family_name(f);
    }
}

TEST(MakeScheme, DInverseAndColumns) {
    for (Family f : kFamilies) {
        const auto &code = cached_code(f, 3);
        DiagnosisScheme s = make_scheme(code, uniform_construction(code), "uniform");
        EXPECT_LT((s.d_inv * s.d).max_abs_diff(RealMatrix::identity(4)), 1e-9);
        for (size_t w = 0; w < 4; w++) {
            BitVec g = s.hg_lambda.apply(class_operator(code, w));
            for (size_t i = 0; i < s.num_labels(); i++) {
                EXPECT_EQ(s.d(i, w), g.get(i) ? 1.0 : 0.0);
            }
            EXPECT_EQ(s.d(s.num_labels(), w), 1.0);
        }
        // Columns are pairwise distinct.
        for (size_t a = 0; a < 4; a++) {
            for (size_t b = a + 1; b < 4; b++) {
                bool same = true;
                for (size_t i = 0; i < s.num_labels(); i++) {
                    same &= s.d(i, a) == s.d(i, b);
                }
                EXPECT_FALSE(same);
            }
        }
    }
}

TEST(DiagnosisOf, DependsOnlyOnSyndromeAndClass) {
    std::mt19937 rng(6);
    for (Family f : kFamilies) {
        const auto &code = cached_code(f, 5);
        DiagnosisScheme s = make_scheme(code, uniform_construction(code), "uniform");
        for (int trial = 0; trial < 50; trial++) {
            BitVec e(2 * code.n), l(2 * code.n);
            for (size_t i = 0; i < 2 * code.n; i++) {
                e.set(i, rng() % 5 == 0);
            }
            for (size_t r = 0; r < code.hc.rows(); r++) {
                if (rng() & 1) {
                    l ^= code.hc.row(r);
                }
            }
            EXPECT_EQ(diagnosis_of(s, e ^ l), diagnosis_of(s, e));
            BitVec t = pure_error(code, syndrome(code, e));
            size_t w = logical_class(code, e ^ t);
            EXPECT_EQ(diagnosis_of(s, e), s.hg_lambda.apply(t ^ class_operator(code, w)));
        }
    }
}

TEST(DiagnosisOf, LengthMismatch) {
    const auto &code = cached_code(Family::surface_rotated, 3);
    DiagnosisScheme s = make_scheme(code, short_construction(code));
    EXPECT_THROW(diagnosis_of(s, BitVec(4)), ContractViolation);
}
