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

#include "topodecode/dataset.h"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace topodecode;

namespace {

struct Fixture {
    StabilizerCode code = build_code(Family::surface_rotated, 3);
    DiagnosisScheme scheme = make_scheme(code, uniform_construction(code), "uniform");
};

const Fixture &fx() {
    static Fixture f;
    return f;
}

std::string temp_path(const std::string &name) {
    return (std::filesystem::temp_directory_path() / ("topodecode_" + name)).string();
}

std::vector<char> slurp(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST(GenerateDataset, EmptyAndNoiseless) {
    Dataset empty = generate_dataset(fx().code, fx().scheme, NoiseModel(NoiseKind::bit_flip, 0.1), 0, 1);
    EXPECT_EQ(empty.size(), 0u);
    EXPECT_EQ(empty.header().label_bits, 9u);
    Dataset clean = generate_dataset(fx().code, fx().scheme, NoiseModel(NoiseKind::depolarizing, 0.0), 100, 1);
    for (size_t i = 0; i < clean.size(); i++) {
        auto t = clean.sample(i);
        EXPECT_FALSE(t.s.any());
        EXPECT_FALSE(t.g.any());
    }
}

TEST(GenerateDataset, ZeroSyndromeFrequency) {
    const double p = 0.1;
    NoiseModel model(NoiseKind::bit_flip, p);
    // Exact Pr[s = 0] by enumerating all X errors on 9 qubits.
    double exact = 0;
    for (uint32_t mask = 0; mask < (1u << 9); mask++) {
        BitVec e(18);
        for (size_t q = 0; q < 9; q++) {
            e.set(q, mask >> q & 1);
        }
        if (!syndrome(fx().code, e).any()) {
            exact += std::exp(log_prob(model, e));
        }
    }
    EXPECT_GT(exact, std::pow(1 - p, 9));
    const size_t count = 10000;
    Dataset ds = generate_dataset(fx().code, fx().scheme, model, count, 42);
    size_t zeros = 0;
    for (size_t i = 0; i < count; i++) {
        zeros += !ds.sample(i).s.any();
    }
    double sigma = std::sqrt(exact * (1 - exact) / count);
    EXPECT_NEAR((double)zeros / count, exact, 3 * sigma);
}

TEST(GenerateDataset, LabelsMatchRegeneratedErrors) {
    NoiseModel model(NoiseKind::depolarizing, 0.15);
    Dataset ds = generate_dataset(fx().code, fx().scheme, model, 1000, 7);
    for (size_t i = 0; i < ds.size(); i++) {
        BitVec e = sample_error(model, fx().code.n, 7, i);
        auto t = ds.sample(i);
        EXPECT_EQ(t.s, syndrome(fx().code, e));
        EXPECT_EQ(t.g, diagnosis_of(fx().scheme, e));
        for (size_t b = 0; b < t.s.size(); b++) {
            EXPECT_EQ(ds.syndrome_bit(i, b), t.s.get(b));
        }
        for (size_t b = 0; b < t.g.size(); b++) {
            EXPECT_EQ(ds.label_bit(i, b), t.g.get(b));
        }
    }
}

TEST(DatasetFile, RoundTripAndDeterminism) {
    NoiseModel model(NoiseKind::bit_flip, 0.1);
    std::string a = temp_path("a.qds"), b = temp_path("b.qds");
    Dataset ds = generate_dataset(fx().code, fx().scheme, model, 500, 3);
    write_dataset(ds, a);
    write_dataset(generate_dataset(fx().code, fx().scheme, model, 500, 3), b);
    EXPECT_EQ(slurp(a), slurp(b));
    Dataset back = read_dataset(a);
    EXPECT_TRUE(back == ds);
    EXPECT_EQ(back.header().scheme_id, fx().scheme.id());
    EXPECT_EQ(back.header().family, "surface_rotated");
    std::filesystem::remove(a);
    std::filesystem::remove(b);
}

TEST(DatasetFile, HeaderOnlyEmptyDataset) {
    std::string path = temp_path("empty.qds");
    write_dataset(generate_dataset(fx().code, fx().scheme, NoiseModel(NoiseKind::bit_flip, 0.1), 0, 1), path);
    Dataset back = read_dataset(path);
    EXPECT_EQ(back.size(), 0u);
    std::filesystem::remove(path);
}

TEST(DatasetFile, TruncatedIsCorrupt) {
    std::string path = temp_path("trunc.qds");
    write_dataset(generate_dataset(fx().code, fx().scheme, NoiseModel(NoiseKind::bit_flip, 0.1), 100, 1), path);
    auto bytes = slurp(path);
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out.write(bytes.data(), (std::streamsize)(bytes.size() - 5));
    }
    EXPECT_THROW(read_dataset(path), CorruptPayload);
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out.write("junk", 4);
    }
    EXPECT_THROW(read_dataset(path), CorruptPayload);
    std::filesystem::remove(path);
}

TEST(DatasetFile, VersionMismatch) {
    std::string path = temp_path("ver.qds");
    write_dataset(generate_dataset(fx().code, fx().scheme, NoiseModel(NoiseKind::bit_flip, 0.1), 10, 1), path);
    auto bytes = slurp(path);
    bytes[4] = 9;  // low byte of the version word
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out.write(bytes.data(), (std::streamsize)bytes.size());
    }
    EXPECT_THROW(read_dataset(path), VersionMismatch);
    std::filesystem::remove(path);
}
