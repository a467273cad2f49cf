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

#ifndef TOPODECODE_DATASET_H
#define TOPODECODE_DATASET_H

#include <cstdint>
#include <string>
#include <vector>

#include "topodecode/codes.h"
#include "topodecode/diagnosis.h"
#include "topodecode/noise.h"

namespace topodecode {

struct VersionMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct CorruptPayload : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr uint32_t kDatasetFormatVersion = 1;

struct TrainingSample {
    BitVec s;
    BitVec g;
};

struct DatasetHeader {
    uint32_t format_version = kDatasetFormatVersion;
    std::string family;
    size_t d = 0;
    NoiseModel noise;
    uint64_t scheme_id = 0;
    size_t count = 0;
    uint64_t seed = 0;
    size_t syndrome_bits = 0;
    size_t label_bits = 0;

    bool operator==(const DatasetHeader &o) const;
};

/// Samples packed as little-endian 64-bit words: each sample holds its
/// syndrome words followed by its label words.
class Dataset {
   public:
    Dataset() = default;
    explicit Dataset(DatasetHeader header);

    const DatasetHeader &header() const {
        return header_;
    }
    size_t size() const {
        return header_.count;
    }
    size_t syndrome_words() const {
        return (header_.syndrome_bits + 63) / 64;
    }
    size_t label_words() const {
        return (header_.label_bits + 63) / 64;
    }
    size_t stride() const {
        return syndrome_words() + label_words();
    }

    TrainingSample sample(size_t i) const;
    void set_sample(size_t i, const BitVec &s, const BitVec &g);
    bool syndrome_bit(size_t i, size_t b) const;
    bool label_bit(size_t i, size_t b) const;

    const std::vector<uint64_t> &payload() const {
        return words_;
    }
    std::vector<uint64_t> &payload() {
        return words_;
    }
    bool operator==(const Dataset &o) const {
        return header_ == o.header_ && words_ == o.words_;
    }

   private:
    DatasetHeader header_;
    std::vector<uint64_t> words_;
};

Dataset generate_dataset(
    const StabilizerCode &code, const DiagnosisScheme &scheme, const NoiseModel &model, size_t count, uint64_t seed);

void write_dataset(const Dataset &ds, const std::string &path);
Dataset read_dataset(const std::string &path);

}  // namespace topodecode

#endif
