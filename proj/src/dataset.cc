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

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "topodecode/parallel.h"

namespace topodecode {

namespace {

constexpr char kMagic[4] = {'Q', 'D', 'S', '\0'};

void put_u32(std::ostream &out, uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; i++) {
        b[i] = (unsigned char)(v >> (8 * i));
    }
    out.write((const char *)b, 4);
}

void put_u64(std::ostream &out, uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; i++) {
        b[i] = (unsigned char)(v >> (8 * i));
    }
    out.write((const char *)b, 8);
}

uint64_t load_u64(const unsigned char *b, size_t len) {
    uint64_t v = 0;
    for (size_t i = 0; i < len; i++) {
        v |= (uint64_t)b[i] << (8 * i);
    }
    return v;
}

std::string hex64(uint64_t v) {
    std::ostringstream s;
    s << std::hex << v;
    return s.str();
}

}  // namespace

bool DatasetHeader::operator==(const DatasetHeader &o) const {
    return format_version == o.format_version && family == o.family && d == o.d && noise.kind == o.noise.kind &&
           noise.p == o.noise.p && scheme_id == o.scheme_id && count == o.count && seed == o.seed &&
           syndrome_bits == o.syndrome_bits && label_bits == o.label_bits;
}

Dataset::Dataset(DatasetHeader header) : header_(std::move(header)), words_(header_.count * stride(), 0) {
}

TrainingSample Dataset::sample(size_t i) const {
    if (i >= size()) {
        throw ContractViolation("sample index out of range");
    }
    TrainingSample t{BitVec(header_.syndrome_bits), BitVec(header_.label_bits)};
    const uint64_t *base = words_.data() + i * stride();
    std::memcpy(t.s.words(), base, syndrome_words() * 8);
    std::memcpy(t.g.words(), base + syndrome_words(), label_words() * 8);
    return t;
}

void Dataset::set_sample(size_t i, const BitVec &s, const BitVec &g) {
    if (i >= size() || s.size() != header_.syndrome_bits || g.size() != header_.label_bits) {
        throw ContractViolation("set_sample: index or length mismatch");
    }
    uint64_t *base = words_.data() + i * stride();
    std::memcpy(base, s.words(), syndrome_words() * 8);
    std::memcpy(base + syndrome_words(), g.words(), label_words() * 8);
}

bool Dataset::syndrome_bit(size_t i, size_t b) const {
    return (words_[i * stride() + (b >> 6)] >> (b & 63)) & 1;
}

bool Dataset::label_bit(size_t i, size_t b) const {
    return (words_[i * stride() + syndrome_words() + (b >> 6)] >> (b & 63)) & 1;
}

Dataset generate_dataset(
    const StabilizerCode &code, const DiagnosisScheme &scheme, const NoiseModel &model, size_t count, uint64_t seed) {
    if (scheme.hg.cols() != 2 * code.n) {
        throw ContractViolation("scheme was not built for this code");
    }
    DatasetHeader h;
    h.family = family_name(code.family);
    h.d = code.d;
    h.noise = model;
    h.scheme_id = scheme.id();
    h.count = count;
    h.seed = seed;
    h.syndrome_bits = code.num_checks();
    h.label_bits = scheme.num_labels();
    Dataset ds(h);
    parallel_chunks(count, [&](size_t, size_t begin, size_t end) {
        for (size_t i = begin; i < end; i++) {
            BitVec e = sample_error(model, code.n, seed, i);
            ds.set_sample(i, syndrome(code, e), diagnosis_of(scheme, e));
        }
    });
    return ds;
}

void write_dataset(const Dataset &ds, const std::string &path) {
    const DatasetHeader &h = ds.header();
    nlohmann::json j;
    j["format_version"] = h.format_version;
    j["family"] = h.family;
    j["d"] = h.d;
    j["noise"] = {{"kind", noise_kind_name(h.noise.kind)}, {"p", h.noise.p}};
    j["scheme_id"] = hex64(h.scheme_id);
    j["count"] = h.count;
    j["seed"] = h.seed;
    j["syndrome_bits"] = h.syndrome_bits;
    j["label_bits"] = h.label_bits;
    std::string meta = j.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open " + path + " for writing");
    }
    out.write(kMagic, 4);
    put_u32(out, kDatasetFormatVersion);
    put_u64(out, meta.size());
    out.write(meta.data(), (std::streamsize)meta.size());
    for (uint64_t w : ds.payload()) {
        put_u64(out, w);
    }
    if (!out) {
        throw std::runtime_error("write failed for " + path);
    }
}

Dataset read_dataset(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw CorruptPayload(path + ": not a dataset file");
    }
    uint32_t version = (uint32_t)load_u64(bytes.data() + 4, 4);
    if (version != kDatasetFormatVersion) {
        throw VersionMismatch(path + ": unsupported format version " + std::to_string(version));
    }
    uint64_t meta_len = load_u64(bytes.data() + 8, 8);
    if (16 + meta_len > bytes.size()) {
        throw CorruptPayload(path + ": truncated header");
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(bytes.begin() + 16, bytes.begin() + 16 + (long)meta_len);
    } catch (const nlohmann::json::exception &e) {
        throw CorruptPayload(path + ": bad header: " + e.what());
    }
    DatasetHeader h;
    try {
        h.format_version = j.at("format_version").get<uint32_t>();
        h.family = j.at("family").get<std::string>();
        h.d = j.at("d").get<size_t>();
        h.noise = NoiseModel(parse_noise_kind(j.at("noise").at("kind").get<std::string>()),
                             j.at("noise").at("p").get<double>());
        h.scheme_id = std::stoull(j.at("scheme_id").get<std::string>(), nullptr, 16);
        h.count = j.at("count").get<size_t>();
        h.seed = j.at("seed").get<uint64_t>();
        h.syndrome_bits = j.at("syndrome_bits").get<size_t>();
        h.label_bits = j.at("label_bits").get<size_t>();
    } catch (const std::exception &e) {
        throw CorruptPayload(path + ": bad header: " + e.what());
    }
    if (h.format_version != kDatasetFormatVersion) {
        throw VersionMismatch(path + ": header declares format version " + std::to_string(h.format_version));
    }
    Dataset ds(h);
    size_t payload = bytes.size() - 16 - meta_len;
    if (payload != ds.payload().size() * 8) {
        throw CorruptPayload(path + ": payload length does not match the header");
    }
    const unsigned char *p = bytes.data() + 16 + meta_len;
    for (size_t i = 0; i < ds.payload().size(); i++) {
        ds.payload()[i] = load_u64(p + 8 * i, 8);
    }
    return ds;
}

}  // namespace topodecode
