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

#ifndef TOPODECODE_BASELINES_H
#define TOPODECODE_BASELINES_H

#include <optional>
#include <vector>

#include "topodecode/codes.h"
#include "topodecode/noise.h"

namespace topodecode {

struct TooManyDefects : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr size_t kMatchingCap = 20;

/// Minimum-weight error with syndrome s. Equal weights prefer higher model
/// probability, then the lexicographically smaller vector. max_weight = 0
/// means n.
BitVec md_decode(const StabilizerCode &code, const NoiseModel &model, const BitVec &s, size_t max_weight = 0);

/// Defects of one check type with pairwise and boundary path costs.
struct DefectGraph {
    char check_type = 'Z';               // which checks fired
    std::vector<size_t> defects;         // syndrome bit indices
    std::vector<std::vector<size_t>> cost;  // defect-defect lattice distance
    std::vector<size_t> boundary_cost;      // defect to nearest boundary
    // Qubits on the chosen shortest paths.
    std::vector<std::vector<std::vector<size_t>>> path;
    std::vector<std::vector<size_t>> boundary_path;
};

DefectGraph defect_graph(const StabilizerCode &code, const BitVec &s, char check_type);

struct Matching {
    std::vector<std::pair<int, int>> pairs;  // second == -1 marks a boundary match
    size_t cost = 0;
};

/// Exact minimum-cost matching where each defect pairs with another or with
/// the boundary.
Matching min_weight_matching(const DefectGraph &g, size_t cap = kMatchingCap);

struct MwpmResult {
    BitVec recovery;
    size_t cost_x = 0;  // matching cost for X-type errors (Z checks)
    size_t cost_z = 0;
};

MwpmResult mwpm_decode_detailed(const StabilizerCode &code, const BitVec &s, size_t cap = kMatchingCap);
BitVec mwpm_decode(const StabilizerCode &code, const BitVec &s, size_t cap = kMatchingCap);

/// Solves (H_cΛ; H_gΛ) e = (s; g); unique when (H_c; H_g) has rank 2n.
std::optional<BitVec> reconstruct_error(const StabilizerCode &code, const BitMatrix &hg, const BitVec &s,
                                        const BitVec &g);

}  // namespace topodecode

#endif
