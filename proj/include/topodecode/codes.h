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

#ifndef TOPODECODE_CODES_H
#define TOPODECODE_CODES_H

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "topodecode/gf2.h"

namespace topodecode {

enum class Family { surface_unrotated, surface_rotated, color_488, color_666 };

std::string family_name(Family f);
Family parse_family(const std::string &name);
bool is_surface(Family f);

struct InvalidDistance : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct UnsupportedFamily : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct NotInNormalizer : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BoundExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Coord {
    double x = 0;
    double y = 0;
};

struct Stabilizer {
    char type = 'X';  // 'X' or 'Z'
    Coord pos;
    // Cell in the per-type syndrome grid (surface codes only, -1 otherwise).
    int grid_row = -1;
    int grid_col = -1;
    std::vector<size_t> support;
};

// Class w = (w1, w2) of a k=1 code is stored as the index 2*w1 + w2, so the
// canonical order is 00 < 01 < 10 < 11. wG = w1*G[0] ^ w2*G[1].
constexpr size_t kNumClasses = 4;

struct StabilizerCode {
    Family family = Family::surface_rotated;
    size_t n = 0, k = 1, d = 0;
    BitMatrix hc;         // (n-k) x 2n
    BitMatrix hc_lambda;  // hc with halves swapped; syndrome bit r = parity(row r & e)
    BitMatrix g;          // 2 x 2n; row 0 X-type, row 1 Z-type
    std::array<BitVec, kNumClasses> logicals_by_class;
    BitMatrix t;  // 2n x (n-k) pure-error map
    std::vector<BitVec> t_columns;
    std::vector<Coord> qubit_coords;
    std::vector<Stabilizer> stabilizers;
    // Grid shape used by reshape_syndrome (surface codes).
    int grid_rows = 0, grid_cols = 0;

    size_t num_checks() const {
        return hc.rows();
    }
};

StabilizerCode build_code(Family family, size_t d);

BitVec syndrome(const StabilizerCode &code, const BitVec &e);
BitVec pure_error(const StabilizerCode &code, const BitVec &s);
size_t logical_class(const StabilizerCode &code, const BitVec &v);
BitVec class_operator(const StabilizerCode &code, size_t cls);
size_t code_distance(const StabilizerCode &code, size_t max_weight);

/// Which single-qubit Paulis a weight search may place.
enum class PauliAlphabet { all, x_only, z_only };

/// Minimum pauli_weight e with parity(rows[r] & e) = target[r] for all r.
/// Returns the lexicographically smallest among minimum-weight solutions,
/// or nullopt when none exists up to max_weight.
std::optional<BitVec> min_weight_solution(
    const BitMatrix &rows, const BitVec &target, size_t max_weight, PauliAlphabet alphabet);

/// Minimum-weight representative of a nonzero class.
BitVec min_weight_logical(const StabilizerCode &code, size_t cls, size_t max_weight, PauliAlphabet alphabet);

/// Checks every StabilizerCode invariant; returns an empty string when all hold.
std::string check_code_invariants(const StabilizerCode &code);

}  // namespace topodecode

#endif
