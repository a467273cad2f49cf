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

#ifndef TOPODECODE_DIAGNOSIS_H
#define TOPODECODE_DIAGNOSIS_H

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "topodecode/codes.h"
#include "topodecode/gf2.h"

namespace topodecode {

struct SchemeMetrics {
    size_t m = 0;                   // sensitivity of H_g
    double M = 0;                   // constrained minimum boundary distance
    double M_unconstrained = 0;     // distance to the linear span instead
    double N = 0;                   // m / M
};

struct DiagnosisScheme {
    std::string kind;  // "uniform", "short" or "custom"
    BitMatrix hg;
    BitMatrix hg_lambda;
    // (|g|+1) x 4; column w is (H_g Λ (wG)^T ; 1).
    RealMatrix d;
    RealMatrix d_inv;
    bool faithful = false;
    bool decomposable = false;
    std::array<size_t, kNumClasses> class_order{0, 1, 2, 3};
    SchemeMetrics metrics;

    size_t num_labels() const {
        return hg.rows();
    }
    /// Hash of H_g, recorded in dataset headers.
    uint64_t id() const;
};

bool is_faithful(const StabilizerCode &code, const BitMatrix &hg);
bool is_decomposable(const StabilizerCode &code, const BitMatrix &hg);
RealMatrix diagnosis_columns(const StabilizerCode &code, const BitMatrix &hg);
size_t sensitivity(const BitMatrix &h);

/// Builds D, its left inverse and the metrics. Non-faithful or
/// non-decomposable matrices produce a scheme with the flags cleared.
DiagnosisScheme make_scheme(const StabilizerCode &code, const BitMatrix &hg, const std::string &kind = "custom");

double boundary_distance(const DiagnosisScheme &scheme);
double boundary_distance_unconstrained(const DiagnosisScheme &scheme);
double normalized_sensitivity(const DiagnosisScheme &scheme);

/// Qubit supports of the logical lines, grouped by pattern.
std::vector<std::vector<std::vector<size_t>>> uniform_lines(const StabilizerCode &code);
BitMatrix uniform_construction(const StabilizerCode &code);
BitMatrix short_construction(const StabilizerCode &code);

BitVec diagnosis_of(const DiagnosisScheme &scheme, const BitVec &e);

/// (σ_δ(v))_i = δ_i + (-1)^{δ_i} v_i.
std::vector<double> sigma_delta(const BitVec &delta, const std::vector<double> &v);

}  // namespace topodecode

#endif
