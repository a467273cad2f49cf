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

#ifndef TOPODECODE_GF2_H
#define TOPODECODE_GF2_H

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace topodecode {

struct ContractViolation : std::logic_error {
    using std::logic_error::logic_error;
};

struct NotDecomposable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Fixed-length packed bit vector. Bits past `size()` are always zero.
class BitVec {
   public:
    BitVec() = default;
    explicit BitVec(size_t len);
    static BitVec from_string(const std::string &bits);
    static BitVec from_indices(size_t len, const std::vector<size_t> &ones);

    size_t size() const {
        return len_;
    }
    size_t num_words() const {
        return words_.size();
    }
    const uint64_t *words() const {
        return words_.data();
    }
    uint64_t *words() {
        return words_.data();
    }

    bool get(size_t i) const;
    void set(size_t i, bool v);
    void flip(size_t i);
    void clear();

    size_t popcount() const;
    bool any() const;
    bool parity_and(const BitVec &other) const;
    std::vector<size_t> ones() const;

    BitVec &operator^=(const BitVec &other);
    BitVec &operator&=(const BitVec &other);
    BitVec operator^(const BitVec &other) const;
    BitVec operator&(const BitVec &other) const;
    bool operator==(const BitVec &other) const;
    bool operator!=(const BitVec &other) const {
        return !(*this == other);
    }
    // Lexicographic on bit index order; bit 0 is the most significant position.
    bool lex_less(const BitVec &other) const;

    std::string str() const;

    // (x | z) -> (z | x) for a vector of even length 2n.
    BitVec swap_halves() const;
    BitVec slice(size_t start, size_t len) const;

   private:
    void check_same(const BitVec &other) const;
    size_t len_ = 0;
    std::vector<uint64_t> words_;
};

class BitMatrix {
   public:
    BitMatrix() = default;
    BitMatrix(size_t rows, size_t cols);
    static BitMatrix identity(size_t n);
    static BitMatrix from_rows(const std::vector<BitVec> &rows, size_t cols);
    // The symplectic form on 2n bits: [[0, I], [I, 0]].
    static BitMatrix lambda(size_t n);

    size_t rows() const {
        return rows_.size();
    }
    size_t cols() const {
        return cols_;
    }
    const BitVec &row(size_t r) const;
    BitVec &row(size_t r);
    bool get(size_t r, size_t c) const {
        return row(r).get(c);
    }
    void set(size_t r, size_t c, bool v) {
        row(r).set(c, v);
    }
    void append_row(const BitVec &v);

    BitMatrix transpose() const;
    BitMatrix stacked(const BitMatrix &below) const;
    // Every row with its X and Z halves exchanged, i.e. M·Λ.
    BitMatrix times_lambda() const;
    // M·v over GF(2).
    BitVec apply(const BitVec &v) const;
    BitMatrix operator*(const BitMatrix &other) const;
    bool operator==(const BitMatrix &other) const;
    bool is_zero() const;
    // Largest number of ones in any column.
    size_t max_column_weight() const;

   private:
    size_t cols_ = 0;
    std::vector<BitVec> rows_;
};

/// Dense row-major double matrix.
class RealMatrix {
   public:
    RealMatrix() = default;
    RealMatrix(size_t rows, size_t cols, double fill = 0.0);
    static RealMatrix identity(size_t n);

    size_t rows() const {
        return rows_;
    }
    size_t cols() const {
        return cols_;
    }
    double &operator()(size_t r, size_t c) {
        return data_[r * cols_ + c];
    }
    double operator()(size_t r, size_t c) const {
        return data_[r * cols_ + c];
    }
    const std::vector<double> &data() const {
        return data_;
    }

    RealMatrix operator*(const RealMatrix &other) const;
    std::vector<double> apply(const std::vector<double> &v) const;
    RealMatrix transpose() const;
    double max_abs_diff(const RealMatrix &other) const;

   private:
    size_t rows_ = 0;
    size_t cols_ = 0;
    std::vector<double> data_;
};

bool symplectic_product(const BitVec &u, const BitVec &v);
size_t pauli_weight(const BitVec &v);

struct RowReduction {
    size_t rank = 0;
    BitMatrix reduced;
    std::vector<size_t> pivot_cols;
};

/// Reduced row echelon form over GF(2).
RowReduction gf2_row_reduce(const BitMatrix &m);
size_t gf2_rank(const BitMatrix &m);
/// Particular solution of m·x = b (free variables set to zero), or nullopt.
std::optional<BitVec> gf2_solve(const BitMatrix &m, const BitVec &b);
/// Basis of {x : m·x = 0}.
std::vector<BitVec> gf2_kernel(const BitMatrix &m);

/// Left inverse R⁻¹Qᵀ from a Householder QR of a tall full-column-rank matrix.
RealMatrix qr_left_inverse(const RealMatrix &d);

/// Squared distance from `point` to the affine set {base + Σ c_j dirs[j]}.
double affine_distance_sq(
    const std::vector<double> &point, const std::vector<double> &base, const std::vector<std::vector<double>> &dirs);

}  // namespace topodecode

#endif
