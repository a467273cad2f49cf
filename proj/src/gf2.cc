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

#include "topodecode/gf2.h"

#include <algorithm>
#include <bit>
#include <cmath>

namespace topodecode {

namespace {

constexpr double kRankTolerance = 1e-9;

size_t words_for(size_t bits) {
    return (bits + 63) / 64;
}

}  // namespace

BitVec::BitVec(size_t len) : len_(len), words_(words_for(len), 0) {
}

BitVec BitVec::from_string(const std::string &bits) {
    BitVec v(bits.size());
    for (size_t i = 0; i < bits.size(); i++) {
        if (bits[i] == '1') {
            v.set(i, true);
        } else if (bits[i] != '0') {
            throw ContractViolation("bit string may only contain '0' and '1'");
        }
    }
    return v;
}

BitVec BitVec::from_indices(size_t len, const std::vector<size_t> &ones) {
    BitVec v(len);
    for (size_t i : ones) {
        v.set(i, true);
    }
    return v;
}

bool BitVec::get(size_t i) const {
    if (i >= len_) {
        throw ContractViolation("BitVec index out of range");
    }
    return (words_[i >> 6] >> (i & 63)) & 1;
}

void BitVec::set(size_t i, bool v) {
    if (i >= len_) {
        throw ContractViolation("BitVec index out of range");
    }
    uint64_t m = uint64_t{1} << (i & 63);
    if (v) {
        words_[i >> 6] |= m;
    } else {
        words_[i >> 6] &= ~m;
    }
}

void BitVec::flip(size_t i) {
    if (i >= len_) {
        throw ContractViolation("BitVec index out of range");
    }
    words_[i >> 6] ^= uint64_t{1} << (i & 63);
}

void BitVec::clear() {
    std::fill(words_.begin(), words_.end(), 0);
}

size_t BitVec::popcount() const {
    size_t c = 0;
    for (uint64_t w : words_) {
        c += std::popcount(w);
    }
    return c;
}

bool BitVec::any() const {
    for (uint64_t w : words_) {
        if (w) {
            return true;
        }
    }
    return false;
}

bool BitVec::parity_and(const BitVec &other) const {
    check_same(other);
    uint64_t acc = 0;
    for (size_t k = 0; k < words_.size(); k++) {
        acc ^= words_[k] & other.words_[k];
    }
    return std::popcount(acc) & 1;
}

std::vector<size_t> BitVec::ones() const {
    std::vector<size_t> out;
    for (size_t k = 0; k < words_.size(); k++) {
        uint64_t w = words_[k];
        while (w) {
            out.push_back(k * 64 + std::countr_zero(w));
            w &= w - 1;
        }
    }
    return out;
}

void BitVec::check_same(const BitVec &other) const {
    if (len_ != other.len_) {
        throw ContractViolation("BitVec length mismatch");
    }
}

BitVec &BitVec::operator^=(const BitVec &other) {
    check_same(other);
    for (size_t k = 0; k < words_.size(); k++) {
        words_[k] ^= other.words_[k];
    }
    return *this;
}

BitVec &BitVec::operator&=(const BitVec &other) {
    check_same(other);
    for (size_t k = 0; k < words_.size(); k++) {
        words_[k] &= other.words_[k];
    }
    return *this;
}

BitVec BitVec::operator^(const BitVec &other) const {
    BitVec r = *this;
    r ^= other;
    return r;
}

BitVec BitVec::operator&(const BitVec &other) const {
    BitVec r = *this;
    r &= other;
    return r;
}

bool BitVec::operator==(const BitVec &other) const {
    return len_ == other.len_ && words_ == other.words_;
}

bool BitVec::lex_less(const BitVec &other) const {
    check_same(other);
    for (size_t k = 0; k < words_.size(); k++) {
        uint64_t diff = words_[k] ^ other.words_[k];
        if (diff) {
            uint64_t low = diff & (~diff + 1);
            return (other.words_[k] & low) != 0;
        }
    }
    return false;
}

std::string BitVec::str() const {
    std::string s(len_, '0');
    for (size_t i = 0; i < len_; i++) {
        if (get(i)) {
            s[i] = '1';
        }
    }
    return s;
}

BitVec BitVec::swap_halves() const {
    if (len_ % 2) {
        throw ContractViolation("swap_halves needs an even length");
    }
    size_t n = len_ / 2;
    BitVec r(len_);
    for (size_t i : ones()) {
        r.set(i < n ? i + n : i - n, true);
    }
    return r;
}

BitVec BitVec::slice(size_t start, size_t len) const {
    if (start + len > len_) {
        throw ContractViolation("slice out of range");
    }
    BitVec r(len);
    for (size_t i = 0; i < len; i++) {
        if (get(start + i)) {
            r.set(i, true);
        }
    }
    return r;
}

BitMatrix::BitMatrix(size_t rows, size_t cols) : cols_(cols), rows_(rows, BitVec(cols)) {
}

BitMatrix BitMatrix::identity(size_t n) {
    BitMatrix m(n, n);
    for (size_t i = 0; i < n; i++) {
        m.set(i, i, true);
    }
    return m;
}

BitMatrix BitMatrix::from_rows(const std::vector<BitVec> &rows, size_t cols) {
    BitMatrix m(0, cols);
    for (const auto &r : rows) {
        m.append_row(r);
    }
    return m;
}

BitMatrix BitMatrix::lambda(size_t n) {
    BitMatrix m(2 * n, 2 * n);
    for (size_t i = 0; i < n; i++) {
        m.set(i, n + i, true);
        m.set(n + i, i, true);
    }
    return m;
}

const BitVec &BitMatrix::row(size_t r) const {
    if (r >= rows_.size()) {
        throw ContractViolation("BitMatrix row out of range");
    }
    return rows_[r];
}

BitVec &BitMatrix::row(size_t r) {
    if (r >= rows_.size()) {
        throw ContractViolation("BitMatrix row out of range");
    }
    return rows_[r];
}

void BitMatrix::append_row(const BitVec &v) {
    if (v.size() != cols_) {
        throw ContractViolation("row length does not match matrix width");
    }
    rows_.push_back(v);
}

BitMatrix BitMatrix::transpose() const {
    BitMatrix t(cols_, rows_.size());
    for (size_t r = 0; r < rows_.size(); r++) {
        for (size_t c : rows_[r].ones()) {
            t.set(c, r, true);
        }
    }
    return t;
}

BitMatrix BitMatrix::stacked(const BitMatrix &below) const {
    if (below.cols_ != cols_) {
        throw ContractViolation("stacked: width mismatch");
    }
    BitMatrix m = *this;
    for (const auto &r : below.rows_) {
        m.rows_.push_back(r);
    }
    return m;
}

BitMatrix BitMatrix::times_lambda() const {
    BitMatrix m(0, cols_);
    for (const auto &r : rows_) {
        m.rows_.push_back(r.swap_halves());
    }
    return m;
}

BitVec BitMatrix::apply(const BitVec &v) const {
    if (v.size() != cols_) {
        throw ContractViolation("apply: length mismatch");
    }
    BitVec out(rows_.size());
    for (size_t r = 0; r < rows_.size(); r++) {
        if (rows_[r].parity_and(v)) {
            out.set(r, true);
        }
    }
    return out;
}

BitMatrix BitMatrix::operator*(const BitMatrix &other) const {
    if (cols_ != other.rows()) {
        throw ContractViolation("matrix product: inner dimension mismatch");
    }
    BitMatrix out(rows_.size(), other.cols());
    for (size_t r = 0; r < rows_.size(); r++) {
        for (size_t k : rows_[r].ones()) {
            out.rows_[r] ^= other.rows_[k];
        }
    }
    return out;
}

bool BitMatrix::operator==(const BitMatrix &other) const {
    return cols_ == other.cols_ && rows_ == other.rows_;
}

bool BitMatrix::is_zero() const {
    for (const auto &r : rows_) {
        if (r.any()) {
            return false;
        }
    }
    return true;
}

size_t BitMatrix::max_column_weight() const {
    std::vector<size_t> w(cols_, 0);
    for (const auto &r : rows_) {
        for (size_t c : r.ones()) {
            w[c]++;
        }
    }
    return w.empty() ? 0 : *std::max_element(w.begin(), w.end());
}

RealMatrix::RealMatrix(size_t rows, size_t cols, double fill) : rows_(rows), cols_(cols), data_(rows * cols, fill) {
}

RealMatrix RealMatrix::identity(size_t n) {
    RealMatrix m(n, n);
    for (size_t i = 0; i < n; i++) {
        m(i, i) = 1;
    }
    return m;
}

RealMatrix RealMatrix::operator*(const RealMatrix &other) const {
    if (cols_ != other.rows_) {
        throw ContractViolation("matrix product: inner dimension mismatch");
    }
    RealMatrix out(rows_, other.cols_);
    for (size_t i = 0; i < rows_; i++) {
        for (size_t k = 0; k < cols_; k++) {
            double a = (*this)(i, k);
            if (a == 0) {
                continue;
            }
            for (size_t j = 0; j < other.cols_; j++) {
                out(i, j) += a * other(k, j);
            }
        }
    }
    return out;
}

std::vector<double> RealMatrix::apply(const std::vector<double> &v) const {
    if (v.size() != cols_) {
        throw ContractViolation("apply: length mismatch");
    }
    std::vector<double> out(rows_, 0.0);
    for (size_t i = 0; i < rows_; i++) {
        double acc = 0;
        for (size_t j = 0; j < cols_; j++) {
            acc += (*this)(i, j) * v[j];
        }
        out[i] = acc;
    }
    return out;
}

RealMatrix RealMatrix::transpose() const {
    RealMatrix t(cols_, rows_);
    for (size_t i = 0; i < rows_; i++) {
        for (size_t j = 0; j < cols_; j++) {
            t(j, i) = (*this)(i, j);
        }
    }
    return t;
}

double RealMatrix::max_abs_diff(const RealMatrix &other) const {
    if (rows_ != other.rows_ || cols_ != other.cols_) {
        throw ContractViolation("max_abs_diff: shape mismatch");
    }
    double m = 0;
    for (size_t i = 0; i < data_.size(); i++) {
        m = std::max(m, std::abs(data_[i] - other.data_[i]));
    }
    return m;
}

bool symplectic_product(const BitVec &u, const BitVec &v) {
    if (u.size() != v.size() || u.size() % 2) {
        throw ContractViolation("symplectic_product needs equal even lengths");
    }
    size_t n = u.size() / 2;
    bool acc = false;
    for (size_t i : u.ones()) {
        acc ^= v.get(i < n ? i + n : i - n);
    }
    return acc;
}

size_t pauli_weight(const BitVec &v) {
    if (v.size() % 2) {
        throw ContractViolation("pauli_weight needs an even length");
    }
    size_t n = v.size() / 2;
    size_t w = 0;
    for (size_t i = 0; i < n; i++) {
        w += v.get(i) || v.get(i + n);
    }
    return w;
}

RowReduction gf2_row_reduce(const BitMatrix &m) {
    RowReduction out;
    out.reduced = m;
    BitMatrix &a = out.reduced;
    size_t r = 0;
    for (size_t c = 0; c < a.cols() && r < a.rows(); c++) {
        size_t p = r;
        while (p < a.rows() && !a.get(p, c)) {
            p++;
        }
        if (p == a.rows()) {
            continue;
        }
        std::swap(a.row(p), a.row(r));
        for (size_t i = 0; i < a.rows(); i++) {
            if (i != r && a.get(i, c)) {
                a.row(i) ^= a.row(r);
            }
        }
        out.pivot_cols.push_back(c);
        r++;
    }
    out.rank = r;
    return out;
}

size_t gf2_rank(const BitMatrix &m) {
    return gf2_row_reduce(m).rank;
}

std::optional<BitVec> gf2_solve(const BitMatrix &m, const BitVec &b) {
    if (b.size() != m.rows()) {
        throw ContractViolation("gf2_solve: right-hand side length mismatch");
    }
    // Augment with b as the last column.
    BitMatrix aug(m.rows(), m.cols() + 1);
    for (size_t r = 0; r < m.rows(); r++) {
        for (size_t c : m.row(r).ones()) {
            aug.set(r, c, true);
        }
        aug.set(r, m.cols(), b.get(r));
    }
    RowReduction red = gf2_row_reduce(aug);
    BitVec x(m.cols());
    for (size_t i = 0; i < red.rank; i++) {
        size_t c = red.pivot_cols[i];
        if (c == m.cols()) {
            return std::nullopt;
        }
        x.set(c, red.reduced.get(i, m.cols()));
    }
    return x;
}

std::vector<BitVec> gf2_kernel(const BitMatrix &m) {
    RowReduction red = gf2_row_reduce(m);
    std::vector<bool> is_pivot(m.cols(), false);
    for (size_t c : red.pivot_cols) {
        is_pivot[c] = true;
    }
    std::vector<BitVec> basis;
    for (size_t f = 0; f < m.cols(); f++) {
        if (is_pivot[f]) {
            continue;
        }
        BitVec v(m.cols());
        v.set(f, true);
        for (size_t i = 0; i < red.rank; i++) {
            if (red.reduced.get(i, f)) {
                v.set(red.pivot_cols[i], true);
            }
        }
        basis.push_back(v);
    }
    return basis;
}

namespace {

// In-place Householder QR of a (m×k) column-major copy. Returns the
// reflector vectors and the k×k upper triangle.
struct Householder {
    size_t m = 0, k = 0;
    std::vector<std::vector<double>> v;  // reflectors, v[j] has length m
    std::vector<double> r;               // k×k row-major
};

Householder householder_qr(const RealMatrix &a) {
    Householder h;
    h.m = a.rows();
    h.k = a.cols();
    std::vector<std::vector<double>> cols(h.k, std::vector<double>(h.m));
    for (size_t j = 0; j < h.k; j++) {
        for (size_t i = 0; i < h.m; i++) {
            cols[j][i] = a(i, j);
        }
    }
    h.r.assign(h.k * h.k, 0.0);
    for (size_t j = 0; j < h.k; j++) {
        std::vector<double> v(h.m, 0.0);
        double norm = 0;
        for (size_t i = j; i < h.m; i++) {
            norm += cols[j][i] * cols[j][i];
        }
        norm = std::sqrt(norm);
        double alpha = cols[j][j] > 0 ? -norm : norm;
        for (size_t i = j; i < h.m; i++) {
            v[i] = cols[j][i];
        }
        v[j] -= alpha;
        double vn = 0;
        for (size_t i = j; i < h.m; i++) {
            vn += v[i] * v[i];
        }
        if (vn > 0) {
            for (size_t c = j; c < h.k; c++) {
                double dot = 0;
                for (size_t i = j; i < h.m; i++) {
                    dot += v[i] * cols[c][i];
                }
                double f = 2 * dot / vn;
                for (size_t i = j; i < h.m; i++) {
                    cols[c][i] -= f * v[i];
                }
            }
        }
        h.v.push_back(std::move(v));
        for (size_t c = j; c < h.k; c++) {
            h.r[j * h.k + c] = cols[c][j];
        }
    }
    return h;
}

// y <- Qᵀ y.
void apply_qt(const Householder &h, std::vector<double> &y) {
    for (size_t j = 0; j < h.k; j++) {
        const auto &v = h.v[j];
        double vn = 0, dot = 0;
        for (size_t i = j; i < h.m; i++) {
            vn += v[i] * v[i];
            dot += v[i] * y[i];
        }
        if (vn == 0) {
            continue;
        }
        double f = 2 * dot / vn;
        for (size_t i = j; i < h.m; i++) {
            y[i] -= f * v[i];
        }
    }
}

}  // namespace

RealMatrix qr_left_inverse(const RealMatrix &d) {
    size_t m = d.rows(), k = d.cols();
    if (m < k) {
        throw ContractViolation("qr_left_inverse needs rows >= cols");
    }
    Householder h = householder_qr(d);
    for (size_t j = 0; j < k; j++) {
        if (std::abs(h.r[j * k + j]) < kRankTolerance) {
            throw NotDecomposable("matrix is rank deficient over the reals");
        }
    }
    // Column i of the result solves R x = (Qᵀ e_i)[0:k].
    RealMatrix inv(k, m);
    std::vector<double> y(m);
    for (size_t i = 0; i < m; i++) {
        std::fill(y.begin(), y.end(), 0.0);
        y[i] = 1;
        apply_qt(h, y);
        for (size_t jj = k; jj-- > 0;) {
            double acc = y[jj];
            for (size_t c = jj + 1; c < k; c++) {
                acc -= h.r[jj * k + c] * inv(c, i);
            }
            inv(jj, i) = acc / h.r[jj * k + jj];
        }
    }
    return inv;
}

double affine_distance_sq(
    const std::vector<double> &point, const std::vector<double> &base, const std::vector<std::vector<double>> &dirs) {
    size_t m = point.size();
    if (base.size() != m) {
        throw ContractViolation("affine_distance_sq: length mismatch");
    }
    std::vector<double> y(m);
    for (size_t i = 0; i < m; i++) {
        y[i] = point[i] - base[i];
    }
    if (dirs.empty()) {
        double s = 0;
        for (double x : y) {
            s += x * x;
        }
        return s;
    }
    RealMatrix a(m, dirs.size());
    for (size_t j = 0; j < dirs.size(); j++) {
        if (dirs[j].size() != m) {
            throw ContractViolation("affine_distance_sq: direction length mismatch");
        }
        for (size_t i = 0; i < m; i++) {
            a(i, j) = dirs[j][i];
        }
    }
    Householder h = householder_qr(a);
    apply_qt(h, y);
    // Components along dependent directions stay in the residual.
    double s = 0;
    for (size_t i = 0; i < m; i++) {
        bool in_span = i < h.k && std::abs(h.r[i * h.k + i]) >= kRankTolerance;
        if (!in_span) {
            s += y[i] * y[i];
        }
    }
    return s;
}

}  // namespace topodecode
