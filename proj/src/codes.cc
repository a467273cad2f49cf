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

#include "topodecode/codes.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace topodecode {

std::string family_name(Family f) {
    switch (f) {
        case Family::surface_unrotated:
            return "surface_unrotated";
        case Family::surface_rotated:
            return "surface_rotated";
        case Family::color_488:
            return "color_488";
        case Family::color_666:
            return "color_666";
    }
    throw UnsupportedFamily("unknown family");
}

Family parse_family(const std::string &name) {
    for (Family f : {Family::surface_unrotated, Family::surface_rotated, Family::color_488, Family::color_666}) {
        if (family_name(f) == name) {
            return f;
        }
    }
    throw UnsupportedFamily("unknown code family '" + name + "'");
}

bool is_surface(Family f) {
    return f == Family::surface_unrotated || f == Family::surface_rotated;
}

namespace {

struct Layout {
    std::vector<Coord> qubits;
    std::vector<Stabilizer> stabs;
    int grid_rows = 0, grid_cols = 0;
};

Layout rotated_layout(int d) {
    Layout out;
    for (int r = 0; r < d; r++) {
        for (int c = 0; c < d; c++) {
            out.qubits.push_back({(double)c, (double)r});
        }
    }
    // Plaquette (i, j) sits between qubit rows i-1, i and columns j-1, j.
    for (char type : {'X', 'Z'}) {
        for (int i = 0; i <= d; i++) {
            for (int j = 0; j <= d; j++) {
                bool is_x = (i + j) % 2 == 0;
                if (is_x != (type == 'X')) {
                    continue;
                }
                bool row_edge = i == 0 || i == d;
                bool col_edge = j == 0 || j == d;
                if (row_edge && col_edge) {
                    continue;
                }
                if (row_edge && !is_x) {
                    continue;
                }
                if (col_edge && is_x) {
                    continue;
                }
                Stabilizer s;
                s.type = type;
                s.pos = {j - 0.5, i - 0.5};
                for (int r : {i - 1, i}) {
                    for (int c : {j - 1, j}) {
                        if (r >= 0 && r < d && c >= 0 && c < d) {
                            s.support.push_back(r * d + c);
                        }
                    }
                }
                if (is_x) {
                    s.grid_row = j - 1;
                    s.grid_col = i / 2;
                } else {
                    s.grid_row = i - 1;
                    s.grid_col = j / 2;
                }
                out.stabs.push_back(s);
            }
        }
    }
    out.grid_rows = d - 1;
    out.grid_cols = (d + 1) / 2;
    return out;
}

Layout unrotated_layout(int d) {
    Layout out;
    int w = 2 * d - 1;
    std::map<std::pair<int, int>, size_t> index;
    for (int r = 0; r < w; r++) {
        for (int c = 0; c < w; c++) {
            if ((r + c) % 2 == 0) {
                index[{r, c}] = out.qubits.size();
                out.qubits.push_back({(double)c, (double)r});
            }
        }
    }
    for (char type : {'X', 'Z'}) {
        for (int r = 0; r < w; r++) {
            for (int c = 0; c < w; c++) {
                bool is_x = r % 2 == 0 && c % 2 == 1;
                bool is_z = r % 2 == 1 && c % 2 == 0;
                if (!(type == 'X' ? is_x : is_z)) {
                    continue;
                }
                Stabilizer s;
                s.type = type;
                s.pos = {(double)c, (double)r};
                const int nb[4][2] = {{r - 1, c}, {r, c - 1}, {r, c + 1}, {r + 1, c}};
                for (const auto &p : nb) {
                    auto it = index.find({p[0], p[1]});
                    if (it != index.end()) {
                        s.support.push_back(it->second);
                    }
                }
                std::sort(s.support.begin(), s.support.end());
                if (is_x) {
                    s.grid_row = r / 2;
                    s.grid_col = (c - 1) / 2;
                } else {
                    s.grid_row = c / 2;
                    s.grid_col = (r - 1) / 2;
                }
                out.stabs.push_back(s);
            }
        }
    }
    out.grid_rows = d;
    out.grid_cols = d - 1;
    return out;
}

void add_color_faces(Layout &out, const std::vector<std::vector<size_t>> &faces, const std::vector<Coord> &centers) {
    for (char type : {'X', 'Z'}) {
        for (size_t f = 0; f < faces.size(); f++) {
            Stabilizer s;
            s.type = type;
            s.pos = centers[f];
            s.support = faces[f];
            std::sort(s.support.begin(), s.support.end());
            out.stabs.push_back(s);
        }
    }
}

// Triangular 6.6.6 patch on a triangle of the hexagonal lattice: every
// third site is a face center, the rest are data qubits.
Layout color_666_layout(int d) {
    Layout out;
    int w = 3 * (d - 1) / 2;
    std::map<std::pair<int, int>, size_t> data;
    std::vector<std::pair<int, int>> centers;
    for (int y = 0; y <= w; y++) {
        for (int x = 0; x <= w - y; x++) {
            if (((x - y) % 3 + 3) % 3 == 2) {
                centers.push_back({x, y});
            } else {
                data[{x, y}] = out.qubits.size();
                out.qubits.push_back({x + 0.5 * y, y * std::sqrt(3.0) / 2});
            }
        }
    }
    std::vector<std::vector<size_t>> faces;
    std::vector<Coord> pos;
    for (auto [x, y] : centers) {
        const int nb[6][2] = {{x + 1, y}, {x - 1, y}, {x, y + 1}, {x, y - 1}, {x - 1, y + 1}, {x + 1, y - 1}};
        std::vector<size_t> f;
        for (const auto &p : nb) {
            auto it = data.find({p[0], p[1]});
            if (it != data.end()) {
                f.push_back(it->second);
            }
        }
        faces.push_back(f);
        pos.push_back({x + 0.5 * y, y * std::sqrt(3.0) / 2});
    }
    add_color_faces(out, faces, pos);
    return out;
}

// Triangular 4.8.8 patch. Squares are centered at (4a, 4b) and octagons at
// (4a+2, 4b+2). The patch keeps vertices with x >= 3, y >= 3 and
// x + y <= 2d + 5 except the corner vertex (3, 2d + 2). Along the two axis
// boundaries only every other half-octagon is a face; which ones depends on
// d mod 4 so that the third corner lands on the diagonal.
Layout color_488_layout(int d) {
    Layout out;
    int limit = 2 * d + 5;
    auto inside = [&](int x, int y) {
        return x >= 3 && y >= 3 && x + y <= limit && !(x == 3 && y == 2 * d + 2);
    };
    struct Tile {
        bool octagon;
        int a, b;
        std::vector<std::pair<int, int>> verts;
    };
    std::vector<Tile> tiles;
    int r = d + 4;
    for (int a = 0; a < r; a++) {
        for (int b = 0; b < r; b++) {
            int cx = 4 * a, cy = 4 * b;
            tiles.push_back({false, a, b, {{cx + 1, cy}, {cx, cy + 1}, {cx - 1, cy}, {cx, cy - 1}}});
            int ox = cx + 2, oy = cy + 2;
            tiles.push_back(
                {true,
                 a,
                 b,
                 {{ox + 1, oy + 2},
                  {ox - 1, oy + 2},
                  {ox - 2, oy + 1},
                  {ox - 2, oy - 1},
                  {ox - 1, oy - 2},
                  {ox + 1, oy - 2},
                  {ox + 2, oy - 1},
                  {ox + 2, oy + 1}}});
        }
    }
    std::set<std::pair<int, int>> pts;
    for (const auto &t : tiles) {
        for (auto [x, y] : t.verts) {
            if (inside(x, y)) {
                pts.insert({x, y});
            }
        }
    }
    std::map<std::pair<int, int>, size_t> index;
    for (auto p : pts) {
        index[p] = out.qubits.size();
        out.qubits.push_back({(double)p.first, (double)p.second});
    }
    int bottom_parity = ((d - 1) / 2) % 2;
    int left_parity = ((d + 1) / 2) % 2;
    std::vector<std::vector<size_t>> faces;
    std::vector<Coord> pos;
    for (const auto &t : tiles) {
        if (t.octagon && t.b == 0 && t.a % 2 != bottom_parity) {
            continue;
        }
        if (t.octagon && t.a == 0 && t.b % 2 != left_parity) {
            continue;
        }
        std::vector<size_t> f;
        for (auto v : t.verts) {
            auto it = index.find(v);
            if (it != index.end()) {
                f.push_back(it->second);
            }
        }
        if (f.size() >= 4) {
            faces.push_back(f);
            int c = t.octagon ? 2 : 0;
            pos.push_back({(double)(4 * t.a + c), (double)(4 * t.b + c)});
        }
    }
    add_color_faces(out, faces, pos);
    return out;
}

size_t expected_n(Family f, size_t d) {
    switch (f) {
        case Family::surface_unrotated:
            return 2 * d * d - 2 * d + 1;
        case Family::surface_rotated:
            return d * d;
        case Family::color_488:
            return (d * d + 2 * d - 1) / 2;
        case Family::color_666:
            return (3 * d * d + 1) / 4;
    }
    return 0;
}

// Finds the symplectic normalizer basis and returns one nontrivial logical
// of the requested CSS type, used only to seed the minimum-weight searches.
BitVec any_logical(const StabilizerCode &code, char type) {
    size_t n = code.n;
    std::vector<BitVec> kernel = gf2_kernel(code.hc_lambda);
    size_t base_rank = gf2_rank(code.hc);
    for (const auto &v : kernel) {
        BitVec cand(2 * n);
        for (size_t q = 0; q < n; q++) {
            size_t bit = type == 'X' ? q : q + n;
            if (v.get(bit)) {
                cand.set(bit, true);
            }
        }
        if (code.hc_lambda.apply(cand).any()) {
            continue;
        }
        BitMatrix m = code.hc;
        m.append_row(cand);
        if (gf2_rank(m) > base_rank) {
            return cand;
        }
    }
    throw std::logic_error("code has no logical operator of type " + std::string(1, type));
}

}  // namespace

std::optional<BitVec> min_weight_solution(
    const BitMatrix &rows, const BitVec &target, size_t max_weight, PauliAlphabet alphabet) {
    size_t m = rows.rows();
    if (target.size() != m) {
        throw ContractViolation("min_weight_solution: target length mismatch");
    }
    if (rows.cols() % 2) {
        throw ContractViolation("min_weight_solution: odd width");
    }
    size_t n = rows.cols() / 2;
    // Pauli index 0 = X, 1 = Z, 2 = Y.
    uint8_t allowed = alphabet == PauliAlphabet::all ? 7 : alphabet == PauliAlphabet::x_only ? 1 : 2;
    std::vector<std::array<BitVec, 3>> effect(n);
    BitMatrix cols = rows.transpose();
    size_t max_effect = 0;
    for (size_t q = 0; q < n; q++) {
        effect[q][0] = cols.row(q);
        effect[q][1] = cols.row(q + n);
        effect[q][2] = cols.row(q) ^ cols.row(q + n);
        for (int p = 0; p < 3; p++) {
            if (allowed >> p & 1) {
                max_effect = std::max(max_effect, effect[q][p].popcount());
            }
        }
    }
    // Qubits touching each row, for branching.
    std::vector<std::vector<size_t>> row_qubits(m);
    for (size_t r = 0; r < m; r++) {
        std::set<size_t> qs;
        for (size_t b : rows.row(r).ones()) {
            qs.insert(b < n ? b : b - n);
        }
        row_qubits[r].assign(qs.begin(), qs.end());
    }

    std::vector<uint8_t> mask(n, allowed);
    std::vector<int8_t> chosen(n, -1);
    std::optional<BitVec> best;

    auto emit = [&]() {
        BitVec e(2 * n);
        for (size_t q = 0; q < n; q++) {
            if (chosen[q] == 0 || chosen[q] == 2) {
                e.set(q, true);
            }
            if (chosen[q] == 1 || chosen[q] == 2) {
                e.set(q + n, true);
            }
        }
        if (!best || e.lex_less(*best)) {
            best = e;
        }
    };

    auto dfs = [&](auto &&self, const BitVec &residual, size_t budget) -> void {
        size_t weight = residual.popcount();
        if (weight == 0) {
            if (budget == 0) {
                emit();
            }
            return;
        }
        if (budget == 0 || weight > max_effect * budget) {
            return;
        }
        size_t r = residual.ones().front();
        std::vector<std::pair<size_t, uint8_t>> saved;
        for (size_t q : row_qubits[r]) {
            if (chosen[q] >= 0) {
                continue;
            }
            uint8_t anti = 0;
            for (int p = 0; p < 3; p++) {
                if ((mask[q] >> p & 1) && effect[q][p].get(r)) {
                    anti |= uint8_t(1 << p);
                }
            }
            if (!anti) {
                continue;
            }
            for (int p = 0; p < 3; p++) {
                if (anti >> p & 1) {
                    chosen[q] = (int8_t)p;
                    self(self, residual ^ effect[q][p], budget - 1);
                    chosen[q] = -1;
                }
            }
            // Later siblings may not toggle row r on this qubit.
            saved.push_back({q, mask[q]});
            mask[q] &= (uint8_t)~anti;
        }
        for (auto it = saved.rbegin(); it != saved.rend(); ++it) {
            mask[it->first] = it->second;
        }
    };

    for (size_t w = 0; w <= max_weight; w++) {
        dfs(dfs, target, w);
        if (best) {
            return best;
        }
    }
    return std::nullopt;
}

BitVec class_operator(const StabilizerCode &code, size_t cls) {
    if (cls >= kNumClasses) {
        throw ContractViolation("class index out of range");
    }
    BitVec v(2 * code.n);
    if (cls & 2) {
        v ^= code.g.row(0);
    }
    if (cls & 1) {
        v ^= code.g.row(1);
    }
    return v;
}

namespace {

// Rows whose parities give (syndrome, pairing with G[1], pairing with G[0]),
// so a target of (0, w1, w2) selects class 2*w1 + w2.
BitMatrix class_constraint_rows(const StabilizerCode &code) {
    BitMatrix rows = code.hc_lambda;
    rows.append_row(code.g.row(1).swap_halves());
    rows.append_row(code.g.row(0).swap_halves());
    return rows;
}

BitVec class_target(const StabilizerCode &code, size_t cls) {
    BitVec t(code.num_checks() + 2);
    t.set(code.num_checks(), (cls >> 1) & 1);
    t.set(code.num_checks() + 1, cls & 1);
    return t;
}

}  // namespace

BitVec min_weight_logical(const StabilizerCode &code, size_t cls, size_t max_weight, PauliAlphabet alphabet) {
    if (cls == 0 || cls >= kNumClasses) {
        throw ContractViolation("min_weight_logical needs a nonzero class");
    }
    auto found = min_weight_solution(class_constraint_rows(code), class_target(code, cls), max_weight, alphabet);
    if (!found) {
        throw BoundExceeded("no logical representative within the weight bound");
    }
    return *found;
}

StabilizerCode build_code(Family family, size_t d) {
    if (d < 3 || d % 2 == 0) {
        throw InvalidDistance("distance must be odd and at least 3");
    }
    Layout lay;
    switch (family) {
        case Family::surface_unrotated:
            lay = unrotated_layout((int)d);
            break;
        case Family::surface_rotated:
            lay = rotated_layout((int)d);
            break;
        case Family::color_488:
            lay = color_488_layout((int)d);
            break;
        case Family::color_666:
            lay = color_666_layout((int)d);
            break;
    }
    StabilizerCode code;
    code.family = family;
    code.n = lay.qubits.size();
    code.k = 1;
    code.d = d;
    code.qubit_coords = lay.qubits;
    code.stabilizers = lay.stabs;
    code.grid_rows = lay.grid_rows;
    code.grid_cols = lay.grid_cols;
    size_t n = code.n;
    if (n != expected_n(family, d)) {
        throw std::logic_error("lattice construction produced the wrong number of qubits");
    }
    code.hc = BitMatrix(0, 2 * n);
    for (const auto &s : code.stabilizers) {
        BitVec row(2 * n);
        for (size_t q : s.support) {
            row.set(s.type == 'X' ? q : q + n, true);
        }
        code.hc.append_row(row);
    }
    code.hc_lambda = code.hc.times_lambda();

    // G: minimum-weight X-type and Z-type logicals, each forced to anticommute
    // with some logical of the other type.
    BitVec z_seed = any_logical(code, 'Z');
    BitMatrix rows = code.hc_lambda;
    rows.append_row(z_seed.swap_halves());
    BitVec target(rows.rows());
    target.set(rows.rows() - 1, true);
    auto x_log = min_weight_solution(rows, target, n, PauliAlphabet::x_only);
    rows = code.hc_lambda;
    rows.append_row(x_log->swap_halves());
    auto z_log = min_weight_solution(rows, target, n, PauliAlphabet::z_only);
    code.g = BitMatrix(0, 2 * n);
    code.g.append_row(*x_log);
    code.g.append_row(*z_log);
    for (size_t c = 0; c < kNumClasses; c++) {
        code.logicals_by_class[c] = class_operator(code, c);
    }

    size_t m = code.num_checks();
    code.t = BitMatrix(2 * n, m);
    for (size_t j = 0; j < m; j++) {
        BitVec unit(m);
        unit.set(j, true);
        auto col = gf2_solve(code.hc_lambda, unit);
        if (!col) {
            throw std::logic_error("check matrix is not full rank");
        }
        code.t_columns.push_back(*col);
        for (size_t i : col->ones()) {
            code.t.set(i, j, true);
        }
    }
    return code;
}

BitVec syndrome(const StabilizerCode &code, const BitVec &e) {
    if (e.size() != 2 * code.n) {
        throw ContractViolation("syndrome: error length must be 2n");
    }
    return code.hc_lambda.apply(e);
}

BitVec pure_error(const StabilizerCode &code, const BitVec &s) {
    if (s.size() != code.num_checks()) {
        throw ContractViolation("pure_error: syndrome length mismatch");
    }
    BitVec t(2 * code.n);
    for (size_t j : s.ones()) {
        t ^= code.t_columns[j];
    }
    return t;
}

size_t logical_class(const StabilizerCode &code, const BitVec &v) {
    if (syndrome(code, v).any()) {
        throw NotInNormalizer("operator does not commute with every stabilizer");
    }
    size_t w1 = symplectic_product(v, code.g.row(1));
    size_t w2 = symplectic_product(v, code.g.row(0));
    return 2 * w1 + w2;
}

size_t code_distance(const StabilizerCode &code, size_t max_weight) {
    BitMatrix rows = class_constraint_rows(code);
    size_t best = max_weight + 1;
    for (size_t cls = 1; cls < kNumClasses; cls++) {
        auto e = min_weight_solution(rows, class_target(code, cls), std::min(best, max_weight), PauliAlphabet::all);
        if (e) {
            best = std::min(best, pauli_weight(*e));
        }
    }
    if (best > max_weight) {
        throw BoundExceeded("no logical operator found within the weight bound");
    }
    return best;
}

std::string check_code_invariants(const StabilizerCode &code) {
    std::ostringstream err;
    size_t n = code.n;
    BitMatrix hct = code.hc.transpose();
    if (!(code.hc_lambda * hct).is_zero()) {
        err << "stabilizers do not commute; ";
    }
    if (!(code.hc_lambda * code.g.transpose()).is_zero()) {
        err << "logicals do not commute with stabilizers; ";
    }
    BitMatrix ggt = code.g.times_lambda() * code.g.transpose();
    BitMatrix swap(2, 2);
    swap.set(0, 1, true);
    swap.set(1, 0, true);
    if (!(ggt == swap)) {
        err << "G Lambda G^T is not the swap block; ";
    }
    if (gf2_rank(code.hc) != n - code.k) {
        err << "rank(H_c) != n-k; ";
    }
    if (gf2_rank(code.hc.stacked(code.g)) != n + code.k) {
        err << "rank(H_c;G) != n+k; ";
    }
    if (!(code.hc_lambda * code.t == BitMatrix::identity(code.num_checks()))) {
        err << "H_c Lambda T != I; ";
    }
    if (n != expected_n(code.family, code.d)) {
        err << "n does not match the family formula; ";
    }
    return err.str();
}

}  // namespace topodecode
