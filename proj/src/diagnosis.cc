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

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "topodecode/noise.h"

namespace topodecode {

uint64_t DiagnosisScheme::id() const {
    uint64_t h = mix64(hg.rows() * 0x100000001ull + hg.cols());
    for (size_t r = 0; r < hg.rows(); r++) {
        const BitVec &row = hg.row(r);
        for (size_t k = 0; k < row.num_words(); k++) {
            h = mix64(h ^ row.words()[k]);
        }
    }
    return h;
}

bool is_faithful(const StabilizerCode &code, const BitMatrix &hg) {
    if (hg.cols() != 2 * code.n) {
        throw ContractViolation("diagnosis matrix must have 2n columns");
    }
    if (!(code.hc_lambda * hg.transpose()).is_zero()) {
        return false;
    }
    return gf2_rank(code.hc.stacked(hg)) == code.n + code.k;
}

RealMatrix diagnosis_columns(const StabilizerCode &code, const BitMatrix &hg) {
    if (hg.cols() != 2 * code.n) {
        throw ContractViolation("diagnosis matrix must have 2n columns");
    }
    BitMatrix hgl = hg.times_lambda();
    RealMatrix d(hg.rows() + 1, kNumClasses);
    for (size_t w = 0; w < kNumClasses; w++) {
        BitVec g = hgl.apply(class_operator(code, w));
        for (size_t i = 0; i < hg.rows(); i++) {
            d(i, w) = g.get(i) ? 1.0 : 0.0;
        }
        d(hg.rows(), w) = 1.0;
    }
    return d;
}

bool is_decomposable(const StabilizerCode &code, const BitMatrix &hg) {
    if (!is_faithful(code, hg)) {
        return false;
    }
    try {
        qr_left_inverse(diagnosis_columns(code, hg));
        return true;
    } catch (const NotDecomposable &) {
        return false;
    }
}

size_t sensitivity(const BitMatrix &h) {
    return h.times_lambda().max_column_weight();
}

namespace {

std::vector<std::vector<double>> label_columns(const DiagnosisScheme &scheme) {
    size_t g = scheme.num_labels();
    std::vector<std::vector<double>> cols(kNumClasses, std::vector<double>(g));
    for (size_t w = 0; w < kNumClasses; w++) {
        for (size_t i = 0; i < g; i++) {
            cols[w][i] = scheme.d(i, w);
        }
    }
    return cols;
}

void require_decomposable(const DiagnosisScheme &scheme) {
    if (!scheme.decomposable) {
        throw NotDecomposable("scheme is not decomposable");
    }
}

}  // namespace

double boundary_distance(const DiagnosisScheme &scheme) {
    require_decomposable(scheme);
    auto cols = label_columns(scheme);
    size_t g = scheme.num_labels();
    double best = std::numeric_limits<double>::infinity();
    for (size_t w = 0; w < kNumClasses; w++) {
        for (size_t w2 = 0; w2 < kNumClasses; w2++) {
            if (w2 == w) {
                continue;
            }
            std::vector<double> mid(g);
            for (size_t i = 0; i < g; i++) {
                mid[i] = 0.5 * (cols[w][i] + cols[w2][i]);
            }
            std::vector<std::vector<double>> dirs;
            for (size_t w3 = 0; w3 < kNumClasses; w3++) {
                if (w3 == w || w3 == w2) {
                    continue;
                }
                std::vector<double> u(g);
                for (size_t i = 0; i < g; i++) {
                    u[i] = cols[w3][i] - mid[i];
                }
                dirs.push_back(u);
            }
            best = std::min(best, affine_distance_sq(cols[w], mid, dirs));
        }
    }
    return best;
}

double boundary_distance_unconstrained(const DiagnosisScheme &scheme) {
    require_decomposable(scheme);
    auto cols = label_columns(scheme);
    size_t g = scheme.num_labels();
    std::vector<double> origin(g, 0.0);
    double best = std::numeric_limits<double>::infinity();
    for (size_t w = 0; w < kNumClasses; w++) {
        for (size_t w2 = 0; w2 < kNumClasses; w2++) {
            if (w2 == w) {
                continue;
            }
            std::vector<std::vector<double>> dirs;
            std::vector<double> sum(g);
            for (size_t i = 0; i < g; i++) {
                sum[i] = cols[w][i] + cols[w2][i];
            }
            dirs.push_back(sum);
            for (size_t w3 = 0; w3 < kNumClasses; w3++) {
                if (w3 != w && w3 != w2) {
                    dirs.push_back(cols[w3]);
                }
            }
            best = std::min(best, affine_distance_sq(cols[w], origin, dirs));
        }
    }
    return best;
}

double normalized_sensitivity(const DiagnosisScheme &scheme) {
    require_decomposable(scheme);
    return (double)scheme.metrics.m / scheme.metrics.M;
}

DiagnosisScheme make_scheme(const StabilizerCode &code, const BitMatrix &hg, const std::string &kind) {
    DiagnosisScheme s;
    s.kind = kind;
    s.hg = hg;
    s.hg_lambda = hg.times_lambda();
    s.d = diagnosis_columns(code, hg);
    s.faithful = is_faithful(code, hg);
    s.metrics.m = sensitivity(hg);
    if (s.faithful) {
        try {
            s.d_inv = qr_left_inverse(s.d);
            s.decomposable = true;
        } catch (const NotDecomposable &) {
            s.decomposable = false;
        }
    }
    if (s.decomposable) {
        s.metrics.M = boundary_distance(s);
        s.metrics.M_unconstrained = boundary_distance_unconstrained(s);
        s.metrics.N = (double)s.metrics.m / s.metrics.M;
    }
    return s;
}

BitVec diagnosis_of(const DiagnosisScheme &scheme, const BitVec &e) {
    if (e.size() != scheme.hg.cols()) {
        throw ContractViolation("diagnosis_of: error length mismatch");
    }
    return scheme.hg_lambda.apply(e);
}

std::vector<double> sigma_delta(const BitVec &delta, const std::vector<double> &v) {
    if (delta.size() != v.size()) {
        throw ContractViolation("sigma_delta: length mismatch");
    }
    std::vector<double> out(v.size());
    for (size_t i = 0; i < v.size(); i++) {
        out[i] = delta.get(i) ? 1.0 - v[i] : v[i];
    }
    return out;
}

namespace {

using Line = std::vector<size_t>;

std::vector<std::vector<size_t>> face_supports(const StabilizerCode &code) {
    std::vector<std::vector<size_t>> faces;
    for (const auto &s : code.stabilizers) {
        if (s.type == 'X') {
            faces.push_back(s.support);
        }
    }
    return faces;
}

// All minimum-size sets T disjoint from `seed` such that seed ∪ T has even
// overlap with every face and odd total size, sorted lexicographically.
std::vector<Line> complete_line(
    const std::vector<std::vector<size_t>> &faces, size_t n, const Line &seed, size_t max_extra, size_t limit) {
    std::vector<std::vector<size_t>> faces_of(n);
    for (size_t f = 0; f < faces.size(); f++) {
        for (size_t q : faces[f]) {
            faces_of[q].push_back(f);
        }
    }
    size_t max_deg = 0;
    for (const auto &fs : faces_of) {
        max_deg = std::max(max_deg, fs.size());
    }
    std::vector<uint8_t> unsat(faces.size(), 0);
    std::vector<uint8_t> blocked(n, 0);
    for (size_t q : seed) {
        blocked[q] = 1;
        for (size_t f : faces_of[q]) {
            unsat[f] ^= 1;
        }
    }
    std::vector<Line> found;
    Line chosen;
    auto dfs = [&](auto &&self, size_t budget) -> void {
        size_t count = 0, first = faces.size();
        for (size_t f = 0; f < faces.size(); f++) {
            if (unsat[f]) {
                count++;
                if (first == faces.size()) {
                    first = f;
                }
            }
        }
        if (count == 0) {
            if (budget == 0) {
                Line t = chosen;
                std::sort(t.begin(), t.end());
                found.push_back(t);
            }
            return;
        }
        if (budget == 0 || count > max_deg * budget) {
            return;
        }
        std::vector<size_t> forbidden;
        for (size_t q : faces[first]) {
            if (blocked[q]) {
                continue;
            }
            blocked[q] = 1;
            chosen.push_back(q);
            for (size_t f : faces_of[q]) {
                unsat[f] ^= 1;
            }
            self(self, budget - 1);
            for (size_t f : faces_of[q]) {
                unsat[f] ^= 1;
            }
            chosen.pop_back();
            // Stays blocked for later siblings.
            forbidden.push_back(q);
        }
        for (size_t q : forbidden) {
            blocked[q] = 0;
        }
    };
    for (size_t w = 0; w <= max_extra; w++) {
        if ((seed.size() + w) % 2 == 0) {
            continue;
        }
        dfs(dfs, w);
        if (!found.empty()) {
            break;
        }
    }
    std::sort(found.begin(), found.end());
    found.erase(std::unique(found.begin(), found.end()), found.end());
    if (found.size() > limit) {
        found.resize(limit);
    }
    return found;
}

Line merged(const Line &a, const Line &b) {
    Line out = a;
    out.insert(out.end(), b.begin(), b.end());
    std::sort(out.begin(), out.end());
    return out;
}

bool is_logical_line(const StabilizerCode &code, const Line &line, char type) {
    BitVec v(2 * code.n);
    for (size_t q : line) {
        v.set(type == 'X' ? q : q + code.n, true);
    }
    if (syndrome(code, v).any()) {
        return false;
    }
    return logical_class(code, v) != 0;
}

std::vector<std::vector<Line>> surface_lines(const StabilizerCode &code) {
    // Candidate lines are full rows and columns of the qubit layout.
    std::map<long, Line> rows, cols;
    for (size_t q = 0; q < code.n; q++) {
        rows[std::lround(code.qubit_coords[q].y * 2)].push_back(q);
        cols[std::lround(code.qubit_coords[q].x * 2)].push_back(q);
    }
    std::vector<Line> z_lines, x_lines;
    for (auto *group : {&rows, &cols}) {
        for (const auto &[key, line] : *group) {
            if (line.size() != code.d) {
                continue;
            }
            if (is_logical_line(code, line, 'Z')) {
                z_lines.push_back(line);
            }
            if (is_logical_line(code, line, 'X')) {
                x_lines.push_back(line);
            }
        }
    }
    if (z_lines.size() != code.d || x_lines.size() != code.d) {
        throw std::logic_error("surface layout does not have d straight logical lines per type");
    }
    return {z_lines, x_lines};
}

std::vector<std::vector<Line>> color_666_lines(const StabilizerCode &code) {
    size_t d = code.d;
    int w = 3 * ((int)d - 1) / 2;
    std::map<std::pair<int, int>, size_t> index;
    std::vector<std::pair<int, int>> lattice(code.n);
    for (size_t q = 0; q < code.n; q++) {
        int y = (int)std::lround(code.qubit_coords[q].y / (std::sqrt(3.0) / 2));
        int x = (int)std::lround(code.qubit_coords[q].x - 0.5 * y);
        lattice[q] = {x, y};
        index[{x, y}] = q;
    }
    auto faces = face_supports(code);
    std::vector<Line> first;
    for (size_t j = 0; j < (d + 1) / 2; j++) {
        int y = 3 * (int)j;
        Line seed;
        for (int x = 0; x <= w - y; x++) {
            auto it = index.find({x, y});
            if (it != index.end()) {
                seed.push_back(it->second);
            }
        }
        auto ext = complete_line(faces, code.n, seed, d, 1);
        if (ext.empty()) {
            throw std::logic_error("no completion for a 6.6.6 row");
        }
        first.push_back(merged(seed, ext.front()));
    }
    // The other two patterns are the 120-degree rotations of the first.
    std::vector<std::vector<Line>> patterns{first};
    for (int r = 0; r < 2; r++) {
        std::vector<Line> next;
        for (const Line &line : patterns.back()) {
            Line rotated;
            for (size_t q : line) {
                auto [x, y] = lattice[q];
                rotated.push_back(index.at({w - x - y, x}));
            }
            std::sort(rotated.begin(), rotated.end());
            next.push_back(rotated);
        }
        patterns.push_back(next);
    }
    return patterns;
}

// Four directions of straight seeds (rows, columns, both diagonals), each
// completed to a weight-d logical. A seeded greedy with restarts picks
// (d+1)/2 lines per direction so that no qubit is covered more than four
// times, the smallest cap compatible with the total line weight.
std::vector<std::vector<Line>> color_488_lines(const StabilizerCode &code) {
    size_t d = code.d;
    size_t per_pattern = (d + 1) / 2;
    constexpr int kCap = 4;
    constexpr size_t kMaxTies = 30;
    constexpr uint64_t kAttempts = 200000;
    auto faces = face_supports(code);
    std::vector<std::pair<long, long>> pos(code.n);
    for (size_t q = 0; q < code.n; q++) {
        pos[q] = {std::lround(code.qubit_coords[q].x), std::lround(code.qubit_coords[q].y)};
    }
    auto key_of = [&](int dir, size_t q) -> long {
        auto [x, y] = pos[q];
        switch (dir) {
            case 0:
                return y;
            case 1:
                return x;
            case 2:
                return x + y;
            default:
                return x - y;
        }
    };
    struct Candidate {
        long key;
        std::vector<Line> lines;
    };
    std::vector<std::vector<Candidate>> cands(4);
    for (int dir = 0; dir < 4; dir++) {
        std::map<long, Line> seeds;
        for (size_t q = 0; q < code.n; q++) {
            seeds[key_of(dir, q)].push_back(q);
        }
        for (const auto &[key, seed] : seeds) {
            if (seed.size() > d) {
                continue;
            }
            auto ext = complete_line(faces, code.n, seed, d - seed.size(), kMaxTies);
            if (ext.empty() || seed.size() + ext.front().size() != d) {
                continue;
            }
            Candidate c{key, {}};
            for (const auto &t : ext) {
                c.lines.push_back(merged(seed, t));
            }
            cands[dir].push_back(c);
        }
    }
    for (uint64_t attempt = 0; attempt < kAttempts; attempt++) {
        CounterRng rng(0x488, attempt);
        std::vector<int> cov(code.n, 0);
        std::vector<std::set<long>> used(4);
        std::vector<std::vector<Line>> patterns(4);
        bool ok = true;
        for (size_t round = 0; round < per_pattern && ok; round++) {
            for (int dir = 0; dir < 4 && ok; dir++) {
                std::pair<int, int> best_key{kCap, 0};
                std::vector<std::pair<long, const Line *>> best;
                for (const auto &c : cands[dir]) {
                    if (used[dir].count(c.key)) {
                        continue;
                    }
                    for (const auto &line : c.lines) {
                        int mx = 0, sum = 0;
                        for (size_t q : line) {
                            mx = std::max(mx, cov[q]);
                            sum += cov[q];
                        }
                        if (mx >= kCap) {
                            continue;
                        }
                        std::pair<int, int> key{mx, sum};
                        if (best.empty() || key < best_key) {
                            best_key = key;
                            best.clear();
                        }
                        if (key == best_key) {
                            best.push_back({c.key, &line});
                        }
                    }
                }
                if (best.empty()) {
                    ok = false;
                    break;
                }
                auto pick = best[rng.below(best.size())];
                used[dir].insert(pick.first);
                for (size_t q : *pick.second) {
                    cov[q]++;
                }
                patterns[dir].push_back(*pick.second);
            }
        }
        if (ok) {
            return patterns;
        }
    }
    throw std::logic_error("no 4.8.8 line set within the coverage cap");
}

BitVec line_operator(size_t n, const Line &line, char type) {
    BitVec v(2 * n);
    for (size_t q : line) {
        if (type == 'X' || type == 'Y') {
            v.set(q, true);
        }
        if (type == 'Z' || type == 'Y') {
            v.set(q + n, true);
        }
    }
    return v;
}

}  // namespace

std::vector<std::vector<std::vector<size_t>>> uniform_lines(const StabilizerCode &code) {
    switch (code.family) {
        case Family::surface_unrotated:
        case Family::surface_rotated:
            return surface_lines(code);
        case Family::color_666:
            return color_666_lines(code);
        case Family::color_488:
            return color_488_lines(code);
    }
    throw UnsupportedFamily("no uniform construction for this family");
}

BitMatrix uniform_construction(const StabilizerCode &code) {
    auto patterns = uniform_lines(code);
    size_t n = code.n;
    BitMatrix hg(0, 2 * n);
    if (is_surface(code.family)) {
        const auto &z_lines = patterns[0];
        const auto &x_lines = patterns[1];
        for (const auto &l : z_lines) {
            hg.append_row(line_operator(n, l, 'Z'));
        }
        for (const auto &l : x_lines) {
            hg.append_row(line_operator(n, l, 'X'));
        }
        for (size_t i = 0; i < z_lines.size(); i++) {
            hg.append_row(line_operator(n, x_lines[i], 'X') ^ line_operator(n, z_lines[i], 'Z'));
        }
        return hg;
    }
    for (const auto &pattern : patterns) {
        for (const auto &l : pattern) {
            for (char t : {'X', 'Z', 'Y'}) {
                hg.append_row(line_operator(n, l, t));
            }
        }
    }
    return hg;
}

BitMatrix short_construction(const StabilizerCode &code) {
    if (code.k != 1) {
        throw ContractViolation("short construction needs k = 1");
    }
    BitMatrix hg(0, 2 * code.n);
    for (size_t cls = 1; cls < kNumClasses; cls++) {
        hg.append_row(min_weight_logical(code, cls, code.n, PauliAlphabet::all));
    }
    return hg;
}

}  // namespace topodecode
