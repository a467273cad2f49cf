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

#include "topodecode/baselines.h"

#include <bit>
#include <deque>
#include <limits>

namespace topodecode {

BitVec md_decode(const StabilizerCode &code, const NoiseModel &model, const BitVec &s, size_t max_weight) {
    if (s.size() != code.num_checks()) {
        throw ContractViolation("md_decode: syndrome length mismatch");
    }
    if (max_weight == 0) {
        max_weight = code.n;
    }
    // Under bit flips an X-only solution always reaches the minimum weight
    // and beats any equal-weight solution containing Z, which has probability 0.
    if (model.kind == NoiseKind::bit_flip) {
        auto e = min_weight_solution(code.hc_lambda, s, max_weight, PauliAlphabet::x_only);
        if (e) {
            return *e;
        }
    }
    auto e = min_weight_solution(code.hc_lambda, s, max_weight, PauliAlphabet::all);
    if (!e) {
        throw BoundExceeded("no consistent error within weight " + std::to_string(max_weight));
    }
    return *e;
}

DefectGraph defect_graph(const StabilizerCode &code, const BitVec &s, char check_type) {
    if (!is_surface(code.family)) {
        throw UnsupportedFamily("matching decoder needs a surface code");
    }
    if (s.size() != code.num_checks()) {
        throw ContractViolation("defect_graph: syndrome length mismatch");
    }
    // Nodes are the checks of one type plus a single boundary node.
    std::vector<size_t> node_of(code.num_checks(), SIZE_MAX);
    size_t nodes = 0;
    for (size_t r = 0; r < code.stabilizers.size(); r++) {
        if (code.stabilizers[r].type == check_type) {
            node_of[r] = nodes++;
        }
    }
    size_t boundary = nodes;
    std::vector<std::vector<size_t>> touching(code.n);
    for (size_t r = 0; r < code.stabilizers.size(); r++) {
        if (node_of[r] == SIZE_MAX) {
            continue;
        }
        for (size_t q : code.stabilizers[r].support) {
            touching[q].push_back(node_of[r]);
        }
    }
    struct Edge {
        size_t to, qubit;
    };
    std::vector<std::vector<Edge>> adj(nodes + 1);
    for (size_t q = 0; q < code.n; q++) {
        const auto &t = touching[q];
        if (t.size() == 1) {
            adj[t[0]].push_back({boundary, q});
            adj[boundary].push_back({t[0], q});
        } else if (t.size() == 2) {
            adj[t[0]].push_back({t[1], q});
            adj[t[1]].push_back({t[0], q});
        } else if (t.size() > 2) {
            throw std::logic_error("qubit in more than two checks of one type");
        }
    }

    DefectGraph g;
    g.check_type = check_type;
    std::vector<size_t> defect_nodes;
    for (size_t r : s.ones()) {
        if (node_of[r] != SIZE_MAX) {
            g.defects.push_back(r);
            defect_nodes.push_back(node_of[r]);
        }
    }
    size_t m = g.defects.size();
    g.cost.assign(m, std::vector<size_t>(m, 0));
    g.path.assign(m, std::vector<std::vector<size_t>>(m));
    g.boundary_cost.assign(m, SIZE_MAX);
    g.boundary_path.assign(m, {});
    for (size_t i = 0; i < m; i++) {
        std::vector<size_t> dist(nodes + 1, SIZE_MAX), parent(nodes + 1), via(nodes + 1);
        std::deque<size_t> queue{defect_nodes[i]};
        dist[defect_nodes[i]] = 0;
        while (!queue.empty()) {
            size_t u = queue.front();
            queue.pop_front();
            if (u == boundary) {
                continue;  // paths may end at the boundary but not cross it
            }
            for (const Edge &e : adj[u]) {
                if (dist[e.to] == SIZE_MAX) {
                    dist[e.to] = dist[u] + 1;
                    parent[e.to] = u;
                    via[e.to] = e.qubit;
                    queue.push_back(e.to);
                }
            }
        }
        auto trace = [&](size_t target) {
            std::vector<size_t> qs;
            for (size_t v = target; v != defect_nodes[i]; v = parent[v]) {
                qs.push_back(via[v]);
            }
            return qs;
        };
        g.boundary_cost[i] = dist[boundary];
        if (dist[boundary] != SIZE_MAX) {
            g.boundary_path[i] = trace(boundary);
        }
        for (size_t j = 0; j < m; j++) {
            if (j == i) {
                continue;
            }
            g.cost[i][j] = dist[defect_nodes[j]];
            if (dist[defect_nodes[j]] != SIZE_MAX) {
                g.path[i][j] = trace(defect_nodes[j]);
            }
        }
    }
    return g;
}

Matching min_weight_matching(const DefectGraph &g, size_t cap) {
    size_t m = g.defects.size();
    if (m > cap) {
        throw TooManyDefects(std::to_string(m) + " defects exceed the matching cap of " + std::to_string(cap));
    }
    constexpr uint32_t kInf = std::numeric_limits<uint32_t>::max() / 4;
    auto clamp = [&](size_t c) { return c == SIZE_MAX ? kInf : (uint32_t)c; };
    size_t states = (size_t)1 << m;
    std::vector<uint32_t> best(states, kInf);
    std::vector<int8_t> choice(states, -1);
    best[0] = 0;
    // The lowest defect in a mask is matched either to the boundary or to
    // another defect in the mask.
    for (size_t mask = 1; mask < states; mask++) {
        size_t i = (size_t)std::countr_zero(mask);
        size_t rest = mask ^ ((size_t)1 << i);
        uint32_t b = std::min(kInf, clamp(g.boundary_cost[i]) + best[rest]);
        best[mask] = b;
        choice[mask] = -1;
        for (size_t bits = rest; bits; bits &= bits - 1) {
            size_t j = (size_t)std::countr_zero(bits);
            uint32_t c = clamp(g.cost[i][j]) + best[rest ^ ((size_t)1 << j)];
            if (c < best[mask]) {
                best[mask] = c;
                choice[mask] = (int8_t)j;
            }
        }
    }
    Matching out;
    size_t full = states - 1;
    if (best[full] >= kInf) {
        throw std::logic_error("defects cannot be matched");
    }
    out.cost = best[full];
    for (size_t mask = full; mask;) {
        size_t i = (size_t)std::countr_zero(mask);
        int j = choice[mask];
        out.pairs.push_back({(int)i, j});
        mask ^= (size_t)1 << i;
        if (j >= 0) {
            mask ^= (size_t)1 << j;
        }
    }
    return out;
}

MwpmResult mwpm_decode_detailed(const StabilizerCode &code, const BitVec &s, size_t cap) {
    size_t n = code.n;
    MwpmResult res;
    res.recovery = BitVec(2 * n);
    // Z checks see X errors; X checks see Z errors.
    for (char type : {'Z', 'X'}) {
        DefectGraph g = defect_graph(code, s, type);
        Matching mt = min_weight_matching(g, cap);
        size_t offset = type == 'Z' ? 0 : n;
        for (auto [i, j] : mt.pairs) {
            const auto &qs = j < 0 ? g.boundary_path[(size_t)i] : g.path[(size_t)i][(size_t)j];
            for (size_t q : qs) {
                res.recovery.flip(q + offset);
            }
        }
        (type == 'Z' ? res.cost_x : res.cost_z) = mt.cost;
    }
    return res;
}

BitVec mwpm_decode(const StabilizerCode &code, const BitVec &s, size_t cap) {
    return mwpm_decode_detailed(code, s, cap).recovery;
}

std::optional<BitVec> reconstruct_error(const StabilizerCode &code, const BitMatrix &hg, const BitVec &s,
                                        const BitVec &g) {
    if (s.size() != code.num_checks() || g.size() != hg.rows()) {
        throw ContractViolation("reconstruct_error: length mismatch");
    }
    BitMatrix a = code.hc_lambda.stacked(hg.times_lambda());
    BitVec rhs(a.rows());
    for (size_t i : s.ones()) {
        rhs.set(i, true);
    }
    for (size_t i : g.ones()) {
        rhs.set(s.size() + i, true);
    }
    return gf2_solve(a, rhs);
}

}  // namespace topodecode
