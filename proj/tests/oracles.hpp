/*
 * Copyright 2026 The branchmin Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Slow, definition-level reference computations used only by the tests.
// Nothing here calls into the refinement engines.

#ifndef BRANCHMIN_TESTS_ORACLES_HPP
#define BRANCHMIN_TESTS_ORACLES_HPP

#include <branchmin/lts_model.hpp>

#include <algorithm>
#include <random>
#include <vector>

namespace oracle {

using branchmin::Edge;
using branchmin::KripkeStructure;
using branchmin::Lts;
using branchmin::StateId;

using Matrix = std::vector<std::vector<bool>>;

inline Matrix adjacency(const KripkeStructure& k) {
    Matrix a(k.num_states(), std::vector<bool>(k.num_states(), false));
    for (const auto& e : k.transitions()) a[e.src][e.dst] = true;
    return a;
}

// Transitive (not reflexive) closure, Floyd-Warshall style.
inline Matrix closure(Matrix r) {
    const std::size_t n = r.size();
    for (std::size_t m = 0; m < n; ++m)
        for (std::size_t i = 0; i < n; ++i)
            if (r[i][m])
                for (std::size_t j = 0; j < n; ++j)
                    if (r[m][j]) r[i][j] = true;
    return r;
}

// Canonical class representatives of an equivalence given as a matrix.
inline std::vector<StateId> reps_of(const Matrix& rel) {
    std::vector<StateId> rep(rel.size());
    for (StateId s = 0; s < rel.size(); ++s) {
        StateId r = 0;
        while (!rel[s][r]) ++r;
        rep[s] = r;
    }
    return rep;
}

inline bool same_label(const KripkeStructure& k, StateId s, StateId t) {
    const auto a = k.label_names(s), b = k.label_names(t);
    return a == b;
}

// States on a cycle whose states all carry the same label.
inline std::vector<bool> same_label_cycle(const KripkeStructure& k) {
    auto a = adjacency(k);
    for (StateId s = 0; s < k.num_states(); ++s)
        for (StateId t = 0; t < k.num_states(); ++t)
            if (a[s][t] && !same_label(k, s, t)) a[s][t] = false;
    const auto c = closure(a);
    std::vector<bool> out(k.num_states());
    for (StateId s = 0; s < k.num_states(); ++s) out[s] = c[s][s];
    return out;
}

// Greatest divergence-blind stuttering equivalence, straight from the
// definition: s R t needs equal labels and every step s -> s' is matched by
// t = t0 -> ... -> tk with s R ti for i < k and s' R tk.
inline std::vector<StateId> dbs_classes(const KripkeStructure& k) {
    const std::size_t n = k.num_states();
    std::vector<std::vector<StateId>> succ(n);
    for (const auto& e : k.transitions()) succ[e.src].push_back(e.dst);
    Matrix rel(n, std::vector<bool>(n));
    for (StateId s = 0; s < n; ++s)
        for (StateId t = 0; t < n; ++t) rel[s][t] = same_label(k, s, t);

    auto matches = [&](StateId s, StateId t) {
        // States reachable from t through states related to s.
        std::vector<bool> seen(n, false);
        std::vector<StateId> stack{t};
        seen[t] = true;
        std::vector<StateId> region;
        while (!stack.empty()) {
            const StateId u = stack.back();
            stack.pop_back();
            region.push_back(u);
            for (StateId v : succ[u])
                if (!seen[v] && rel[s][v]) {
                    seen[v] = true;
                    stack.push_back(v);
                }
        }
        for (StateId s1 : succ[s]) {
            bool ok = rel[s1][t];
            for (StateId u : region)
                for (StateId v : succ[u]) ok = ok || rel[s1][v];
            if (!ok) return false;
        }
        return true;
    };
    for (bool changed = true; changed;) {
        changed = false;
        for (StateId s = 0; s < n; ++s)
            for (StateId t = s + 1; t < n; ++t)
                if (rel[s][t] && (!matches(s, t) || !matches(t, s))) {
                    rel[s][t] = rel[t][s] = false;
                    changed = true;
                }
    }
    return reps_of(rel);
}

// Stuttering equivalence: dbs on K_d, built here independently.
inline std::vector<StateId> stuttering_classes(const KripkeStructure& k) {
    const std::size_t n = k.num_states();
    const auto cyc = same_label_cycle(k);
    auto props = k.props();
    std::string d = "d";
    while (std::find(props.begin(), props.end(), d) != props.end()) d += "_";
    props.push_back(d);
    auto labels = k.labels();
    labels.push_back({static_cast<branchmin::PropId>(props.size() - 1)});
    auto edges = k.transitions();
    for (StateId s = 0; s < n; ++s)
        if (cyc[s]) edges.push_back({s, static_cast<StateId>(n)});
    edges.push_back({static_cast<StateId>(n), static_cast<StateId>(n)});
    const KripkeStructure kd(n + 1, props, labels, edges);
    auto rep = dbs_classes(kd);
    rep.pop_back();
    return rep;
}

// Greatest branching bisimulation. With divergence, states on a tau-cycle
// first get a self-loop with a fresh action, so having an infinite tau-path
// inside the class becomes an observable step. (Refining on "diverges in
// the current class" directly is not monotone and can split too much.)
inline std::vector<StateId> branching_classes(const Lts& l, bool divergence) {
    if (divergence) {
        const std::size_t n = l.num_states();
        Matrix tau(n, std::vector<bool>(n, false));
        for (const auto& t : l.transitions())
            if (t.action == Lts::kTau) tau[t.src][t.dst] = true;
        const auto c = closure(tau);
        auto actions = l.actions();
        actions.push_back("~div~");
        auto trans = l.transitions();
        for (StateId s = 0; s < n; ++s)
            if (c[s][s]) trans.push_back({s, static_cast<branchmin::ActionId>(actions.size() - 1), s});
        return branching_classes(Lts(n, l.initial_state(), actions, trans), false);
    }
    const std::size_t n = l.num_states();
    Matrix tau(n, std::vector<bool>(n, false));
    std::vector<std::vector<branchmin::LabelledEdge>> out(n);
    for (const auto& t : l.transitions()) {
        out[t.src].push_back(t);
        if (t.action == Lts::kTau) tau[t.src][t.dst] = true;
    }
    auto star = closure(tau);
    for (StateId s = 0; s < n; ++s) star[s][s] = true;

    Matrix rel(n, std::vector<bool>(n, true));
    auto matches = [&](StateId s, StateId t) {
        for (const auto& e : out[s]) {
            if (e.action == Lts::kTau && rel[e.dst][t]) continue;
            bool found = false;
            for (StateId t1 = 0; t1 < n && !found; ++t1)
                if (star[t][t1] && rel[s][t1])
                    for (const auto& f : out[t1])
                        found = found || (f.action == e.action && rel[e.dst][f.dst]);
            if (!found) return false;
        }
        return true;
    };
    for (bool changed = true; changed;) {
        changed = false;
        for (StateId s = 0; s < n; ++s)
            for (StateId t = s + 1; t < n; ++t)
                if (rel[s][t] && (!matches(s, t) || !matches(t, s))) {
                    rel[s][t] = rel[t][s] = false;
                    changed = true;
                }
    }
    return reps_of(rel);
}

// Checks the bisimulation conditions for a given partition directly: inside
// every class, each step is matched through tau-steps that stay in the
// class, and (with divergence) either all or no states have an infinite
// tau-path inside the class.
inline bool is_branching_partition(const Lts& l, const std::vector<StateId>& cls, bool divergence) {
    const std::size_t n = l.num_states();
    Matrix inner(n, std::vector<bool>(n, false));
    std::vector<std::vector<branchmin::LabelledEdge>> out(n);
    for (const auto& t : l.transitions()) {
        out[t.src].push_back(t);
        if (t.action == Lts::kTau && cls[t.src] == cls[t.dst]) inner[t.src][t.dst] = true;
    }
    auto reach = closure(inner);
    for (StateId s = 0; s < n; ++s) reach[s][s] = true;
    auto matches = [&](StateId s, StateId t) {
        for (const auto& e : out[s]) {
            if (e.action == Lts::kTau && cls[e.dst] == cls[s]) continue;
            bool found = false;
            for (StateId t1 = 0; t1 < n && !found; ++t1)
                if (reach[t][t1])
                    for (const auto& f : out[t1]) found = found || (f.action == e.action && cls[f.dst] == cls[e.dst]);
            if (!found) return false;
        }
        return true;
    };
    const auto c = closure(inner);
    std::vector<bool> div(n, false);
    for (StateId s = 0; s < n; ++s)
        for (StateId u = 0; u < n; ++u) div[s] = div[s] || (reach[s][u] && c[u][u]);
    for (StateId s = 0; s < n; ++s)
        for (StateId t = 0; t < n; ++t)
            if (cls[s] == cls[t] && (!matches(s, t) || (divergence && div[s] != div[t]))) return false;
    return true;
}

// split(B', B) by forward search from each state of B'.
inline std::vector<StateId> split_forward(const std::vector<StateId>& bprime,
                                          const std::vector<bool>& in_bbold,
                                          const KripkeStructure& k) {
    const std::size_t n = k.num_states();
    std::vector<bool> in_b(n, false);
    for (StateId s : bprime) in_b[s] = true;
    std::vector<std::vector<StateId>> succ(n);
    for (const auto& e : k.transitions()) succ[e.src].push_back(e.dst);
    std::vector<StateId> out;
    for (StateId s : bprime) {
        std::vector<bool> seen(n, false);
        std::vector<StateId> stack{s};
        seen[s] = true;
        bool hit = false;
        while (!stack.empty() && !hit) {
            const StateId u = stack.back();
            stack.pop_back();
            for (StateId v : succ[u]) {
                if (in_bbold[v]) hit = true;
                if (in_b[v] && !seen[v]) {
                    seen[v] = true;
                    stack.push_back(v);
                }
            }
        }
        if (hit) out.push_back(s);
    }
    return out;
}

// No cycle of length >= 2 inside any block. Self-loops are allowed.
inline bool cycle_free(const KripkeStructure& k, const std::vector<StateId>& block_of) {
    auto a = adjacency(k);
    for (StateId s = 0; s < k.num_states(); ++s)
        for (StateId t = 0; t < k.num_states(); ++t)
            if (s == t || block_of[s] != block_of[t]) a[s][t] = false;
    const auto c = closure(a);
    for (StateId s = 0; s < k.num_states(); ++s)
        if (c[s][s]) return false;
    return true;
}

// Random Kripke structure together with a random partition that refines the
// labels and is cycle-free: block-internal edges only go up a random rank.
struct CycleFreeInstance {
    KripkeStructure k;
    std::vector<StateId> block_of;
    std::size_t num_blocks;
};

inline CycleFreeInstance random_cycle_free(std::size_t n, std::size_t m, std::size_t n_blocks,
                                           std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto pick = [&](std::size_t bound) {
        return static_cast<StateId>(std::uniform_int_distribution<std::size_t>(0, bound - 1)(rng));
    };
    std::vector<StateId> block_of(n), rank(n);
    for (StateId s = 0; s < n; ++s) {
        block_of[s] = pick(n_blocks);
        rank[s] = pick(4 * n);
    }
    // Labels: block index modulo 2 spread over two props, so labels refine blocks coarsely.
    std::vector<std::vector<branchmin::PropId>> labels(n);
    for (StateId s = 0; s < n; ++s) labels[s] = {static_cast<branchmin::PropId>(block_of[s] % 2)};

    std::vector<Edge> edges;
    std::vector<bool> has(n * n, false);
    auto add = [&](StateId s, StateId t) {
        if (has[s * n + t]) return;
        if (s != t && block_of[s] == block_of[t] && rank[s] >= rank[t]) return;
        has[s * n + t] = true;
        edges.push_back({s, t});
    };
    for (std::size_t i = 0; i < 4 * m && edges.size() < m; ++i) add(pick(n), pick(n));
    std::vector<bool> out(n, false);
    for (const auto& e : edges) out[e.src] = true;
    for (StateId s = 0; s < n; ++s)
        if (!out[s]) add(s, s);
    return {KripkeStructure(n, {"p", "q"}, std::move(labels), std::move(edges)), std::move(block_of),
            n_blocks};
}

}  // namespace oracle

#endif
