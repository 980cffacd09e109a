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

#include <branchmin/preprocess.hpp>

#include <algorithm>
#include <limits>
#include <map>
#include <string>

namespace branchmin {

namespace {

constexpr StateId kUnvisited = std::numeric_limits<StateId>::max();

// Compressed adjacency for an edge subset.
struct Csr {
    std::vector<std::uint32_t> offset;
    std::vector<StateId> target;

    template <typename Keep>
    Csr(std::size_t n, const std::vector<Edge>& edges, Keep keep) : offset(n + 1, 0) {
        for (const auto& e : edges)
            if (keep(e)) ++offset[e.src + 1];
        for (std::size_t i = 0; i < n; ++i) offset[i + 1] += offset[i];
        target.resize(offset[n]);
        auto fill = offset;
        for (const auto& e : edges)
            if (keep(e)) target[fill[e.src]++] = e.dst;
    }
};

// Iterative Tarjan. Returns component id per state, numbered in discovery
// order of component roots; callers renumber as needed.
std::vector<StateId> tarjan(std::size_t n, const Csr& g, std::size_t& count) {
    std::vector<StateId> index(n, kUnvisited), low(n, 0), comp(n, kUnvisited);
    std::vector<StateId> stack;
    std::vector<std::pair<StateId, std::uint32_t>> call;  // (state, next edge position)
    StateId next_index = 0;
    count = 0;
    for (StateId root = 0; root < n; ++root) {
        if (index[root] != kUnvisited) continue;
        call.emplace_back(root, g.offset[root]);
        index[root] = low[root] = next_index++;
        stack.push_back(root);
        while (!call.empty()) {
            auto& [v, pos] = call.back();
            if (pos < g.offset[v + 1]) {
                const StateId w = g.target[pos++];
                if (index[w] == kUnvisited) {
                    index[w] = low[w] = next_index++;
                    stack.push_back(w);
                    call.emplace_back(w, g.offset[w]);
                } else if (comp[w] == kUnvisited) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            const StateId done = v;
            call.pop_back();
            if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
            if (low[done] == index[done]) {
                StateId w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    comp[w] = static_cast<StateId>(count);
                } while (w != done);
                ++count;
            }
        }
    }
    return comp;
}

// Renumbers components by their smallest member.
std::vector<StateId> canonical_components(const std::vector<StateId>& comp, std::size_t count) {
    std::vector<StateId> first(count, kUnvisited);
    StateId next = 0;
    for (StateId s = 0; s < comp.size(); ++s)
        if (first[comp[s]] == kUnvisited) first[comp[s]] = next++;
    std::vector<StateId> out(comp.size());
    for (StateId s = 0; s < comp.size(); ++s) out[s] = first[comp[s]];
    return out;
}

std::string fresh_name(const std::vector<std::string>& taken, std::string base) {
    while (std::find(taken.begin(), taken.end(), base) != taken.end()) base += '\'';
    return base;
}

std::vector<bool> on_cycle(std::size_t n, const std::vector<Edge>& edges,
                           const std::vector<StateId>& comp, std::size_t count) {
    std::vector<std::uint32_t> size(count, 0);
    for (StateId s = 0; s < n; ++s) ++size[comp[s]];
    std::vector<bool> out(n, false);
    for (StateId s = 0; s < n; ++s) out[s] = size[comp[s]] > 1;
    for (const auto& e : edges)
        if (e.src == e.dst) out[e.src] = true;
    return out;
}

}  // namespace

PartitionMap label_partition(const KripkeStructure& k) {
    std::map<std::vector<PropId>, StateId> ids;
    std::vector<std::uint32_t> key(k.num_states());
    for (StateId s = 0; s < k.num_states(); ++s) {
        const auto l = k.label(s);
        auto [it, _] = ids.emplace(std::vector<PropId>(l.begin(), l.end()), s);
        key[s] = it->second;
    }
    return PartitionMap::from_keys(key);
}

std::vector<StateId> block_internal_sccs(std::size_t n_states,
                                         const std::vector<Edge>& edges,
                                         const PartitionMap& blocks,
                                         std::size_t* num_components) {
    const Csr g(n_states, edges, [&](const Edge& e) { return blocks[e.src] == blocks[e.dst]; });
    std::size_t count = 0;
    const auto raw = tarjan(n_states, g, count);
    auto comp = canonical_components(raw, count);
    if (num_components) *num_components = count;
    return comp;
}

SccContraction contract_sccs(const KripkeStructure& k, const PartitionMap& pi0) {
    std::size_t count = 0;
    auto comp = block_internal_sccs(k.num_states(), k.transitions(), pi0, &count);

    std::vector<std::vector<PropId>> labels(count);
    std::vector<bool> seen(count, false);
    for (StateId s = 0; s < k.num_states(); ++s) {
        if (seen[comp[s]]) continue;
        seen[comp[s]] = true;
        const auto l = k.label(s);
        labels[comp[s]].assign(l.begin(), l.end());
    }
    std::vector<Edge> edges;
    edges.reserve(k.num_transitions());
    for (const auto& e : k.transitions()) edges.push_back({comp[e.src], comp[e.dst]});
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    return {KripkeStructure(count, k.props(), std::move(labels), std::move(edges)), std::move(comp)};
}

std::vector<bool> on_same_label_cycle(const KripkeStructure& k) {
    const auto pi0 = label_partition(k);
    std::size_t count = 0;
    const auto comp = block_internal_sccs(k.num_states(), k.transitions(), pi0, &count);
    return on_cycle(k.num_states(), k.transitions(), comp, count);
}

KripkeStructure build_kd(const KripkeStructure& k) {
    const std::size_t n = k.num_states();
    const auto cyclic = on_same_label_cycle(k);

    auto props = k.props();
    const auto d = static_cast<PropId>(props.size());
    props.push_back(fresh_name(props, "d"));

    auto labels = k.labels();
    labels.push_back({d});

    auto edges = k.transitions();
    const auto sd = static_cast<StateId>(n);
    for (StateId s = 0; s < n; ++s)
        if (cyclic[s]) edges.push_back({s, sd});
    edges.push_back({sd, sd});
    return KripkeStructure(n + 1, std::move(props), std::move(labels), std::move(edges));
}

Embedding embed_lts(const Lts& l) {
    const std::size_t n = l.num_states();

    // Action states, one per distinct (action, target), ordered by (action, target).
    std::vector<std::pair<ActionId, StateId>> action_states;
    for (const auto& t : l.transitions())
        if (t.action != Lts::kTau) action_states.emplace_back(t.action, t.dst);
    std::sort(action_states.begin(), action_states.end());
    action_states.erase(std::unique(action_states.begin(), action_states.end()), action_states.end());
    auto action_state_id = [&](ActionId a, StateId t) {
        const auto it = std::lower_bound(action_states.begin(), action_states.end(), std::pair{a, t});
        return static_cast<StateId>(n + (it - action_states.begin()));
    };

    // Proposition 0 is bottom; proposition a (a >= 1) is action a.
    std::vector<std::string> props;
    props.push_back(fresh_name(l.actions(), "bot"));
    for (ActionId a = 1; a < l.actions().size(); ++a) props.push_back(l.action_name(a));

    std::vector<std::vector<PropId>> labels(n + action_states.size());
    for (StateId s = 0; s < n; ++s) labels[s] = {0};
    for (std::size_t i = 0; i < action_states.size(); ++i) labels[n + i] = {action_states[i].first};

    std::vector<Edge> edges;
    edges.reserve(2 * l.num_transitions());
    std::vector<bool> has_out(n, false);
    for (const auto& t : l.transitions()) {
        has_out[t.src] = true;
        if (t.action == Lts::kTau)
            edges.push_back({t.src, t.dst});
        else
            edges.push_back({t.src, action_state_id(t.action, t.dst)});
    }
    for (std::size_t i = 0; i < action_states.size(); ++i)
        edges.push_back({static_cast<StateId>(n + i), action_states[i].second});
    for (StateId s = 0; s < n; ++s)
        if (!has_out[s]) edges.push_back({s, s});

    return {KripkeStructure(n + action_states.size(), std::move(props), std::move(labels), std::move(edges)), n};
}

std::vector<bool> on_tau_cycle(const Lts& l) {
    std::vector<Edge> tau;
    for (const auto& t : l.transitions())
        if (t.action == Lts::kTau) tau.push_back({t.src, t.dst});
    const Csr g(l.num_states(), tau, [](const Edge&) { return true; });
    std::size_t count = 0;
    const auto comp = tarjan(l.num_states(), g, count);
    return on_cycle(l.num_states(), tau, comp, count);
}

Lts add_divergence_loops(const Lts& l) {
    const auto& acts = l.actions();
    if (std::find(acts.begin(), acts.end(), kDivAction) != acts.end())
        throw ModelError(ModelError::Kind::Reserved, 0,
                         "action '" + std::string(kDivAction) + "' is reserved for divergence");
    const auto cyclic = on_tau_cycle(l);
    auto actions = acts;
    const auto div = static_cast<ActionId>(actions.size());
    bool any = false;
    auto transitions = l.transitions();
    for (StateId s = 0; s < l.num_states(); ++s)
        if (cyclic[s]) {
            transitions.push_back({s, div, s});
            any = true;
        }
    if (any) actions.emplace_back(kDivAction);
    return Lts(l.num_states(), l.initial_state(), std::move(actions), std::move(transitions));
}

}  // namespace branchmin
