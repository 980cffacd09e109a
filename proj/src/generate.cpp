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

#include <branchmin/generate.hpp>

#include <algorithm>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_set>

namespace branchmin {

namespace {

std::uint64_t pick(std::mt19937_64& rng, std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(rng);
}

}  // namespace

KripkeStructure random_kripke(const RandomKripkeParams& p, std::uint64_t seed) {
    if (p.states == 0) throw std::invalid_argument("random_kripke: need at least one state");
    std::mt19937_64 rng(seed);
    const std::size_t n = p.states;
    const std::size_t m = std::clamp(p.transitions, n, n * n);

    std::vector<std::string> props;
    for (std::size_t i = 0; i < p.props; ++i) props.push_back("p" + std::to_string(i));
    std::vector<std::vector<PropId>> labels(n);
    for (auto& l : labels)
        for (PropId i = 0; i < p.props; ++i)
            if (rng() & 1) l.push_back(i);

    std::unordered_set<std::uint64_t> seen;
    std::vector<Edge> edges;
    edges.reserve(m);
    auto add = [&](StateId s, StateId t) {
        if (seen.insert((std::uint64_t{s} << 32) | t).second) edges.push_back({s, t});
    };
    for (StateId s = 0; s < n; ++s) add(s, static_cast<StateId>(pick(rng, n)));
    while (edges.size() < m)
        add(static_cast<StateId>(pick(rng, n)), static_cast<StateId>(pick(rng, n)));
    return KripkeStructure(n, std::move(props), std::move(labels), std::move(edges));
}

Lts random_lts(const RandomLtsParams& p, std::uint64_t seed) {
    if (p.states == 0) throw std::invalid_argument("random_lts: need at least one state");
    std::mt19937_64 rng(seed);
    const std::size_t n = p.states;
    const std::size_t m = std::min(p.transitions, n * n * (p.visible_actions + 1));

    std::vector<std::string> actions{std::string(Lts::kTauName)};
    for (std::size_t i = 0; i < p.visible_actions; ++i) actions.push_back("a" + std::to_string(i));

    std::bernoulli_distribution internal(p.visible_actions == 0 ? 1.0 : p.tau_density);
    std::unordered_set<std::uint64_t> seen;
    std::vector<LabelledEdge> edges;
    edges.reserve(m);
    while (edges.size() < m) {
        const auto s = static_cast<StateId>(pick(rng, n));
        const auto t = static_cast<StateId>(pick(rng, n));
        const auto a = internal(rng) ? Lts::kTau : static_cast<ActionId>(1 + pick(rng, p.visible_actions));
        const std::uint64_t key = (std::uint64_t{s} * n + t) * (p.visible_actions + 1) + a;
        if (seen.insert(key).second) edges.push_back({s, a, t});
    }
    return Lts(n, 0, std::move(actions), std::move(edges));
}

Lts tau_sequence(std::size_t n) {
    std::vector<LabelledEdge> edges;
    edges.reserve(2 * n);
    for (StateId i = 0; i < n; ++i) {
        edges.push_back({2 * i, 1, 2 * i + 1});
        edges.push_back({2 * i + 1, Lts::kTau, 2 * i + 2});
    }
    return Lts(2 * n + 1, 0, {std::string(Lts::kTauName), "a"}, std::move(edges));
}

Lts tau_tree(std::size_t depth) {
    if (depth == 0 || depth > 30) throw std::invalid_argument("tau_tree: depth must be in [1, 30]");
    // Heap numbering for the tau levels: node i has children 2i+1, 2i+2.
    const std::size_t inner = (std::size_t{1} << depth) - 1;
    const std::size_t last_level = std::size_t{1} << (depth - 1);
    const std::size_t first_last = inner - last_level;

    std::vector<std::string> actions{std::string(Lts::kTauName)};
    std::vector<LabelledEdge> edges;
    edges.reserve(inner - 1 + last_level);
    for (std::size_t i = 0; i < first_last; ++i) {
        edges.push_back({static_cast<StateId>(i), Lts::kTau, static_cast<StateId>(2 * i + 1)});
        edges.push_back({static_cast<StateId>(i), Lts::kTau, static_cast<StateId>(2 * i + 2)});
    }
    for (std::size_t j = 0; j < last_level; ++j) {
        actions.push_back("l" + std::to_string(j));
        edges.push_back({static_cast<StateId>(first_last + j), static_cast<ActionId>(j + 1),
                         static_cast<StateId>(inner + j)});
    }
    return Lts(inner + last_level, 0, std::move(actions), std::move(edges));
}

}  // namespace branchmin
