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

#ifndef BRANCHMIN_LTS_MODEL_HPP
#define BRANCHMIN_LTS_MODEL_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace branchmin {

using StateId = std::uint32_t;
using ActionId = std::uint32_t;
using PropId = std::uint32_t;

/// Errors raised while parsing or validating systems. `line` is 1-based and
/// zero when the error is not tied to an input line.
class ModelError : public std::runtime_error {
public:
    enum class Kind { Parse, Range, Duplicate, Totality, Reserved };

    ModelError(Kind kind, std::size_t line, const std::string& what);

    Kind kind() const noexcept { return kind_; }
    std::size_t line() const noexcept { return line_; }

private:
    Kind kind_;
    std::size_t line_;
};

struct Edge {
    StateId src;
    StateId dst;

    friend bool operator==(const Edge&, const Edge&) = default;
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct LabelledEdge {
    StateId src;
    ActionId action;
    StateId dst;

    friend bool operator==(const LabelledEdge&, const LabelledEdge&) = default;
};

/**
 * A Kripke structure: states labelled with sets of atomic propositions and a
 * total transition relation. Propositions are kept sorted by name and each
 * state's label is a sorted list of proposition ids.
 *
 * Construction validates: ids in range, no duplicate edges, every state has
 * an outgoing transition. Instances are immutable afterwards.
 */
class KripkeStructure {
public:
    KripkeStructure() = default;

    /// `props` need not be sorted; labels refer to positions in `props`.
    KripkeStructure(std::size_t n_states,
                    std::vector<std::string> props,
                    std::vector<std::vector<PropId>> labels,
                    std::vector<Edge> transitions);

    std::size_t num_states() const noexcept { return n_states_; }
    std::size_t num_transitions() const noexcept { return transitions_.size(); }
    const std::vector<std::string>& props() const noexcept { return props_; }
    std::span<const PropId> label(StateId s) const { return labels_[s]; }
    const std::vector<std::vector<PropId>>& labels() const noexcept { return labels_; }
    const std::vector<Edge>& transitions() const noexcept { return transitions_; }

    /// Label of `s` as proposition names.
    std::vector<std::string> label_names(StateId s) const;

    /// Equal up to proposition renumbering and transition order.
    bool same_system(const KripkeStructure& other) const;

private:
    std::size_t n_states_ = 0;
    std::vector<std::string> props_;
    std::vector<std::vector<PropId>> labels_;
    std::vector<Edge> transitions_;
};

/**
 * A labelled transition system. Action 0 is always the internal action,
 * named "tau"; other actions keep their first-appearance order.
 */
class Lts {
public:
    static constexpr ActionId kTau = 0;
    static constexpr std::string_view kTauName = "tau";

    Lts() : actions_{std::string(kTauName)} {}

    /// `actions[0]` must be the internal action.
    Lts(std::size_t n_states,
        StateId initial,
        std::vector<std::string> actions,
        std::vector<LabelledEdge> transitions);

    std::size_t num_states() const noexcept { return n_states_; }
    std::size_t num_transitions() const noexcept { return transitions_.size(); }
    StateId initial_state() const noexcept { return initial_; }
    const std::vector<std::string>& actions() const noexcept { return actions_; }
    const std::string& action_name(ActionId a) const { return actions_[a]; }
    const std::vector<LabelledEdge>& transitions() const noexcept { return transitions_; }

    /// Equal up to action renumbering and transition order.
    bool same_system(const Lts& other) const;

private:
    std::size_t n_states_ = 0;
    StateId initial_ = 0;
    std::vector<std::string> actions_;
    std::vector<LabelledEdge> transitions_;
};

/**
 * Canonical encoding of a partition: every state maps to the smallest state
 * id of its class.
 */
class PartitionMap {
public:
    PartitionMap() = default;

    /// Builds the canonical map from any per-state class key.
    template <typename Key>
    static PartitionMap from_keys(std::span<const Key> keys);

    static PartitionMap from_keys(std::span<const std::uint32_t> keys) {
        return from_keys<std::uint32_t>(keys);
    }

    /// Accepts an already canonical vector; throws std::invalid_argument otherwise.
    explicit PartitionMap(std::vector<StateId> class_of);

    std::size_t size() const noexcept { return class_of_.size(); }
    StateId operator[](StateId s) const { return class_of_[s]; }
    const std::vector<StateId>& class_of() const noexcept { return class_of_; }
    std::size_t num_classes() const;

    /// Dense class index per state, ordered by representative.
    std::vector<std::uint32_t> class_indices() const;

    friend bool operator==(const PartitionMap&, const PartitionMap&) = default;

private:
    std::vector<StateId> class_of_;
};

template <typename Key>
PartitionMap PartitionMap::from_keys(std::span<const Key> keys) {
    std::vector<StateId> out(keys.size());
    std::vector<std::pair<Key, StateId>> first;
    first.reserve(keys.size());
    for (StateId s = 0; s < keys.size(); ++s) first.emplace_back(keys[s], s);
    std::sort(first.begin(), first.end());
    for (std::size_t i = 0; i < first.size();) {
        std::size_t j = i;
        StateId rep = first[i].second;
        while (j < first.size() && first[j].first == first[i].first) ++j;
        for (std::size_t k = i; k < j; ++k) out[first[k].second] = rep;
        i = j;
    }
    PartitionMap pm;
    pm.class_of_ = std::move(out);
    return pm;
}

// .aut (Aldebaran) format.
Lts parse_aut(std::string_view text);
std::string write_aut(const Lts& lts);

// Kripke text format:
//   kripke <n> <m>
//   label <state> <p1,p2,...|->     (n lines)
//   trans <src> <dst>               (m lines)
KripkeStructure parse_kripke(std::string_view text);
std::string write_kripke(const KripkeStructure& k);

}  // namespace branchmin

#endif
