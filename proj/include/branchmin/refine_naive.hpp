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

#ifndef BRANCHMIN_REFINE_NAIVE_HPP
#define BRANCHMIN_REFINE_NAIVE_HPP

#include <branchmin/lts_model.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace branchmin {

/// Explicit block lists plus the inverse map.
struct SimplePartition {
    std::vector<std::vector<StateId>> blocks;
    std::vector<std::uint32_t> block_of;

    static SimplePartition from_map(const PartitionMap& p);
    PartitionMap to_map() const;
};

/**
 * States of `bprime` that reach `in_bbold` by a path staying inside
 * `bprime` followed by one step. If bprime is contained in bbold the whole
 * block is returned. Self-loops are ignored otherwise.
 */
std::vector<StateId> split_set(const std::vector<StateId>& bprime,
                               const std::vector<bool>& in_bbold,
                               const KripkeStructure& k);

/**
 * Bottom-state instability test: some state of bprime has a step into bbold
 * and some bottom state of bprime has none. Only meaningful for cycle-free
 * blocks. A block inside bbold is never unstable.
 */
bool is_unstable(const std::vector<StateId>& bprime,
                 const std::vector<bool>& in_bbold,
                 const KripkeStructure& k);

struct NaiveOptions {
    /// When set, each pass visits splitters in an order shuffled with this seed.
    std::optional<std::uint64_t> shuffle_seed;
    /// Called after every pass with the current partition.
    std::function<void(const SimplePartition&)> on_round;
};

struct NaiveStats {
    std::size_t passes = 0;
    std::size_t splits = 0;
};

/**
 * Coarsest divergence-blind stuttering stable refinement of the label
 * partition, by repeatedly splitting under single blocks until nothing
 * changes. The label partition must be cycle-free (run contract_sccs first).
 */
PartitionMap stabilize_naive(const KripkeStructure& k, const NaiveOptions& opts = {},
                             NaiveStats* stats = nullptr);

/// Branching bisimilarity by refining a relation on S x S. Quadratic memory,
/// meant for small systems.
PartitionMap branching_bisim_relational(const Lts& l);

}  // namespace branchmin

#endif
