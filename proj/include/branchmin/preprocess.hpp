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

#ifndef BRANCHMIN_PREPROCESS_HPP
#define BRANCHMIN_PREPROCESS_HPP

#include <branchmin/lts_model.hpp>

#include <string_view>
#include <vector>

namespace branchmin {

/// Reserved action name used to mark divergence.
inline constexpr std::string_view kDivAction = "div";

/// Partition of the states by identical label sets.
PartitionMap label_partition(const KripkeStructure& k);

/**
 * Strongly connected components of the subgraph that keeps only transitions
 * whose endpoints share a block of `blocks`. Components are numbered in order
 * of their smallest state. Iterative, so deep chains are fine.
 */
std::vector<StateId> block_internal_sccs(std::size_t n_states,
                                         const std::vector<Edge>& edges,
                                         const PartitionMap& blocks,
                                         std::size_t* num_components = nullptr);

struct SccContraction {
    KripkeStructure contracted;
    std::vector<StateId> orig_to_new;
};

/// Collapses each same-block SCC of `k` into one state. `pi0` must be the
/// label partition of `k`. Edges inside a component become a self-loop.
SccContraction contract_sccs(const KripkeStructure& k, const PartitionMap& pi0);

/// States lying on a cycle of identically labelled states (self-loops count).
std::vector<bool> on_same_label_cycle(const KripkeStructure& k);

/**
 * Adds a fresh state labelled with a fresh proposition and a self-loop, plus
 * an edge to it from every state on a same-label cycle. The fresh state gets
 * id `k.num_states()`.
 */
KripkeStructure build_kd(const KripkeStructure& k);

struct Embedding {
    KripkeStructure kripke;
    /// Original LTS states occupy ids [0, orig_states).
    std::size_t orig_states = 0;
};

/**
 * Kripke embedding of an LTS: s -a-> t becomes s -> <a,t> -> t, s -tau-> t
 * stays a direct edge. Original states are labelled with a fresh bottom
 * proposition, action states with their action. LTS deadlocks get a
 * self-loop so the result is total.
 */
Embedding embed_lts(const Lts& l);

/// States on a tau-cycle (tau self-loops count).
std::vector<bool> on_tau_cycle(const Lts& l);

/// Adds a `div` self-loop to every state on a tau-cycle. Throws
/// ModelError(Reserved) if `l` already uses the `div` action.
Lts add_divergence_loops(const Lts& l);

}  // namespace branchmin

#endif
