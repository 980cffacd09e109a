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

#ifndef BRANCHMIN_GENERATE_HPP
#define BRANCHMIN_GENERATE_HPP

#include <branchmin/lts_model.hpp>

#include <cstdint>

namespace branchmin {

struct RandomKripkeParams {
    std::size_t states = 10;
    /// Target transition count, clamped to [states, states^2].
    std::size_t transitions = 20;
    std::size_t props = 2;
};

struct RandomLtsParams {
    std::size_t states = 10;
    /// Clamped to states^2 * (visible_actions + 1).
    std::size_t transitions = 20;
    std::size_t visible_actions = 2;
    /// Probability that a transition is internal.
    double tau_density = 0.4;
};

/// Uniform random total Kripke structure; each state first gets one random
/// successor, remaining edges are drawn uniformly without repetition.
KripkeStructure random_kripke(const RandomKripkeParams& p, std::uint64_t seed);

/// Uniform random LTS with initial state 0. Deadlocks are allowed.
Lts random_lts(const RandomLtsParams& p, std::uint64_t seed);

/// The chain (a.tau)^n: 2n+1 states, s_2i -a-> s_2i+1 -tau-> s_2i+2.
Lts tau_sequence(std::size_t n);

/**
 * Binary tau-tree with levels 0..depth-1, where each node of level depth-1
 * has one transition with its own fresh action into a leaf on level depth.
 * depth must be at least 1.
 */
Lts tau_tree(std::size_t depth);

}  // namespace branchmin

#endif
