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

#ifndef BRANCHMIN_EQUIV_HPP
#define BRANCHMIN_EQUIV_HPP

#include <branchmin/lts_model.hpp>
#include <branchmin/refine_fast.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace branchmin {

enum class Equivalence { Dbs, Stuttering, Branching, BranchingDivergence };
enum class Engine { Fast, Naive };

/// Accepts dbs, stutter (or stuttering), branching, branching-div.
std::optional<Equivalence> parse_equivalence(std::string_view name);
std::string_view to_string(Equivalence eq);
std::optional<Engine> parse_engine(std::string_view name);
std::string_view to_string(Engine e);

/// True for the equivalences defined on Kripke structures.
bool is_kripke_equivalence(Equivalence eq);

/// Kripke equivalence asked of an LTS or the other way round.
class FormatMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Naive engine refused because the input is larger than the cap.
class CapExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kDefaultNaiveCap = 10000;

/// Cap from BRANCHMIN_NAIVE_CAP if set to a number, else kDefaultNaiveCap.
std::size_t naive_cap_from_env();

struct EquivOptions {
    Engine engine = Engine::Fast;
    /// Largest input (in states) the naive engine accepts.
    std::size_t naive_cap = naive_cap_from_env();
    FastOptions fast;
};

struct KripkeResult {
    PartitionMap classes;
    KripkeStructure quotient;
    /// Size of the structure handed to the engine.
    std::size_t engine_states = 0;
    std::optional<std::uint64_t> work_units;
};

struct LtsResult {
    PartitionMap classes;
    Lts quotient;
    std::size_t engine_states = 0;
    std::optional<std::uint64_t> work_units;
};

/**
 * Minimizes modulo `eq`. Classes are over the original states; quotient
 * state i is the i-th class ordered by representative.
 *
 * Kripke quotients carry one edge per pair of related classes, plus a
 * self-loop on a class that contains a cycle or has no other successor.
 * LTS quotients carry one transition per (class, action, class); tau
 * self-loops are dropped except on tau-divergent classes under
 * BranchingDivergence.
 */
KripkeResult reduce(const KripkeStructure& k, Equivalence eq, const EquivOptions& opts = {});
LtsResult reduce(const Lts& l, Equivalence eq, const EquivOptions& opts = {});

/// Throws std::out_of_range for a bad state id.
bool compare(const KripkeStructure& k, Equivalence eq, StateId s, StateId t, const EquivOptions& opts = {});
bool compare(const Lts& l, Equivalence eq, StateId s, StateId t, const EquivOptions& opts = {});

/// Metrics row `name,n,m,min_n,min_m,engine,seconds[,work_units]`.
struct Metrics {
    std::string name;
    std::size_t n = 0, m = 0, min_n = 0, min_m = 0;
    Engine engine = Engine::Fast;
    double seconds = 0;
    std::optional<std::uint64_t> work_units;
};

std::string metrics_header(bool with_work);
std::string metrics_row(const Metrics& row, bool with_work);

}  // namespace branchmin

#endif
