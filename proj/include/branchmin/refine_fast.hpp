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

#ifndef BRANCHMIN_REFINE_FAST_HPP
#define BRANCHMIN_REFINE_FAST_HPP

#include <branchmin/lts_model.hpp>

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace branchmin {

using BlockId = std::uint32_t;
using ConstlnId = std::uint32_t;

struct FastOptions {
    /// Run check_invariants after every step of run(). Costs O(m) per step.
    bool check_invariants = false;
    /// Receives one line per splitting episode.
    std::function<void(const std::string&)> trace;
    /// Also look for instabilities under a block's own constellation when
    /// restabilizing after new bottom states appear. Off by default: old
    /// bottom states carry no guarantee for that constellation, so the
    /// cosplit seeds can be incomplete (see tests).
    bool restabilize_own_constellation = false;
    /// Subtract inert_cnt from the co-constellation counter of marked
    /// non-bottom states when the block lies in the splitter's old
    /// constellation. Only switched off by tests.
    bool cosplit_inert_correction = true;
};

struct FastStats {
    std::size_t episodes = 0;
    std::size_t splits = 0;
    std::size_t cosplits = 0;
    std::size_t restabilization_splits = 0;
    std::size_t new_bottoms = 0;
    /// Abstract work units: transitions and states touched by every step.
    std::uint64_t work = 0;
    /// Per state: how often it was in a selected splitter block, and how
    /// often it was in the part moved out by a split.
    std::vector<std::uint32_t> splitter_participation;
    std::vector<std::uint32_t> winner_participation;
};

/// Extra test detect2 applies before a predecessor may enter its queue.
enum class DetectMode {
    /// Splitting under the selected block: marked non-bottom states are in split.
    MarkedNonBottom,
    /// Splitting under the rest of the splitter's old constellation.
    CoConstellation,
    /// Splitting under the constellation given in Exclusion::constln.
    Constellation,
};

struct Exclusion {
    DetectMode mode = DetectMode::MarkedNonBottom;
    ConstlnId constln = 0;
};

struct DetectResult {
    std::vector<StateId> states;
    bool aborted = false;
};

struct LockstepResult {
    /// True when detect1 (the split side) finished first.
    bool split_side = true;
    std::vector<StateId> states;
};

struct Splitter {
    BlockId block;
    /// Constellation the block was taken from, and the new trivial one.
    ConstlnId from;
    ConstlnId to;
};

struct SplitResult {
    /// The part holding split(B', B); equals B' when nothing was split off.
    BlockId split_part;
    std::optional<BlockId> new_block;
};

/**
 * Constellation-based refinement to the coarsest divergence-blind stuttering
 * stable partition. The label partition of the input must be cycle-free
 * (run contract_sccs first); self-loops are ignored.
 *
 * run() does everything. The step functions are public so that tests can
 * drive one episode at a time:
 *   select_splitter, mark_and_detect, then per splittable block
 *   split_under_splitter, split_under_coconstellation, unmark,
 *   stabilize_new_bottoms; finally finish_episode.
 */
class FastRefiner {
public:
    explicit FastRefiner(const KripkeStructure& k, FastOptions opts = {});
    ~FastRefiner();
    FastRefiner(FastRefiner&&) noexcept;
    FastRefiner& operator=(FastRefiner&&) noexcept;

    PartitionMap run();

    std::optional<Splitter> select_splitter();
    std::vector<BlockId> mark_and_detect();
    SplitResult split_under_splitter(BlockId bp);
    std::optional<BlockId> split_under_coconstellation(BlockId c);
    void unmark(BlockId b);
    void stabilize_new_bottoms();
    void finish_episode();

    /// Moves `n` (a proper subset of block bp) into a new block.
    BlockId execute_split(BlockId bp, std::span<const StateId> n);

    // Detection probes; they do not change the partition.
    DetectResult detect1(BlockId bp, std::span<const StateId> seeds);
    DetectResult detect2(BlockId bp, std::span<const StateId> seeds, Exclusion excl = {});
    LockstepResult lockstep(BlockId bp, std::span<const StateId> seeds1,
                            std::span<const StateId> seeds2, Exclusion excl = {});

    /// Full recount of counters, lists and constellation bookkeeping. Throws
    /// std::logic_error on the first violation. `between_episodes` adds the
    /// checks that only hold outside a splitting episode.
    void check_invariants(bool between_episodes) const;

    PartitionMap partition() const;
    const FastStats& stats() const;

    std::size_t num_blocks() const;
    BlockId block_of(StateId s) const;
    std::vector<StateId> block_states(BlockId b) const;
    ConstlnId constellation_of(BlockId b) const;
    bool is_trivial(ConstlnId c) const;
    bool is_bottom(StateId s) const;
    bool is_marked(StateId s) const;
    std::uint32_t inert_count(StateId s) const;
    /// Value of the counter shared by the transition s -> t.
    std::uint32_t to_constln_cnt(StateId s, StateId t) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Convenience wrapper: FastRefiner(k, opts).run().
PartitionMap stabilize_fast(const KripkeStructure& k, const FastOptions& opts = {},
                            FastStats* stats = nullptr);

}  // namespace branchmin

#endif
