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

#include <branchmin/refine_fast.hpp>

#include <algorithm>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace branchmin {

namespace {

constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

// Head of an intrusive doubly linked list over integer ids.
struct ListHead {
    std::uint32_t first = kNone;
    std::uint32_t last = kNone;
    std::uint32_t size = 0;
};

struct Links {
    std::vector<std::uint32_t> prev, next;

    void ensure(std::size_t n) {
        if (prev.size() < n) {
            prev.resize(n, kNone);
            next.resize(n, kNone);
        }
    }

    void push_back(ListHead& h, std::uint32_t x) {
        prev[x] = h.last;
        next[x] = kNone;
        if (h.last != kNone)
            next[h.last] = x;
        else
            h.first = x;
        h.last = x;
        ++h.size;
    }

    void push_front(ListHead& h, std::uint32_t x) {
        next[x] = h.first;
        prev[x] = kNone;
        if (h.first != kNone)
            prev[h.first] = x;
        else
            h.last = x;
        h.first = x;
        ++h.size;
    }

    void remove(ListHead& h, std::uint32_t x) {
        if (prev[x] != kNone)
            next[prev[x]] = next[x];
        else
            h.first = next[x];
        if (next[x] != kNone)
            prev[next[x]] = prev[x];
        else
            h.last = prev[x];
        prev[x] = next[x] = kNone;
        --h.size;
    }
};

// Which of the four block lists a state sits in.
enum Tag : std::uint8_t { kBtm = 0, kNonBtm = 1, kMrkdBtm = 2, kMrkdNonBtm = 3 };

constexpr bool is_marked_tag(std::uint8_t t) { return t >= kMrkdBtm; }
constexpr bool is_bottom_tag(std::uint8_t t) { return t == kBtm || t == kMrkdBtm; }

struct Block {
    ConstlnId constln = kNone;
    ListHead lists[4];
    ListHead new_btm;
    ListHead elems;  // to-constellations
    std::uint32_t in_constln = kNone;
    std::uint32_t constln_ref = kNone;
    std::uint32_t coconstln_ref = kNone;
    std::uint32_t size = 0;
    bool on_stack = false;
};

struct Constellation {
    ListHead blocks;
    std::uint32_t size = 0;
    bool trivial = true;
};

// An entry of a block's to-constellations list.
struct Element {
    ConstlnId constln = kNone;
    BlockId owner = kNone;
    std::uint32_t twin = kNone;
    ListHead trans;
    // New bottom states of the owner with a transition into constln. May
    // hold stale entries for states that left the block; s_count is exact.
    std::vector<StateId> s_list;
    std::uint32_t s_count = 0;
    std::uint64_t touch = 0;
    bool alive = false;
};

// Result of asking a seed cursor for its next state.
enum class Seed { Done, Skip, Got };

}  // namespace

struct FastRefiner::Impl {
    FastOptions opts;
    std::size_t n = 0;
    std::size_t m = 0;

    // Static adjacency, self-loops removed.
    std::vector<StateId> t_src, t_dst;
    std::vector<std::uint32_t> out_off, out_tr, in_off, in_tr;

    // Per state.
    std::vector<BlockId> block;
    std::vector<std::uint8_t> tag;
    std::vector<std::uint8_t> in_new_btm;
    std::vector<std::uint32_t> inert_cnt;
    std::vector<std::uint32_t> cnt_stamp;
    std::vector<std::uint32_t> constln_cnt, coconstln_cnt;
    Links state_links, nb_links;

    // Per transition.
    std::vector<std::uint32_t> t_cnt, t_elem;
    Links trans_links;

    // Shared counters.
    std::vector<std::uint32_t> counter;
    std::vector<std::uint32_t> free_counters;

    std::vector<Block> blocks;
    Links block_links;  // blocks of a constellation
    std::vector<Constellation> constlns;
    Links constln_links;
    ListHead trivial_list, nontrivial_list;

    std::vector<Element> elems;
    std::vector<std::uint32_t> free_elems;
    Links elem_links;

    // Episode state.
    std::uint32_t episode = 0;
    std::optional<Splitter> current;
    bool counts_settled = true;  // false between select_splitter and mark_and_detect
    std::vector<StateId> x_list;
    std::vector<BlockId> q_prime;
    std::size_t episode_splits = 0;
    std::size_t episode_new_bottoms = 0;
    std::uint64_t touch_stamp = 0;

    // Scratch stamps for the detection procedures.
    std::vector<std::uint64_t> d1_mark, d2_mark, d2_excl, s_member;
    std::vector<std::uint32_t> d2_rem;
    std::uint64_t stamp = 0;

    FastStats stats;

    Impl(const KripkeStructure& k, FastOptions o);

    // --- small helpers ---------------------------------------------------

    std::uint32_t new_counter(std::uint32_t v) {
        if (!free_counters.empty()) {
            const auto c = free_counters.back();
            free_counters.pop_back();
            counter[c] = v;
            return c;
        }
        counter.push_back(v);
        return static_cast<std::uint32_t>(counter.size() - 1);
    }

    void free_counter(std::uint32_t c) { free_counters.push_back(c); }

    bool counters_valid(StateId s) const { return cnt_stamp[s] == episode && episode != 0; }

    std::uint32_t new_element(BlockId owner, ConstlnId c, bool front = false) {
        std::uint32_t e;
        if (!free_elems.empty()) {
            e = free_elems.back();
            free_elems.pop_back();
            elems[e] = Element{};
        } else {
            e = static_cast<std::uint32_t>(elems.size());
            elems.emplace_back();
            elem_links.ensure(elems.size());
        }
        elems[e].constln = c;
        elems[e].owner = owner;
        elems[e].alive = true;
        if (front)
            elem_links.push_front(blocks[owner].elems, e);
        else
            elem_links.push_back(blocks[owner].elems, e);
        return e;
    }

    void delete_element(std::uint32_t e) {
        auto& el = elems[e];
        elem_links.remove(blocks[el.owner].elems, e);
        el.alive = false;
        el.s_list.clear();
        el.s_list.shrink_to_fit();
        free_elems.push_back(e);
    }

    void move_elem_front(std::uint32_t e) {
        auto& h = blocks[elems[e].owner].elems;
        if (h.first == e) return;
        elem_links.remove(h, e);
        elem_links.push_front(h, e);
    }

    void move_elem_back(std::uint32_t e) {
        auto& h = blocks[elems[e].owner].elems;
        if (h.last == e) return;
        elem_links.remove(h, e);
        elem_links.push_back(h, e);
    }

    void set_tag(StateId s, std::uint8_t t) {
        auto& b = blocks[block[s]];
        state_links.remove(b.lists[tag[s]], s);
        tag[s] = t;
        state_links.push_back(b.lists[t], s);
    }

    void move_transition(std::uint32_t t, std::uint32_t to) {
        if (t_elem[t] != kNone) trans_links.remove(elems[t_elem[t]].trans, t);
        trans_links.push_back(elems[to].trans, t);
        t_elem[t] = to;
    }

    void set_trivial(ConstlnId c, bool trivial) {
        auto& con = constlns[c];
        if (con.trivial == trivial) return;
        constln_links.remove(con.trivial ? trivial_list : nontrivial_list, c);
        con.trivial = trivial;
        constln_links.push_back(trivial ? trivial_list : nontrivial_list, c);
    }

    ConstlnId new_constellation() {
        const auto c = static_cast<ConstlnId>(constlns.size());
        constlns.emplace_back();
        constln_links.ensure(constlns.size());
        constln_links.push_back(trivial_list, c);
        return c;
    }

    BlockId new_block(ConstlnId c) {
        const auto b = static_cast<BlockId>(blocks.size());
        blocks.emplace_back();
        block_links.ensure(blocks.size());
        blocks[b].constln = c;
        block_links.push_back(constlns[c].blocks, b);
        return b;
    }

    template <typename F>
    void for_each_state(ListHead h, F&& f) const {
        for (auto s = h.first; s != kNone;) {
            const auto next = state_links.next[s];
            f(s);
            s = next;
        }
    }

    std::uint64_t next_stamp() { return ++stamp; }

    // --- episode steps ----------------------------------------------------

    std::optional<Splitter> select_splitter();
    std::vector<BlockId> mark_and_detect();
    bool needs_cosplit(BlockId c);
    void unmark(BlockId b);
    SplitResult split_under_splitter(BlockId bp);
    std::optional<BlockId> split_under_coconstellation(BlockId c);
    BlockId execute_split(BlockId bp, std::span<const StateId> nset);
    std::uint32_t twin_of(std::uint32_t l, BlockId bp, BlockId nb);
    void make_bottom(StateId s);
    void collect_new_bottoms();
    void stabilize_new_bottoms();
    void finish_episode();

    bool excluded(StateId s, const Exclusion& ex, std::uint64_t& work) const;

    template <typename Seeds1, typename Seeds2>
    LockstepResult lockstep(BlockId bp, Seeds1&& seeds1, Seeds2&& seeds2, Exclusion ex);

    void check_invariants(bool between) const;
};

// --- detection procedures ---------------------------------------------------

namespace {

// Backward closure over inert transitions inside one block.
template <typename Im, typename Seeds>
struct Detect1 {
    Im& im;
    BlockId bp;
    Seeds& seeds;
    std::uint32_t limit;
    std::uint64_t mark;
    std::vector<std::pair<StateId, std::uint32_t>> stack;  // state, next in-transition
    std::vector<StateId> found;
    std::uint64_t work = 0;
    bool done = false;
    bool aborted = false;

    Detect1(Im& im_, BlockId bp_, Seeds& seeds_, std::uint32_t limit_, std::uint64_t mark_)
        : im(im_), bp(bp_), seeds(seeds_), limit(limit_), mark(mark_) {}

    void add(StateId s) {
        im.d1_mark[s] = mark;
        found.push_back(s);
        if (found.size() > limit)
            aborted = true;
        else
            stack.emplace_back(s, im.in_off[s]);
    }

    void step() {
        while (!stack.empty()) {
            auto& top = stack.back();
            if (top.second == im.in_off[top.first + 1]) {
                stack.pop_back();
                continue;
            }
            const StateId sp = im.t_src[im.in_tr[top.second++]];
            ++work;
            if (im.block[sp] == bp && im.d1_mark[sp] != mark) add(sp);
            return;
        }
        StateId s = 0;
        ++work;
        switch (seeds(s)) {
            case Seed::Done: done = true; return;
            case Seed::Skip: return;
            case Seed::Got:
                if (im.d1_mark[s] != mark) add(s);
                return;
        }
    }
};

// Forward closure from bottom states: a state joins once all its inert
// successors have joined. Priorities are countdowns with a zero queue.
template <typename Im, typename Seeds>
struct Detect2 {
    Im& im;
    BlockId bp;
    Seeds& seeds;
    std::uint32_t limit;
    Exclusion ex;
    std::uint64_t mark;
    StateId cur = kNone;
    std::uint32_t pos = 0;
    std::vector<StateId> zero;
    std::size_t zero_head = 0;
    bool seeds_done = false;
    std::vector<StateId> found;
    std::uint64_t work = 0;
    bool done = false;
    bool aborted = false;

    Detect2(Im& im_, BlockId bp_, Seeds& seeds_, std::uint32_t limit_, Exclusion ex_, std::uint64_t mark_)
        : im(im_), bp(bp_), seeds(seeds_), limit(limit_), ex(ex_), mark(mark_) {}

    void emit(StateId s) {
        found.push_back(s);
        if (found.size() > limit) aborted = true;
        cur = s;
        pos = im.in_off[s];
    }

    void step() {
        if (cur != kNone && pos == im.in_off[cur + 1]) cur = kNone;
        if (cur != kNone) {
            const StateId sp = im.t_src[im.in_tr[pos++]];
            ++work;
            if (im.block[sp] != bp) return;
            if (im.d2_mark[sp] == mark) {
                if (im.d2_rem[sp] > 0 && --im.d2_rem[sp] == 0) zero.push_back(sp);
            } else if (im.d2_excl[sp] != mark) {
                if (im.excluded(sp, ex, work)) {
                    im.d2_excl[sp] = mark;
                } else {
                    im.d2_mark[sp] = mark;
                    im.d2_rem[sp] = im.inert_cnt[sp] - 1;
                    if (im.d2_rem[sp] == 0) zero.push_back(sp);
                }
            }
            return;
        }
        ++work;
        if (!seeds_done) {
            StateId s = 0;
            switch (seeds(s)) {
                case Seed::Done: seeds_done = true; break;
                case Seed::Skip: return;
                case Seed::Got:
                    if (im.d2_mark[s] != mark) {
                        im.d2_mark[s] = mark;
                        im.d2_rem[s] = 0;
                        emit(s);
                    }
                    return;
            }
        }
        if (zero_head < zero.size()) {
            emit(zero[zero_head++]);
            return;
        }
        done = true;
    }
};

// Seed cursor over a fixed list of states.
struct SpanSeeds {
    std::span<const StateId> v;
    std::size_t i = 0;
    Seed operator()(StateId& s) {
        if (i == v.size()) return Seed::Done;
        s = v[i++];
        return Seed::Got;
    }
};

}  // namespace

bool FastRefiner::Impl::excluded(StateId s, const Exclusion& ex, std::uint64_t& work) const {
    switch (ex.mode) {
        case DetectMode::MarkedNonBottom:
            return tag[s] == kMrkdNonBtm;
        case DetectMode::CoConstellation: {
            const ConstlnId target = current ? current->from : kNone;
            if (is_marked_tag(tag[s])) {
                if (!counters_valid(s)) return false;
                std::uint32_t v = counter[coconstln_cnt[s]];
                if (opts.cosplit_inert_correction && blocks[block[s]].constln == target) v -= inert_cnt[s];
                return v > 0;
            }
            for (auto i = out_off[s]; i < out_off[s + 1]; ++i) {
                ++work;
                const auto e = t_elem[out_tr[i]];
                if (e != kNone && elems[e].constln == target) return true;
            }
            return false;
        }
        case DetectMode::Constellation:
            for (auto i = out_off[s]; i < out_off[s + 1]; ++i) {
                ++work;
                const auto e = t_elem[out_tr[i]];
                if (e != kNone && elems[e].constln == ex.constln) return true;
            }
            return false;
    }
    return false;
}

template <typename Seeds1, typename Seeds2>
LockstepResult FastRefiner::Impl::lockstep(BlockId bp, Seeds1&& seeds1, Seeds2&& seeds2, Exclusion ex) {
    const std::uint32_t limit = blocks[bp].size / 2;
    Detect1<Impl, Seeds1> d1{*this, bp, seeds1, limit, next_stamp()};
    Detect2<Impl, Seeds2> d2{*this, bp, seeds2, limit, ex, next_stamp()};
    LockstepResult r;
    while (true) {
        if (d1.done && !d1.aborted) {
            r.split_side = true;
            r.states = std::move(d1.found);
            break;
        }
        if (d2.done && !d2.aborted) {
            r.split_side = false;
            r.states = std::move(d2.found);
            break;
        }
        if (d1.aborted && d2.aborted) throw std::logic_error("lockstep: both sides exceeded half the block");
        if (d1.aborted)
            d2.step();
        else if (d2.aborted || d1.work <= d2.work)
            d1.step();
        else
            d2.step();
    }
    stats.work += d1.work + d2.work;
    return r;
}

// --- construction -----------------------------------------------------------

FastRefiner::Impl::Impl(const KripkeStructure& k, FastOptions o) : opts(std::move(o)), n(k.num_states()) {
    for (const auto& e : k.transitions())
        if (e.src != e.dst) {
            t_src.push_back(e.src);
            t_dst.push_back(e.dst);
        }
    m = t_src.size();

    out_off.assign(n + 1, 0);
    in_off.assign(n + 1, 0);
    for (std::size_t t = 0; t < m; ++t) {
        ++out_off[t_src[t] + 1];
        ++in_off[t_dst[t] + 1];
    }
    for (std::size_t i = 0; i < n; ++i) {
        out_off[i + 1] += out_off[i];
        in_off[i + 1] += in_off[i];
    }
    out_tr.resize(m);
    in_tr.resize(m);
    {
        auto of = out_off, inf = in_off;
        for (std::uint32_t t = 0; t < m; ++t) {
            out_tr[of[t_src[t]]++] = t;
            in_tr[inf[t_dst[t]]++] = t;
        }
    }

    // Blocks of the label partition, numbered by their smallest state.
    block.resize(n);
    {
        std::map<std::vector<PropId>, BlockId> ids;
        for (StateId s = 0; s < n; ++s) {
            const auto l = k.label(s);
            auto [it, inserted] =
                ids.emplace(std::vector<PropId>(l.begin(), l.end()), static_cast<BlockId>(ids.size()));
            block[s] = it->second;
        }
        const ConstlnId c0 = new_constellation();
        for (std::size_t b = 0; b < ids.size(); ++b) new_block(c0);
        constlns[c0].size = static_cast<std::uint32_t>(n);
        set_trivial(c0, blocks.size() <= 1);
    }

    tag.assign(n, kBtm);
    in_new_btm.assign(n, 0);
    inert_cnt.assign(n, 0);
    cnt_stamp.assign(n, 0);
    constln_cnt.assign(n, kNone);
    coconstln_cnt.assign(n, kNone);
    state_links.ensure(n);
    nb_links.ensure(n);
    for (std::size_t t = 0; t < m; ++t)
        if (block[t_src[t]] == block[t_dst[t]]) ++inert_cnt[t_src[t]];
    for (StateId s = 0; s < n; ++s) {
        auto& b = blocks[block[s]];
        ++b.size;
        tag[s] = inert_cnt[s] == 0 ? kBtm : kNonBtm;
        state_links.push_back(b.lists[tag[s]], s);
    }

    // One counter per state for C0, one element per block holding every
    // non-inert transition.
    t_cnt.assign(m, kNone);
    t_elem.assign(m, kNone);
    trans_links.ensure(m);
    for (StateId s = 0; s < n; ++s) {
        if (out_off[s] == out_off[s + 1]) continue;
        const auto c = new_counter(out_off[s + 1] - out_off[s]);
        for (auto i = out_off[s]; i < out_off[s + 1]; ++i) t_cnt[out_tr[i]] = c;
    }
    for (std::uint32_t t = 0; t < m; ++t) {
        const BlockId b = block[t_src[t]];
        if (b == block[t_dst[t]]) continue;
        if (blocks[b].in_constln == kNone) blocks[b].in_constln = new_element(b, blocks[b].constln);
        move_transition(t, blocks[b].in_constln);
    }

    d1_mark.assign(n, 0);
    d2_mark.assign(n, 0);
    d2_excl.assign(n, 0);
    s_member.assign(n, 0);
    d2_rem.assign(n, 0);
    stats.splitter_participation.assign(n, 0);
    stats.winner_participation.assign(n, 0);
}

// --- finding the blocks that must be split ---------------------------------

std::optional<Splitter> FastRefiner::Impl::select_splitter() {
    if (nontrivial_list.first == kNone) return std::nullopt;
    const ConstlnId big = nontrivial_list.first;
    auto& bc = constlns[big];
    const BlockId b1 = bc.blocks.first;
    const BlockId b2 = block_links.next[b1];
    const BlockId b = blocks[b2].size < blocks[b1].size ? b2 : b1;

    const ConstlnId c = new_constellation();
    block_links.remove(constlns[big].blocks, b);
    constlns[big].size -= blocks[b].size;
    block_links.push_back(constlns[c].blocks, b);
    constlns[c].size = blocks[b].size;
    blocks[b].constln = c;
    if (constlns[big].blocks.size == 1) set_trivial(big, true);

    ++episode;
    ++stats.episodes;
    episode_splits = 0;
    episode_new_bottoms = 0;
    current = Splitter{b, big, c};
    counts_settled = false;
    for (int l = 0; l < 4; ++l)
        for_each_state(blocks[b].lists[l], [&](StateId s) { ++stats.splitter_participation[s]; });
    return current;
}

std::vector<BlockId> FastRefiner::Impl::mark_and_detect() {
    if (!current) throw std::logic_error("mark_and_detect: no splitter selected");
    const BlockId b = current->block;
    const ConstlnId big = current->from;
    const ConstlnId c = current->to;
    std::vector<BlockId> splittable;

    auto install_counters = [&](StateId s, std::uint32_t t) {
        if (counters_valid(s)) return;
        cnt_stamp[s] = episode;
        constln_cnt[s] = new_counter(0);
        coconstln_cnt[s] = t_cnt[t];
    };

    // Predecessors of B in other blocks.
    std::vector<StateId> b_states;
    for (int l = 0; l < 4; ++l) for_each_state(blocks[b].lists[l], [&](StateId s) { b_states.push_back(s); });
    for (StateId s : b_states) {
        ++stats.work;
        for (auto i = in_off[s]; i < in_off[s + 1]; ++i) {
            const auto t = in_tr[i];
            const StateId sp = t_src[t];
            const BlockId bp = block[sp];
            ++stats.work;
            if (bp == b) continue;
            auto& blk = blocks[bp];
            if (blk.lists[kMrkdBtm].size == 0 && blk.lists[kMrkdNonBtm].size == 0) {
                splittable.push_back(bp);
                blk.coconstln_ref = t_elem[t];
                blk.constln_ref = new_element(bp, c);
            }
            install_counters(sp, t);
            if (!is_marked_tag(tag[sp])) set_tag(sp, tag[sp] == kBtm ? kMrkdBtm : kMrkdNonBtm);
            ++counter[constln_cnt[sp]];
            --counter[coconstln_cnt[sp]];
            t_cnt[t] = constln_cnt[sp];
            move_transition(t, blk.constln_ref);
        }
    }

    // B itself: everything is marked; the split under B is trivial, only the
    // rest of the old constellation can split it.
    {
        auto& blk = blocks[b];
        for (StateId s : b_states) set_tag(s, is_bottom_tag(tag[s]) ? kMrkdBtm : kMrkdNonBtm);
        splittable.push_back(b);
        blk.coconstln_ref = blk.in_constln;
        blk.in_constln = kNone;
        blk.constln_ref = kNone;
        for (StateId s : b_states)
            for (auto i = out_off[s]; i < out_off[s + 1]; ++i) {
                const auto t = out_tr[i];
                const StateId sp = t_dst[t];
                ++stats.work;
                const ConstlnId cc = blocks[block[sp]].constln;
                if (cc != big && cc != c) continue;
                install_counters(s, t);
                if (block[sp] == b) {
                    ++counter[constln_cnt[s]];
                    t_cnt[t] = constln_cnt[s];
                    --counter[coconstln_cnt[s]];
                }
            }
    }
    counts_settled = true;

    std::vector<BlockId> keep;
    for (BlockId bp : splittable) {
        if (blocks[bp].lists[kBtm].size > 0 || needs_cosplit(bp))
            keep.push_back(bp);
        else
            unmark(bp);
    }
    return keep;
}

// Some marked bottom state misses the rest of the old constellation while
// the block does reach it.
bool FastRefiner::Impl::needs_cosplit(BlockId c) {
    const auto& blk = blocks[c];
    if (blk.coconstln_ref == kNone || elems[blk.coconstln_ref].trans.size == 0) return false;
    bool found = false;
    for (auto s = blk.lists[kMrkdBtm].first; s != kNone && !found; s = state_links.next[s])
        found = !counters_valid(s) || counter[coconstln_cnt[s]] == 0;
    stats.work += blk.lists[kMrkdBtm].size;
    return found;
}

void FastRefiner::Impl::unmark(BlockId b) {
    auto& blk = blocks[b];
    auto release = [&](StateId s) {
        ++stats.work;
        if (!counters_valid(s)) return;
        if (counter[constln_cnt[s]] == 0) free_counter(constln_cnt[s]);
        if (counter[coconstln_cnt[s]] == 0) free_counter(coconstln_cnt[s]);
        constln_cnt[s] = coconstln_cnt[s] = kNone;
        cnt_stamp[s] = 0;
    };
    for_each_state(blk.lists[kMrkdBtm], [&](StateId s) {
        release(s);
        set_tag(s, kBtm);
    });
    for_each_state(blk.lists[kMrkdNonBtm], [&](StateId s) {
        release(s);
        set_tag(s, kNonBtm);
    });
    for (auto* ref : {&blk.constln_ref, &blk.coconstln_ref}) {
        if (*ref == kNone) continue;
        if (elems[*ref].trans.size == 0) {
            if (blk.in_constln == *ref) blk.in_constln = kNone;
            delete_element(*ref);
        }
        *ref = kNone;
    }
}

// --- splitting ----------------------------------------------------------------

SplitResult FastRefiner::Impl::split_under_splitter(BlockId bp) {
    if (blocks[bp].lists[kBtm].size == 0) return {bp, std::nullopt};
    struct MarkedSeeds {
        Impl& im;
        BlockId bp;
        std::uint32_t s = kNone;
        int list = -1;
        Seed operator()(StateId& out) {
            while (s == kNone) {
                if (list == kMrkdNonBtm) return Seed::Done;
                list = list < 0 ? kMrkdBtm : kMrkdNonBtm;
                s = im.blocks[bp].lists[list].first;
            }
            out = s;
            s = im.state_links.next[s];
            return Seed::Got;
        }
    } seeds1{*this, bp};
    struct BottomSeeds {
        Impl& im;
        std::uint32_t s;
        Seed operator()(StateId& out) {
            if (s == kNone) return Seed::Done;
            out = s;
            s = im.state_links.next[s];
            return Seed::Got;
        }
    } seeds2{*this, blocks[bp].lists[kBtm].first};

    auto r = lockstep(bp, seeds1, seeds2, {DetectMode::MarkedNonBottom, 0});
    if (r.states.empty()) return {bp, std::nullopt};
    const BlockId nb = execute_split(bp, r.states);
    return {r.split_side ? nb : bp, nb};
}

std::optional<BlockId> FastRefiner::Impl::split_under_coconstellation(BlockId c) {
    if (!needs_cosplit(c)) return std::nullopt;
    const auto co = blocks[c].coconstln_ref;
    struct SourceSeeds {
        Impl& im;
        std::uint32_t t;
        Seed operator()(StateId& out) {
            if (t == kNone) return Seed::Done;
            out = im.t_src[t];
            t = im.trans_links.next[t];
            return Seed::Got;
        }
    } seeds1{*this, elems[co].trans.first};
    struct ZeroSeeds {
        Impl& im;
        std::uint32_t s;
        Seed operator()(StateId& out) {
            if (s == kNone) return Seed::Done;
            const StateId cur = s;
            s = im.state_links.next[s];
            if (im.counters_valid(cur) && im.counter[im.coconstln_cnt[cur]] > 0) return Seed::Skip;
            out = cur;
            return Seed::Got;
        }
    } seeds2{*this, blocks[c].lists[kMrkdBtm].first};

    auto r = lockstep(c, seeds1, seeds2, {DetectMode::CoConstellation, 0});
    if (r.states.empty()) return std::nullopt;
    ++stats.cosplits;
    return execute_split(c, r.states);
}

std::uint32_t FastRefiner::Impl::twin_of(std::uint32_t l, BlockId bp, BlockId nb) {
    if (elems[l].twin != kNone) return elems[l].twin;
    const auto l2 = new_element(nb, elems[l].constln);
    elems[l].twin = l2;
    elems[l2].twin = l;
    auto& nbk = blocks[nb];
    const auto& bpk = blocks[bp];
    if (elems[l2].constln == nbk.constln) nbk.in_constln = l2;
    if (l == bpk.constln_ref) nbk.constln_ref = l2;
    if (l == bpk.coconstln_ref) nbk.coconstln_ref = l2;
    return l2;
}

void FastRefiner::Impl::make_bottom(StateId s) {
    set_tag(s, tag[s] == kMrkdNonBtm ? kMrkdBtm : kBtm);
    x_list.push_back(s);
    ++stats.new_bottoms;
    ++episode_new_bottoms;
}

BlockId FastRefiner::Impl::execute_split(BlockId bp, std::span<const StateId> nset) {
    const ConstlnId c = blocks[bp].constln;
    const BlockId nb = new_block(c);
    if (constlns[c].trivial) set_trivial(c, false);
    blocks[bp].size -= static_cast<std::uint32_t>(nset.size());
    blocks[nb].size = static_cast<std::uint32_t>(nset.size());
    ++stats.splits;
    ++episode_splits;

    for (StateId s : nset) {
        ++stats.work;
        state_links.remove(blocks[bp].lists[tag[s]], s);
        block[s] = nb;
        state_links.push_back(blocks[nb].lists[tag[s]], s);
        if (in_new_btm[s]) {
            nb_links.remove(blocks[bp].new_btm, s);
            nb_links.push_back(blocks[nb].new_btm, s);
        }
        ++stats.winner_participation[s];
    }

    auto in_constln_new = [&]() {
        auto& nbk = blocks[nb];
        if (nbk.in_constln != kNone) return nbk.in_constln;
        if (blocks[bp].in_constln != kNone) return twin_of(blocks[bp].in_constln, bp, nb);
        nbk.in_constln = new_element(nb, c);
        return nbk.in_constln;
    };
    auto in_constln_old = [&]() {
        auto& bpk = blocks[bp];
        if (bpk.in_constln != kNone) return bpk.in_constln;
        bpk.in_constln = new_element(bp, c);
        const auto other = blocks[nb].in_constln;
        if (other != kNone && elems[other].twin == kNone) {
            elems[other].twin = bpk.in_constln;
            elems[bpk.in_constln].twin = other;
        }
        return bpk.in_constln;
    };

    for (StateId s : nset) {
        const std::uint64_t touch = ++touch_stamp;
        for (auto i = out_off[s]; i < out_off[s + 1]; ++i) {
            const auto t = out_tr[i];
            ++stats.work;
            const auto l = t_elem[t];
            if (l != kNone) {
                const auto l2 = twin_of(l, bp, nb);
                move_transition(t, l2);
                if (in_new_btm[s] && elems[l].touch != touch) {
                    // s leaves the new-bottom set of l for that of l2.
                    elems[l].touch = touch;
                    --elems[l].s_count;
                    if (elems[l2].s_count++ == 0) move_elem_front(l2);
                    elems[l2].s_list.push_back(s);
                    if (elems[l].s_count == 0) {
                        elems[l].s_list.clear();
                        move_elem_back(l);
                    }
                }
            } else if (block[t_dst[t]] == bp) {
                if (--inert_cnt[s] == 0) make_bottom(s);
                move_transition(t, in_constln_new());
            }
        }
        for (auto i = in_off[s]; i < in_off[s + 1]; ++i) {
            const auto t = in_tr[i];
            ++stats.work;
            const StateId sp = t_src[t];
            if (block[sp] != bp) continue;
            if (--inert_cnt[sp] == 0) make_bottom(sp);
            move_transition(t, in_constln_old());
        }
    }

    // Dissolve twin links; drop elements of B' that were emptied.
    for (auto l2 = blocks[nb].elems.first; l2 != kNone;) {
        const auto next = elem_links.next[l2];
        ++stats.work;
        const auto l = elems[l2].twin;
        if (l != kNone) {
            auto& bpk = blocks[bp];
            if (elems[l].trans.size == 0 && l != bpk.constln_ref && l != bpk.coconstln_ref) {
                if (bpk.in_constln == l) bpk.in_constln = kNone;
                delete_element(l);
            } else {
                elems[l].twin = kNone;
            }
            elems[l2].twin = kNone;
        }
        l2 = next;
    }
    return nb;
}

// Files the collected new bottom states under their blocks and records which
// constellations each of them reaches.
void FastRefiner::Impl::collect_new_bottoms() {
    for (StateId s : x_list) {
        const BlockId b = block[s];
        auto& blk = blocks[b];
        for (auto i = out_off[s]; i < out_off[s + 1]; ++i) {
            ++stats.work;
            const auto l = t_elem[out_tr[i]];
            auto& el = elems[l];
            if (el.s_count == 0) move_elem_front(l);
            if (el.s_count == 0 || el.s_list.back() != s) {
                el.s_list.push_back(s);
                ++el.s_count;
            }
        }
        in_new_btm[s] = 1;
        nb_links.push_back(blk.new_btm, s);
        if (!blk.on_stack) {
            blk.on_stack = true;
            q_prime.push_back(b);
        }
    }
    x_list.clear();
}

void FastRefiner::Impl::stabilize_new_bottoms() {
    collect_new_bottoms();
    while (!q_prime.empty()) {
        const BlockId bh = q_prime.back();
        q_prime.pop_back();
        blocks[bh].on_stack = false;
        if (blocks[bh].new_btm.size == 0) continue;

        std::uint32_t unstable = kNone;
        for (auto l = blocks[bh].elems.first; l != kNone; l = elem_links.next[l]) {
            ++stats.work;
            if (!opts.restabilize_own_constellation && elems[l].constln == blocks[bh].constln) continue;
            if (elems[l].s_count < blocks[bh].new_btm.size) {
                unstable = l;
                break;
            }
        }

        if (unstable == kNone) {
            for (auto l = blocks[bh].elems.first; l != kNone && elems[l].s_count > 0; l = elem_links.next[l]) {
                stats.work += elems[l].s_list.size();
                elems[l].s_list.clear();
                elems[l].s_count = 0;
            }
            for (auto s = blocks[bh].new_btm.first; s != kNone;) {
                const auto next = nb_links.next[s];
                in_new_btm[s] = 0;
                nb_links.remove(blocks[bh].new_btm, s);
                s = next;
            }
            continue;
        }

        const std::uint64_t member = next_stamp();
        for (StateId s : elems[unstable].s_list) {
            ++stats.work;
            if (block[s] == bh) s_member[s] = member;
        }
        struct SourceSeeds {
            Impl& im;
            std::uint32_t t;
            Seed operator()(StateId& out) {
                if (t == kNone) return Seed::Done;
                out = im.t_src[t];
                t = im.trans_links.next[t];
                return Seed::Got;
            }
        } seeds1{*this, elems[unstable].trans.first};
        struct MissingSeeds {
            Impl& im;
            std::uint32_t s;
            std::uint64_t member;
            Seed operator()(StateId& out) {
                if (s == kNone) return Seed::Done;
                const StateId cur = s;
                s = im.nb_links.next[s];
                if (im.s_member[cur] == member) return Seed::Skip;
                out = cur;
                return Seed::Got;
            }
        } seeds2{*this, blocks[bh].new_btm.first, member};

        auto r = lockstep(bh, seeds1, seeds2, {DetectMode::Constellation, elems[unstable].constln});
        if (r.states.empty() || r.states.size() == blocks[bh].size)
            throw std::logic_error("restabilization found no proper split");
        const BlockId nb = execute_split(bh, r.states);
        ++stats.restabilization_splits;
        collect_new_bottoms();
        for (BlockId x : {bh, nb})
            if (blocks[x].new_btm.size > 0 && !blocks[x].on_stack) {
                blocks[x].on_stack = true;
                q_prime.push_back(x);
            }
    }
}

void FastRefiner::Impl::finish_episode() {
    if (!current) return;
    if (opts.trace) {
        std::ostringstream line;
        line << "episode " << current->block << ' ' << current->from << ' ' << episode_splits << ' '
             << episode_new_bottoms;
        opts.trace(line.str());
    }
    current.reset();
}

// --- invariants -----------------------------------------------------------------

void FastRefiner::Impl::check_invariants(bool between) const {
    auto fail = [](const std::string& what) { throw std::logic_error("invariant violated: " + what); };
    // Constellation of a block for counting purposes; B still counts as part
    // of its old constellation until its predecessors have been re-counted.
    auto constln_of_block = [&](BlockId b) {
        if (!counts_settled && current && b == current->block) return current->from;
        return blocks[b].constln;
    };

    // States and block lists.
    std::vector<std::uint32_t> seen_in_block(blocks.size(), 0);
    for (BlockId b = 0; b < blocks.size(); ++b) {
        const auto& blk = blocks[b];
        std::uint32_t total = 0;
        for (std::uint8_t l = 0; l < 4; ++l) {
            std::uint32_t count = 0;
            for (auto s = blk.lists[l].first; s != kNone; s = state_links.next[s]) {
                if (block[s] != b) fail("state " + std::to_string(s) + " listed in wrong block");
                if (tag[s] != l) fail("state " + std::to_string(s) + " has wrong list tag");
                ++count;
            }
            if (count != blk.lists[l].size) fail("list size of block " + std::to_string(b));
            total += count;
            if (between && is_marked_tag(l) && count > 0) fail("marked states outside an episode");
        }
        if (total != blk.size) fail("size of block " + std::to_string(b));
        std::uint32_t nbc = 0;
        for (auto s = blk.new_btm.first; s != kNone; s = nb_links.next[s]) {
            if (block[s] != b || !in_new_btm[s]) fail("new bottom list of block " + std::to_string(b));
            ++nbc;
        }
        if (nbc != blk.new_btm.size) fail("new bottom list size");
        if (between && nbc > 0) fail("new bottom states outside an episode");
        if (between && (blk.constln_ref != kNone || blk.coconstln_ref != kNone)) fail("stale constellation refs");
    }

    // inert_cnt and bottom classification.
    std::vector<std::uint32_t> inert(n, 0);
    for (std::size_t t = 0; t < m; ++t)
        if (block[t_src[t]] == block[t_dst[t]]) ++inert[t_src[t]];
    for (StateId s = 0; s < n; ++s) {
        if (inert[s] != inert_cnt[s]) fail("inert_cnt of state " + std::to_string(s));
        if ((inert[s] == 0) != is_bottom_tag(tag[s])) fail("bottom classification of state " + std::to_string(s));
        if (between && cnt_stamp[s] != 0 && counters_valid(s)) fail("counters left installed");
    }

    // to_constln_cnt: one shared counter per (source, constellation) with the true count.
    std::map<std::pair<StateId, ConstlnId>, std::pair<std::uint32_t, std::uint32_t>> per_pair;
    for (std::uint32_t t = 0; t < m; ++t) {
        const auto key = std::make_pair(t_src[t], constln_of_block(block[t_dst[t]]));
        auto [it, inserted] = per_pair.emplace(key, std::make_pair(t_cnt[t], 0u));
        if (it->second.first != t_cnt[t])
            fail("transitions from " + std::to_string(t_src[t]) + " into one constellation use different counters");
        ++it->second.second;
    }
    for (const auto& [key, v] : per_pair)
        if (counter[v.first] != v.second)
            fail("to_constln_cnt of state " + std::to_string(key.first) + " is " + std::to_string(counter[v.first]) +
                 ", expected " + std::to_string(v.second));

    // Transition placement.
    std::vector<std::uint8_t> listed(m, 0);
    for (std::uint32_t e = 0; e < elems.size(); ++e) {
        const auto& el = elems[e];
        if (!el.alive) continue;
        std::uint32_t count = 0;
        for (auto t = el.trans.first; t != kNone; t = trans_links.next[t]) {
            if (t_elem[t] != e) fail("transition " + std::to_string(t) + " in a foreign list");
            if (listed[t]++) fail("transition listed twice");
            if (block[t_src[t]] != el.owner) fail("transition list owner");
            if (constln_of_block(block[t_dst[t]]) != el.constln) fail("transition list constellation");
            ++count;
        }
        if (count != el.trans.size) fail("transition list size");
        if (between && count == 0) fail("empty to-constellations element");
    }
    for (std::uint32_t t = 0; t < m; ++t) {
        const bool inert_t = block[t_src[t]] == block[t_dst[t]];
        if (inert_t && t_elem[t] != kNone) fail("inert transition in a list");
        if (!inert_t && !listed[t]) fail("non-inert transition " + std::to_string(t) + " not listed");
    }

    // Elements per block: live, owned, distinct constellations, in_constln role.
    for (BlockId b = 0; b < blocks.size(); ++b) {
        const auto& blk = blocks[b];
        std::vector<ConstlnId> cs;
        bool own = false;
        std::uint32_t count = 0;
        for (auto e = blk.elems.first; e != kNone; e = elem_links.next[e]) {
            if (!elems[e].alive || elems[e].owner != b) fail("dead or foreign element in block list");
            cs.push_back(elems[e].constln);
            if (elems[e].constln == constln_of_block(b)) {
                own = true;
                if (blk.in_constln != e) fail("in_constln_ref of block " + std::to_string(b));
            }
            if (elems[e].twin != kNone) fail("twin link outlived a split");
            ++count;
        }
        if (count != blk.elems.size) fail("element list size");
        std::sort(cs.begin(), cs.end());
        if (std::adjacent_find(cs.begin(), cs.end()) != cs.end()) fail("two elements for one constellation");
        if (!own && blk.in_constln != kNone) fail("dangling in_constln_ref");
    }

    // Constellations.
    std::uint32_t trivial_count = 0, nontrivial_count = 0;
    for (ConstlnId c = 0; c < constlns.size(); ++c) {
        const auto& con = constlns[c];
        std::uint32_t size = 0, count = 0;
        for (auto b = con.blocks.first; b != kNone; b = block_links.next[b]) {
            if (blocks[b].constln != c) fail("block in wrong constellation list");
            size += blocks[b].size;
            ++count;
        }
        if (count != con.blocks.size) fail("constellation block count");
        if (size != con.size) fail("constellation size of " + std::to_string(c));
        if (con.trivial != (count <= 1)) fail("trivial flag of constellation " + std::to_string(c));
        (con.trivial ? trivial_count : nontrivial_count)++;
    }
    if (trivial_count != trivial_list.size || nontrivial_count != nontrivial_list.size)
        fail("constellation list sizes");
    for (auto c = nontrivial_list.first; c != kNone; c = constln_links.next[c])
        if (constlns[c].trivial) fail("trivial constellation in the non-trivial list");
}

// --- public wrapper ---------------------------------------------------------------

FastRefiner::FastRefiner(const KripkeStructure& k, FastOptions opts)
    : impl_(std::make_unique<Impl>(k, std::move(opts))) {}
FastRefiner::~FastRefiner() = default;
FastRefiner::FastRefiner(FastRefiner&&) noexcept = default;
FastRefiner& FastRefiner::operator=(FastRefiner&&) noexcept = default;

PartitionMap FastRefiner::run() {
    auto& im = *impl_;
    const bool check = im.opts.check_invariants;
    if (check) im.check_invariants(true);
    while (select_splitter()) {
        if (check) im.check_invariants(false);
        const auto splittable = mark_and_detect();
        if (check) im.check_invariants(false);
        for (BlockId bp : splittable) {
            std::vector<BlockId> pieces{bp};
            const auto first = split_under_splitter(bp);
            if (first.new_block) pieces.push_back(*first.new_block);
            if (check) im.check_invariants(false);
            if (auto third = split_under_coconstellation(first.split_part)) pieces.push_back(*third);
            if (check) im.check_invariants(false);
            for (BlockId p : pieces) unmark(p);
            stabilize_new_bottoms();
            if (check) im.check_invariants(false);
        }
        finish_episode();
        if (check) im.check_invariants(true);
    }
    return partition();
}

std::optional<Splitter> FastRefiner::select_splitter() { return impl_->select_splitter(); }
std::vector<BlockId> FastRefiner::mark_and_detect() { return impl_->mark_and_detect(); }
SplitResult FastRefiner::split_under_splitter(BlockId bp) { return impl_->split_under_splitter(bp); }
std::optional<BlockId> FastRefiner::split_under_coconstellation(BlockId c) {
    return impl_->split_under_coconstellation(c);
}
void FastRefiner::unmark(BlockId b) { impl_->unmark(b); }
void FastRefiner::stabilize_new_bottoms() { impl_->stabilize_new_bottoms(); }
void FastRefiner::finish_episode() { impl_->finish_episode(); }

BlockId FastRefiner::execute_split(BlockId bp, std::span<const StateId> n) {
    if (n.empty() || n.size() >= impl_->blocks.at(bp).size)
        throw std::invalid_argument("execute_split: need a nonempty proper subset");
    for (StateId s : n)
        if (impl_->block.at(s) != bp) throw std::invalid_argument("execute_split: state outside the block");
    return impl_->execute_split(bp, n);
}

DetectResult FastRefiner::detect1(BlockId bp, std::span<const StateId> seeds) {
    auto& im = *impl_;
    SpanSeeds cursor{seeds};
    Detect1<Impl, SpanSeeds> d{im, bp, cursor, im.blocks.at(bp).size / 2, im.next_stamp()};
    while (!d.done && !d.aborted) d.step();
    return {std::move(d.found), d.aborted};
}

DetectResult FastRefiner::detect2(BlockId bp, std::span<const StateId> seeds, Exclusion excl) {
    auto& im = *impl_;
    SpanSeeds cursor{seeds};
    Detect2<Impl, SpanSeeds> d{im, bp, cursor, im.blocks.at(bp).size / 2, excl, im.next_stamp()};
    while (!d.done && !d.aborted) d.step();
    return {std::move(d.found), d.aborted};
}

LockstepResult FastRefiner::lockstep(BlockId bp, std::span<const StateId> seeds1,
                                     std::span<const StateId> seeds2, Exclusion excl) {
    return impl_->lockstep(bp, SpanSeeds{seeds1}, SpanSeeds{seeds2}, excl);
}

void FastRefiner::check_invariants(bool between_episodes) const { impl_->check_invariants(between_episodes); }

PartitionMap FastRefiner::partition() const {
    return PartitionMap::from_keys(std::span<const std::uint32_t>(impl_->block));
}

const FastStats& FastRefiner::stats() const { return impl_->stats; }
std::size_t FastRefiner::num_blocks() const { return impl_->blocks.size(); }
BlockId FastRefiner::block_of(StateId s) const { return impl_->block.at(s); }

std::vector<StateId> FastRefiner::block_states(BlockId b) const {
    std::vector<StateId> out;
    for (int l = 0; l < 4; ++l) impl_->for_each_state(impl_->blocks.at(b).lists[l], [&](StateId s) { out.push_back(s); });
    std::sort(out.begin(), out.end());
    return out;
}

ConstlnId FastRefiner::constellation_of(BlockId b) const { return impl_->blocks.at(b).constln; }
bool FastRefiner::is_trivial(ConstlnId c) const { return impl_->constlns.at(c).trivial; }
bool FastRefiner::is_bottom(StateId s) const { return is_bottom_tag(impl_->tag.at(s)); }
bool FastRefiner::is_marked(StateId s) const { return is_marked_tag(impl_->tag.at(s)); }
std::uint32_t FastRefiner::inert_count(StateId s) const { return impl_->inert_cnt.at(s); }

std::uint32_t FastRefiner::to_constln_cnt(StateId s, StateId t) const {
    const auto& im = *impl_;
    for (auto i = im.out_off.at(s); i < im.out_off[s + 1]; ++i)
        if (im.t_dst[im.out_tr[i]] == t) return im.counter[im.t_cnt[im.out_tr[i]]];
    throw std::invalid_argument("to_constln_cnt: no such transition");
}

PartitionMap stabilize_fast(const KripkeStructure& k, const FastOptions& opts, FastStats* stats) {
    FastRefiner r(k, opts);
    auto p = r.run();
    if (stats) *stats = r.stats();
    return p;
}

}  // namespace branchmin
