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

#include <branchmin/refine_naive.hpp>

#include <algorithm>
#include <numeric>
#include <random>

namespace branchmin {

namespace {

// Adjacency without self-loops.
struct Graph {
    std::vector<std::uint32_t> out_off, in_off;
    std::vector<StateId> out, in;

    explicit Graph(const KripkeStructure& k) {
        const std::size_t n = k.num_states();
        out_off.assign(n + 1, 0);
        in_off.assign(n + 1, 0);
        for (const auto& e : k.transitions())
            if (e.src != e.dst) {
                ++out_off[e.src + 1];
                ++in_off[e.dst + 1];
            }
        for (std::size_t i = 0; i < n; ++i) {
            out_off[i + 1] += out_off[i];
            in_off[i + 1] += in_off[i];
        }
        out.resize(out_off[n]);
        in.resize(in_off[n]);
        auto of = out_off, inf = in_off;
        for (const auto& e : k.transitions())
            if (e.src != e.dst) {
                out[of[e.src]++] = e.dst;
                in[inf[e.dst]++] = e.src;
            }
    }

    std::span<const StateId> succ(StateId s) const {
        return {out.data() + out_off[s], out.data() + out_off[s + 1]};
    }
    std::span<const StateId> pred(StateId s) const {
        return {in.data() + in_off[s], in.data() + in_off[s + 1]};
    }
};

class NaiveRefiner {
public:
    NaiveRefiner(const KripkeStructure& k, const NaiveOptions& opts)
        : g_(k), opts_(opts), n_(k.num_states()), stamp_(n_, 0), in_split_(n_, 0), inert_(n_, 0) {
        std::vector<std::uint32_t> key(n_);
        std::vector<std::vector<PropId>> seen;
        for (StateId s = 0; s < n_; ++s) {
            const auto l = k.label(s);
            std::vector<PropId> v(l.begin(), l.end());
            auto it = std::find(seen.begin(), seen.end(), v);
            if (it == seen.end()) it = seen.insert(seen.end(), std::move(v));
            key[s] = static_cast<std::uint32_t>(it - seen.begin());
        }
        // Block ids follow the order of first appearance.
        p_.block_of = std::move(key);
        p_.blocks.resize(seen.size());
        for (StateId s = 0; s < n_; ++s) p_.blocks[p_.block_of[s]].push_back(s);
        for (StateId s = 0; s < n_; ++s)
            for (StateId t : g_.succ(s)) inert_[s] += p_.block_of[t] == p_.block_of[s];
        bottoms_.assign(p_.blocks.size(), 0);
        for (StateId s = 0; s < n_; ++s) bottoms_[p_.block_of[s]] += inert_[s] == 0;
    }

    PartitionMap run(NaiveStats* stats) {
        std::mt19937_64 rng(opts_.shuffle_seed.value_or(0));
        bool changed = true;
        while (changed) {
            changed = false;
            std::vector<std::uint32_t> order(p_.blocks.size());
            std::iota(order.begin(), order.end(), 0);
            if (opts_.shuffle_seed) std::shuffle(order.begin(), order.end(), rng);
            // Blocks created during the pass are visited at its end.
            for (std::size_t i = 0; i < order.size() || i < p_.blocks.size(); ++i) {
                const std::uint32_t b = i < order.size() ? order[i] : static_cast<std::uint32_t>(i);
                if (refine_under(b)) changed = true;
            }
            if (stats) ++stats->passes;
            if (opts_.on_round) opts_.on_round(p_);
        }
        if (stats) stats->splits = splits_;
        return p_.to_map();
    }

private:
    // Splits every block that is unstable under block b. Returns whether
    // anything was split.
    bool refine_under(std::uint32_t b) {
        ++epoch_;
        std::vector<std::uint32_t> touched;
        std::vector<StateId> marked;
        for (StateId s : p_.blocks[b])
            for (StateId p : g_.pred(s)) {
                const auto bp = p_.block_of[p];
                if (bp == b || stamp_[p] == epoch_) continue;
                stamp_[p] = epoch_;
                marked.push_back(p);
                if (marked_bottoms_.size() <= bp) marked_bottoms_.resize(p_.blocks.size(), 0);
                if (block_epoch_.size() <= bp) block_epoch_.resize(p_.blocks.size(), 0);
                if (block_epoch_[bp] != epoch_) {
                    block_epoch_[bp] = epoch_;
                    marked_bottoms_[bp] = 0;
                    touched.push_back(bp);
                }
                marked_bottoms_[bp] += inert_[p] == 0;
            }
        bool any = false;
        for (auto bp : touched) {
            if (marked_bottoms_[bp] == bottoms_[bp]) continue;
            split_block(bp, marked);
            any = true;
        }
        return any;
    }

    // Separates split(B', B) from the rest of B'. The seeds are the states
    // stamped in this epoch; the split part keeps the block id.
    void split_block(std::uint32_t bp, const std::vector<StateId>& marked) {
        ++split_epoch_;
        std::vector<StateId> queue;
        for (StateId s : marked)
            if (p_.block_of[s] == bp) {
                in_split_[s] = split_epoch_;
                queue.push_back(s);
            }
        for (std::size_t i = 0; i < queue.size(); ++i)
            for (StateId p : g_.pred(queue[i]))
                if (p_.block_of[p] == bp && in_split_[p] != split_epoch_) {
                    in_split_[p] = split_epoch_;
                    queue.push_back(p);
                }

        const auto nb = static_cast<std::uint32_t>(p_.blocks.size());
        std::vector<StateId> keep, moved;
        for (StateId s : p_.blocks[bp]) (in_split_[s] == split_epoch_ ? keep : moved).push_back(s);
        for (StateId s : moved) p_.block_of[s] = nb;
        for (StateId s : moved) {
            for (StateId t : g_.succ(s))
                if (p_.block_of[t] == bp) --inert_[s];
            for (StateId p : g_.pred(s))
                if (p_.block_of[p] == bp) --inert_[p];
        }
        bottoms_[bp] = 0;
        for (StateId s : keep) bottoms_[bp] += inert_[s] == 0;
        std::uint32_t nb_bottoms = 0;
        for (StateId s : moved) nb_bottoms += inert_[s] == 0;
        bottoms_.push_back(nb_bottoms);
        p_.blocks[bp] = std::move(keep);
        p_.blocks.push_back(std::move(moved));
        ++splits_;
    }

    Graph g_;
    const NaiveOptions& opts_;
    std::size_t n_;
    SimplePartition p_;
    std::vector<std::uint64_t> stamp_, in_split_;
    std::vector<std::uint32_t> inert_, bottoms_, marked_bottoms_;
    std::vector<std::uint64_t> block_epoch_;
    std::uint64_t epoch_ = 0, split_epoch_ = 0;
    std::size_t splits_ = 0;
};

}  // namespace

SimplePartition SimplePartition::from_map(const PartitionMap& p) {
    SimplePartition out;
    out.block_of = p.class_indices();
    out.blocks.resize(p.num_classes());
    for (StateId s = 0; s < p.size(); ++s) out.blocks[out.block_of[s]].push_back(s);
    return out;
}

PartitionMap SimplePartition::to_map() const {
    return PartitionMap::from_keys(std::span<const std::uint32_t>(block_of));
}

std::vector<StateId> split_set(const std::vector<StateId>& bprime,
                               const std::vector<bool>& in_bbold,
                               const KripkeStructure& k) {
    if (std::all_of(bprime.begin(), bprime.end(), [&](StateId s) { return bool(in_bbold[s]); }))
        return bprime;
    const std::size_t n = k.num_states();
    std::vector<bool> in_b(n, false), in_split(n, false);
    for (StateId s : bprime) in_b[s] = true;
    const Graph g(k);
    std::vector<StateId> queue;
    for (StateId s : bprime)
        for (StateId t : g.succ(s))
            if (in_bbold[t] && !in_split[s]) {
                in_split[s] = true;
                queue.push_back(s);
            }
    for (std::size_t i = 0; i < queue.size(); ++i)
        for (StateId p : g.pred(queue[i]))
            if (in_b[p] && !in_split[p]) {
                in_split[p] = true;
                queue.push_back(p);
            }
    std::vector<StateId> out;
    for (StateId s : bprime)
        if (in_split[s]) out.push_back(s);
    return out;
}

bool is_unstable(const std::vector<StateId>& bprime,
                 const std::vector<bool>& in_bbold,
                 const KripkeStructure& k) {
    std::vector<bool> in_b(k.num_states(), false);
    for (StateId s : bprime) in_b[s] = true;
    const Graph g(k);
    bool any_marked = false, unmarked_bottom = false;
    for (StateId s : bprime) {
        bool marked = in_bbold[s], bottom = true;
        for (StateId t : g.succ(s)) {
            marked = marked || in_bbold[t];
            bottom = bottom && !in_b[t];
        }
        any_marked = any_marked || marked;
        unmarked_bottom = unmarked_bottom || (bottom && !marked);
    }
    return any_marked && unmarked_bottom;
}

PartitionMap stabilize_naive(const KripkeStructure& k, const NaiveOptions& opts, NaiveStats* stats) {
    NaiveRefiner r(k, opts);
    return r.run(stats);
}

PartitionMap branching_bisim_relational(const Lts& l) {
    const std::size_t n = l.num_states();
    // Reflexive-transitive tau closure.
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    for (StateId s = 0; s < n; ++s) reach[s][s] = true;
    for (const auto& t : l.transitions())
        if (t.action == Lts::kTau) reach[t.src][t.dst] = true;
    for (StateId m = 0; m < n; ++m)
        for (StateId i = 0; i < n; ++i)
            if (reach[i][m])
                for (StateId j = 0; j < n; ++j)
                    if (reach[m][j]) reach[i][j] = true;

    std::vector<std::vector<LabelledEdge>> out(n);
    for (const auto& t : l.transitions()) out[t.src].push_back(t);

    std::vector<std::vector<bool>> rel(n, std::vector<bool>(n, true));
    // Can t simulate every step of s in the branching sense?
    auto matches = [&](StateId s, StateId t) {
        for (const auto& e : out[s]) {
            if (e.action == Lts::kTau && rel[e.dst][t]) continue;
            bool found = false;
            for (StateId t1 = 0; t1 < n && !found; ++t1) {
                if (!reach[t][t1] || !rel[s][t1]) continue;
                for (const auto& f : out[t1])
                    if (f.action == e.action && rel[e.dst][f.dst]) {
                        found = true;
                        break;
                    }
            }
            if (!found) return false;
        }
        return true;
    };
    bool changed = true;
    while (changed) {
        changed = false;
        for (StateId s = 0; s < n; ++s)
            for (StateId t = s + 1; t < n; ++t)
                if (rel[s][t] && (!matches(s, t) || !matches(t, s))) {
                    rel[s][t] = rel[t][s] = false;
                    changed = true;
                }
    }
    std::vector<StateId> rep(n);
    for (StateId s = 0; s < n; ++s) {
        StateId r = 0;
        while (!rel[s][r]) ++r;
        rep[s] = r;
    }
    return PartitionMap(std::move(rep));
}

}  // namespace branchmin
