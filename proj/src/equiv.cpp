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

#include <branchmin/equiv.hpp>

#include <branchmin/preprocess.hpp>
#include <branchmin/refine_naive.hpp>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <sstream>

namespace branchmin {

namespace {

struct EngineRun {
    PartitionMap partition;
    std::optional<std::uint64_t> work;
};

// dbs classes of k, over all of k's states.
EngineRun dbs_partition(const KripkeStructure& k, const EquivOptions& opts) {
    const auto c = contract_sccs(k, label_partition(k));
    EngineRun out;
    PartitionMap p;
    if (opts.engine == Engine::Fast) {
        FastStats st;
        p = stabilize_fast(c.contracted, opts.fast, &st);
        out.work = st.work;
    } else {
        p = stabilize_naive(c.contracted);
    }
    std::vector<std::uint32_t> key(k.num_states());
    for (StateId s = 0; s < k.num_states(); ++s) key[s] = p[c.orig_to_new[s]];
    out.partition = PartitionMap::from_keys(std::span<const std::uint32_t>(key));
    return out;
}

PartitionMap restrict(const PartitionMap& p, std::size_t n) {
    std::vector<std::uint32_t> key(p.class_of().begin(), p.class_of().begin() + static_cast<std::ptrdiff_t>(n));
    return PartitionMap::from_keys(std::span<const std::uint32_t>(key));
}

void check_cap(std::size_t n, const EquivOptions& opts) {
    if (opts.engine == Engine::Naive && n > opts.naive_cap)
        throw CapExceeded("naive engine is capped at " + std::to_string(opts.naive_cap) + " states, input has " +
                          std::to_string(n));
}

// Classes that contain a cycle of `edges` (self-loops included).
std::vector<bool> cyclic_classes(std::size_t n, const std::vector<Edge>& edges, const PartitionMap& classes,
                                 const std::vector<std::uint32_t>& idx, std::size_t n_classes) {
    std::size_t count = 0;
    const auto comp = block_internal_sccs(n, edges, classes, &count);
    std::vector<std::uint32_t> size(count, 0);
    for (StateId s = 0; s < n; ++s) ++size[comp[s]];
    std::vector<bool> out(n_classes, false);
    for (StateId s = 0; s < n; ++s)
        if (size[comp[s]] > 1) out[idx[s]] = true;
    for (const auto& e : edges)
        if (e.src == e.dst) out[idx[e.src]] = true;
    return out;
}

KripkeStructure kripke_quotient(const KripkeStructure& k, const PartitionMap& classes) {
    const auto idx = classes.class_indices();
    const std::size_t q = classes.num_classes();
    std::vector<std::vector<PropId>> labels(q);
    for (StateId s = 0; s < k.num_states(); ++s)
        if (classes[s] == s) {
            const auto l = k.label(s);
            labels[idx[s]].assign(l.begin(), l.end());
        }
    const auto cyclic = cyclic_classes(k.num_states(), k.transitions(), classes, idx, q);
    std::vector<Edge> edges;
    std::vector<bool> has_out(q, false);
    for (const auto& e : k.transitions()) {
        if (idx[e.src] == idx[e.dst]) continue;
        edges.push_back({idx[e.src], idx[e.dst]});
        has_out[idx[e.src]] = true;
    }
    for (StateId c = 0; c < q; ++c)
        if (cyclic[c] || !has_out[c]) edges.push_back({c, c});
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return KripkeStructure(q, k.props(), std::move(labels), std::move(edges));
}

Lts lts_quotient(const Lts& l, const PartitionMap& classes, bool keep_divergence) {
    const auto idx = classes.class_indices();
    const std::size_t q = classes.num_classes();
    std::vector<bool> divergent(q, false);
    if (keep_divergence) {
        std::vector<Edge> tau;
        for (const auto& t : l.transitions())
            if (t.action == Lts::kTau) tau.push_back({t.src, t.dst});
        divergent = cyclic_classes(l.num_states(), tau, classes, idx, q);
    }
    std::vector<LabelledEdge> trans;
    for (const auto& t : l.transitions()) {
        const StateId a = idx[t.src], b = idx[t.dst];
        if (t.action == Lts::kTau && a == b && !divergent[a]) continue;
        trans.push_back({a, t.action, b});
    }
    std::sort(trans.begin(), trans.end(), [](const LabelledEdge& x, const LabelledEdge& y) {
        return std::tie(x.src, x.action, x.dst) < std::tie(y.src, y.action, y.dst);
    });
    trans.erase(std::unique(trans.begin(), trans.end()), trans.end());
    return Lts(q, idx[l.initial_state()], l.actions(), std::move(trans));
}

void check_id(std::size_t n, StateId s) {
    if (s >= n) throw std::out_of_range("state " + std::to_string(s) + " out of range (n = " + std::to_string(n) + ")");
}

}  // namespace

std::optional<Equivalence> parse_equivalence(std::string_view name) {
    if (name == "dbs") return Equivalence::Dbs;
    if (name == "stutter" || name == "stuttering") return Equivalence::Stuttering;
    if (name == "branching") return Equivalence::Branching;
    if (name == "branching-div") return Equivalence::BranchingDivergence;
    return std::nullopt;
}

std::string_view to_string(Equivalence eq) {
    switch (eq) {
        case Equivalence::Dbs: return "dbs";
        case Equivalence::Stuttering: return "stutter";
        case Equivalence::Branching: return "branching";
        case Equivalence::BranchingDivergence: return "branching-div";
    }
    return "?";
}

std::optional<Engine> parse_engine(std::string_view name) {
    if (name == "fast") return Engine::Fast;
    if (name == "naive") return Engine::Naive;
    return std::nullopt;
}

std::string_view to_string(Engine e) { return e == Engine::Fast ? "fast" : "naive"; }

bool is_kripke_equivalence(Equivalence eq) { return eq == Equivalence::Dbs || eq == Equivalence::Stuttering; }

std::size_t naive_cap_from_env() {
    const char* v = std::getenv("BRANCHMIN_NAIVE_CAP");
    if (!v) return kDefaultNaiveCap;
    std::size_t cap = 0;
    const std::string_view sv(v);
    const auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), cap);
    if (ec != std::errc() || ptr != sv.data() + sv.size()) return kDefaultNaiveCap;
    return cap;
}

KripkeResult reduce(const KripkeStructure& k, Equivalence eq, const EquivOptions& opts) {
    if (!is_kripke_equivalence(eq))
        throw FormatMismatch(std::string(to_string(eq)) + " needs an LTS, got a Kripke structure");
    check_cap(k.num_states(), opts);
    KripkeResult r;
    EngineRun run;
    if (eq == Equivalence::Dbs) {
        run = dbs_partition(k, opts);
        r.classes = std::move(run.partition);
        r.engine_states = k.num_states();
    } else {
        const auto kd = build_kd(k);
        run = dbs_partition(kd, opts);
        r.classes = restrict(run.partition, k.num_states());
        r.engine_states = kd.num_states();
    }
    r.work_units = run.work;
    r.quotient = kripke_quotient(k, r.classes);
    return r;
}

LtsResult reduce(const Lts& l, Equivalence eq, const EquivOptions& opts) {
    if (is_kripke_equivalence(eq))
        throw FormatMismatch(std::string(to_string(eq)) + " needs a Kripke structure, got an LTS");
    check_cap(l.num_states(), opts);
    const bool div = eq == Equivalence::BranchingDivergence;
    const auto e = div ? embed_lts(add_divergence_loops(l)) : embed_lts(l);
    auto run = dbs_partition(e.kripke, opts);
    LtsResult r;
    r.classes = restrict(run.partition, l.num_states());
    r.engine_states = e.kripke.num_states();
    r.work_units = run.work;
    r.quotient = lts_quotient(l, r.classes, div);
    return r;
}

bool compare(const KripkeStructure& k, Equivalence eq, StateId s, StateId t, const EquivOptions& opts) {
    check_id(k.num_states(), s);
    check_id(k.num_states(), t);
    const auto r = reduce(k, eq, opts);
    return r.classes[s] == r.classes[t];
}

bool compare(const Lts& l, Equivalence eq, StateId s, StateId t, const EquivOptions& opts) {
    check_id(l.num_states(), s);
    check_id(l.num_states(), t);
    const auto r = reduce(l, eq, opts);
    return r.classes[s] == r.classes[t];
}

std::string metrics_header(bool with_work) {
    return with_work ? "name,n,m,min_n,min_m,engine,seconds,work_units" : "name,n,m,min_n,min_m,engine,seconds";
}

std::string metrics_row(const Metrics& row, bool with_work) {
    std::ostringstream out;
    out << row.name << ',' << row.n << ',' << row.m << ',' << row.min_n << ',' << row.min_m << ','
        << to_string(row.engine) << ',';
    out.setf(std::ios::fixed);
    out.precision(6);
    out << row.seconds;
    if (with_work) {
        out << ',';
        if (row.work_units) out << *row.work_units;
    }
    return out.str();
}

}  // namespace branchmin
