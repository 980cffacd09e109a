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

#include <catch2/catch_amalgamated.hpp>

#include <branchmin/generate.hpp>
#include <branchmin/preprocess.hpp>
#include <branchmin/refine_naive.hpp>

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace branchmin;

namespace {

std::vector<bool> indicator(std::size_t n, std::initializer_list<StateId> states) {
    std::vector<bool> v(n, false);
    for (StateId s : states) v[s] = true;
    return v;
}

// dbs classes through contraction and the naive engine, on original states.
std::vector<StateId> naive_dbs(const KripkeStructure& k) {
    const auto c = contract_sccs(k, label_partition(k));
    const auto p = stabilize_naive(c.contracted);
    std::vector<std::uint32_t> key(k.num_states());
    for (StateId s = 0; s < k.num_states(); ++s) key[s] = p[c.orig_to_new[s]];
    return PartitionMap::from_keys(key).class_of();
}

}  // namespace

TEST_CASE("split_set", "[naive]") {
    const auto k = KripkeStructure(4, {"p", "q"}, {{0}, {0}, {0}, {1}},
                                   {{0, 1}, {1, 3}, {2, 2}, {3, 3}});
    SECTION("block inside the splitter") {
        CHECK(split_set({0, 1, 2}, indicator(4, {0, 1, 2, 3}), k) == std::vector<StateId>{0, 1, 2});
    }
    SECTION("one inert step") {
        CHECK(split_set({0, 1}, indicator(4, {3}), k) == std::vector<StateId>{0, 1});
        CHECK(split_set({0, 1, 2}, indicator(4, {3}), k) == std::vector<StateId>{0, 1});
    }
    SECTION("random instances against forward search") {
        for (std::uint64_t seed = 0; seed < 300; ++seed) {
            const std::size_t n = 2 + seed % 20;
            const auto k2 = random_kripke({n, n + seed % (3 * n), 1}, seed);
            std::mt19937_64 rng(seed);
            std::vector<StateId> bprime;
            std::vector<bool> bbold(n, false);
            for (StateId s = 0; s < n; ++s) {
                const auto r = rng() % 3;
                if (r == 0) bprime.push_back(s);
                if (r == 1) bbold[s] = true;
            }
            REQUIRE(split_set(bprime, bbold, k2) == oracle::split_forward(bprime, bbold, k2));
        }
    }
}

TEST_CASE("is_unstable", "[naive]") {
    using F = fixture::Restab;
    const auto k = F::kripke();
    CHECK_FALSE(is_unstable({F::n1, F::n2, F::n3}, indicator(6, {F::n1, F::n2, F::n3}), k));
    CHECK(is_unstable({F::n1, F::n2, F::n3}, indicator(6, {F::c}), k));
    // Under {b}: every state reaches b, the only bottom n3 is marked.
    CHECK_FALSE(is_unstable({F::n1, F::n2, F::n3}, indicator(6, {F::b}), k));
    // After the split, {n1, n2} has bottoms n1 (no b step) and n2.
    CHECK(is_unstable({F::n1, F::n2}, indicator(6, {F::b}), k));
}

TEST_CASE("bottom-state criterion agrees with split/cosplit", "[naive][property]") {
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        const std::size_t n = 3 + seed % 25;
        const auto inst = oracle::random_cycle_free(n, n + seed % (2 * n), 1 + seed % 6, seed);
        REQUIRE(oracle::cycle_free(inst.k, inst.block_of));
        std::mt19937_64 rng(seed ^ 0x9e37);
        for (std::size_t b = 0; b < inst.num_blocks; ++b) {
            std::vector<StateId> bprime;
            for (StateId s = 0; s < n; ++s)
                if (inst.block_of[s] == b) bprime.push_back(s);
            if (bprime.empty()) continue;
            for (int sample = 0; sample < 4; ++sample) {
                const auto mask = rng();
                std::vector<bool> bbold(n);
                for (StateId s = 0; s < n; ++s) bbold[s] = (mask >> (inst.block_of[s] % 64)) & 1;
                const auto split = oracle::split_forward(bprime, bbold, inst.k);
                const bool direct = bbold[bprime[0]] ? false : !split.empty() && split.size() < bprime.size();
                REQUIRE(is_unstable(bprime, bbold, inst.k) == direct);
            }
        }
    }
}

TEST_CASE("stabilize_naive examples", "[naive]") {
    SECTION("one label, strongly connected") {
        const KripkeStructure k(3, {"p"}, {{0}, {0}, {0}}, {{0, 1}, {1, 2}, {2, 0}});
        const auto c = contract_sccs(k, label_partition(k));
        CHECK(stabilize_naive(c.contracted).num_classes() == 1);
    }
    SECTION("restabilization example falls apart") {
        const auto p = stabilize_naive(fixture::Restab::kripke());
        CHECK(p.class_of() == std::vector<StateId>{0, 1, 2, 3, 4, 5});
    }
    SECTION("(a.tau)^n embedding") {
        for (std::size_t n : {1, 2, 5, 17}) {
            const auto e = embed_lts(tau_sequence(n));
            const auto p = stabilize_naive(contract_sccs(e.kripke, label_partition(e.kripke)).contracted);
            // n+1 original classes plus n action states, all distinct.
            CHECK(p.num_classes() == 2 * n + 1);
        }
    }
}

TEST_CASE("stabilize_naive equals the dbs relation", "[naive][property]") {
    for (std::uint64_t seed = 0; seed < 400; ++seed) {
        const std::size_t n = 1 + seed % 30;
        const auto k = random_kripke({n, n + seed % (3 * n + 1), seed % 3}, seed);
        REQUIRE(naive_dbs(k) == oracle::dbs_classes(k));
    }
}

TEST_CASE("stabilize_naive is order independent, monotone and cycle-free", "[naive][property]") {
    for (std::uint64_t seed = 0; seed < 150; ++seed) {
        const std::size_t n = 2 + seed % 40;
        const auto k0 = random_kripke({n, n + seed % (3 * n), 1 + seed % 3}, seed);
        const auto k = contract_sccs(k0, label_partition(k0)).contracted;
        const auto pi0 = label_partition(k);
        const auto reference = stabilize_naive(k);

        std::size_t rounds = 0;
        NaiveOptions opts;
        opts.shuffle_seed = seed + 1;
        opts.on_round = [&](const SimplePartition& p) {
            ++rounds;
            for (StateId s = 0; s < k.num_states(); ++s)
                for (StateId t = 0; t < k.num_states(); ++t) {
                    // Refines the labels, is refined by the final partition.
                    if (p.block_of[s] == p.block_of[t]) REQUIRE(pi0[s] == pi0[t]);
                    if (reference[s] == reference[t]) REQUIRE(p.block_of[s] == p.block_of[t]);
                }
            std::vector<StateId> bo(p.block_of.begin(), p.block_of.end());
            REQUIRE(oracle::cycle_free(k, bo));
        };
        REQUIRE(stabilize_naive(k, opts) == reference);
        CHECK(rounds >= 1);
    }
}

TEST_CASE("stabilize_naive output is stable", "[naive][property]") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const std::size_t n = 2 + seed % 30;
        const auto k0 = random_kripke({n, n + seed % (3 * n), 1 + seed % 3}, seed);
        const auto k = contract_sccs(k0, label_partition(k0)).contracted;
        const auto sp = SimplePartition::from_map(stabilize_naive(k));
        std::mt19937_64 rng(seed);
        for (const auto& block : sp.blocks)
            for (int sample = 0; sample < 8; ++sample) {
                const auto mask = rng();
                std::vector<bool> bbold(k.num_states());
                for (StateId s = 0; s < k.num_states(); ++s) bbold[s] = (mask >> (sp.block_of[s] % 64)) & 1;
                REQUIRE_FALSE(is_unstable(block, bbold, k));
            }
    }
}

TEST_CASE("branching_bisim_relational", "[naive]") {
    SECTION("inert tau collapses") {
        const Lts l(3, 0, {"tau", "a"}, {{0, Lts::kTau, 1}, {1, 1, 2}});
        CHECK(branching_bisim_relational(l).class_of() == std::vector<StateId>{0, 0, 2});
    }
    SECTION("different actions") {
        const Lts l(3, 0, {"tau", "a", "b"}, {{0, 1, 2}, {1, 2, 2}});
        CHECK(branching_bisim_relational(l).num_classes() == 3);
    }
    SECTION("random systems against the oracle and the embedding") {
        for (std::uint64_t seed = 0; seed < 300; ++seed) {
            const std::size_t n = 1 + seed % 25;
            const auto l = random_lts({n, seed % (3 * n + 1), 1 + seed % 3, 0.4}, seed);
            const auto rel = branching_bisim_relational(l);
            REQUIRE(rel.class_of() == oracle::branching_classes(l, false));

            const auto e = embed_lts(l);
            auto dbs = naive_dbs(e.kripke);
            dbs.resize(e.orig_states);
            REQUIRE(PartitionMap::from_keys(std::span<const std::uint32_t>(dbs)) == rel);
        }
    }
}
