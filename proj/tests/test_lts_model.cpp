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
#include <branchmin/lts_model.hpp>

using namespace branchmin;

namespace {

ModelError::Kind error_kind(auto&& fn) {
    try {
        fn();
    } catch (const ModelError& e) {
        return e.kind();
    }
    FAIL("no ModelError thrown");
    return ModelError::Kind::Parse;
}

std::size_t error_line(auto&& fn) {
    try {
        fn();
    } catch (const ModelError& e) {
        return e.line();
    }
    FAIL("no ModelError thrown");
    return 0;
}

}  // namespace

TEST_CASE("parse_aut minimal files", "[aut]") {
    SECTION("one visible transition") {
        const auto l = parse_aut("des (0,1,2)\n(0,\"a\",1)");
        CHECK(l.num_states() == 2);
        CHECK(l.actions() == std::vector<std::string>{"tau", "a"});
        REQUIRE(l.num_transitions() == 1);
        CHECK(l.transitions()[0] == LabelledEdge{0, 1, 1});
    }
    SECTION("tau spelled out") {
        const auto l = parse_aut("des (0,2,2)\n(0,\"tau\",1)\n(1,\"tau\",0)");
        REQUIRE(l.num_transitions() == 2);
        for (const auto& t : l.transitions()) CHECK(t.action == Lts::kTau);
    }
    SECTION("i is internal too, barewords accepted") {
        const auto l = parse_aut("des (0,2,2)\n(0,i,1)\n(1,b,0)\n");
        CHECK(l.transitions()[0].action == Lts::kTau);
        CHECK(l.action_name(l.transitions()[1].action) == "b");
    }
    SECTION("labels with commas and spaces") {
        const auto l = parse_aut("des (0,1,2)\n(0,\"send(1, 2)\",1)\n");
        CHECK(l.action_name(l.transitions()[0].action) == "send(1, 2)");
    }
    SECTION("CRLF line endings") {
        const auto l = parse_aut("des (1,1,2)\r\n(0,\"a\",1)\r\n");
        CHECK(l.initial_state() == 1);
        CHECK(l.num_transitions() == 1);
    }
    SECTION("internal action is always present") {
        const auto l = parse_aut("des (0,0,1)\n");
        CHECK(l.actions() == std::vector<std::string>{"tau"});
    }
}

TEST_CASE("parse_aut errors", "[aut]") {
    using K = ModelError::Kind;
    CHECK(error_kind([] { parse_aut("des (0,1,1)\n(2,\"a\",0)"); }) == K::Range);
    CHECK(error_line([] { parse_aut("des (0,1,1)\n(2,\"a\",0)"); }) == 2);
    CHECK(error_kind([] { parse_aut("dex (0,1,1)\n"); }) == K::Parse);
    CHECK(error_line([] { parse_aut("\n\ndes 0,1,1\n"); }) == 3);
    CHECK(error_kind([] { parse_aut("des (0,2,2)\n(0,a,1)\n0,a,1\n"); }) == K::Parse);
    CHECK(error_line([] { parse_aut("des (0,2,2)\n(0,a,1)\n0,a,1\n"); }) == 3);
    CHECK(error_kind([] { parse_aut("des (0,2,2)\n(0,a,1)\n(0,\"a\",1)\n"); }) == K::Duplicate);
    CHECK(error_line([] { parse_aut("des (0,2,2)\n(0,a,1)\n(0,\"a\",1)\n"); }) == 3);
    CHECK(error_kind([] { parse_aut("des (0,3,2)\n(0,a,1)\n"); }) == K::Parse);
    CHECK(error_kind([] { parse_aut("des (0,1,2)\n(0,a,1)\n(1,a,0)\n"); }) == K::Parse);
    CHECK(error_kind([] { parse_aut("des (5,0,2)\n"); }) == K::Range);
    CHECK(error_kind([] { parse_aut(""); }) == K::Parse);
}

TEST_CASE("write_aut", "[aut]") {
    const Lts l(1, 0, {"tau"}, {{0, Lts::kTau, 0}});
    CHECK(write_aut(l) == "des (0,1,1)\n(0,\"tau\",0)\n");

    const std::string text = "des (0,1,2)\n(0,\"a\",1)\n";
    CHECK(write_aut(parse_aut(text)) == text);

    // Sorted by source, then action name, then target.
    const auto u = parse_aut("des (0,4,3)\n(1,b,0)\n(0,zz,2)\n(0,i,1)\n(0,a,2)\n");
    CHECK(write_aut(u) == "des (0,4,3)\n(0,\"a\",2)\n(0,\"tau\",1)\n(0,\"zz\",2)\n(1,\"b\",0)\n");
}

TEST_CASE("aut round trip on random systems", "[aut][property]") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto l = random_lts({1 + seed % 30, seed % 90, 1 + seed % 4, 0.4}, seed);
        const auto text = write_aut(l);
        const auto back = parse_aut(text);
        REQUIRE(back.same_system(l));
        REQUIRE(back.initial_state() == l.initial_state());
        REQUIRE(write_aut(back) == text);
    }
}

TEST_CASE("parse_kripke", "[kripke]") {
    using K = ModelError::Kind;
    SECTION("self-loop") {
        const auto k = parse_kripke("kripke 1 1\nlabel 0 p\ntrans 0 0");
        CHECK(k.num_states() == 1);
        CHECK(k.label_names(0) == std::vector<std::string>{"p"});
        CHECK(k.transitions() == std::vector<Edge>{{0, 0}});
    }
    SECTION("totality") {
        try {
            parse_kripke("kripke 2 1\nlabel 0 p\nlabel 1 p\ntrans 0 1");
            FAIL("accepted a non-total structure");
        } catch (const ModelError& e) {
            CHECK(e.kind() == K::Totality);
            CHECK(std::string(e.what()).find("state 1 has no outgoing transition") != std::string::npos);
        }
    }
    SECTION("empty label") {
        const auto k = parse_kripke("kripke 2 2\nlabel 0 -\nlabel 1 p\ntrans 0 1\ntrans 1 1");
        CHECK(k.num_states() == 2);
        CHECK(k.label(0).empty());
        CHECK(k.label_names(1) == std::vector<std::string>{"p"});
    }
    SECTION("errors") {
        CHECK(error_kind([] { parse_kripke("kripke 1 1\nlabel 0 p\ntrans 0 3\n"); }) == K::Range);
        CHECK(error_line([] { parse_kripke("kripke 1 1\nlabel 0 p\ntrans 0 3\n"); }) == 3);
        CHECK(error_kind([] { parse_kripke("kripke 1 2\nlabel 0 p\ntrans 0 0\ntrans 0 0\n"); }) == K::Duplicate);
        CHECK(error_kind([] { parse_kripke("kripke 1 1\nlabel 0 p\nlabel 0 q\ntrans 0 0\n"); }) == K::Duplicate);
        CHECK(error_kind([] { parse_kripke("kripke 2 1\nlabel 0 p\ntrans 0 0\n"); }) == K::Parse);
        CHECK(error_kind([] { parse_kripke("kripke 1 1\nlabel 0 p\nedge 0 0\n"); }) == K::Parse);
        CHECK(error_kind([] { parse_kripke("des (0,0,1)\n"); }) == K::Parse);
    }
}

TEST_CASE("write_kripke", "[kripke]") {
    const std::string text = "kripke 1 1\nlabel 0 p\ntrans 0 0\n";
    CHECK(write_kripke(parse_kripke(text)) == text);

    const auto k = parse_kripke("kripke 2 2\r\nlabel 1 q,p\r\nlabel 0 -\r\ntrans 1 1\r\ntrans 0 1\r\n");
    CHECK(write_kripke(k) == "kripke 2 2\nlabel 0 -\nlabel 1 p,q\ntrans 0 1\ntrans 1 1\n");

    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const std::size_t n = 1 + seed % 25;
        const auto r = random_kripke({n, n + seed % (3 * n + 1), seed % 4}, seed);
        const auto back = parse_kripke(write_kripke(r));
        REQUIRE(back.same_system(r));
        REQUIRE(write_kripke(back) == write_kripke(r));
    }
}

TEST_CASE("PartitionMap", "[partition]") {
    const std::vector<std::uint32_t> keys{7, 3, 7, 3, 9};
    const auto p = PartitionMap::from_keys(keys);
    CHECK(p.class_of() == std::vector<StateId>{0, 1, 0, 1, 4});
    CHECK(p.num_classes() == 3);
    CHECK(p.class_indices() == std::vector<std::uint32_t>{0, 1, 0, 1, 2});
    CHECK(PartitionMap(std::vector<StateId>{0, 1, 0, 1, 4}) == p);
    CHECK_THROWS_AS(PartitionMap(std::vector<StateId>{1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(PartitionMap(std::vector<StateId>{0, 0, 1}), std::invalid_argument);
}

TEST_CASE("generators", "[generate]") {
    const auto seq = tau_sequence(1);
    CHECK(write_aut(seq) == "des (0,2,3)\n(0,\"a\",1)\n(1,\"tau\",2)\n");

    const auto tree = tau_tree(2);
    CHECK(tree.num_states() == 5);
    CHECK(tree.actions().size() == 3);
    std::size_t tau = 0;
    for (const auto& t : tree.transitions()) tau += t.action == Lts::kTau;
    CHECK(tau == 2);

    CHECK(write_kripke(random_kripke({20, 60, 3}, 5)) == write_kripke(random_kripke({20, 60, 3}, 5)));
    CHECK(write_aut(random_lts({20, 60, 3, 0.4}, 5)) == write_aut(random_lts({20, 60, 3, 0.4}, 5)));
}
