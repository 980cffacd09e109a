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

#ifndef BRANCHMIN_TESTS_FIXTURES_HPP
#define BRANCHMIN_TESTS_FIXTURES_HPP

#include <branchmin/lts_model.hpp>

namespace fixture {

// The unstable-after-split example: n1, n2, n3 form one block (label p), c
// is the block they split under (label q), b sits in the other constellation
// (label r), and a sink with its own label keeps the structure total.
//   n1 -> n3, n2 -> n3, n3 -> b, n2 -> b, n1 -> c, n2 -> c
struct Restab {
    static constexpr branchmin::StateId n1 = 0, n2 = 1, n3 = 2, b = 3, c = 4, sink = 5;

    static branchmin::KripkeStructure kripke() {
        return branchmin::KripkeStructure(
            6, {"p", "q", "r", "z"}, {{0}, {0}, {0}, {2}, {1}, {3}},
            {{n1, n3}, {n2, n3}, {n3, b}, {n2, b}, {n1, c}, {n2, c}, {b, sink}, {c, sink}, {sink, sink}});
    }
};

}  // namespace fixture

#endif
