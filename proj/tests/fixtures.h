//
// Copyright 2026 The PGSR Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// The two-state running example: US -> {GA, NY}, eleven residents in six
// households.

#ifndef PGSR_TESTS_FIXTURES_H_
#define PGSR_TESTS_FIXTURES_H_

#include <memory>
#include <span>
#include <vector>

#include "pgsr/hierarchy.h"

namespace pgsr::testing {

// gmock's container matchers predate std::span.
template <typename T>
std::vector<T> Vec(std::span<const T> s) {
  return {s.begin(), s.end()};
}

inline constexpr RegionId kUs = 0;
inline constexpr RegionId kGa = 1;
inline constexpr RegionId kNy = 2;

inline std::shared_ptr<const RegionTree> UsTree() {
  return std::make_shared<const RegionTree>(
      *RegionTree::Create({"US", "GA", "NY"}, {kNoRegion, kUs, kUs}));
}

inline std::vector<Record> ExampleRecords() {
  return {{"01", "A", "GA", 1}, {"02", "B", "GA", 1}, {"03", "A", "GA", 1},
          {"04", "A", "GA", 1}, {"05", "C", "GA", 1}, {"06", "D", "NY", 1},
          {"07", "E", "NY", 1}, {"08", "D", "NY", 1}, {"09", "D", "NY", 1},
          {"10", "F", "NY", 1}, {"11", "F", "NY", 1}};
}

inline std::vector<std::vector<int64_t>> ExampleCounts() {
  return {{3, 1, 2, 0, 0}, {2, 0, 1, 0, 0}, {1, 1, 1, 0, 0}};
}

inline GroupSizeHierarchy ExampleHierarchy(Role role = Role::kExact) {
  return *GroupSizeHierarchy::Create(UsTree(), ExampleCounts(), 6, role);
}

// Size-1 subtree replaced by GA = 3, NY = 0, US = 2.
inline GroupSizeHierarchy PerturbedExample() {
  std::vector<std::vector<int64_t>> counts = ExampleCounts();
  counts[kUs][0] = 2;
  counts[kGa][0] = 3;
  counts[kNy][0] = 0;
  return *GroupSizeHierarchy::Create(UsTree(), counts, 6, Role::kNoisy);
}

}  // namespace pgsr::testing

#endif  // PGSR_TESTS_FIXTURES_H_
