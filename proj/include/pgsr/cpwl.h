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

// Convex piecewise-linear (CPWL) cost tables over integer intervals and the
// two table recurrences used by the post-processing dynamic programs:
//
//  * TableMerge combines children tables into phi(v) = min sum_c tau_c(x_c)
//    subject to sum_c x_c = v. Starting from every child's minimizer, the
//    cheapest next unit step is always taken from the child whose table has
//    the smallest slope, so phi is read off two slope-sorted step lists.
//  * ChainStep extends a chain of tables by one node, either with an
//    equality link or with a "predecessor <= v" link.
//
// Costs are exact integers: every table is built from squared deviations of
// integers.

#ifndef PGSR_CPWL_H_
#define PGSR_CPWL_H_

#include <cstdint>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "pgsr/hierarchy.h"

namespace pgsr {

using Cost = int64_t;

// Costs of the values lo, lo + 1, ..., lo + size() - 1. Always non-empty with
// non-decreasing successive slopes.
class CostTable {
 public:
  // Validates non-emptiness and convexity.
  static absl::StatusOr<CostTable> Create(int64_t lo, std::vector<Cost> costs);

  int64_t lo() const { return lo_; }
  int64_t hi() const { return lo_ + static_cast<int64_t>(costs_.size()) - 1; }
  int64_t size() const { return static_cast<int64_t>(costs_.size()); }
  Window domain() const { return {lo(), hi()}; }
  bool contains(int64_t v) const { return lo_ <= v && v <= hi(); }
  // Requires contains(v).
  Cost cost(int64_t v) const { return costs_[v - lo_]; }
  std::span<const Cost> costs() const { return costs_; }

  friend bool operator==(const CostTable&, const CostTable&) = default;

 private:
  friend CostTable MakeTable(int64_t lo, std::vector<Cost> costs);
  CostTable(int64_t lo, std::vector<Cost> costs)
      : lo_(lo), costs_(std::move(costs)) {}

  int64_t lo_ = 0;
  std::vector<Cost> costs_;
};

bool IsConvex(std::span<const Cost> costs);

struct ArgminResult {
  int64_t value;
  Cost cost;
};

// Smallest value attaining the minimum cost.
ArgminResult Argmin(const CostTable& t);

// (v - noisy)^2 over `domain`. Requires a non-empty domain.
CostTable LeafTable(int64_t noisy, Window domain);

// phi(v) + (v - noisy)^2.
CostTable AddDeviation(const CostTable& phi, int64_t noisy);

// Everything needed to recover optimal children values for any parent value
// of a merge: the children's minimizers and the order in which unit
// increments (resp. decrements) are handed out to children.
struct MergeTrace {
  std::vector<int64_t> minimizers;
  int64_t base_sum = 0;
  // Child index receiving the k-th +1 step away from base_sum.
  std::vector<int32_t> up_owners;
  // Child index receiving the k-th -1 step away from base_sum.
  std::vector<int32_t> down_owners;
  Window domain;
};

struct MergeResult {
  CostTable phi;
  MergeTrace trace;
};

// Work counters for the complexity checks.
struct OpCounter {
  int64_t comparisons = 0;
  int64_t steps = 0;
};

// min over {x_c in dom(tau_c)} with sum x_c = v of sum tau_c(x_c), for every
// v in `domain`. Rejects an empty child list and a domain that is not inside
// [sum of child lows, sum of child highs]. Ties between equal slopes go to
// the earlier child, then to the step closer to the child's minimizer.
absl::StatusOr<MergeResult> TableMerge(std::span<const CostTable> children,
                                       Window domain,
                                       OpCounter* counter = nullptr);
absl::StatusOr<MergeResult> TableMerge(
    std::span<const CostTable* const> children, Window domain,
    OpCounter* counter = nullptr);

// Children values summing to v and achieving phi(v). Rejects v outside the
// merge domain.
absl::StatusOr<std::vector<int64_t>> ReconstructAssignment(
    const MergeTrace& trace, int64_t v);

// tau_{i+1}(v) = (v - noisy)^2 + phi(v) where phi(v) = prev(v) for a
// kLevelUp link and min_{x <= v} prev(x) for a kSameOrDown link. The result
// is defined on the part of `domain` where phi is finite: domain ∩ dom(prev)
// for kLevelUp, domain ∩ [prev.lo, inf) otherwise. Rejects an empty result.
absl::StatusOr<CostTable> ChainStep(const CostTable& prev, int64_t noisy,
                                    ChainBoundary boundary, Window domain,
                                    OpCounter* counter = nullptr);

// Debug dump as "value,cost" lines with a header.
void WriteCostTableCsv(const CostTable& t, std::ostream& out);

}  // namespace pgsr

#endif  // PGSR_CPWL_H_
