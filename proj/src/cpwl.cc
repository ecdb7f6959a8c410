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

#include "pgsr/cpwl.h"

#include <algorithm>
#include <cstdio>
#include <cstdlib>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace pgsr {

bool IsConvex(std::span<const Cost> costs) {
  for (size_t k = 2; k < costs.size(); ++k) {
    if (costs[k] - costs[k - 1] < costs[k - 1] - costs[k - 2]) return false;
  }
  return true;
}

// Every table produced by the algorithms below passes through here; a
// non-convex result is a bug in this file, never a user error.
CostTable MakeTable(int64_t lo, std::vector<Cost> costs) {
  if (costs.empty() || !IsConvex(costs)) {
    std::fprintf(stderr, "pgsr: internal error: non-CPWL cost table at %lld\n",
                 static_cast<long long>(lo));
    std::abort();
  }
  return CostTable(lo, std::move(costs));
}

absl::StatusOr<CostTable> CostTable::Create(int64_t lo,
                                            std::vector<Cost> costs) {
  if (costs.empty()) return absl::InvalidArgumentError("empty cost table");
  if (!IsConvex(costs)) {
    return absl::InvalidArgumentError("cost table slopes are not monotone");
  }
  return CostTable(lo, std::move(costs));
}

ArgminResult Argmin(const CostTable& t) {
  const auto costs = t.costs();
  const auto it = std::min_element(costs.begin(), costs.end());
  return {t.lo() + (it - costs.begin()), *it};
}

CostTable LeafTable(int64_t noisy, Window domain) {
  std::vector<Cost> costs;
  costs.reserve(domain.size());
  for (int64_t v = domain.lo; v <= domain.hi; ++v) {
    costs.push_back((v - noisy) * (v - noisy));
  }
  return MakeTable(domain.lo, std::move(costs));
}

CostTable AddDeviation(const CostTable& phi, int64_t noisy) {
  std::vector<Cost> costs(phi.costs().begin(), phi.costs().end());
  for (int64_t k = 0; k < phi.size(); ++k) {
    const int64_t d = phi.lo() + k - noisy;
    costs[k] += d * d;
  }
  return MakeTable(phi.lo(), std::move(costs));
}

namespace {

// One unit move of one child away from its minimizer.
struct Step {
  Cost cost;
  int32_t child;
  int64_t offset;
};

void SortSteps(std::vector<Step>& steps, OpCounter* counter) {
  int64_t comparisons = 0;
  std::sort(steps.begin(), steps.end(),
            [&comparisons](const Step& a, const Step& b) {
              ++comparisons;
              if (a.cost != b.cost) return a.cost < b.cost;
              if (a.child != b.child) return a.child < b.child;
              return a.offset < b.offset;
            });
  if (counter != nullptr) counter->comparisons += comparisons;
}

}  // namespace

absl::StatusOr<MergeResult> TableMerge(std::span<const CostTable> children,
                                       Window domain, OpCounter* counter) {
  std::vector<const CostTable*> pointers;
  pointers.reserve(children.size());
  for (const CostTable& c : children) pointers.push_back(&c);
  return TableMerge(std::span<const CostTable* const>(pointers), domain,
                    counter);
}

absl::StatusOr<MergeResult> TableMerge(
    std::span<const CostTable* const> children, Window domain,
    OpCounter* counter) {
  if (children.empty()) {
    return absl::InvalidArgumentError("merge needs at least one child");
  }
  Window reach{0, 0};
  for (const CostTable* c : children) {
    reach.lo += c->lo();
    reach.hi += c->hi();
  }
  if (domain.empty() || domain.lo < reach.lo || domain.hi > reach.hi) {
    return absl::FailedPreconditionError(absl::StrCat(
        "merge domain [", domain.lo, ", ", domain.hi,
        "] is not reachable from children sums [", reach.lo, ", ", reach.hi,
        "]"));
  }

  MergeTrace trace;
  trace.domain = domain;
  trace.minimizers.reserve(children.size());
  Cost base_cost = 0;
  std::vector<Step> up;
  std::vector<Step> down;
  for (size_t c = 0; c < children.size(); ++c) {
    const CostTable& t = *children[c];
    const ArgminResult m = Argmin(t);
    trace.minimizers.push_back(m.value);
    trace.base_sum += m.value;
    base_cost += m.cost;
    const auto child = static_cast<int32_t>(c);
    for (int64_t x = m.value + 1; x <= t.hi(); ++x) {
      up.push_back({t.cost(x) - t.cost(x - 1), child, x - m.value});
    }
    for (int64_t x = m.value - 1; x >= t.lo(); --x) {
      down.push_back({t.cost(x) - t.cost(x + 1), child, m.value - x});
    }
    if (counter != nullptr) counter->steps += t.size();
  }
  SortSteps(up, counter);
  SortSteps(down, counter);

  // Only the steps that reach into the domain are ever replayed.
  const int64_t up_needed = std::max<int64_t>(0, domain.hi - trace.base_sum);
  const int64_t down_needed = std::max<int64_t>(0, trace.base_sum - domain.lo);
  trace.up_owners.reserve(up_needed);
  trace.down_owners.reserve(down_needed);
  for (int64_t k = 0; k < up_needed; ++k) trace.up_owners.push_back(up[k].child);
  for (int64_t k = 0; k < down_needed; ++k) {
    trace.down_owners.push_back(down[k].child);
  }

  std::vector<Cost> phi(domain.size());
  Cost running = base_cost;
  for (int64_t v = trace.base_sum; v <= domain.hi; ++v) {
    if (v > trace.base_sum) running += up[v - trace.base_sum - 1].cost;
    if (v >= domain.lo) phi[v - domain.lo] = running;
  }
  running = base_cost;
  for (int64_t v = trace.base_sum - 1; v >= domain.lo; --v) {
    running += down[trace.base_sum - v - 1].cost;
    if (v <= domain.hi) phi[v - domain.lo] = running;
  }
  if (counter != nullptr) counter->steps += domain.size();

  return MergeResult{MakeTable(domain.lo, std::move(phi)), std::move(trace)};
}

absl::StatusOr<std::vector<int64_t>> ReconstructAssignment(
    const MergeTrace& trace, int64_t v) {
  if (!trace.domain.contains(v)) {
    return absl::OutOfRangeError(absl::StrCat(
        "value ", v, " is outside the merge domain [", trace.domain.lo, ", ",
        trace.domain.hi, "]"));
  }
  std::vector<int64_t> values = trace.minimizers;
  for (int64_t k = 0; k < v - trace.base_sum; ++k) ++values[trace.up_owners[k]];
  for (int64_t k = 0; k < trace.base_sum - v; ++k) {
    --values[trace.down_owners[k]];
  }
  return values;
}

absl::StatusOr<CostTable> ChainStep(const CostTable& prev, int64_t noisy,
                                    ChainBoundary boundary, Window domain,
                                    OpCounter* counter) {
  Window eff = domain;
  eff.lo = std::max(eff.lo, prev.lo());
  if (boundary == ChainBoundary::kLevelUp) eff.hi = std::min(eff.hi, prev.hi());
  if (eff.empty()) {
    return absl::FailedPreconditionError(absl::StrCat(
        "chain node domain [", domain.lo, ", ", domain.hi,
        "] has no feasible value after predecessor [", prev.lo(), ", ",
        prev.hi(), "]"));
  }

  std::vector<Cost> costs(eff.size());
  if (boundary == ChainBoundary::kLevelUp) {
    for (int64_t v = eff.lo; v <= eff.hi; ++v) {
      costs[v - eff.lo] = (v - noisy) * (v - noisy) + prev.cost(v);
    }
  } else {
    // On a convex table the running minimum up to v is the table clipped at
    // its smallest minimizer.
    const int64_t v0 = Argmin(prev).value;
    for (int64_t v = eff.lo; v <= eff.hi; ++v) {
      costs[v - eff.lo] = (v - noisy) * (v - noisy) + prev.cost(std::min(v, v0));
    }
    if (counter != nullptr) counter->steps += prev.size();
  }
  if (counter != nullptr) counter->steps += eff.size();
  return MakeTable(eff.lo, std::move(costs));
}

void WriteCostTableCsv(const CostTable& t, std::ostream& out) {
  out << "value,cost\n";
  for (int64_t v = t.lo(); v <= t.hi(); ++v) out << v << ',' << t.cost(v) << '\n';
}

}  // namespace pgsr
