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

#include "tests/oracle.h"

#include <algorithm>
#include <limits>
#include <optional>
#include <string>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace pgsr::testing {
namespace {

constexpr int64_t kInf = std::numeric_limits<int64_t>::max();

void SumUp(const RegionTree& tree, RegionId r, Counts& counts) {
  if (tree.is_leaf(r)) return;
  std::fill(counts[r].begin(), counts[r].end(), 0);
  for (RegionId c : tree.children(r)) {
    SumUp(tree, c, counts);
    for (size_t k = 0; k < counts[r].size(); ++k) counts[r][k] += counts[c][k];
  }
}

void PostOrder(const RegionTree& tree, RegionId r, int k,
               std::vector<std::pair<int, RegionId>>& out) {
  for (RegionId c : tree.children(r)) PostOrder(tree, c, k, out);
  out.emplace_back(k, r);
}

int Depth(const RegionTree& tree, RegionId r) {
  int depth = 1;
  while (tree.parent(r) != kNoRegion) {
    r = tree.parent(r);
    ++depth;
  }
  return depth;
}

Window WindowOf(const std::vector<std::vector<Window>>& windows, RegionId r,
                int k, int64_t total) {
  return windows.empty() ? Window{0, total} : windows[r][k];
}

}  // namespace

absl::Status EnumerateHierarchies(
    const RegionTree& tree, int num_sizes, int64_t total,
    const std::function<void(const Counts&)>& visit) {
  std::vector<RegionId> leaves;
  for (RegionId r = 0; r < tree.size(); ++r) {
    if (tree.is_leaf(r)) leaves.push_back(r);
  }
  const int64_t cells = static_cast<int64_t>(leaves.size()) * num_sizes;
  // C(total + cells - 1, cells - 1), the number of compositions.
  double space = 1.0;
  for (int64_t i = 1; i < cells; ++i) {
    space = space * static_cast<double>(total + i) / static_cast<double>(i);
  }
  if (space > static_cast<double>(kSearchLimit)) {
    return absl::ResourceExhaustedError(
        absl::StrCat("search space ", space, " exceeds the oracle limit"));
  }
  Counts counts(tree.size(), std::vector<int64_t>(num_sizes, 0));
  std::function<void(int64_t, int64_t)> place = [&](int64_t cell,
                                                    int64_t remaining) {
    const RegionId leaf = leaves[cell / num_sizes];
    const int k = static_cast<int>(cell % num_sizes);
    if (cell == cells - 1) {
      counts[leaf][k] = remaining;
      SumUp(tree, tree.root(), counts);
      visit(counts);
      return;
    }
    for (int64_t x = 0; x <= remaining; ++x) {
      counts[leaf][k] = x;
      place(cell + 1, remaining - x);
    }
    counts[leaf][k] = 0;
  };
  place(0, total);
  return absl::OkStatus();
}

absl::StatusOr<OracleResult> OracleTree(
    const RegionTree& tree, const Counts& noisy, int64_t total,
    const std::vector<std::vector<Window>>& windows) {
  const int n = static_cast<int>(noisy[0].size());
  OracleResult best;
  best.cost = kInf;
  const absl::Status status =
      EnumerateHierarchies(tree, n, total, [&](const Counts& counts) {
        int64_t cost = 0;
        for (RegionId r = 0; r < tree.size(); ++r) {
          for (int k = 0; k < n; ++k) {
            if (!WindowOf(windows, r, k, total).contains(counts[r][k])) return;
            const int64_t d = counts[r][k] - noisy[r][k];
            cost += d * d;
          }
        }
        if (cost < best.cost) best = {cost, counts};
      });
  if (!status.ok()) return status;
  if (best.cost == kInf) {
    return absl::NotFoundError("no hierarchy fits the windows");
  }
  return best;
}

std::vector<std::pair<int, RegionId>> PostOrderNodes(const RegionTree& tree,
                                                     int num_sizes) {
  std::vector<std::pair<int, RegionId>> out;
  for (int k = 0; k < num_sizes; ++k) PostOrder(tree, tree.root(), k, out);
  return out;
}

Counts ChainValues(const RegionTree& tree, const Counts& counts) {
  const int n = static_cast<int>(counts[0].size());
  Counts values(tree.size(), std::vector<int64_t>(n, 0));
  std::vector<int64_t> running(tree.size() + 1, 0);
  for (const auto& [k, r] : PostOrderNodes(tree, n)) {
    const int level = Depth(tree, r);
    running[level] += counts[r][k];
    values[r][k] = running[level];
  }
  return values;
}

absl::StatusOr<OracleResult> OracleChain(
    const RegionTree& tree, const Counts& noisy, int64_t total,
    const std::vector<std::vector<Window>>& windows) {
  const int n = static_cast<int>(noisy[0].size());
  const std::vector<std::pair<int, RegionId>> order = PostOrderNodes(tree, n);
  const int m = static_cast<int>(order.size());
  std::vector<int> levels(m);
  for (int i = 0; i < m; ++i) levels[i] = Depth(tree, order[i].second);

  std::vector<int64_t> values(m, 0);
  std::vector<int64_t> best_values;
  int64_t best = kInf;
  int64_t visited = 0;
  bool exhausted = false;
  std::function<void(int, int64_t)> dfs = [&](int i, int64_t cost) {
    if (exhausted || cost >= best) return;
    if (i == m) {
      if (values[m - 1] != total) return;
      best = cost;
      best_values = values;
      return;
    }
    const auto [k, r] = order[i];
    const Window w = WindowOf(windows, r, k, total);
    int64_t lo = std::max<int64_t>(w.lo, i == 0 ? 0 : values[i - 1]);
    int64_t hi = std::min<int64_t>(w.hi, total);
    if (i > 0 && levels[i - 1] > levels[i]) {
      lo = std::max(lo, values[i - 1]);
      hi = std::min(hi, values[i - 1]);
    }
    if (i == m - 1) {
      lo = std::max(lo, total);
      hi = std::min(hi, total);
    }
    for (int64_t v = lo; v <= hi; ++v) {
      if (++visited > kSearchLimit) {
        exhausted = true;
        return;
      }
      values[i] = v;
      const int64_t d = v - noisy[r][k];
      dfs(i + 1, cost + d * d);
    }
  };
  dfs(0, 0);
  if (exhausted) {
    return absl::ResourceExhaustedError("chain search exceeds the oracle limit");
  }
  if (best == kInf) return absl::NotFoundError("no chain fits the windows");
  OracleResult result;
  result.cost = best;
  result.values.assign(tree.size(), std::vector<int64_t>(n, 0));
  for (int i = 0; i < m; ++i) {
    result.values[order[i].second][order[i].first] = best_values[i];
  }
  return result;
}

absl::StatusOr<OracleResult> OracleChainByHierarchies(const RegionTree& tree,
                                                      const Counts& noisy,
                                                      int64_t total) {
  const int n = static_cast<int>(noisy[0].size());
  OracleResult best;
  best.cost = kInf;
  const absl::Status status =
      EnumerateHierarchies(tree, n, total, [&](const Counts& counts) {
        const Counts c = ChainValues(tree, counts);
        int64_t cost = 0;
        for (RegionId r = 0; r < tree.size(); ++r) {
          for (int k = 0; k < n; ++k) {
            const int64_t d = c[r][k] - noisy[r][k];
            cost += d * d;
          }
        }
        if (cost < best.cost) best = {cost, c};
      });
  if (!status.ok()) return status;
  return best;
}

std::optional<Cost> BruteMerge(const std::vector<CostTable>& children,
                               int64_t v) {
  std::optional<Cost> best;
  std::function<void(size_t, int64_t, Cost)> go = [&](size_t c, int64_t sum,
                                                      Cost cost) {
    if (c == children.size()) {
      if (sum == v && (!best.has_value() || cost < *best)) best = cost;
      return;
    }
    for (int64_t x = children[c].lo(); x <= children[c].hi(); ++x) {
      go(c + 1, sum + x, cost + children[c].cost(x));
    }
  };
  go(0, 0, 0);
  return best;
}

std::shared_ptr<const RegionTree> RandomTree(std::mt19937_64& rng,
                                             int max_levels, int max_children) {
  const int levels = std::uniform_int_distribution<int>(1, max_levels)(rng);
  std::uniform_int_distribution<int> fanout(1, max_children);
  std::vector<std::string> names = {"r0"};
  std::vector<RegionId> parents = {kNoRegion};
  std::vector<RegionId> frontier = {0};
  for (int level = 1; level < levels; ++level) {
    std::vector<RegionId> next;
    for (RegionId p : frontier) {
      const int children = fanout(rng);
      for (int c = 0; c < children; ++c) {
        next.push_back(static_cast<RegionId>(names.size()));
        names.push_back(absl::StrCat("r", names.size()));
        parents.push_back(p);
      }
    }
    frontier = std::move(next);
  }
  return std::make_shared<const RegionTree>(
      *RegionTree::Create(std::move(names), std::move(parents)));
}

GroupSizeHierarchy RandomHierarchy(std::mt19937_64& rng,
                                   std::shared_ptr<const RegionTree> tree,
                                   int num_sizes, int64_t total) {
  std::vector<RegionId> leaves;
  for (RegionId r = 0; r < tree->size(); ++r) {
    if (tree->is_leaf(r)) leaves.push_back(r);
  }
  Counts counts(tree->size(), std::vector<int64_t>(num_sizes, 0));
  std::uniform_int_distribution<size_t> leaf(0, leaves.size() - 1);
  std::uniform_int_distribution<int> size(0, num_sizes - 1);
  for (int64_t g = 0; g < total; ++g) ++counts[leaves[leaf(rng)]][size(rng)];
  return *GroupSizeHierarchy::FromLeafCounts(std::move(tree), std::move(counts),
                                             Role::kExact);
}

CostTable RandomConvexTable(std::mt19937_64& rng, int64_t lo_min,
                            int64_t lo_max, int max_len) {
  const int64_t lo = std::uniform_int_distribution<int64_t>(lo_min, lo_max)(rng);
  const int len = std::uniform_int_distribution<int>(1, max_len)(rng);
  int64_t slope = std::uniform_int_distribution<int64_t>(-30, 10)(rng);
  std::uniform_int_distribution<int64_t> bend(0, 8);
  std::vector<Cost> costs = {0};
  for (int i = 1; i < len; ++i) {
    costs.push_back(costs.back() + slope);
    slope += bend(rng);
  }
  const Cost low = *std::min_element(costs.begin(), costs.end());
  const Cost shift = std::uniform_int_distribution<Cost>(0, 20)(rng) - low;
  for (Cost& c : costs) c += shift;
  return *CostTable::Create(lo, std::move(costs));
}

}  // namespace pgsr::testing
