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

#include "pgsr/hierarchy.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace pgsr {

absl::StatusOr<RegionTree> RegionTree::Create(std::vector<std::string> names,
                                              std::vector<RegionId> parents) {
  const int n = static_cast<int>(names.size());
  if (n == 0) return absl::InvalidArgumentError("region tree is empty");
  if (static_cast<int>(parents.size()) != n) {
    return absl::InvalidArgumentError("names and parents differ in length");
  }
  std::unordered_set<std::string> seen;
  for (const std::string& name : names) {
    if (!seen.insert(name).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate region id '", name, "'"));
    }
  }

  RegionTree t;
  t.children_.resize(n);
  for (int r = 0; r < n; ++r) {
    const RegionId p = parents[r];
    if (p == kNoRegion) {
      if (t.root_ != kNoRegion) {
        return absl::InvalidArgumentError(absl::StrCat(
            "multiple roots: '", names[t.root_], "' and '", names[r], "'"));
      }
      t.root_ = r;
    } else if (p < 0 || p >= n || p == r) {
      return absl::InvalidArgumentError(
          absl::StrCat("region '", names[r], "' has an invalid parent"));
    } else {
      t.children_[p].push_back(r);
    }
  }
  if (t.root_ == kNoRegion) return absl::InvalidArgumentError("no root region");

  // Breadth-first from the root assigns levels; unreached regions sit on a
  // cycle.
  t.levels_of_.assign(n, 0);
  t.levels_of_[t.root_] = 1;
  std::vector<RegionId> queue = {t.root_};
  for (size_t head = 0; head < queue.size(); ++head) {
    const RegionId r = queue[head];
    for (RegionId c : t.children_[r]) {
      t.levels_of_[c] = t.levels_of_[r] + 1;
      queue.push_back(c);
    }
  }
  if (static_cast<int>(queue.size()) != n) {
    return absl::InvalidArgumentError("region parents form a cycle");
  }

  int leaf_level = 0;
  for (int r = 0; r < n; ++r) {
    if (!t.children_[r].empty()) continue;
    if (leaf_level == 0) leaf_level = t.levels_of_[r];
    if (t.levels_of_[r] != leaf_level) {
      return absl::InvalidArgumentError(absl::StrCat(
          "leaf '", names[r], "' is at level ", t.levels_of_[r],
          " but other leaves are at level ", leaf_level));
    }
  }
  t.levels_ = leaf_level;
  t.by_level_.resize(t.levels_);
  for (int r = 0; r < n; ++r) t.by_level_[t.levels_of_[r] - 1].push_back(r);

  // Iterative post-order.
  std::vector<std::pair<RegionId, size_t>> stack = {{t.root_, 0}};
  while (!stack.empty()) {
    auto& [r, next] = stack.back();
    if (next < t.children_[r].size()) {
      const RegionId c = t.children_[r][next++];
      stack.push_back({c, 0});
    } else {
      t.post_order_.push_back(r);
      stack.pop_back();
    }
  }

  t.names_ = std::move(names);
  t.parents_ = std::move(parents);
  return t;
}

std::optional<RegionId> RegionTree::Find(std::string_view name) const {
  for (int r = 0; r < size(); ++r) {
    if (names_[r] == name) return r;
  }
  return std::nullopt;
}

std::string_view RoleName(Role role) {
  switch (role) {
    case Role::kExact:
      return "exact";
    case Role::kNoisy:
      return "noisy";
    case Role::kPostProcessed:
      return "post-processed";
  }
  return "unknown";
}

absl::StatusOr<Role> ParseRole(std::string_view name) {
  if (name == "exact") return Role::kExact;
  if (name == "noisy") return Role::kNoisy;
  if (name == "post-processed") return Role::kPostProcessed;
  return absl::InvalidArgumentError(absl::StrCat("unknown role '", std::string(name),
                                                 "'"));
}

absl::StatusOr<GroupSizeHierarchy> GroupSizeHierarchy::Create(
    std::shared_ptr<const RegionTree> tree,
    std::vector<std::vector<int64_t>> counts, int64_t total_groups, Role role,
    int first_size) {
  if (tree == nullptr) return absl::InvalidArgumentError("null region tree");
  if (static_cast<int>(counts.size()) != tree->size()) {
    return absl::InvalidArgumentError(
        absl::StrCat("expected counts for ", tree->size(), " regions, got ",
                     counts.size()));
  }
  if (counts[0].empty()) {
    return absl::InvalidArgumentError("group-size vectors must be non-empty");
  }
  for (int r = 0; r < tree->size(); ++r) {
    if (counts[r].size() != counts[0].size()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "region '", tree->name(r), "' has ", counts[r].size(),
          " group sizes, expected ", counts[0].size()));
    }
  }
  if (total_groups < 0) {
    return absl::InvalidArgumentError("total group count must be >= 0");
  }
  if (first_size != 0 && first_size != 1) {
    return absl::InvalidArgumentError("first group size must be 0 or 1");
  }
  GroupSizeHierarchy h;
  h.tree_ = std::move(tree);
  h.num_sizes_ = static_cast<int>(counts[0].size());
  h.counts_ = std::move(counts);
  h.total_groups_ = total_groups;
  h.role_ = role;
  h.first_size_ = first_size;
  return h;
}

absl::StatusOr<GroupSizeHierarchy> GroupSizeHierarchy::FromLeafCounts(
    std::shared_ptr<const RegionTree> tree,
    std::vector<std::vector<int64_t>> leaf_counts, Role role, int first_size) {
  if (tree == nullptr) return absl::InvalidArgumentError("null region tree");
  if (static_cast<int>(leaf_counts.size()) != tree->size()) {
    return absl::InvalidArgumentError("expected one vector per region");
  }
  size_t n = 0;
  for (RegionId r = 0; r < tree->size(); ++r) {
    if (tree->is_leaf(r)) n = std::max(n, leaf_counts[r].size());
  }
  if (n == 0) return absl::InvalidArgumentError("leaf counts are empty");
  for (RegionId r : tree->post_order()) {
    if (tree->is_leaf(r)) {
      if (leaf_counts[r].size() != n) {
        return absl::InvalidArgumentError(absl::StrCat(
            "leaf '", tree->name(r), "' has ", leaf_counts[r].size(),
            " group sizes, expected ", n));
      }
      continue;
    }
    leaf_counts[r].assign(n, 0);
    for (RegionId c : tree->children(r)) {
      for (size_t k = 0; k < n; ++k) leaf_counts[r][k] += leaf_counts[c][k];
    }
  }
  const auto& top = leaf_counts[tree->root()];
  const int64_t total = std::accumulate(top.begin(), top.end(), int64_t{0});
  return Create(std::move(tree), std::move(leaf_counts), std::max<int64_t>(0, total),
                role, first_size);
}

absl::StatusOr<GroupSizeHierarchy> GroupSizeHierarchy::WithCounts(
    std::vector<std::vector<int64_t>> counts, Role role) const {
  return Create(tree_, std::move(counts), total_groups_, role, first_size_);
}

bool operator==(const GroupSizeHierarchy& a, const GroupSizeHierarchy& b) {
  return a.total_groups_ == b.total_groups_ && a.first_size_ == b.first_size_ &&
         a.counts_ == b.counts_ && a.tree_->size() == b.tree_->size();
}

absl::StatusOr<GroupSizeHierarchy> AggregateRecords(
    std::span<const Record> records, std::shared_ptr<const RegionTree> tree,
    const AggregateOptions& options) {
  if (tree == nullptr) return absl::InvalidArgumentError("null region tree");

  struct Unit {
    RegionId region;
    int size;
  };
  std::unordered_map<std::string, RegionId> region_ids;
  for (RegionId r = 0; r < tree->size(); ++r) region_ids[tree->name(r)] = r;

  // Ordered so that aggregation does not depend on hash iteration order.
  std::map<std::string, Unit> units;
  for (const Record& rec : records) {
    auto it = region_ids.find(rec.region);
    if (it == region_ids.end()) {
      return absl::InvalidArgumentError(
          absl::StrCat("record for user '", rec.user, "' names unknown region '",
                       rec.region, "'"));
    }
    if (!tree->is_leaf(it->second)) {
      return absl::InvalidArgumentError(
          absl::StrCat("record for user '", rec.user,
                       "' names non-leaf region '", rec.region, "'"));
    }
    if (rec.quantity != 0 && rec.quantity != 1) {
      return absl::InvalidArgumentError(
          absl::StrCat("record for user '", rec.user, "' has quantity ",
                       rec.quantity, "; only 0/1 quantities are supported"));
    }
    auto [unit, inserted] = units.try_emplace(rec.unit, Unit{it->second, 0});
    if (!inserted && unit->second.region != it->second) {
      return absl::InvalidArgumentError(absl::StrCat(
          "unit '", rec.unit, "' appears in regions '",
          tree->name(unit->second.region), "' and '", rec.region, "'"));
    }
    unit->second.size += rec.quantity;
  }

  const int first_size = options.include_size_zero ? 0 : 1;
  int max_size = first_size;
  for (const auto& [name, unit] : units) max_size = std::max(max_size, unit.size);
  int num_sizes = max_size - first_size + 1;
  if (options.num_sizes.has_value()) {
    if (*options.num_sizes < num_sizes) {
      return absl::InvalidArgumentError(
          absl::StrCat("requested ", *options.num_sizes,
                       " group sizes but the largest group needs ", num_sizes));
    }
    num_sizes = *options.num_sizes;
  }

  std::vector<std::vector<int64_t>> counts(
      tree->size(), std::vector<int64_t>(num_sizes, 0));
  for (const auto& [name, unit] : units) {
    if (unit.size < first_size) continue;
    ++counts[unit.region][unit.size - first_size];
  }
  return GroupSizeHierarchy::FromLeafCounts(std::move(tree), std::move(counts),
                                            Role::kExact, first_size);
}

std::vector<int64_t> Cumulate(std::span<const int64_t> counts) {
  std::vector<int64_t> out(counts.size());
  std::partial_sum(counts.begin(), counts.end(), out.begin());
  return out;
}

std::vector<int64_t> Decumulate(std::span<const int64_t> cumulative) {
  std::vector<int64_t> out(cumulative.size());
  std::adjacent_difference(cumulative.begin(), cumulative.end(), out.begin());
  return out;
}

PgsrReport ValidatePgsr(const GroupSizeHierarchy& h) {
  const RegionTree& tree = h.tree();
  PgsrReport report;
  report.violations_per_level.assign(tree.levels(), 0);
  for (RegionId r = 0; r < tree.size(); ++r) {
    for (int64_t v : h.counts(r)) {
      if (v < 0) report.validity_ok = false;
    }
    if (tree.is_leaf(r)) continue;
    for (int k = 0; k < h.num_sizes(); ++k) {
      int64_t sum = 0;
      for (RegionId c : tree.children(r)) sum += h.count(c, k);
      if (sum != h.count(r, k)) {
        ++report.consistency_violations;
        ++report.violations_per_level[tree.level(r) - 1];
      }
    }
  }
  for (int level = 1; level <= tree.levels(); ++level) {
    int64_t sum = 0;
    for (RegionId r : tree.regions_at_level(level)) {
      for (int64_t v : h.counts(r)) sum += v;
    }
    if (sum != h.total_groups()) {
      report.faithfulness_ok = false;
      report.unfaithful_levels.push_back(level);
    }
  }
  return report;
}

int64_t DefaultWindowDelta(double scale) {
  return 3 * static_cast<int64_t>(std::ceil(2.0 * scale * scale));
}

DomainPolicy DomainPolicy::ForNoiseScale(double scale) {
  return AroundNoisy(DefaultWindowDelta(scale));
}

DomainPolicy DomainPolicy::AroundNoisy(int64_t delta) {
  DomainPolicy p;
  p.kind = Kind::kAroundNoisy;
  p.delta = std::max<int64_t>(0, delta);
  return p;
}

DomainPolicy DomainPolicy::Full() {
  DomainPolicy p;
  p.kind = Kind::kFull;
  return p;
}

DomainPolicy DomainPolicy::Fixed(Window window) {
  DomainPolicy p;
  p.kind = Kind::kFixed;
  p.fixed = window;
  return p;
}

namespace {

// Initial window for a node centered at `center`, clipped to [0, total]. A
// window lying entirely outside [0, total] collapses onto the nearest bound.
Window InitialWindow(const DomainPolicy& policy, int64_t center,
                     int64_t total) {
  Window w;
  switch (policy.kind) {
    case DomainPolicy::Kind::kAroundNoisy:
      w = {center - policy.delta, center + policy.delta};
      break;
    case DomainPolicy::Kind::kFull:
      w = {0, total};
      break;
    case DomainPolicy::Kind::kFixed:
      w = policy.fixed;
      break;
  }
  if (w.hi < 0) return {0, 0};
  if (w.lo > total) return {total, total};
  return {std::max<int64_t>(w.lo, 0), std::min(w.hi, total)};
}

}  // namespace

DpTree DpTree::Build(const GroupSizeHierarchy& h, const DomainPolicy& policy) {
  DpTree t;
  t.tree_ = h.shared_tree();
  t.num_sizes_ = h.num_sizes();
  t.total_groups_ = h.total_groups();
  const size_t n = static_cast<size_t>(t.num_sizes_) * t.tree_->size();
  t.values_.resize(n);
  t.windows_.resize(n);
  for (int k = 0; k < t.num_sizes_; ++k) {
    for (RegionId r = 0; r < t.tree_->size(); ++r) {
      const size_t i = t.Index(k, r);
      t.values_[i] = h.count(r, k);
      t.windows_[i] = InitialWindow(policy, t.values_[i], t.total_groups_);
    }
  }
  t.RepairWindows();
  return t;
}

void DpTree::RepairWindows() {
  const RegionTree& tree = *tree_;
  const int64_t g = total_groups_;
  for (int k = 0; k < num_sizes_; ++k) {
    for (RegionId r : tree.post_order()) {
      if (tree.is_leaf(r)) continue;
      Window reach{0, 0};
      for (RegionId c : tree.children(r)) {
        reach.lo += windows_[Index(k, c)].lo;
        reach.hi += windows_[Index(k, c)].hi;
      }
      Window& w = windows_[Index(k, r)];
      const Window clipped{std::max(w.lo, reach.lo), std::min(w.hi, reach.hi)};
      if (!clipped.empty()) {
        w = clipped;
      } else if (w.hi < reach.lo) {
        // Cover() below lowers the children if this exceeds G.
        w = {std::min(reach.lo, g), std::min(reach.lo, g)};
      } else {
        w = {reach.hi, reach.hi};
      }
    }
  }

  // The virtual root must be able to take the value G.
  const RegionId root = tree.root();
  int64_t lo_sum = 0;
  int64_t hi_sum = 0;
  for (int k = 0; k < num_sizes_; ++k) {
    lo_sum += windows_[Index(k, root)].lo;
    hi_sum += windows_[Index(k, root)].hi;
  }
  int64_t deficit = g - hi_sum;
  int64_t excess = lo_sum - g;
  for (int k = 0; k < num_sizes_ && (deficit > 0 || excess > 0); ++k) {
    Window& w = windows_[Index(k, root)];
    if (deficit > 0) {
      const int64_t add = std::min(deficit, g - w.hi);
      w.hi += add;
      deficit -= add;
    }
    if (excess > 0) {
      const int64_t sub = std::min(excess, w.lo);
      w.lo -= sub;
      excess -= sub;
    }
  }
  for (int k = 0; k < num_sizes_; ++k) Cover(k, root);
}

// Extends the children's windows (greedily, in child order) until every value
// of r's window is reachable as a sum of child values, recursively.
void DpTree::Cover(int size_index, RegionId r) {
  const RegionTree& tree = *tree_;
  if (tree.is_leaf(r)) return;
  const Window w = windows_[Index(size_index, r)];
  int64_t lo_sum = 0;
  int64_t hi_sum = 0;
  for (RegionId c : tree.children(r)) {
    lo_sum += windows_[Index(size_index, c)].lo;
    hi_sum += windows_[Index(size_index, c)].hi;
  }
  int64_t excess = lo_sum - w.lo;
  int64_t deficit = w.hi - hi_sum;
  for (RegionId c : tree.children(r)) {
    Window& cw = windows_[Index(size_index, c)];
    if (excess > 0) {
      const int64_t sub = std::min(excess, cw.lo);
      cw.lo -= sub;
      excess -= sub;
    }
    if (deficit > 0) {
      const int64_t add = std::min(deficit, total_groups_ - cw.hi);
      cw.hi += add;
      deficit -= add;
    }
  }
  for (RegionId c : tree.children(r)) Cover(size_index, c);
}

Chain Chain::Build(const DpTree& t) {
  const RegionTree& tree = t.tree();
  Chain chain;
  chain.num_sizes_ = t.num_sizes();
  chain.num_regions_ = tree.size();
  chain.positions_.assign(
      static_cast<size_t>(chain.num_sizes_) * chain.num_regions_, -1);
  chain.nodes_.reserve(chain.positions_.size());
  std::vector<int64_t> running(tree.levels(), 0);
  std::vector<int> last(tree.levels(), -1);
  for (int k = 0; k < chain.num_sizes_; ++k) {
    for (RegionId r : tree.post_order()) {
      const int level = tree.level(r);
      running[level - 1] += t.value(k, r);
      ChainNode node;
      node.size_index = k;
      node.region = r;
      node.level = level;
      node.cumulative = running[level - 1];
      node.prev_same_level = last[level - 1];
      last[level - 1] = static_cast<int>(chain.nodes_.size());
      chain.positions_[static_cast<size_t>(k) * chain.num_regions_ + r] =
          static_cast<int>(chain.nodes_.size());
      chain.nodes_.push_back(node);
    }
  }
  return chain;
}

std::vector<int64_t> Chain::CumulativeOf(const GroupSizeHierarchy& h) const {
  std::vector<int64_t> out(nodes_.size());
  for (size_t i = 0; i < nodes_.size(); ++i) {
    const ChainNode& node = nodes_[i];
    const int64_t prev =
        node.prev_same_level < 0 ? 0 : out[node.prev_same_level];
    out[i] = prev + h.count(node.region, node.size_index);
  }
  return out;
}

std::vector<std::vector<int64_t>> Chain::DecumulateToCounts(
    std::span<const int64_t> chain_values) const {
  std::vector<std::vector<int64_t>> counts(
      num_regions_, std::vector<int64_t>(num_sizes_, 0));
  for (size_t i = 0; i < nodes_.size(); ++i) {
    const ChainNode& node = nodes_[i];
    const int64_t prev =
        node.prev_same_level < 0 ? 0 : chain_values[node.prev_same_level];
    counts[node.region][node.size_index] = chain_values[i] - prev;
  }
  return counts;
}

std::vector<Window> BuildChainWindows(const Chain& chain,
                                      std::span<const int64_t> centers,
                                      int64_t total_groups,
                                      const DomainPolicy& policy) {
  const int n = chain.size();
  std::vector<Window> windows(n);
  for (int i = 0; i < n; ++i) {
    windows[i] = InitialWindow(policy, centers[i], total_groups);
  }
  if (n == 0) return windows;

  // The tail of the chain is a run of equality links ending at the last node,
  // which must take the value G; every node of that run must reach G.
  int i = n - 1;
  windows[i].hi = total_groups;
  while (i > 0 && chain.boundary(i - 1) == ChainBoundary::kLevelUp) {
    windows[--i].hi = total_groups;
  }

  Window reach = windows[0];
  for (int j = 1; j < n; ++j) {
    Window& w = windows[j];
    if (w.hi < reach.lo) w.hi = reach.lo;
    if (chain.boundary(j - 1) == ChainBoundary::kLevelUp) {
      if (w.lo > reach.hi) w.lo = reach.hi;
      reach = {std::max(w.lo, reach.lo), std::min(w.hi, reach.hi)};
    } else {
      reach = {std::max(w.lo, reach.lo), w.hi};
    }
  }
  return windows;
}

}  // namespace pgsr
