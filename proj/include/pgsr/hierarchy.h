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

// Data model for region hierarchies and hierarchical group-size tables.
//
// A RegionTree is an L-level tree of regions. A GroupSizeHierarchy attaches to
// every region r a vector n^r where entry k counts the groups (units) of size
// first_size() + k located in r. The DpTree replicates the region tree once
// per group size under a virtual root whose value is the public total G, and
// the Chain linearizes the DpTree in post-order.

#ifndef PGSR_HIERARCHY_H_
#define PGSR_HIERARCHY_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"

namespace pgsr {

using RegionId = int;
inline constexpr RegionId kNoRegion = -1;

// An L-level region hierarchy. Region ids are dense indices in [0, size()).
// Levels are 1-based: the root is at level 1 and every leaf at level L.
class RegionTree {
 public:
  // `parents[i]` is the parent id of region i, or kNoRegion for the root.
  // Children keep the relative order of their ids. Rejects forests, cycles,
  // duplicate names and trees whose leaves are not all at the same depth.
  static absl::StatusOr<RegionTree> Create(std::vector<std::string> names,
                                           std::vector<RegionId> parents);

  int size() const { return static_cast<int>(names_.size()); }
  int levels() const { return levels_; }
  RegionId root() const { return root_; }

  RegionId parent(RegionId r) const { return parents_[r]; }
  const std::vector<RegionId>& children(RegionId r) const {
    return children_[r];
  }
  int level(RegionId r) const { return levels_of_[r]; }
  bool is_leaf(RegionId r) const { return children_[r].empty(); }
  const std::string& name(RegionId r) const { return names_[r]; }
  std::optional<RegionId> Find(std::string_view name) const;

  // Regions at `level` (1-based), in id order.
  const std::vector<RegionId>& regions_at_level(int level) const {
    return by_level_[level - 1];
  }
  // Children before parents, siblings in child order.
  const std::vector<RegionId>& post_order() const { return post_order_; }

 private:
  RegionTree() = default;

  std::vector<std::string> names_;
  std::vector<RegionId> parents_;
  std::vector<std::vector<RegionId>> children_;
  std::vector<int> levels_of_;
  std::vector<std::vector<RegionId>> by_level_;
  std::vector<RegionId> post_order_;
  RegionId root_ = kNoRegion;
  int levels_ = 0;
};

enum class Role { kExact, kNoisy, kPostProcessed };

std::string_view RoleName(Role role);
absl::StatusOr<Role> ParseRole(std::string_view name);

// Per-region group-size vectors over a shared RegionTree.
//
// Exact and post-processed hierarchies are expected to be non-negative,
// consistent (children sum to parents) and faithful (every level sums to G);
// ValidatePgsr() checks this. Noisy hierarchies may hold arbitrary integers.
class GroupSizeHierarchy {
 public:
  // `counts[r]` must have the same length N >= 1 for every region.
  static absl::StatusOr<GroupSizeHierarchy> Create(
      std::shared_ptr<const RegionTree> tree,
      std::vector<std::vector<int64_t>> counts, int64_t total_groups,
      Role role, int first_size = 1);

  // Leaf counts only; internal regions are filled with children sums and G
  // with the root total.
  static absl::StatusOr<GroupSizeHierarchy> FromLeafCounts(
      std::shared_ptr<const RegionTree> tree,
      std::vector<std::vector<int64_t>> leaf_counts, Role role,
      int first_size = 1);

  const RegionTree& tree() const { return *tree_; }
  const std::shared_ptr<const RegionTree>& shared_tree() const { return tree_; }
  int num_sizes() const { return num_sizes_; }
  int first_size() const { return first_size_; }
  int64_t total_groups() const { return total_groups_; }
  Role role() const { return role_; }

  std::span<const int64_t> counts(RegionId r) const { return counts_[r]; }
  int64_t count(RegionId r, int size_index) const {
    return counts_[r][size_index];
  }
  const std::vector<std::vector<int64_t>>& all_counts() const {
    return counts_;
  }

  // Copy with the given role and counts; shape must match.
  absl::StatusOr<GroupSizeHierarchy> WithCounts(
      std::vector<std::vector<int64_t>> counts, Role role) const;

  friend bool operator==(const GroupSizeHierarchy& a,
                         const GroupSizeHierarchy& b);

 private:
  GroupSizeHierarchy() = default;

  std::shared_ptr<const RegionTree> tree_;
  std::vector<std::vector<int64_t>> counts_;
  int64_t total_groups_ = 0;
  int num_sizes_ = 0;
  int first_size_ = 1;
  Role role_ = Role::kExact;
};

// One row of the input microdata: an individual living in `unit`, located in
// leaf region `region`, contributing `quantity` (0 or 1) to the unit's size.
struct Record {
  std::string user;
  std::string unit;
  std::string region;
  int quantity = 1;
};

struct AggregateOptions {
  // Number of group sizes; defaults to the largest observed size. Must not be
  // smaller than it.
  std::optional<int> num_sizes;
  // Count units whose quantities sum to zero as groups of size 0.
  bool include_size_zero = false;
};

// Groups records by unit, sizes every unit by the sum of its quantities, and
// counts units per (leaf region, size); internal regions are children sums.
absl::StatusOr<GroupSizeHierarchy> AggregateRecords(
    std::span<const Record> records, std::shared_ptr<const RegionTree> tree,
    const AggregateOptions& options = {});

// Prefix sums: c_s = n_1 + ... + n_s.
std::vector<int64_t> Cumulate(std::span<const int64_t> counts);
// Successive differences with c_0 = 0. Inverse of Cumulate on any input.
std::vector<int64_t> Decumulate(std::span<const int64_t> cumulative);

struct PgsrReport {
  // (region, size) pairs whose children do not sum to the region's count.
  int64_t consistency_violations = 0;
  // Same, broken down by the level of the parent region (index level-1).
  std::vector<int64_t> violations_per_level;
  bool validity_ok = true;
  bool faithfulness_ok = true;
  // Levels (1-based) whose counts do not sum to G.
  std::vector<int> unfaithful_levels;

  bool ok() const {
    return consistency_violations == 0 && validity_ok && faithfulness_ok;
  }
};

PgsrReport ValidatePgsr(const GroupSizeHierarchy& h);

// Closed integer interval [lo, hi].
struct Window {
  int64_t lo = 0;
  int64_t hi = 0;

  int64_t size() const { return hi - lo + 1; }
  bool empty() const { return hi < lo; }
  bool contains(int64_t v) const { return lo <= v && v <= hi; }
  friend bool operator==(const Window&, const Window&) = default;
};

// How the candidate value windows D of DP nodes are chosen.
struct DomainPolicy {
  enum class Kind { kAroundNoisy, kFull, kFixed };
  Kind kind = Kind::kAroundNoisy;
  // kAroundNoisy: [noisy - delta, noisy + delta].
  int64_t delta = 0;
  // kFixed: the same window for every node.
  Window fixed;

  // delta = 3 * ceil(2 * scale^2), three times the variance of the
  // double-geometric noise of the given scale.
  static DomainPolicy ForNoiseScale(double scale);
  static DomainPolicy AroundNoisy(int64_t delta);
  // [0, G] for every node.
  static DomainPolicy Full();
  static DomainPolicy Fixed(Window window);
};

int64_t DefaultWindowDelta(double scale);

// The augmented tree: a virtual root with value G over one copy of the region
// tree per group size. Node (size_index, region) holds the value the DP
// centers its window on and the (repaired) window itself.
class DpTree {
 public:
  // Windows are clipped to [0, G] and then repaired bottom-up so that every
  // value of a parent's window is a sum of values in the children's windows,
  // and G is a sum of values of the subtree roots' windows.
  static DpTree Build(const GroupSizeHierarchy& h, const DomainPolicy& policy);

  const RegionTree& tree() const { return *tree_; }
  const std::shared_ptr<const RegionTree>& shared_tree() const { return tree_; }
  int num_sizes() const { return num_sizes_; }
  int64_t total_groups() const { return total_groups_; }
  // Including the virtual root.
  int num_nodes() const { return 1 + num_sizes_ * tree_->size(); }

  int64_t value(int size_index, RegionId r) const {
    return values_[Index(size_index, r)];
  }
  const Window& window(int size_index, RegionId r) const {
    return windows_[Index(size_index, r)];
  }

 private:
  DpTree() = default;
  size_t Index(int size_index, RegionId r) const {
    return static_cast<size_t>(size_index) * tree_->size() + r;
  }
  void RepairWindows();
  void Cover(int size_index, RegionId r);

  std::shared_ptr<const RegionTree> tree_;
  int num_sizes_ = 0;
  int64_t total_groups_ = 0;
  std::vector<int64_t> values_;
  std::vector<Window> windows_;
};

// How consecutive chain nodes are linked: the successor is at a shallower
// level (equality of cumulative values), or at the same or a deeper level
// (non-decreasing cumulative values).
enum class ChainBoundary { kSameOrDown, kLevelUp };

struct ChainNode {
  int size_index = 0;
  RegionId region = kNoRegion;
  int level = 0;
  // Sum of the values of this node and every earlier node at its level.
  int64_t cumulative = 0;
  // Position of the previous node at the same level, or -1.
  int prev_same_level = -1;
};

// Post-order linearization of a DpTree without its virtual root: subtree 1
// first, inside each subtree children before their parent.
class Chain {
 public:
  static Chain Build(const DpTree& t);

  int size() const { return static_cast<int>(nodes_.size()); }
  const ChainNode& node(int i) const { return nodes_[i]; }
  const std::vector<ChainNode>& nodes() const { return nodes_; }
  // Link between node i and node i + 1.
  ChainBoundary boundary(int i) const {
    return nodes_[i].level > nodes_[i + 1].level ? ChainBoundary::kLevelUp
                                                 : ChainBoundary::kSameOrDown;
  }
  // Chain position of (size_index, region).
  int position(int size_index, RegionId r) const {
    return positions_[static_cast<size_t>(size_index) * num_regions_ + r];
  }
  int num_sizes() const { return num_sizes_; }
  int num_regions() const { return num_regions_; }

  // Values along the chain recomputed from an explicit per-(size, region)
  // source: cumulative sums per level in chain order.
  std::vector<int64_t> CumulativeOf(const GroupSizeHierarchy& h) const;
  // Inverse: per-level differences, returned as counts[region][size_index].
  std::vector<std::vector<int64_t>> DecumulateToCounts(
      std::span<const int64_t> chain_values) const;

 private:
  Chain() = default;

  std::vector<ChainNode> nodes_;
  std::vector<int> positions_;
  int num_sizes_ = 0;
  int num_regions_ = 0;
};

// Windows for the chain DP around `centers`, clipped to [0, G] and repaired
// forward so that every node has a feasible value and the last node can take
// the value G.
std::vector<Window> BuildChainWindows(const Chain& chain,
                                      std::span<const int64_t> centers,
                                      int64_t total_groups,
                                      const DomainPolicy& policy);

}  // namespace pgsr

#endif  // PGSR_HIERARCHY_H_
