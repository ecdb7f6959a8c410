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

#include "pgsr/mechanisms.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace pgsr {

std::string_view MechanismName(Mechanism m) {
  switch (m) {
    case Mechanism::kHierarchicalDp:
      return "h_dp";
    case Mechanism::kCumulativeDp:
      return "c_dp";
    case Mechanism::kChainDp:
      return "c_ch";
  }
  return "unknown";
}

absl::StatusOr<Mechanism> ParseMechanism(std::string_view name) {
  if (name == "h_dp") return Mechanism::kHierarchicalDp;
  if (name == "c_dp") return Mechanism::kCumulativeDp;
  if (name == "c_ch") return Mechanism::kChainDp;
  return absl::InvalidArgumentError(absl::StrCat(
      "unknown mechanism '", std::string(name), "'; valid names are h_dp, c_dp, c_ch"));
}

NoiseVariant VariantFor(Mechanism m) {
  switch (m) {
    case Mechanism::kHierarchicalDp:
      return NoiseVariant::kPlain;
    case Mechanism::kCumulativeDp:
      return NoiseVariant::kCumulative;
    case Mechanism::kChainDp:
      return NoiseVariant::kChain;
  }
  return NoiseVariant::kPlain;
}

absl::StatusOr<TreeDpSolution> SolveTreeDp(const DpTree& t) {
  const RegionTree& tree = t.tree();
  const int num_regions = tree.size();
  const auto index = [num_regions](int k, RegionId r) {
    return static_cast<size_t>(k) * num_regions + r;
  };
  const size_t n = static_cast<size_t>(t.num_sizes()) * num_regions;
  std::vector<std::optional<CostTable>> tables(n);
  std::vector<MergeTrace> traces(n);

  // Bottom-up. Subtrees of different sizes only meet at the virtual root.
  std::vector<const CostTable*> children;
  for (int k = 0; k < t.num_sizes(); ++k) {
    for (RegionId r : tree.post_order()) {
      const size_t i = index(k, r);
      if (tree.is_leaf(r)) {
        tables[i] = LeafTable(t.value(k, r), t.window(k, r));
        continue;
      }
      children.clear();
      for (RegionId c : tree.children(r)) children.push_back(&*tables[index(k, c)]);
      absl::StatusOr<MergeResult> merged = TableMerge(children, t.window(k, r));
      if (!merged.ok()) return merged.status();
      tables[i] = AddDeviation(merged->phi, t.value(k, r));
      traces[i] = std::move(merged->trace);
    }
  }
  children.clear();
  for (int k = 0; k < t.num_sizes(); ++k) {
    children.push_back(&*tables[index(k, tree.root())]);
  }
  const int64_t g = t.total_groups();
  absl::StatusOr<MergeResult> top = TableMerge(children, Window{g, g});
  if (!top.ok()) return top.status();

  // Top-down.
  TreeDpSolution solution;
  solution.objective = top->phi.cost(g);
  solution.values.assign(n, 0);
  absl::StatusOr<std::vector<int64_t>> roots =
      ReconstructAssignment(top->trace, g);
  if (!roots.ok()) return roots.status();
  const std::vector<RegionId>& post = tree.post_order();
  for (int k = 0; k < t.num_sizes(); ++k) {
    solution.values[index(k, tree.root())] = (*roots)[k];
    for (auto it = post.rbegin(); it != post.rend(); ++it) {
      const RegionId r = *it;
      if (tree.is_leaf(r)) continue;
      absl::StatusOr<std::vector<int64_t>> split = ReconstructAssignment(
          traces[index(k, r)], solution.values[index(k, r)]);
      if (!split.ok()) return split.status();
      const std::vector<RegionId>& ch = tree.children(r);
      for (size_t j = 0; j < ch.size(); ++j) {
        solution.values[index(k, ch[j])] = (*split)[j];
      }
    }
  }
  solution.tables.reserve(n);
  for (auto& table : tables) solution.tables.push_back(std::move(*table));
  return solution;
}

absl::StatusOr<ChainDpSolution> SolveChainDp(const Chain& chain,
                                             std::span<const int64_t> noisy,
                                             std::span<const Window> windows,
                                             int64_t total_groups) {
  const int n = chain.size();
  if (static_cast<int>(noisy.size()) != n ||
      static_cast<int>(windows.size()) != n) {
    return absl::InvalidArgumentError("chain inputs differ in length");
  }
  ChainDpSolution solution;
  if (n == 0) return solution;
  solution.tables.reserve(n);
  solution.tables.push_back(LeafTable(noisy[0], windows[0]));
  for (int i = 0; i + 1 < n; ++i) {
    absl::StatusOr<CostTable> next =
        ChainStep(solution.tables[i], noisy[i + 1], chain.boundary(i),
                  windows[i + 1]);
    if (!next.ok()) return next.status();
    solution.tables.push_back(*std::move(next));
  }

  const CostTable& last = solution.tables.back();
  if (!last.contains(total_groups)) {
    return absl::FailedPreconditionError(absl::StrCat(
        "the last chain node cannot take the value G = ", total_groups));
  }
  solution.objective = last.cost(total_groups);
  solution.values.assign(n, 0);
  solution.values[n - 1] = total_groups;
  for (int i = n - 2; i >= 0; --i) {
    const int64_t next = solution.values[i + 1];
    solution.values[i] =
        chain.boundary(i) == ChainBoundary::kLevelUp
            ? next
            : std::min(Argmin(solution.tables[i]).value, next);
  }
  return solution;
}

std::vector<double> PavaIsotonic(std::span<const double> values, double lower,
                                 double upper) {
  struct Block {
    double sum;
    int64_t count;
    double mean() const { return sum / static_cast<double>(count); }
  };
  std::vector<Block> blocks;
  blocks.reserve(values.size());
  for (double y : values) {
    blocks.push_back({y, 1});
    while (blocks.size() > 1 &&
           blocks[blocks.size() - 2].mean() > blocks.back().mean()) {
      const Block top = blocks.back();
      blocks.pop_back();
      blocks.back().sum += top.sum;
      blocks.back().count += top.count;
    }
  }
  std::vector<double> out;
  out.reserve(values.size());
  for (const Block& b : blocks) {
    const double v = std::clamp(b.mean(), lower, upper);
    out.insert(out.end(), b.count, v);
  }
  return out;
}

std::vector<int64_t> MonotoneRound(std::span<const double> values) {
  std::vector<int64_t> out;
  out.reserve(values.size());
  for (double v : values) {
    int64_t r = static_cast<int64_t>(std::floor(v + 0.5));
    if (!out.empty() && r < out.back()) r = out.back();
    out.push_back(r);
  }
  return out;
}

namespace {

double SecondsSince(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

DomainPolicy PolicyFor(const NoisyMeasurements& noisy,
                       const MechanismOptions& options) {
  if (options.full_windows) return DomainPolicy::Full();
  if (options.delta.has_value()) return DomainPolicy::AroundNoisy(*options.delta);
  return DomainPolicy::ForNoiseScale(noisy.scale);
}

absl::StatusOr<GroupSizeHierarchy> AsHierarchy(
    const NoisyMeasurements& noisy, std::vector<std::vector<int64_t>> counts,
    Role role) {
  return GroupSizeHierarchy::Create(noisy.tree, std::move(counts),
                                    noisy.total_groups, role,
                                    noisy.first_size);
}

absl::StatusOr<MechanismResult> TreePostProcess(
    const NoisyMeasurements& noisy, std::vector<std::vector<int64_t>> centers,
    const DomainPolicy& policy, Mechanism mechanism) {
  absl::StatusOr<GroupSizeHierarchy> centered =
      AsHierarchy(noisy, std::move(centers), Role::kNoisy);
  if (!centered.ok()) return centered.status();
  const DpTree t = DpTree::Build(*centered, policy);
  absl::StatusOr<TreeDpSolution> solution = SolveTreeDp(t);
  if (!solution.ok()) return solution.status();

  const RegionTree& tree = t.tree();
  std::vector<std::vector<int64_t>> counts(
      tree.size(), std::vector<int64_t>(t.num_sizes()));
  for (int k = 0; k < t.num_sizes(); ++k) {
    for (RegionId r = 0; r < tree.size(); ++r) {
      counts[r][k] = solution->values[static_cast<size_t>(k) * tree.size() + r];
    }
  }
  absl::StatusOr<GroupSizeHierarchy> released =
      AsHierarchy(noisy, std::move(counts), Role::kPostProcessed);
  if (!released.ok()) return released.status();
  return MechanismResult{*std::move(released), solution->objective,
                         std::nullopt, mechanism, {}};
}

absl::StatusOr<MechanismResult> CumulativePostProcess(
    const NoisyMeasurements& noisy, const DomainPolicy& policy) {
  const double g = static_cast<double>(noisy.total_groups);
  std::vector<std::vector<int64_t>> repaired;
  repaired.reserve(noisy.values.size());
  for (const std::vector<int64_t>& c : noisy.values) {
    const std::vector<double> y(c.begin(), c.end());
    const std::vector<int64_t> rounded = MonotoneRound(PavaIsotonic(y, 0.0, g));
    repaired.push_back(Decumulate(rounded));
  }
  return TreePostProcess(noisy, std::move(repaired), policy,
                         Mechanism::kCumulativeDp);
}

absl::StatusOr<MechanismResult> ChainPostProcess(
    const NoisyMeasurements& noisy, const DomainPolicy& policy) {
  absl::StatusOr<GroupSizeHierarchy> shape =
      AsHierarchy(noisy, noisy.values, Role::kNoisy);
  if (!shape.ok()) return shape.status();
  const Chain chain = Chain::Build(DpTree::Build(*shape, DomainPolicy::Full()));
  std::vector<int64_t> along(chain.size());
  for (int i = 0; i < chain.size(); ++i) {
    along[i] = noisy.values[chain.node(i).region][chain.node(i).size_index];
  }
  const std::vector<Window> windows =
      BuildChainWindows(chain, along, noisy.total_groups, policy);
  absl::StatusOr<ChainDpSolution> solution =
      SolveChainDp(chain, along, windows, noisy.total_groups);
  if (!solution.ok()) return solution.status();
  absl::StatusOr<GroupSizeHierarchy> released = AsHierarchy(
      noisy, chain.DecumulateToCounts(solution->values), Role::kPostProcessed);
  if (!released.ok()) return released.status();
  return MechanismResult{*std::move(released), solution->objective,
                         std::nullopt, Mechanism::kChainDp, {}};
}

}  // namespace

absl::StatusOr<MechanismResult> PostProcess(Mechanism mechanism,
                                            const NoisyMeasurements& noisy,
                                            const MechanismOptions& options) {
  if (noisy.variant != VariantFor(mechanism)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "mechanism ", std::string(MechanismName(mechanism)), " expects ",
        std::string(VariantName(VariantFor(mechanism))), " measurements, got ",
        std::string(VariantName(noisy.variant))));
  }
  if (noisy.tree == nullptr || noisy.num_sizes() == 0) {
    return absl::InvalidArgumentError("empty measurements");
  }
  const auto start = std::chrono::steady_clock::now();
  const DomainPolicy policy = PolicyFor(noisy, options);
  absl::StatusOr<MechanismResult> result;
  switch (mechanism) {
    case Mechanism::kHierarchicalDp:
      result = TreePostProcess(noisy, noisy.values, policy, mechanism);
      break;
    case Mechanism::kCumulativeDp:
      result = CumulativePostProcess(noisy, policy);
      break;
    case Mechanism::kChainDp:
      result = ChainPostProcess(noisy, policy);
      break;
  }
  if (result.ok()) result->timings.postprocess_seconds = SecondsSince(start);
  return result;
}

absl::StatusOr<NoiseSpec> SpecFor(Mechanism mechanism, double epsilon,
                                  int levels, uint64_t seed,
                                  const MechanismOptions& options) {
  const double multiplier = mechanism == Mechanism::kChainDp
                                ? options.chain_scale_multiplier
                                : 1.0;
  return NoiseSpec::ForVariant(VariantFor(mechanism), epsilon, levels, seed,
                               multiplier);
}

absl::StatusOr<MechanismResult> Release(Mechanism mechanism,
                                        const GroupSizeHierarchy& h,
                                        const NoiseSpec& spec,
                                        const MechanismOptions& options) {
  const NoiseVariant variant = VariantFor(mechanism);
  const auto start = std::chrono::steady_clock::now();
  absl::StatusOr<NoisyMeasurements> noisy;
  if (h.role() == Role::kNoisy) {
    const absl::StatusOr<NoiseSpec> checked = NoiseSpec::Create(
        spec.epsilon, spec.levels, spec.sensitivity, spec.seed,
        spec.scale_multiplier);
    if (!checked.ok()) return checked.status();
    noisy = Encode(h, variant);
    noisy->scale = spec.scale();
  } else {
    noisy = NoisyHierarchy(h, spec, variant);
  }
  if (!noisy.ok()) return noisy.status();
  const double noise_seconds = SecondsSince(start);

  absl::StatusOr<MechanismResult> result =
      PostProcess(mechanism, *noisy, options);
  if (!result.ok()) return result.status();
  result->budget = spec;
  result->timings.noise_seconds = noise_seconds;
  return result;
}

}  // namespace pgsr
