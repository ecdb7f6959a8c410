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

// End-to-end release mechanisms for hierarchical group-size counts.
//
// Each mechanism perturbs the hierarchy once and then post-processes the
// noisy measurements into a hierarchy that is consistent, non-negative,
// integral and sums to G on every level:
//
//   kHierarchicalDp  noisy counts (scale 2L/eps), then the exact tree DP
//                    minimizing sum (n_hat - n_noisy)^2.
//   kCumulativeDp    noisy per-region cumulative counts (scale L/eps),
//                    isotonic repair and rounding per region, then the tree
//                    DP on the repaired counts. Approximate: it does not
//                    minimize a single global objective.
//   kChainDp         noisy level-wise cumulative counts along the post-order
//                    chain (scale L/eps), then the exact chain DP minimizing
//                    sum (c_hat - c_noisy)^2.
//
// Exactness holds relative to the domain windows; with full windows [0, G]
// the DPs return global optima.

#ifndef PGSR_MECHANISMS_H_
#define PGSR_MECHANISMS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "pgsr/cpwl.h"
#include "pgsr/hierarchy.h"
#include "pgsr/noise.h"

namespace pgsr {

enum class Mechanism { kHierarchicalDp, kCumulativeDp, kChainDp };

// "h_dp", "c_dp", "c_ch".
std::string_view MechanismName(Mechanism m);
absl::StatusOr<Mechanism> ParseMechanism(std::string_view name);
NoiseVariant VariantFor(Mechanism m);

struct MechanismOptions {
  // Window half-width; defaults to 3 * ceil(2 * scale^2) of the injected
  // noise.
  std::optional<int64_t> delta;
  // Use [0, G] for every node. Overrides delta.
  bool full_windows = false;
  // Per-level scale multiplier for the chain variant's noise.
  double chain_scale_multiplier = 1.0;
};

struct PhaseTimings {
  double noise_seconds = 0.0;
  double postprocess_seconds = 0.0;
};

struct MechanismResult {
  GroupSizeHierarchy released;
  // Squared distance of the solution from the noisy input, in the space the
  // final DP optimizes (counts for h_dp and c_dp, chain values for c_ch).
  int64_t objective = 0;
  std::optional<NoiseSpec> budget;
  Mechanism mechanism = Mechanism::kHierarchicalDp;
  PhaseTimings timings;
};

// Full solution of the tree DP over a DpTree, kept for inspection.
struct TreeDpSolution {
  // tau for node (size_index, region) at size_index * |R| + region.
  std::vector<CostTable> tables;
  // Selected value per node, same indexing.
  std::vector<int64_t> values;
  // phi of the virtual root at G.
  int64_t objective = 0;
};

absl::StatusOr<TreeDpSolution> SolveTreeDp(const DpTree& t);

struct ChainDpSolution {
  // tau_i per chain position.
  std::vector<CostTable> tables;
  std::vector<int64_t> values;
  // tau of the last node at G.
  int64_t objective = 0;
};

// `noisy` and `windows` are indexed by chain position.
absl::StatusOr<ChainDpSolution> SolveChainDp(const Chain& chain,
                                             std::span<const int64_t> noisy,
                                             std::span<const Window> windows,
                                             int64_t total_groups);

// Least-squares non-decreasing fit (pool adjacent violators), clamped to
// [lower, upper].
std::vector<double> PavaIsotonic(std::span<const double> values, double lower,
                                 double upper);

// Round half up, then carry the previous value forward wherever rounding
// would decrease the sequence.
std::vector<int64_t> MonotoneRound(std::span<const double> values);

// Post-processing steps on given measurements; no noise is added. The
// measurement variant must match the mechanism.
absl::StatusOr<MechanismResult> PostProcess(Mechanism mechanism,
                                            const NoisyMeasurements& noisy,
                                            const MechanismOptions& options = {});

// Noise spec for a mechanism: sensitivity from its variant, the chain
// multiplier from `options` for kChainDp.
absl::StatusOr<NoiseSpec> SpecFor(Mechanism mechanism, double epsilon,
                                  int levels, uint64_t seed,
                                  const MechanismOptions& options = {});

// Perturbs and post-processes. An exact hierarchy is perturbed per `spec`; a
// noisy one is taken as already-noisy counts, encoded for the mechanism and
// post-processed without further noise (spec then only sizes the windows).
// Rejects a spec whose sensitivity or level count does not fit.
absl::StatusOr<MechanismResult> Release(Mechanism mechanism,
                                        const GroupSizeHierarchy& h,
                                        const NoiseSpec& spec,
                                        const MechanismOptions& options = {});

inline absl::StatusOr<MechanismResult> MechHDp(
    const GroupSizeHierarchy& h, const NoiseSpec& spec,
    const MechanismOptions& options = {}) {
  return Release(Mechanism::kHierarchicalDp, h, spec, options);
}
inline absl::StatusOr<MechanismResult> MechCDp(
    const GroupSizeHierarchy& h, const NoiseSpec& spec,
    const MechanismOptions& options = {}) {
  return Release(Mechanism::kCumulativeDp, h, spec, options);
}
inline absl::StatusOr<MechanismResult> MechCCh(
    const GroupSizeHierarchy& h, const NoiseSpec& spec,
    const MechanismOptions& options = {}) {
  return Release(Mechanism::kChainDp, h, spec, options);
}

}  // namespace pgsr

#endif  // PGSR_MECHANISMS_H_
