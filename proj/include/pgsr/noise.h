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

// Double-geometric noise and the privacy accounting of the three release
// variants.
//
// The total budget epsilon is split evenly over the L levels of the region
// hierarchy (sequential composition); regions of one level partition the
// population, so each level is released with epsilon / L (parallel
// composition). A query of L1 sensitivity D therefore receives noise of scale
// D * L / epsilon.
//
// This implementation draws noise with floating-point arithmetic and does not
// defend against floating-point side channels.

#ifndef PGSR_NOISE_H_
#define PGSR_NOISE_H_

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "pgsr/hierarchy.h"

namespace pgsr {

enum class NoiseVariant {
  // Group-size counts n^r; sensitivity 2.
  kPlain,
  // Per-region cumulative counts c^r; sensitivity 1.
  kCumulative,
  // Level-wise cumulative counts along the post-order chain. Scale L/epsilon
  // by default; adding an individual can move up to |R_l| entries of a
  // level, so the per-level multiplier should be raised for a formal
  // guarantee.
  kChain,
};

std::string_view VariantName(NoiseVariant variant);
absl::StatusOr<NoiseVariant> ParseVariant(std::string_view name);

// Privacy accounting record of one noise-injection step.
struct NoiseSpec {
  double epsilon = 1.0;
  int levels = 1;
  int sensitivity = 1;
  uint64_t seed = 0;
  // Extra factor on the scale; 1 except for deliberately conservative chain
  // releases.
  double scale_multiplier = 1.0;

  // sensitivity * levels / epsilon * scale_multiplier.
  double scale() const;

  // Rejects epsilon <= 0, levels < 1, sensitivity outside {1, 2} and
  // multiplier < 1.
  static absl::StatusOr<NoiseSpec> Create(double epsilon, int levels,
                                          int sensitivity, uint64_t seed,
                                          double scale_multiplier = 1.0);
  // Sensitivity 2 for kPlain, 1 otherwise.
  static absl::StatusOr<NoiseSpec> ForVariant(NoiseVariant variant,
                                              double epsilon, int levels,
                                              uint64_t seed,
                                              double scale_multiplier = 1.0);
};

// One sample with P(X = v) = (1 - q) / (1 + q) * q^|v|, q = exp(-1 / scale),
// drawn as the difference of two i.i.d. geometric variates with success
// probability 1 - q.
absl::StatusOr<int64_t> SampleDoubleGeometric(double scale,
                                              std::mt19937_64& rng);

// Closed-form probability mass of the distribution above.
double DoubleGeometricPmf(double scale, int64_t v);

// Deterministic generator for one noise draw, keyed by everything that
// identifies it. Independent of the order in which nodes are perturbed.
std::mt19937_64 NodeStream(uint64_t seed, NoiseVariant variant,
                           RegionId region, int size_index);

// Noisy measurements of a hierarchy. `values[r][k]` holds, depending on the
// variant, the noisy count, the noisy per-region cumulative count, or the
// noisy chain-cumulative value of node (k, r).
struct NoisyMeasurements {
  std::shared_ptr<const RegionTree> tree;
  NoiseVariant variant = NoiseVariant::kPlain;
  int64_t total_groups = 0;
  int first_size = 1;
  std::vector<std::vector<int64_t>> values;
  // Scale of the injected noise; 0 when the values were supplied directly.
  double scale = 0.0;

  int num_sizes() const {
    return values.empty() ? 0 : static_cast<int>(values[0].size());
  }
};

// Encodes `h` for `variant` without noise.
NoisyMeasurements Encode(const GroupSizeHierarchy& h, NoiseVariant variant);

// Encodes an exact hierarchy for `variant` and perturbs every entry with
// double-geometric noise of scale spec.scale(). Rejects a sensitivity that
// does not match the variant and a levels count that does not match the tree.
absl::StatusOr<NoisyMeasurements> NoisyHierarchy(const GroupSizeHierarchy& h,
                                                 const NoiseSpec& spec,
                                                 NoiseVariant variant);

}  // namespace pgsr

#endif  // PGSR_NOISE_H_
