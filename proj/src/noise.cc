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

#include "pgsr/noise.h"

#include <cmath>
#include <string>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace pgsr {

std::string_view VariantName(NoiseVariant variant) {
  switch (variant) {
    case NoiseVariant::kPlain:
      return "plain";
    case NoiseVariant::kCumulative:
      return "cumulative";
    case NoiseVariant::kChain:
      return "chain";
  }
  return "unknown";
}

absl::StatusOr<NoiseVariant> ParseVariant(std::string_view name) {
  if (name == "plain") return NoiseVariant::kPlain;
  if (name == "cumulative") return NoiseVariant::kCumulative;
  if (name == "chain") return NoiseVariant::kChain;
  return absl::InvalidArgumentError(absl::StrCat(
      "unknown noise variant '", std::string(name), "' (expected plain|cumulative|chain)"));
}

double NoiseSpec::scale() const {
  return sensitivity * levels / epsilon * scale_multiplier;
}

absl::StatusOr<NoiseSpec> NoiseSpec::Create(double epsilon, int levels,
                                            int sensitivity, uint64_t seed,
                                            double scale_multiplier) {
  if (!(epsilon > 0) || !std::isfinite(epsilon)) {
    return absl::InvalidArgumentError(
        absl::StrCat("epsilon must be positive and finite, got ", epsilon));
  }
  if (levels < 1) return absl::InvalidArgumentError("levels must be >= 1");
  if (sensitivity != 1 && sensitivity != 2) {
    return absl::InvalidArgumentError(
        absl::StrCat("sensitivity must be 1 or 2, got ", sensitivity));
  }
  if (!(scale_multiplier >= 1.0) || !std::isfinite(scale_multiplier)) {
    return absl::InvalidArgumentError("scale multiplier must be >= 1");
  }
  return NoiseSpec{epsilon, levels, sensitivity, seed, scale_multiplier};
}

absl::StatusOr<NoiseSpec> NoiseSpec::ForVariant(NoiseVariant variant,
                                                double epsilon, int levels,
                                                uint64_t seed,
                                                double scale_multiplier) {
  const int sensitivity = variant == NoiseVariant::kPlain ? 2 : 1;
  return Create(epsilon, levels, sensitivity, seed, scale_multiplier);
}

absl::StatusOr<int64_t> SampleDoubleGeometric(double scale,
                                              std::mt19937_64& rng) {
  if (!(scale > 0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("noise scale must be positive, got ", scale));
  }
  const double q = std::exp(-1.0 / scale);
  if (q <= 0.0) return 0;
  std::geometric_distribution<int64_t> geometric(1.0 - q);
  const int64_t a = geometric(rng);
  const int64_t b = geometric(rng);
  return a - b;
}

double DoubleGeometricPmf(double scale, int64_t v) {
  const double q = std::exp(-1.0 / scale);
  return (1.0 - q) / (1.0 + q) * std::pow(q, static_cast<double>(std::llabs(v)));
}

std::mt19937_64 NodeStream(uint64_t seed, NoiseVariant variant,
                           RegionId region, int size_index) {
  std::seed_seq seq{static_cast<uint32_t>(seed),
                    static_cast<uint32_t>(seed >> 32),
                    static_cast<uint32_t>(variant),
                    static_cast<uint32_t>(region),
                    static_cast<uint32_t>(size_index)};
  return std::mt19937_64(seq);
}

NoisyMeasurements Encode(const GroupSizeHierarchy& h, NoiseVariant variant) {
  NoisyMeasurements m;
  m.tree = h.shared_tree();
  m.variant = variant;
  m.total_groups = h.total_groups();
  m.first_size = h.first_size();
  switch (variant) {
    case NoiseVariant::kPlain:
      m.values = h.all_counts();
      break;
    case NoiseVariant::kCumulative:
      m.values.reserve(h.tree().size());
      for (RegionId r = 0; r < h.tree().size(); ++r) {
        m.values.push_back(Cumulate(h.counts(r)));
      }
      break;
    case NoiseVariant::kChain: {
      const Chain chain = Chain::Build(DpTree::Build(h, DomainPolicy::Full()));
      const std::vector<int64_t> along = chain.CumulativeOf(h);
      m.values.assign(h.tree().size(), std::vector<int64_t>(h.num_sizes()));
      for (int i = 0; i < chain.size(); ++i) {
        m.values[chain.node(i).region][chain.node(i).size_index] = along[i];
      }
      break;
    }
  }
  return m;
}

absl::StatusOr<NoisyMeasurements> NoisyHierarchy(const GroupSizeHierarchy& h,
                                                 const NoiseSpec& spec,
                                                 NoiseVariant variant) {
  absl::StatusOr<NoiseSpec> checked =
      NoiseSpec::Create(spec.epsilon, spec.levels, spec.sensitivity, spec.seed,
                        spec.scale_multiplier);
  if (!checked.ok()) return checked.status();
  const int expected = variant == NoiseVariant::kPlain ? 2 : 1;
  if (spec.sensitivity != expected) {
    return absl::InvalidArgumentError(absl::StrCat(
        "variant ", std::string(VariantName(variant)), " has sensitivity ", expected,
        ", spec says ", spec.sensitivity));
  }
  if (spec.levels != h.tree().levels()) {
    return absl::InvalidArgumentError(
        absl::StrCat("spec budgets ", spec.levels, " levels but the tree has ",
                     h.tree().levels()));
  }
  NoisyMeasurements m = Encode(h, variant);
  m.scale = spec.scale();
  for (RegionId r = 0; r < h.tree().size(); ++r) {
    for (int k = 0; k < h.num_sizes(); ++k) {
      std::mt19937_64 rng = NodeStream(spec.seed, variant, r, k);
      absl::StatusOr<int64_t> noise = SampleDoubleGeometric(m.scale, rng);
      if (!noise.ok()) return noise.status();
      m.values[r][k] += *noise;
    }
  }
  return m;
}

}  // namespace pgsr
