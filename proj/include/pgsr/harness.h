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

// Evaluation harness: error metrics, synthetic datasets and the experiment
// runner.

#ifndef PGSR_HARNESS_H_
#define PGSR_HARNESS_H_

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "pgsr/hierarchy.h"
#include "pgsr/mechanisms.h"

namespace pgsr {

struct L1Report {
  int64_t total = 0;
  // Index level - 1.
  std::vector<int64_t> per_level;
};

// sum_r |n^r - n_hat^r|_1, overall and per level. Rejects hierarchies over
// different trees or with different N.
absl::StatusOr<L1Report> L1Error(const GroupSizeHierarchy& original,
                                 const GroupSizeHierarchy& released);

// Census-like households over a nation / state / county hierarchy. Sizes
// 1..7 follow a fixed household distribution, larger sizes a geometric tail
// whose ratio is that of sizes 7 and 6, truncated at num_sizes. Outliers are
// extra households of uniform size in [min(10, num_sizes), num_sizes].
struct CensusParams {
  int leaves = 10;
  // Defaults to round(sqrt(leaves)).
  std::optional<int> states;
  int64_t individuals = 25000;
  int num_sizes = 20;
  int outliers = 0;
  uint64_t seed = 1;
};

// Probability of sizes 1..7 and of the 8+ tail.
std::vector<double> CensusSizeDistribution();
// n_7 / n_6 of the distribution above.
double CensusTailRatio();

absl::StatusOr<GroupSizeHierarchy> SynthCensus(const CensusParams& params);

// Taxi-like data: vehicles over the same 3-level geography, sizes (pickups)
// round(exp(Normal(mu, sigma))) clamped to [1, num_sizes].
struct TaxiParams {
  int leaves = 10;
  std::optional<int> states;
  int64_t vehicles = 5000;
  int num_sizes = 50;
  double mu = 2.0;
  double sigma = 0.8;
  uint64_t seed = 1;
};

absl::StatusOr<GroupSizeHierarchy> SynthTaxi(const TaxiParams& params);

// Nation / state / county tree with counties dealt round-robin to states.
absl::StatusOr<std::shared_ptr<const RegionTree>> ThreeLevelTree(int leaves,
                                                                 int states);

struct DatasetSpec {
  enum class Kind { kCensus, kTaxi, kFile };
  Kind kind = Kind::kCensus;
  CensusParams census;
  TaxiParams taxi;
  // Hierarchy JSON for kFile.
  std::string path;
};

struct ExperimentConfig {
  DatasetSpec dataset;
  std::vector<Mechanism> mechanisms;
  std::vector<double> epsilons;
  int trials = 1;
  uint64_t seed = 0;
  std::string output;
  MechanismOptions options;
  // Wall-clock post-processing time in the runtime column; otherwise "NA" so
  // that output is reproducible byte for byte.
  bool record_runtime = false;
};

// Parses the config JSON:
//   {"dataset": {"kind": "census", "leaves": 10, ...} | {"kind": "file",
//    "path": "h.json"}, "mechanisms": ["h_dp", "c_ch"], "epsilons": [0.1, 1],
//    "trials": 30, "seed": 7, "output": "out.csv", "delta": 100,
//    "full_windows": false, "chain_scale_multiplier": 1, "record_runtime":
//    false}
// Unknown mechanism names are rejected with the list of valid names.
absl::StatusOr<ExperimentConfig> ParseExperimentConfig(const std::string& text);

struct ResultRow {
  enum class Kind { kTrial, kMean, kStd };
  Kind kind = Kind::kTrial;
  Mechanism mechanism = Mechanism::kHierarchicalDp;
  double epsilon = 0.0;
  // -1 for summary rows.
  int trial = -1;
  // 1..L, or 0 for the total over all levels.
  int level = 0;
  double l1 = 0.0;
  double cv = 0.0;
  std::optional<double> runtime;
};

struct ExperimentResult {
  // Per mechanism, epsilon, trial: the levels then the total; summary rows
  // follow in the same order.
  std::vector<ResultRow> rows;
  // validate_pgsr failures among released hierarchies.
  int64_t invalid_releases = 0;
  int levels = 0;
};

// Noise seed of one (trial, epsilon, mechanism) run.
uint64_t TrialSeed(uint64_t seed, int trial, int epsilon_index,
                   Mechanism mechanism);

absl::StatusOr<GroupSizeHierarchy> LoadDataset(const DatasetSpec& spec);

absl::StatusOr<ExperimentResult> RunExperiment(const ExperimentConfig& cfg);

// Long format: kind,mechanism,epsilon,trial,level,l1,cv,runtime.
void WriteResultsCsv(const ExperimentResult& result, std::ostream& out);

}  // namespace pgsr

#endif  // PGSR_HARNESS_H_
