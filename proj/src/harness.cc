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

#include "pgsr/harness.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "json.hpp"
#include "pgsr/io.h"

namespace pgsr {

absl::StatusOr<L1Report> L1Error(const GroupSizeHierarchy& original,
                                 const GroupSizeHierarchy& released) {
  const RegionTree& a = original.tree();
  const RegionTree& b = released.tree();
  bool same_tree = a.size() == b.size();
  for (RegionId r = 0; same_tree && r < a.size(); ++r) {
    same_tree = a.parent(r) == b.parent(r) && a.name(r) == b.name(r);
  }
  if (!same_tree) {
    return absl::InvalidArgumentError("hierarchies are over different trees");
  }
  if (original.num_sizes() != released.num_sizes() ||
      original.first_size() != released.first_size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "group-size ranges differ: ", original.num_sizes(), " vs ",
        released.num_sizes()));
  }
  L1Report report;
  report.per_level.assign(a.levels(), 0);
  for (RegionId r = 0; r < a.size(); ++r) {
    int64_t sum = 0;
    for (int k = 0; k < original.num_sizes(); ++k) {
      sum += std::llabs(original.count(r, k) - released.count(r, k));
    }
    report.per_level[a.level(r) - 1] += sum;
    report.total += sum;
  }
  return report;
}

std::vector<double> CensusSizeDistribution() {
  return {0.267, 0.336, 0.158, 0.133, 0.062, 0.025, 0.011, 0.008};
}

double CensusTailRatio() {
  const std::vector<double> p = CensusSizeDistribution();
  return p[6] / p[5];
}

absl::StatusOr<std::shared_ptr<const RegionTree>> ThreeLevelTree(int leaves,
                                                                 int states) {
  if (leaves < 1) return absl::InvalidArgumentError("leaves must be >= 1");
  if (states < 1 || states > leaves) {
    return absl::InvalidArgumentError(
        absl::StrCat("states must be in [1, leaves], got ", states));
  }
  std::vector<std::string> names = {"nation"};
  std::vector<RegionId> parents = {kNoRegion};
  for (int s = 0; s < states; ++s) {
    names.push_back(absl::StrCat("state", s + 1));
    parents.push_back(0);
  }
  for (int c = 0; c < leaves; ++c) {
    names.push_back(absl::StrCat("county", c + 1));
    parents.push_back(1 + c % states);
  }
  absl::StatusOr<RegionTree> tree =
      RegionTree::Create(std::move(names), std::move(parents));
  if (!tree.ok()) return tree.status();
  return std::make_shared<const RegionTree>(*std::move(tree));
}

namespace {

int DefaultStates(int leaves, const std::optional<int>& states) {
  if (states.has_value()) return *states;
  const int s = static_cast<int>(std::lround(std::sqrt(leaves)));
  return std::clamp(s, 1, std::max(1, leaves));
}

// Adds one group of `size` to the leaf with the given position.
void AddGroup(std::vector<std::vector<int64_t>>& counts, RegionId leaf,
              int size) {
  ++counts[leaf][size - 1];
}

}  // namespace

absl::StatusOr<GroupSizeHierarchy> SynthCensus(const CensusParams& params) {
  if (params.num_sizes < 1) {
    return absl::InvalidArgumentError("num_sizes must be >= 1");
  }
  if (params.individuals < 0 || params.outliers < 0) {
    return absl::InvalidArgumentError("counts must be non-negative");
  }
  absl::StatusOr<std::shared_ptr<const RegionTree>> tree = ThreeLevelTree(
      params.leaves, DefaultStates(params.leaves, params.states));
  if (!tree.ok()) return tree.status();
  const RegionTree& t = **tree;
  const std::vector<RegionId>& leaves = t.regions_at_level(3);
  const int n = params.num_sizes;

  std::mt19937_64 rng(params.seed);
  const std::vector<double> p = CensusSizeDistribution();
  std::discrete_distribution<int> head(p.begin(), p.end());
  std::geometric_distribution<int> tail(1.0 - CensusTailRatio());
  const auto sample = [&]() {
    while (true) {
      const int s = head(rng) + 1;
      const int size = s < 8 ? s : 8 + tail(rng);
      if (size <= n) return size;
    }
  };

  std::vector<std::vector<int64_t>> counts(t.size(),
                                           std::vector<int64_t>(n, 0));
  const int64_t per_leaf = params.individuals / params.leaves;
  const int64_t extra = params.individuals % params.leaves;
  for (size_t i = 0; i < leaves.size(); ++i) {
    int64_t remaining = per_leaf + (static_cast<int64_t>(i) < extra ? 1 : 0);
    while (remaining > 0) {
      const int size =
          static_cast<int>(std::min<int64_t>(sample(), remaining));
      AddGroup(counts, leaves[i], size);
      remaining -= size;
    }
  }
  std::uniform_int_distribution<size_t> any_leaf(0, leaves.size() - 1);
  std::uniform_int_distribution<int> outlier_size(std::min(10, n), n);
  for (int o = 0; o < params.outliers; ++o) {
    const RegionId leaf = leaves[any_leaf(rng)];
    AddGroup(counts, leaf, outlier_size(rng));
  }
  return GroupSizeHierarchy::FromLeafCounts(*tree, std::move(counts),
                                            Role::kExact);
}

absl::StatusOr<GroupSizeHierarchy> SynthTaxi(const TaxiParams& params) {
  if (params.num_sizes < 1) {
    return absl::InvalidArgumentError("num_sizes must be >= 1");
  }
  if (params.vehicles < 0 || !(params.sigma >= 0)) {
    return absl::InvalidArgumentError("vehicles and sigma must be >= 0");
  }
  absl::StatusOr<std::shared_ptr<const RegionTree>> tree = ThreeLevelTree(
      params.leaves, DefaultStates(params.leaves, params.states));
  if (!tree.ok()) return tree.status();
  const RegionTree& t = **tree;
  const std::vector<RegionId>& leaves = t.regions_at_level(3);

  std::mt19937_64 rng(params.seed);
  std::lognormal_distribution<double> pickups(params.mu, params.sigma);
  std::uniform_int_distribution<size_t> any_leaf(0, leaves.size() - 1);
  std::vector<std::vector<int64_t>> counts(
      t.size(), std::vector<int64_t>(params.num_sizes, 0));
  for (int64_t v = 0; v < params.vehicles; ++v) {
    const RegionId leaf = leaves[any_leaf(rng)];
    const double x = std::round(pickups(rng));
    const int size = static_cast<int>(
        std::clamp(x, 1.0, static_cast<double>(params.num_sizes)));
    AddGroup(counts, leaf, size);
  }
  return GroupSizeHierarchy::FromLeafCounts(*tree, std::move(counts),
                                            Role::kExact);
}

namespace {

using Json = nlohmann::json;

template <typename T>
void Read(const Json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj[key].get<T>();
}

absl::StatusOr<ExperimentConfig> ConfigFromJson(const Json& doc) {
  ExperimentConfig cfg;
  if (doc.contains("dataset")) {
    const Json& d = doc["dataset"];
    const std::string kind = d.value("kind", std::string("census"));
    if (kind == "census") {
      cfg.dataset.kind = DatasetSpec::Kind::kCensus;
      CensusParams& c = cfg.dataset.census;
      Read(d, "leaves", c.leaves);
      if (d.contains("states")) c.states = d["states"].get<int>();
      Read(d, "individuals", c.individuals);
      Read(d, "num_sizes", c.num_sizes);
      Read(d, "outliers", c.outliers);
      Read(d, "seed", c.seed);
    } else if (kind == "taxi") {
      cfg.dataset.kind = DatasetSpec::Kind::kTaxi;
      TaxiParams& t = cfg.dataset.taxi;
      Read(d, "leaves", t.leaves);
      if (d.contains("states")) t.states = d["states"].get<int>();
      Read(d, "vehicles", t.vehicles);
      Read(d, "num_sizes", t.num_sizes);
      Read(d, "mu", t.mu);
      Read(d, "sigma", t.sigma);
      Read(d, "seed", t.seed);
    } else if (kind == "file") {
      cfg.dataset.kind = DatasetSpec::Kind::kFile;
      Read(d, "path", cfg.dataset.path);
      if (cfg.dataset.path.empty()) {
        return absl::InvalidArgumentError("file dataset needs a \"path\"");
      }
    } else {
      return absl::InvalidArgumentError(absl::StrCat(
          "unknown dataset kind '", kind, "'; valid kinds are census, taxi, file"));
    }
  }
  if (doc.contains("mechanisms")) {
    for (const Json& name : doc["mechanisms"]) {
      absl::StatusOr<Mechanism> m = ParseMechanism(name.get<std::string>());
      if (!m.ok()) return m.status();
      cfg.mechanisms.push_back(*m);
    }
  } else {
    cfg.mechanisms = {Mechanism::kHierarchicalDp, Mechanism::kCumulativeDp,
                      Mechanism::kChainDp};
  }
  Read(doc, "epsilons", cfg.epsilons);
  Read(doc, "trials", cfg.trials);
  Read(doc, "seed", cfg.seed);
  Read(doc, "output", cfg.output);
  if (doc.contains("delta")) cfg.options.delta = doc["delta"].get<int64_t>();
  Read(doc, "full_windows", cfg.options.full_windows);
  Read(doc, "chain_scale_multiplier", cfg.options.chain_scale_multiplier);
  Read(doc, "record_runtime", cfg.record_runtime);

  if (cfg.trials < 1) return absl::InvalidArgumentError("trials must be >= 1");
  if (cfg.epsilons.empty()) {
    return absl::InvalidArgumentError("epsilons must be non-empty");
  }
  for (double e : cfg.epsilons) {
    if (!(e > 0) || !std::isfinite(e)) {
      return absl::InvalidArgumentError(
          absl::StrCat("epsilon must be positive, got ", e));
    }
  }
  if (cfg.mechanisms.empty()) {
    return absl::InvalidArgumentError("mechanisms must be non-empty");
  }
  return cfg;
}

}  // namespace

absl::StatusOr<ExperimentConfig> ParseExperimentConfig(
    const std::string& text) {
  const Json doc = Json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) {
    return absl::InvalidArgumentError("config is not a JSON object");
  }
  try {
    return ConfigFromJson(doc);
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("bad config field: ", e.what()));
  }
}

uint64_t TrialSeed(uint64_t seed, int trial, int epsilon_index,
                   Mechanism mechanism) {
  std::seed_seq seq{static_cast<uint32_t>(seed),
                    static_cast<uint32_t>(seed >> 32),
                    static_cast<uint32_t>(trial),
                    static_cast<uint32_t>(epsilon_index),
                    static_cast<uint32_t>(mechanism)};
  uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<uint64_t>(out[0]) << 32) | out[1];
}

absl::StatusOr<GroupSizeHierarchy> LoadDataset(const DatasetSpec& spec) {
  switch (spec.kind) {
    case DatasetSpec::Kind::kCensus:
      return SynthCensus(spec.census);
    case DatasetSpec::Kind::kTaxi:
      return SynthTaxi(spec.taxi);
    case DatasetSpec::Kind::kFile: {
      absl::StatusOr<std::string> text = ReadFile(spec.path);
      if (!text.ok()) return text.status();
      return ParseHierarchyJson(*text);
    }
  }
  return absl::InvalidArgumentError("unknown dataset kind");
}

namespace {

struct Moments {
  double mean = 0.0;
  double std = 0.0;
};

Moments Summarize(const std::vector<double>& xs) {
  Moments m;
  if (xs.empty()) return m;
  for (double x : xs) m.mean += x;
  m.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return m;
}

}  // namespace

absl::StatusOr<ExperimentResult> RunExperiment(const ExperimentConfig& cfg) {
  if (cfg.trials < 1 || cfg.epsilons.empty() || cfg.mechanisms.empty()) {
    return absl::InvalidArgumentError(
        "config needs trials >= 1, epsilons and mechanisms");
  }
  absl::StatusOr<GroupSizeHierarchy> h = LoadDataset(cfg.dataset);
  if (!h.ok()) return h.status();
  if (h->role() != Role::kExact) {
    return absl::InvalidArgumentError("experiments need an exact hierarchy");
  }
  const int levels = h->tree().levels();

  ExperimentResult result;
  result.levels = levels;
  std::vector<ResultRow> summaries;
  for (Mechanism mechanism : cfg.mechanisms) {
    for (size_t e = 0; e < cfg.epsilons.size(); ++e) {
      const double epsilon = cfg.epsilons[e];
      // [level 0..L][trial]; level 0 is the total.
      std::vector<std::vector<double>> l1(levels + 1), cv(levels + 1);
      std::vector<double> runtimes;
      for (int trial = 0; trial < cfg.trials; ++trial) {
        absl::StatusOr<NoiseSpec> spec =
            SpecFor(mechanism, epsilon, levels,
                    TrialSeed(cfg.seed, trial, static_cast<int>(e), mechanism),
                    cfg.options);
        if (!spec.ok()) return spec.status();
        absl::StatusOr<MechanismResult> released =
            Release(mechanism, *h, *spec, cfg.options);
        if (!released.ok()) return released.status();
        absl::StatusOr<L1Report> error = L1Error(*h, released->released);
        if (!error.ok()) return error.status();
        const PgsrReport report = ValidatePgsr(released->released);
        if (!report.ok()) ++result.invalid_releases;

        std::optional<double> runtime;
        if (cfg.record_runtime) {
          runtime = released->timings.postprocess_seconds;
          runtimes.push_back(*runtime);
        }
        for (int level = 1; level <= levels + 1; ++level) {
          const bool total = level > levels;
          ResultRow row;
          row.kind = ResultRow::Kind::kTrial;
          row.mechanism = mechanism;
          row.epsilon = epsilon;
          row.trial = trial;
          row.level = total ? 0 : level;
          row.l1 = static_cast<double>(total ? error->total
                                             : error->per_level[level - 1]);
          row.cv = static_cast<double>(
              total ? report.consistency_violations
                    : report.violations_per_level[level - 1]);
          row.runtime = runtime;
          l1[row.level].push_back(row.l1);
          cv[row.level].push_back(row.cv);
          result.rows.push_back(row);
        }
      }
      const Moments time = Summarize(runtimes);
      for (int level = 1; level <= levels + 1; ++level) {
        const int index = level > levels ? 0 : level;
        const Moments a = Summarize(l1[index]);
        const Moments b = Summarize(cv[index]);
        ResultRow mean{ResultRow::Kind::kMean, mechanism, epsilon, -1, index,
                       a.mean, b.mean, std::nullopt};
        ResultRow std{ResultRow::Kind::kStd, mechanism, epsilon, -1, index,
                      a.std, b.std, std::nullopt};
        if (cfg.record_runtime) {
          mean.runtime = time.mean;
          std.runtime = time.std;
        }
        summaries.push_back(mean);
        summaries.push_back(std);
      }
    }
  }
  result.rows.insert(result.rows.end(), summaries.begin(), summaries.end());
  return result;
}

namespace {

std::string Number(double x) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.10g", x);
  return buffer;
}

std::string_view KindName(ResultRow::Kind kind) {
  switch (kind) {
    case ResultRow::Kind::kTrial:
      return "trial";
    case ResultRow::Kind::kMean:
      return "mean";
    case ResultRow::Kind::kStd:
      return "std";
  }
  return "";
}

}  // namespace

void WriteResultsCsv(const ExperimentResult& result, std::ostream& out) {
  out << "kind,mechanism,epsilon,trial,level,l1,cv,runtime\n";
  for (const ResultRow& row : result.rows) {
    out << KindName(row.kind) << ',' << MechanismName(row.mechanism) << ','
        << Number(row.epsilon) << ','
        << (row.trial >= 0 ? std::to_string(row.trial) : std::string("NA"))
        << ','
        << (row.level == 0 ? std::string("total") : std::to_string(row.level))
        << ',' << Number(row.l1) << ',' << Number(row.cv) << ','
        << (row.runtime.has_value() ? Number(*row.runtime) : std::string("NA"))
        << '\n';
  }
}

}  // namespace pgsr
