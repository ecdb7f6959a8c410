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

// pgsr: command-line front end.
//
//   pgsr aggregate --records r.csv --tree tree.json [--num-sizes N] --output h.json
//   pgsr noise     --input h.json --variant plain --epsilon E --seed S
//   pgsr release   --input h.json --mechanism c_ch --epsilon E --seed S
//   pgsr validate  --input out.json
//   pgsr synth     --kind census --leaves 10 --output h.json
//   pgsr run       --config cfg.json
//
// Output goes to --output when given, stdout otherwise. Exit status is 0 on
// success, 1 on rejected input and 2 when validate finds a violation.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "pgsr/harness.h"
#include "pgsr/hierarchy.h"
#include "pgsr/io.h"
#include "pgsr/mechanisms.h"
#include "pgsr/noise.h"

namespace {

using pgsr::GroupSizeHierarchy;

int Fail(const absl::Status& status) {
  std::cerr << "pgsr: " << std::string(status.message()) << "\n";
  return 1;
}

int Emit(const std::string& output, const std::string& contents) {
  if (output.empty()) {
    std::cout << contents;
    return 0;
  }
  const absl::Status status = pgsr::WriteFile(output, contents);
  return status.ok() ? 0 : Fail(status);
}

absl::StatusOr<GroupSizeHierarchy> LoadHierarchy(const std::string& path) {
  absl::StatusOr<std::string> text = pgsr::ReadFile(path);
  if (!text.ok()) return text.status();
  return pgsr::ParseHierarchyJson(*text);
}

struct AggregateArgs {
  std::string records;
  std::string tree;
  std::optional<int> num_sizes;
  bool include_size_zero = false;
  std::string output;
};

int Aggregate(const AggregateArgs& args) {
  std::ifstream in(args.records);
  if (!in) return Fail(absl::NotFoundError("cannot open " + args.records));
  absl::StatusOr<std::vector<pgsr::Record>> records = pgsr::ReadRecordsCsv(in);
  if (!records.ok()) return Fail(records.status());
  absl::StatusOr<std::string> tree_text = pgsr::ReadFile(args.tree);
  if (!tree_text.ok()) return Fail(tree_text.status());
  auto tree = pgsr::ParseRegionTreeJson(*tree_text);
  if (!tree.ok()) return Fail(tree.status());
  pgsr::AggregateOptions options;
  options.num_sizes = args.num_sizes;
  options.include_size_zero = args.include_size_zero;
  absl::StatusOr<GroupSizeHierarchy> h =
      pgsr::AggregateRecords(*records, *tree, options);
  if (!h.ok()) return Fail(h.status());
  return Emit(args.output, pgsr::HierarchyToJson(*h));
}

struct NoiseArgs {
  std::string input;
  std::string variant = "plain";
  double epsilon = 1.0;
  uint64_t seed = 0;
  double multiplier = 1.0;
  std::string output;
};

int Noise(const NoiseArgs& args) {
  absl::StatusOr<GroupSizeHierarchy> h = LoadHierarchy(args.input);
  if (!h.ok()) return Fail(h.status());
  absl::StatusOr<pgsr::NoiseVariant> variant = pgsr::ParseVariant(args.variant);
  if (!variant.ok()) return Fail(variant.status());
  absl::StatusOr<pgsr::NoiseSpec> spec = pgsr::NoiseSpec::ForVariant(
      *variant, args.epsilon, h->tree().levels(), args.seed, args.multiplier);
  if (!spec.ok()) return Fail(spec.status());
  absl::StatusOr<pgsr::NoisyMeasurements> m =
      pgsr::NoisyHierarchy(*h, *spec, *variant);
  if (!m.ok()) return Fail(m.status());
  return Emit(args.output, pgsr::MeasurementsToJson(*m));
}

struct ReleaseArgs {
  std::string input;
  std::string mechanism = "c_ch";
  double epsilon = 1.0;
  uint64_t seed = 0;
  std::optional<int64_t> delta;
  bool full_windows = false;
  double chain_multiplier = 1.0;
  std::string output;
};

int Release(const ReleaseArgs& args) {
  absl::StatusOr<GroupSizeHierarchy> h = LoadHierarchy(args.input);
  if (!h.ok()) return Fail(h.status());
  absl::StatusOr<pgsr::Mechanism> mechanism =
      pgsr::ParseMechanism(args.mechanism);
  if (!mechanism.ok()) return Fail(mechanism.status());
  pgsr::MechanismOptions options;
  options.delta = args.delta;
  options.full_windows = args.full_windows;
  options.chain_scale_multiplier = args.chain_multiplier;
  absl::StatusOr<pgsr::NoiseSpec> spec = pgsr::SpecFor(
      *mechanism, args.epsilon, h->tree().levels(), args.seed, options);
  if (!spec.ok()) return Fail(spec.status());
  absl::StatusOr<pgsr::MechanismResult> result =
      pgsr::Release(*mechanism, *h, *spec, options);
  if (!result.ok()) return Fail(result.status());
  return Emit(args.output, pgsr::MechanismResultToJson(*result));
}

int Validate(const std::string& input) {
  absl::StatusOr<GroupSizeHierarchy> h = LoadHierarchy(input);
  if (!h.ok()) return Fail(h.status());
  const pgsr::PgsrReport report = pgsr::ValidatePgsr(*h);
  std::cout << pgsr::PgsrReportToJson(report);
  return report.ok() ? 0 : 2;
}

struct SynthArgs {
  std::string kind = "census";
  int leaves = 10;
  std::optional<int> states;
  int64_t individuals = 25000;
  int64_t vehicles = 5000;
  int num_sizes = 20;
  int outliers = 0;
  double mu = 2.0;
  double sigma = 0.8;
  uint64_t seed = 1;
  std::string output;
};

int Synth(const SynthArgs& args) {
  absl::StatusOr<GroupSizeHierarchy> h;
  if (args.kind == "census") {
    pgsr::CensusParams p;
    p.leaves = args.leaves;
    p.states = args.states;
    p.individuals = args.individuals;
    p.num_sizes = args.num_sizes;
    p.outliers = args.outliers;
    p.seed = args.seed;
    h = pgsr::SynthCensus(p);
  } else if (args.kind == "taxi") {
    pgsr::TaxiParams p;
    p.leaves = args.leaves;
    p.states = args.states;
    p.vehicles = args.vehicles;
    p.num_sizes = args.num_sizes;
    p.mu = args.mu;
    p.sigma = args.sigma;
    p.seed = args.seed;
    h = pgsr::SynthTaxi(p);
  } else {
    return Fail(absl::InvalidArgumentError("--kind must be census or taxi"));
  }
  if (!h.ok()) return Fail(h.status());
  return Emit(args.output, pgsr::HierarchyToJson(*h));
}

int Run(const std::string& config, const std::string& output_override) {
  absl::StatusOr<std::string> text = pgsr::ReadFile(config);
  if (!text.ok()) return Fail(text.status());
  absl::StatusOr<pgsr::ExperimentConfig> cfg =
      pgsr::ParseExperimentConfig(*text);
  if (!cfg.ok()) return Fail(cfg.status());
  if (!output_override.empty()) cfg->output = output_override;
  absl::StatusOr<pgsr::ExperimentResult> result = pgsr::RunExperiment(*cfg);
  if (!result.ok()) return Fail(result.status());
  std::ostringstream csv;
  pgsr::WriteResultsCsv(*result, csv);
  const int code = Emit(cfg->output, csv.str());
  if (code == 0 && result->invalid_releases > 0) {
    std::cerr << "pgsr: " << result->invalid_releases
              << " released hierarchies failed validation\n";
    return 2;
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Private release of hierarchical group-size counts"};
  app.require_subcommand(1);

  AggregateArgs aggregate;
  CLI::App* agg = app.add_subcommand("aggregate", "Records CSV to hierarchy JSON");
  agg->add_option("--records", aggregate.records, "user,unit,region,quantity CSV")
      ->required();
  agg->add_option("--tree", aggregate.tree, "Region tree JSON")->required();
  agg->add_option("--num-sizes", aggregate.num_sizes, "Number of group sizes");
  agg->add_flag("--include-size-zero", aggregate.include_size_zero,
                "Count units of size 0");
  agg->add_option("--output", aggregate.output, "Hierarchy JSON");

  NoiseArgs noise;
  CLI::App* noi = app.add_subcommand("noise", "Noisy measurements only");
  noi->add_option("--input", noise.input, "Exact hierarchy JSON")->required();
  noi->add_option("--variant", noise.variant, "plain|cumulative|chain");
  noi->add_option("--epsilon", noise.epsilon, "Total privacy budget");
  noi->add_option("--seed", noise.seed, "Noise seed");
  noi->add_option("--chain-multiplier", noise.multiplier,
                  "Scale multiplier for the chain variant");
  noi->add_option("--output", noise.output, "Measurements JSON");

  ReleaseArgs release;
  CLI::App* rel = app.add_subcommand("release", "Perturb and post-process");
  rel->add_option("--input", release.input,
                  "Hierarchy JSON; role noisy skips the noise step")
      ->required();
  rel->add_option("--mechanism", release.mechanism, "h_dp|c_dp|c_ch");
  rel->add_option("--epsilon", release.epsilon, "Total privacy budget");
  rel->add_option("--seed", release.seed, "Noise seed");
  rel->add_option("--delta", release.delta, "Window half-width");
  rel->add_flag("--full-windows", release.full_windows, "Use [0, G] windows");
  rel->add_option("--chain-multiplier", release.chain_multiplier,
                  "Scale multiplier for c_ch noise");
  rel->add_option("--output", release.output, "Result JSON");

  std::string validate_input;
  CLI::App* val = app.add_subcommand("validate", "Check PGSR conditions");
  val->add_option("--input", validate_input, "Hierarchy or result JSON")
      ->required();

  SynthArgs synth;
  CLI::App* syn = app.add_subcommand("synth", "Synthetic hierarchy");
  syn->add_option("--kind", synth.kind, "census|taxi");
  syn->add_option("--leaves", synth.leaves, "Number of counties");
  syn->add_option("--states", synth.states, "Number of states");
  syn->add_option("--individuals", synth.individuals, "Census individuals");
  syn->add_option("--vehicles", synth.vehicles, "Taxi vehicles");
  syn->add_option("--num-sizes", synth.num_sizes, "Largest group size N");
  syn->add_option("--outliers", synth.outliers, "Census outlier groups");
  syn->add_option("--mu", synth.mu, "Taxi log-normal mu");
  syn->add_option("--sigma", synth.sigma, "Taxi log-normal sigma");
  syn->add_option("--seed", synth.seed, "Generator seed");
  syn->add_option("--output", synth.output, "Hierarchy JSON");

  std::string config;
  std::string run_output;
  CLI::App* run = app.add_subcommand("run", "Experiment from a config");
  run->add_option("--config", config, "Config JSON")->required();
  run->add_option("--output", run_output, "Overrides the config output");

  CLI11_PARSE(app, argc, argv);

  if (*agg) return Aggregate(aggregate);
  if (*noi) return Noise(noise);
  if (*rel) return Release(release);
  if (*val) return Validate(validate_input);
  if (*syn) return Synth(synth);
  if (*run) return Run(config, run_output);
  return 1;
}
