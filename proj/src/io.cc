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

#include "pgsr/io.h"

#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>
#include <utility>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "json.hpp"

namespace pgsr {
namespace {

using Json = nlohmann::ordered_json;

absl::StatusOr<Json> Parse(const std::string& text) {
  Json doc = Json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) return absl::InvalidArgumentError("malformed JSON");
  if (!doc.is_object()) {
    return absl::InvalidArgumentError("expected a JSON object");
  }
  return doc;
}

absl::StatusOr<std::shared_ptr<const RegionTree>> TreeFromJson(
    const Json& doc) {
  if (!doc.contains("regions") || !doc["regions"].is_array()) {
    return absl::InvalidArgumentError("missing \"regions\" array");
  }
  std::vector<std::string> names;
  std::vector<std::string> parent_names;
  for (const Json& region : doc["regions"]) {
    if (!region.is_object() || !region.contains("id") ||
        !region["id"].is_string()) {
      return absl::InvalidArgumentError("every region needs a string \"id\"");
    }
    names.push_back(region["id"].get<std::string>());
    if (!region.contains("parent") || region["parent"].is_null()) {
      parent_names.emplace_back();
    } else if (region["parent"].is_string()) {
      parent_names.push_back(region["parent"].get<std::string>());
      if (parent_names.back().empty()) {
        return absl::InvalidArgumentError("empty parent id");
      }
    } else {
      return absl::InvalidArgumentError(
          absl::StrCat("region '", names.back(), "' has a non-string parent"));
    }
  }
  std::vector<RegionId> parents(names.size(), kNoRegion);
  for (size_t i = 0; i < names.size(); ++i) {
    if (parent_names[i].empty()) continue;
    const auto it = std::find(names.begin(), names.end(), parent_names[i]);
    if (it == names.end()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "region '", names[i], "' has unknown parent '", parent_names[i],
          "'"));
    }
    parents[i] = static_cast<RegionId>(it - names.begin());
  }
  absl::StatusOr<RegionTree> tree =
      RegionTree::Create(std::move(names), std::move(parents));
  if (!tree.ok()) return tree.status();
  auto shared = std::make_shared<const RegionTree>(*std::move(tree));
  if (doc.contains("levels") &&
      doc["levels"].get<int>() != shared->levels()) {
    return absl::InvalidArgumentError(
        absl::StrCat("\"levels\" says ", doc["levels"].get<int>(),
                     " but the tree has ", shared->levels()));
  }
  return shared;
}

absl::StatusOr<GroupSizeHierarchy> HierarchyFromJson(const Json& doc) {
  absl::StatusOr<std::shared_ptr<const RegionTree>> tree = TreeFromJson(doc);
  if (!tree.ok()) return tree.status();
  const RegionTree& t = **tree;
  const Json& regions = doc["regions"];

  std::vector<std::optional<std::vector<int64_t>>> given(t.size());
  for (RegionId r = 0; r < t.size(); ++r) {
    const Json& region = regions[r];
    if (region.contains("counts")) {
      if (!region["counts"].is_array()) {
        return absl::InvalidArgumentError(
            absl::StrCat("counts of '", t.name(r), "' must be an array"));
      }
      given[r] = region["counts"].get<std::vector<int64_t>>();
    }
  }
  std::vector<std::vector<int64_t>> counts(t.size());
  for (RegionId r : t.post_order()) {
    if (given[r].has_value()) {
      counts[r] = *given[r];
      continue;
    }
    if (t.is_leaf(r)) {
      return absl::InvalidArgumentError(
          absl::StrCat("leaf region '", t.name(r), "' has no counts"));
    }
    for (RegionId c : t.children(r)) {
      if (counts[c].size() != counts[t.children(r)[0]].size()) {
        return absl::InvalidArgumentError(absl::StrCat(
            "children of '", t.name(r), "' have different lengths"));
      }
    }
    counts[r].assign(counts[t.children(r)[0]].size(), 0);
    for (RegionId c : t.children(r)) {
      for (size_t k = 0; k < counts[r].size(); ++k) counts[r][k] += counts[c][k];
    }
  }
  const size_t n = counts[t.root()].size();
  if (doc.contains("N") && doc["N"].get<size_t>() != n) {
    return absl::InvalidArgumentError(absl::StrCat(
        "\"N\" says ", doc["N"].get<size_t>(), " but counts have length ", n));
  }
  int64_t g = 0;
  for (int64_t c : counts[t.root()]) g += c;
  if (doc.contains("G")) g = doc["G"].get<int64_t>();
  Role role = Role::kExact;
  if (doc.contains("role")) {
    absl::StatusOr<Role> parsed = ParseRole(doc["role"].get<std::string>());
    if (!parsed.ok()) return parsed.status();
    role = *parsed;
  }
  const int first_size =
      doc.contains("first_size") ? doc["first_size"].get<int>() : 1;
  return GroupSizeHierarchy::Create(*tree, std::move(counts), g, role,
                                    first_size);
}

Json RegionsJson(const RegionTree& t,
                 const std::vector<std::vector<int64_t>>& values,
                 const char* key) {
  Json regions = Json::array();
  for (RegionId r = 0; r < t.size(); ++r) {
    Json region;
    region["id"] = t.name(r);
    region["parent"] =
        t.parent(r) == kNoRegion ? Json(nullptr) : Json(t.name(t.parent(r)));
    region[key] = values[r];
    regions.push_back(std::move(region));
  }
  return regions;
}

Json HierarchyJson(const GroupSizeHierarchy& h) {
  Json doc;
  doc["levels"] = h.tree().levels();
  doc["N"] = h.num_sizes();
  doc["G"] = h.total_groups();
  doc["first_size"] = h.first_size();
  doc["role"] = std::string(RoleName(h.role()));
  doc["regions"] = RegionsJson(h.tree(), h.all_counts(), "counts");
  return doc;
}

// Catches the type errors nlohmann throws on ill-typed fields.
template <typename T, typename F>
absl::StatusOr<T> Guarded(F f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("bad JSON field: ", e.what()));
  }
}

}  // namespace

absl::StatusOr<std::shared_ptr<const RegionTree>> ParseRegionTreeJson(
    const std::string& text) {
  absl::StatusOr<Json> doc = Parse(text);
  if (!doc.ok()) return doc.status();
  return Guarded<std::shared_ptr<const RegionTree>>(
      [&] { return TreeFromJson(*doc); });
}

absl::StatusOr<GroupSizeHierarchy> ParseHierarchyJson(const std::string& text) {
  absl::StatusOr<Json> doc = Parse(text);
  if (!doc.ok()) return doc.status();
  return Guarded<GroupSizeHierarchy>([&] { return HierarchyFromJson(*doc); });
}

std::string HierarchyToJson(const GroupSizeHierarchy& h) {
  return HierarchyJson(h).dump(2) + "\n";
}

absl::StatusOr<std::vector<Record>> ReadRecordsCsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    return absl::InvalidArgumentError("empty records file");
  }
  if (absl::StripSuffix(line, "\r") != "user,unit,region,quantity") {
    return absl::InvalidArgumentError(
        "records header must be user,unit,region,quantity");
  }
  std::vector<Record> records;
  int line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    const absl::string_view row = absl::StripSuffix(line, "\r");
    if (row.empty()) continue;
    const std::vector<std::string> fields = absl::StrSplit(row, ',');
    if (fields.size() != 4) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_number, ": expected 4 fields"));
    }
    Record record{fields[0], fields[1], fields[2], 0};
    if (fields[3] == "0") {
      record.quantity = 0;
    } else if (fields[3] == "1") {
      record.quantity = 1;
    } else {
      return absl::InvalidArgumentError(absl::StrCat(
          "line ", line_number, ": quantity must be 0 or 1, got '", fields[3],
          "'"));
    }
    records.push_back(std::move(record));
  }
  return records;
}

void WriteRecordsCsv(const std::vector<Record>& records, std::ostream& out) {
  out << "user,unit,region,quantity\n";
  for (const Record& r : records) {
    out << r.user << ',' << r.unit << ',' << r.region << ',' << r.quantity
        << '\n';
  }
}

std::string MechanismResultToJson(const MechanismResult& result) {
  Json doc = HierarchyJson(result.released);
  doc["mechanism"] = std::string(MechanismName(result.mechanism));
  doc["objective"] = result.objective;
  if (result.budget.has_value()) {
    const NoiseSpec& spec = *result.budget;
    Json budget;
    budget["epsilon"] = spec.epsilon;
    budget["levels"] = spec.levels;
    budget["sensitivity"] = spec.sensitivity;
    budget["scale"] = spec.scale();
    budget["seed"] = spec.seed;
    budget["scale_multiplier"] = spec.scale_multiplier;
    doc["budget"] = std::move(budget);
  }
  doc["timings"] = {{"noise_seconds", result.timings.noise_seconds},
                    {"postprocess_seconds", result.timings.postprocess_seconds}};
  return doc.dump(2) + "\n";
}

std::string MeasurementsToJson(const NoisyMeasurements& m) {
  Json doc;
  doc["variant"] = std::string(VariantName(m.variant));
  doc["scale"] = m.scale;
  doc["levels"] = m.tree->levels();
  doc["N"] = m.num_sizes();
  doc["G"] = m.total_groups;
  doc["first_size"] = m.first_size;
  doc["regions"] = RegionsJson(*m.tree, m.values, "values");
  return doc.dump(2) + "\n";
}

std::string PgsrReportToJson(const PgsrReport& report) {
  Json doc;
  doc["ok"] = report.ok();
  doc["consistency_violations"] = report.consistency_violations;
  doc["violations_per_level"] = report.violations_per_level;
  doc["validity_ok"] = report.validity_ok;
  doc["faithfulness_ok"] = report.faithfulness_ok;
  doc["unfaithful_levels"] = report.unfaithful_levels;
  return doc.dump(2) + "\n";
}

absl::StatusOr<std::string> ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

absl::Status WriteFile(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return absl::PermissionDeniedError(absl::StrCat("cannot write ", path));
  out << contents;
  if (!out) return absl::DataLossError(absl::StrCat("write failed: ", path));
  return absl::OkStatus();
}

}  // namespace pgsr
