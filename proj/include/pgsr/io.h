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

// File formats.
//
// Hierarchy JSON:
//
//   {"levels": 2, "N": 5, "G": 6, "first_size": 1, "role": "exact",
//    "regions": [{"id": "US", "parent": null, "counts": [3, 1, 2, 0, 0]},
//                {"id": "GA", "parent": "US", "counts": [2, 0, 1, 0, 0]},
//                ...]}
//
// "counts" may be omitted for an internal region and is then the sum of its
// children. "first_size" (default 1), "role" (default "exact"), "levels",
// "N" and "G" (default: root total) are optional but checked when present.
// A region tree alone is the same document without counts.
//
// Record CSV: header "user,unit,region,quantity", one record per line.

#ifndef PGSR_IO_H_
#define PGSR_IO_H_

#include <istream>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "pgsr/hierarchy.h"
#include "pgsr/mechanisms.h"
#include "pgsr/noise.h"

namespace pgsr {

absl::StatusOr<std::shared_ptr<const RegionTree>> ParseRegionTreeJson(
    const std::string& text);
absl::StatusOr<GroupSizeHierarchy> ParseHierarchyJson(const std::string& text);
std::string HierarchyToJson(const GroupSizeHierarchy& h);

absl::StatusOr<std::vector<Record>> ReadRecordsCsv(std::istream& in);
void WriteRecordsCsv(const std::vector<Record>& records, std::ostream& out);

// The released hierarchy plus objective, mechanism, budget and timings.
std::string MechanismResultToJson(const MechanismResult& result);

// Measurements as {"variant", "scale", "G", "first_size", "N", "regions":
// [{"id", "parent", "values"}]}.
std::string MeasurementsToJson(const NoisyMeasurements& m);

std::string PgsrReportToJson(const PgsrReport& report);

absl::StatusOr<std::string> ReadFile(const std::string& path);
absl::Status WriteFile(const std::string& path, const std::string& contents);

}  // namespace pgsr

#endif  // PGSR_IO_H_
