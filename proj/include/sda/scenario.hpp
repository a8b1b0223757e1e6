// Copyright (c) 2026 SDA Planner Contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sda/kb.hpp"
#include "sda/sim.hpp"

namespace sda {

/// One benchmark task. File layout:
///
///   {"id", "instruction", "kb"?, "context"?, "tags"?,
///    "agent": {"position": "...", "holding": "..."},
///    "objects": {"tomato": {"position": "fridge", "sliced": "false"}, ...},
///    "fixed_plan"?: [["find", "pan"], ...],
///    "goals": [["position(tomato)", "countertop"], ...],
///    "perturbations"?: [{"at_tick": 3, "set": [["agent.holding", "nothing"]]}],
///    "scripted"?: [...scripted proposer table...]}
struct Scenario {
  std::string id;
  std::string instruction;
  /// Extra context shown to the proposer, merged with the object list.
  nlohmann::json context = nlohmann::json::object();
  std::vector<std::string> tags;
  std::set<std::string> objects;
  WorldState initial;
  std::optional<Plan> fixed_plan;
  std::vector<GroundedAssignment> goals;
  std::vector<Perturbation> perturbations;
  nlohmann::json scripted;  // null when absent
  /// KB path from the file, resolved against the file's directory.
  std::optional<std::filesystem::path> kb_path;
  std::filesystem::path source;
};

Scenario parse_scenario(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& path);
nlohmann::json scenario_to_json(const Scenario& sc);

/// Checks the scenario against a KB: non-empty goals, values inside their
/// domains, every agent variable assigned, goals and perturbations on
/// declared variables, fixed plan grounded. Throws SchemaError.
void validate_scenario(const Scenario& sc, const ActionKB& kb);

/// Proposer-visible context: the scenario's own context plus the sorted
/// object list.
nlohmann::json proposer_context(const Scenario& sc);

}  // namespace sda
