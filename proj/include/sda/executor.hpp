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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sda/diagnosis.hpp"
#include "sda/proposer.hpp"
#include "sda/rational.hpp"
#include "sda/scenario.hpp"
#include "sda/sdg.hpp"
#include "sda/sim.hpp"
#include "sda/subtree.hpp"

namespace sda {

enum class Strategy { None, Local, Global, Sda, SdaNoTree };

std::string_view to_string(Strategy s);
/// Accepts "none", "local", "global", "sda", "sda_no_tree".
Strategy strategy_from_string(std::string_view text);

enum class Provenance { Initial, Repaired, InsertedPrep, Replanned, Reverse, RollbackPrep };
std::string_view to_string(Provenance p);

enum class StepStatus { Ok, Failed, Fake };
std::string_view to_string(StepStatus s);

struct ExecutedStep {
  MidLevelAction action;
  StepStatus status = StepStatus::Ok;
  Provenance provenance = Provenance::Initial;
};

struct PlannedStep {
  MidLevelAction action;
  Provenance provenance = Provenance::Initial;
};

struct ExecConfig {
  int step_budget = 50;
  int repair_rounds = 5;
  /// Environment-state failures of one step tolerated before the next
  /// failure of that step is treated as a deep precondition error.
  int max_local_replans = 2;
  RepairConfig repair;
};

struct Event {
  int tick = 0;
  std::string event;
  nlohmann::json payload;
};

nlohmann::json event_to_json(const Event& e);

struct EpisodeResult {
  std::string scenario_id;
  Strategy strategy = Strategy::Sda;
  bool success = false;
  Rational goal_fraction;
  int corrections = 0;
  int steps = 0;
  /// "completed", "step_budget", "repair_budget", "no_valid_path",
  /// "proposer_error".
  std::string end_reason;
  std::vector<ExecutedStep> executed;
  StateTrace trace;
  std::vector<Event> log;
  WorldState final_world;
};

/// Deterministic serialization (no timing, no pointers).
nlohmann::json result_to_json(const EpisodeResult& r, bool with_log = false);
/// Event log as JSON lines.
std::string log_to_jsonl(const std::vector<Event>& log);

struct RollbackResult {
  /// Reverse actions in issue order, including ones that failed.
  Plan reversed;
  Plan failed;
  /// Executed timesteps kept as already done (irreversible steps).
  std::vector<int> fake_steps;
  Plan fake_set;
  /// Every step issued to the environment, preparation finds included.
  std::vector<ExecutedStep> issued;
};

/// Undoes executed steps t_error-1 down to t_start (1-based) on the live
/// environment. Unmet dependencies of a reverse action that a preparation
/// action can produce are established first. Reverse failures are recorded
/// and skipped.
RollbackResult rollback(const std::vector<ExecutedStep>& executed, int t_start, int t_error,
                        Environment& env, const StateDependencyGraph& g);

/// Belief trace over an executed log: failed and fake steps are no-ops.
StateTrace belief_trace(const WorldState& initial, const std::vector<ExecutedStep>& executed,
                        const Universe& u);

/// State at the first failure of a scenario's initial plan, before any
/// strategy runs.
struct FirstFailure {
  std::vector<ExecutedStep> executed;
  StateTrace trace;
  Plan timeline;
  ExecError error;
  DiagnosisReport report;
  Environment env;
};

/// Executes the initial plan until it fails and diagnoses that failure.
/// Returns nullopt when the plan runs through.
std::optional<FirstFailure> diagnose_scenario(const Scenario& scenario, Proposer& proposer,
                                              const ActionKB& kb, const StateDependencyGraph& g);

struct RepairPreview {
  Plan window;
  Plan suffix;
  Plan suggestions;
  std::vector<CandidateNode> candidates;
  std::size_t tree_nodes = 0;
  std::vector<Plan> options;
  Plan chosen;
  RollbackResult rollback;
  std::vector<std::string> warnings;
};

/// Tree repair for a deep precondition failure, with rollback run on a copy
/// of the environment. Throws NoValidPath, or SchemaError for other classes.
RepairPreview preview_repair(const Scenario& scenario, const FirstFailure& failure, Proposer& proposer,
                             const StateDependencyGraph& g, const RepairConfig& config = {});

EpisodeResult run_episode(const Scenario& scenario, Strategy strategy, Proposer& proposer,
                          const ExecConfig& config, const ActionKB& kb,
                          const StateDependencyGraph& g);

}  // namespace sda
