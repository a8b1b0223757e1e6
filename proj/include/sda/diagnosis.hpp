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
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sda/sdg.hpp"
#include "sda/sim.hpp"

namespace sda {

/// Believed world states along an executed prefix. Timesteps are 1-based:
/// snapshot(0) is the initial state and snapshot(t) the state after step t.
struct StateTrace {
  std::vector<WorldState> snapshots;
  Plan executed;
  /// Steps replayed without effect (failed in the environment, or skipped
  /// by fake execution).
  std::vector<bool> noop;

  int length() const { return static_cast<int>(executed.size()); }
  const WorldState& snapshot(int t) const { return snapshots.at(static_cast<std::size_t>(t)); }
  /// Value of a variable at step t, empty if undeclared.
  std::string value_at(const std::string& variable, int t) const;
};

/// Replays effect sets step by step from the initial state. Dependencies
/// are not checked; steps flagged in `noop` leave the state unchanged.
/// Throws SchemaError on an ungroundable step.
StateTrace simulate_trace(const WorldState& initial, const Plan& prefix, const Universe& u,
                          const std::vector<bool>& noop = {});

enum class ErrorClass { EnvironmentState, PreconditionPrepOnly, PreconditionDeep };

std::string_view to_string(ErrorClass c);

struct DiagnosisReport {
  ErrorClass error_class = ErrorClass::EnvironmentState;
  MidLevelAction failed;
  /// s_error = v_need; absent for environment-state errors.
  std::optional<GroundedAssignment> violated;
  int t_error = 0;
  int t_source = 0;
  int t_start = 0;
  int t_end = 0;
  std::vector<int> lambda;
  std::set<std::string> error_items;
  /// Preparation step to insert for PreconditionPrepOnly.
  std::optional<MidLevelAction> prep_fix;
};

nlohmann::json report_to_json(const DiagnosisReport& r);
DiagnosisReport report_from_json(const nlohmann::json& doc);

/// Corruption times: t < t_error where the variable held the needed value
/// at t-1 and lost it at t.
std::vector<int> compute_lambda(const StateTrace& trace, const std::string& s_error,
                                const std::string& v_need, int t_error);

/// Latest corruption time, or 1 if the value never held.
int compute_source(const StateTrace& trace, const std::string& s_error, const std::string& v_need,
                   int t_error);

/// Failed object plus the objects named by the violated variable and by its
/// believed value at t_source.
std::set<std::string> error_items(const DiagnosisReport& report, const StateTrace& trace,
                                  const std::set<std::string>& objects);

/// Reconstruction window over the plan timeline (executed steps followed by
/// the pending ones). Extends backwards over preparation actions before
/// t_source and forwards over steps whose objects are error items.
std::pair<int, int> compute_window(const Plan& timeline, int t_source, int t_error,
                                   const StateDependencyGraph& g,
                                   const std::set<std::string>& error_items);

struct ClassifyOptions {
  /// Skip the belief check and treat this assignment as the violated
  /// dependency (used when environment errors repeat).
  std::optional<GroundedAssignment> force_violation;
};

/// Full diagnosis of a failure at err.tick (a 1-based timestep of the
/// timeline). Throws InconsistentTrace if the trace does not reach it.
DiagnosisReport classify_error(const StateTrace& trace, const ExecError& err,
                               const StateDependencyGraph& g, const Universe& u,
                               const Plan& timeline, const ClassifyOptions& options = {});

}  // namespace sda
