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

#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "sda/kb.hpp"
#include "sda/rational.hpp"
#include "sda/sdg.hpp"

namespace sda {

/// One plan step: (action type, target object).
struct MidLevelAction {
  std::string action;
  std::string object;

  auto operator<=>(const MidLevelAction&) const = default;
  /// "(pick up, tomato)"
  std::string str() const { return "(" + action + ", " + object + ")"; }
};

using Plan = std::vector<MidLevelAction>;

std::string render_plan(const Plan& plan);

struct WorldState {
  std::map<std::string, std::string> assignments;
  int tick = 0;

  bool operator==(const WorldState&) const = default;
  const std::string* get(const std::string& variable) const;
  bool holds(const GroundedAssignment& a) const;
};

struct Perturbation {
  int at_tick = 0;
  std::vector<GroundedAssignment> set;
};

struct ExecError {
  MidLevelAction failed;
  /// Unmet grounded dependencies, sorted.
  std::vector<GroundedAssignment> violated;
  int tick = 0;
};

using StepOutcome = std::variant<WorldState, ExecError>;

/// Objects of a scenario plus the KB used to check value domains.
struct Universe {
  const ActionKB* kb = nullptr;
  std::set<std::string> objects;

  /// Throws SchemaError if the variable is not known to the KB or the value
  /// lies outside its domain.
  void check_assignment(const GroundedAssignment& a) const;
};

/// Grounds (action, object) against the universe. Throws UnknownAction or
/// UnknownObject.
GroundedSets ground_step(const MidLevelAction& m, const Universe& u);

/// Executes one step. The input is never modified. On success every
/// grounded effect is written and the tick advances; otherwise an ExecError
/// lists every unmet dependency.
StepOutcome apply_action(const WorldState& w, const MidLevelAction& m, const Universe& u);

std::optional<MidLevelAction> reverse_action(const MidLevelAction& m, const ActionKB& kb);

WorldState inject(const WorldState& w, const Perturbation& p, const Universe& u);

/// Fraction of goal assignments that hold. Throws EmptyGoal or SchemaError.
Rational goal_fraction(const WorldState& w, const std::vector<GroundedAssignment>& goals);

struct VariableChange {
  std::string variable;
  std::string before;
  std::string after;
};
std::vector<VariableChange> diff(const WorldState& before, const WorldState& after);

nlohmann::json world_to_json(const WorldState& w);
WorldState world_from_json(const nlohmann::json& doc);

/// Stateful environment used by the executor. Owns the live world, applies
/// scheduled perturbations after the step whose attempt count matches
/// their tick, and advances the tick on failed steps too.
class Environment {
 public:
  Environment(Universe universe, WorldState initial, std::vector<Perturbation> schedule);

  StepOutcome step(const MidLevelAction& m);
  const WorldState& world() const { return world_; }
  const Universe& universe() const { return universe_; }
  int attempts() const { return attempts_; }
  /// Restores the initial world. Perturbations already fired stay consumed.
  void reset();
  /// Perturbations fired by the most recent step.
  const std::vector<Perturbation>& last_fired() const { return fired_; }

 private:
  void fire_due();

  Universe universe_;
  WorldState initial_;
  WorldState world_;
  std::vector<Perturbation> schedule_;
  std::vector<bool> consumed_;
  std::vector<Perturbation> fired_;
  int attempts_ = 0;
};

}  // namespace sda
