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
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace sda {

class Proposer;

/// Placeholder value resolved to the grounded object of an action.
inline constexpr std::string_view kSubject = "SUBJECT";

/// Effect values starting with this prefix copy the current value of the
/// named agent variable at execution time (e.g. "$agent.position").
inline constexpr char kCopyPrefix = '$';

enum class Scope { Agent, Item };

std::string_view to_string(Scope scope);
Scope scope_from_string(std::string_view text);

/// A state variable before grounding. Agent variables are referenced as
/// "agent.<name>", item variables by their bare name and grounded to
/// "<name>(<object>)".
struct StateVariableTemplate {
  std::string name;
  Scope scope = Scope::Item;
  /// Symbolic atoms. If SUBJECT is present the variable is object-valued and
  /// accepts any object identifier in addition to the listed atoms. Sorted
  /// once held by an ActionKB.
  std::vector<std::string> values;

  std::string ref() const;
  bool object_valued() const;
  bool operator==(const StateVariableTemplate&) const = default;
};

/// Parses a variable reference into (scope, template name).
std::pair<Scope, std::string> parse_ref(std::string_view ref);

/// (variable reference, value) pair inside an effect or dependency set.
struct TemplateAssignment {
  std::string variable;
  std::string value;

  auto operator<=>(const TemplateAssignment&) const = default;
};

struct ActionSchema {
  std::string action;
  std::vector<TemplateAssignment> eff;
  std::vector<TemplateAssignment> dep;
  std::optional<std::string> reversible_by;
  bool irreversible = false;

  bool operator==(const ActionSchema&) const = default;
};

/// Immutable set of action schemas plus the state variables they reference.
/// The constructor validates every invariant and throws SchemaError naming
/// the offending action and field.
class ActionKB {
 public:
  ActionKB(std::vector<StateVariableTemplate> base_states, std::vector<ActionSchema> actions);

  const std::map<std::string, ActionSchema>& actions() const { return actions_; }
  /// Keyed by variable reference.
  const std::map<std::string, StateVariableTemplate>& base_states() const { return states_; }

  bool has_action(std::string_view action) const;
  /// Throws UnknownAction.
  const ActionSchema& schema(std::string_view action) const;
  const StateVariableTemplate* find_state(std::string_view ref) const;

  std::set<std::string> skills() const;

  /// Non-fatal findings, currently dependencies no action can produce.
  const std::vector<std::string>& warnings() const { return warnings_; }

  bool operator==(const ActionKB& other) const {
    return actions_ == other.actions_ && states_ == other.states_;
  }

 private:
  std::map<std::string, ActionSchema> actions_;
  std::map<std::string, StateVariableTemplate> states_;
  std::vector<std::string> warnings_;
};

ActionKB parse_kb(const nlohmann::json& doc);
ActionKB load_kb(const std::filesystem::path& path);
nlohmann::json kb_to_json(const ActionKB& kb);
/// Canonical text form: sorted keys, two-space indent, trailing newline.
std::string dump_kb(const ActionKB& kb);
void save_kb(const ActionKB& kb, const std::filesystem::path& path);

/// Sub-KB over the given skills. Reversal links to dropped actions are
/// cleared and unreferenced state variables removed.
ActionKB restrict_kb(const ActionKB& kb, const std::set<std::string>& skills);

struct Reversibility {
  std::optional<std::string> reversible_by;
  bool irreversible = false;
};

struct BootstrapOptions {
  int retries = 2;
  /// Reversal metadata per action; links to actions outside the skill set
  /// are dropped.
  std::map<std::string, Reversibility> reversibility;
};

/// Builds a KB by querying the proposer: effects for every skill first
/// (growing the state set), then dependencies against the grown set.
ActionKB bootstrap_kb(const std::set<std::string>& skills, Proposer& proposer,
                      const std::vector<StateVariableTemplate>& base_states,
                      const BootstrapOptions& options = {});

/// Parses a proposer answer of the form [["var","value"], ...].
std::vector<TemplateAssignment> parse_assignment_list(const std::string& raw);

}  // namespace sda
