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
#include <set>
#include <string>
#include <vector>

#include "sda/kb.hpp"

namespace sda {

/// A concrete variable/value pair, e.g. agent.holding=tomato or
/// opened(fridge)=true.
struct GroundedAssignment {
  std::string variable;
  std::string value;

  auto operator<=>(const GroundedAssignment&) const = default;
  std::string str() const { return variable + "=" + value; }
};

struct GroundedSets {
  std::vector<GroundedAssignment> eff;
  std::vector<GroundedAssignment> dep;
};

/// agent.<name> stays as is; an item template becomes <name>(<object>).
std::string ground_variable(const std::string& ref, const std::string& object);
/// SUBJECT becomes the object; everything else is kept verbatim.
std::string ground_value(const std::string& value, const std::string& object);
/// Inverse of ground_variable on the name part: "opened(fridge)" -> "opened".
std::string template_ref_of(const std::string& grounded_variable);
/// Object embedded in an item variable name, empty for agent variables.
std::string object_of_variable(const std::string& grounded_variable);

/// Instantiates a schema for one object. Pure; no universe check.
GroundedSets ground(const ActionSchema& schema, const std::string& object);
/// Same, but throws UnknownObject when the object is not in the universe.
GroundedSets ground(const ActionSchema& schema, const std::string& object,
                    const std::set<std::string>& objects);

struct EffectEdge {
  std::string action;
  std::string variable;
  std::string value;
  auto operator<=>(const EffectEdge&) const = default;
};

struct DepEdge {
  std::string variable;
  std::string value;
  std::string action;
  auto operator<=>(const DepEdge&) const = default;
};

/// Directed bipartite graph between action nodes and state nodes. Effect
/// edges point action -> state, dependency edges state -> action. All
/// containers are ordered lexicographically.
class StateDependencyGraph {
 public:
  explicit StateDependencyGraph(const ActionKB& kb);

  const std::set<std::string>& action_nodes() const { return actions_; }
  /// Variable reference -> scope.
  const std::map<std::string, Scope>& state_nodes() const { return states_; }
  const std::vector<EffectEdge>& effect_edges() const { return effect_edges_; }
  const std::vector<DepEdge>& dep_edges() const { return dep_edges_; }
  std::size_t edge_count() const { return effect_edges_.size() + dep_edges_.size(); }

  std::vector<EffectEdge> effects_of(const std::string& action) const;
  std::vector<DepEdge> deps_of(const std::string& action) const;
  /// Effect edges ending at the given state node.
  std::vector<EffectEdge> producers_of(const std::string& variable_ref) const;

  /// Exactly one effect edge, into an agent-scoped state, and no dependency
  /// edges. Throws UnknownAction.
  bool is_state_preparation(const std::string& action) const;
  const std::set<std::string>& prep_actions() const { return prep_; }

  /// Grounded variables written by (action, object).
  std::set<std::string> grounded_effect_variables(const std::string& action,
                                                  const std::string& object) const;

  std::string to_dot() const;

 private:
  std::set<std::string> actions_;
  std::map<std::string, Scope> states_;
  std::vector<EffectEdge> effect_edges_;
  std::vector<DepEdge> dep_edges_;
  std::set<std::string> prep_;
};

inline StateDependencyGraph build_graph(const ActionKB& kb) { return StateDependencyGraph(kb); }

}  // namespace sda
