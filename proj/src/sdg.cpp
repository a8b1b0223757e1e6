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

#include "sda/sdg.hpp"

#include <algorithm>
#include <sstream>

#include "sda/errors.hpp"

namespace sda {

std::string ground_variable(const std::string& ref, const std::string& object) {
  auto [scope, name] = parse_ref(ref);
  if (scope == Scope::Agent) return ref;
  return name + "(" + object + ")";
}

std::string ground_value(const std::string& value, const std::string& object) {
  return value == kSubject ? object : value;
}

std::string template_ref_of(const std::string& grounded_variable) {
  auto open = grounded_variable.find('(');
  if (open == std::string::npos) return grounded_variable;
  return grounded_variable.substr(0, open);
}

std::string object_of_variable(const std::string& grounded_variable) {
  auto open = grounded_variable.find('(');
  if (open == std::string::npos || grounded_variable.back() != ')') return {};
  return grounded_variable.substr(open + 1, grounded_variable.size() - open - 2);
}

GroundedSets ground(const ActionSchema& schema, const std::string& object) {
  GroundedSets out;
  for (const auto& p : schema.eff)
    out.eff.push_back({ground_variable(p.variable, object), ground_value(p.value, object)});
  for (const auto& p : schema.dep)
    out.dep.push_back({ground_variable(p.variable, object), ground_value(p.value, object)});
  std::sort(out.eff.begin(), out.eff.end());
  std::sort(out.dep.begin(), out.dep.end());
  return out;
}

GroundedSets ground(const ActionSchema& schema, const std::string& object,
                    const std::set<std::string>& objects) {
  if (!objects.count(object)) throw UnknownObject(object);
  return ground(schema, object);
}

StateDependencyGraph::StateDependencyGraph(const ActionKB& kb) {
  for (const auto& [name, schema] : kb.actions()) {
    actions_.insert(name);
    for (const auto& e : schema.eff) {
      states_[e.variable] = kb.find_state(e.variable)->scope;
      effect_edges_.push_back({name, e.variable, e.value});
    }
    for (const auto& d : schema.dep) {
      states_[d.variable] = kb.find_state(d.variable)->scope;
      dep_edges_.push_back({d.variable, d.value, name});
    }
  }
  std::sort(effect_edges_.begin(), effect_edges_.end());
  std::sort(dep_edges_.begin(), dep_edges_.end());
  for (const auto& a : actions_) {
    auto effs = effects_of(a);
    if (effs.size() == 1 && states_.at(effs.front().variable) == Scope::Agent &&
        deps_of(a).empty())
      prep_.insert(a);
  }
}

std::vector<EffectEdge> StateDependencyGraph::effects_of(const std::string& action) const {
  std::vector<EffectEdge> out;
  for (const auto& e : effect_edges_)
    if (e.action == action) out.push_back(e);
  return out;
}

std::vector<DepEdge> StateDependencyGraph::deps_of(const std::string& action) const {
  std::vector<DepEdge> out;
  for (const auto& d : dep_edges_)
    if (d.action == action) out.push_back(d);
  return out;
}

std::vector<EffectEdge> StateDependencyGraph::producers_of(const std::string& variable_ref) const {
  std::vector<EffectEdge> out;
  for (const auto& e : effect_edges_)
    if (e.variable == variable_ref) out.push_back(e);
  return out;
}

bool StateDependencyGraph::is_state_preparation(const std::string& action) const {
  if (!actions_.count(action)) throw UnknownAction(action);
  return prep_.count(action) > 0;
}

std::set<std::string> StateDependencyGraph::grounded_effect_variables(
    const std::string& action, const std::string& object) const {
  std::set<std::string> out;
  for (const auto& e : effect_edges_)
    if (e.action == action) out.insert(ground_variable(e.variable, object));
  return out;
}

std::string StateDependencyGraph::to_dot() const {
  std::ostringstream os;
  os << "digraph state_dependency {\n  rankdir=LR;\n";
  for (const auto& a : actions_)
    os << "  \"a:" << a << "\" [shape=box, label=\"" << a << "\""
       << (prep_.count(a) ? ", style=dashed" : "") << "];\n";
  for (const auto& [s, scope] : states_)
    os << "  \"s:" << s << "\" [shape=ellipse, label=\"" << s << "\\n(" << to_string(scope)
       << ")\"];\n";
  for (const auto& e : effect_edges_)
    os << "  \"a:" << e.action << "\" -> \"s:" << e.variable << "\" [label=\"" << e.value
       << "\"];\n";
  for (const auto& d : dep_edges_)
    os << "  \"s:" << d.variable << "\" -> \"a:" << d.action << "\" [label=\"" << d.value
       << "\", style=dotted];\n";
  os << "}\n";
  return os.str();
}

}  // namespace sda
