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

#include "sda/sim.hpp"

#include <algorithm>
#include <sstream>

#include "sda/errors.hpp"

namespace sda {

std::string render_plan(const Plan& plan) {
  std::ostringstream os;
  for (std::size_t i = 0; i < plan.size(); ++i)
    os << (i + 1) << ". " << plan[i].str() << "\n";
  return os.str();
}

const std::string* WorldState::get(const std::string& variable) const {
  auto it = assignments.find(variable);
  return it == assignments.end() ? nullptr : &it->second;
}

bool WorldState::holds(const GroundedAssignment& a) const {
  const std::string* v = get(a.variable);
  return v && *v == a.value;
}

void Universe::check_assignment(const GroundedAssignment& a) const {
  const std::string ref = template_ref_of(a.variable);
  const StateVariableTemplate* tmpl = kb->find_state(ref);
  if (!tmpl) throw SchemaError("unknown state variable '" + a.variable + "'");
  if (tmpl->scope == Scope::Item) {
    const std::string obj = object_of_variable(a.variable);
    if (obj.empty()) throw SchemaError("item variable '" + a.variable + "' lacks an object");
    if (!objects.count(obj)) throw UnknownObject(obj);
  }
  bool listed = std::find(tmpl->values.begin(), tmpl->values.end(), a.value) != tmpl->values.end();
  bool object_ok = tmpl->object_valued() && objects.count(a.value);
  if ((!listed || a.value == kSubject) && !object_ok)
    throw SchemaError("value '" + a.value + "' outside the domain of '" + a.variable + "'");
}

GroundedSets ground_step(const MidLevelAction& m, const Universe& u) {
  return ground(u.kb->schema(m.action), m.object, u.objects);
}

StepOutcome apply_action(const WorldState& w, const MidLevelAction& m, const Universe& u) {
  GroundedSets g = ground_step(m, u);
  ExecError err{m, {}, w.tick + 1};
  for (const auto& d : g.dep)
    if (!w.holds(d)) err.violated.push_back(d);
  if (!err.violated.empty()) return err;

  WorldState next = w;
  for (const auto& e : g.eff) {
    auto it = next.assignments.find(e.variable);
    if (it == next.assignments.end())
      throw SchemaError(m.str() + " writes undeclared variable '" + e.variable + "'");
    if (!e.value.empty() && e.value.front() == kCopyPrefix) {
      const std::string* src = w.get(e.value.substr(1));
      if (!src) throw SchemaError(m.str() + " copies undeclared variable '" + e.value.substr(1) + "'");
      it->second = *src;
    } else {
      it->second = e.value;
    }
  }
  next.tick = w.tick + 1;
  return next;
}

std::optional<MidLevelAction> reverse_action(const MidLevelAction& m, const ActionKB& kb) {
  const ActionSchema& s = kb.schema(m.action);
  if (s.irreversible || !s.reversible_by) return std::nullopt;
  return MidLevelAction{*s.reversible_by, m.object};
}

WorldState inject(const WorldState& w, const Perturbation& p, const Universe& u) {
  WorldState next = w;
  for (const auto& a : p.set) {
    u.check_assignment(a);
    if (!next.assignments.count(a.variable))
      throw SchemaError("perturbation targets undeclared variable '" + a.variable + "'");
    next.assignments[a.variable] = a.value;
  }
  return next;
}

Rational goal_fraction(const WorldState& w, const std::vector<GroundedAssignment>& goals) {
  if (goals.empty()) throw EmptyGoal();
  std::int64_t met = 0;
  for (const auto& g : goals) {
    if (!w.get(g.variable)) throw SchemaError("goal references unknown variable '" + g.variable + "'");
    if (w.holds(g)) ++met;
  }
  return Rational(met, static_cast<std::int64_t>(goals.size()));
}

std::vector<VariableChange> diff(const WorldState& before, const WorldState& after) {
  std::vector<VariableChange> out;
  for (const auto& [var, val] : after.assignments) {
    const std::string* old = before.get(var);
    if (!old || *old != val) out.push_back({var, old ? *old : "", val});
  }
  return out;
}

nlohmann::json world_to_json(const WorldState& w) {
  return {{"tick", w.tick}, {"assignments", w.assignments}};
}

WorldState world_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("assignments"))
    throw ParseError("world: expected {\"tick\", \"assignments\"}");
  for (const auto& [key, _] : doc.items())
    if (key != "tick" && key != "assignments") throw ParseError("world: unknown field '" + key + "'");
  WorldState w;
  try {
    w.assignments = doc.at("assignments").get<std::map<std::string, std::string>>();
    w.tick = doc.value("tick", 0);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("world: ") + e.what());
  }
  return w;
}

Environment::Environment(Universe universe, WorldState initial, std::vector<Perturbation> schedule)
    : universe_(std::move(universe)),
      world_(std::move(initial)),
      schedule_(std::move(schedule)),
      consumed_(schedule_.size(), false) {
  for (const auto& p : schedule_)
    if (p.at_tick < 0) throw SchemaError("perturbation tick must be >= 0");
  fire_due();
  initial_ = world_;
  fired_.clear();
}

void Environment::fire_due() {
  for (std::size_t i = 0; i < schedule_.size(); ++i) {
    if (consumed_[i] || schedule_[i].at_tick != attempts_) continue;
    int tick = world_.tick;
    world_ = inject(world_, schedule_[i], universe_);
    world_.tick = tick;
    consumed_[i] = true;
    fired_.push_back(schedule_[i]);
  }
}

StepOutcome Environment::step(const MidLevelAction& m) {
  fired_.clear();
  StepOutcome out = apply_action(world_, m, universe_);
  if (auto* next = std::get_if<WorldState>(&out))
    world_ = *next;
  else
    world_.tick += 1;
  ++attempts_;
  fire_due();
  return out;
}

void Environment::reset() {
  world_ = initial_;
  fired_.clear();
}

}  // namespace sda
