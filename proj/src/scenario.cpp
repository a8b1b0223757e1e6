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

#include "sda/scenario.hpp"

#include <fstream>

#include "sda/errors.hpp"
#include "sda/proposer.hpp"

namespace sda {

using nlohmann::json;

namespace {

std::vector<GroundedAssignment> assignments_from(const json& arr, const std::string& where) {
  if (!arr.is_array()) throw ParseError(where + ": expected [[variable, value], ...]");
  std::vector<GroundedAssignment> out;
  for (const auto& p : arr) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_string() || !p[1].is_string())
      throw ParseError(where + ": entries must be [\"variable\", \"value\"]");
    out.push_back({p[0].get<std::string>(), p[1].get<std::string>()});
  }
  return out;
}

json assignments_to(const std::vector<GroundedAssignment>& v) {
  json out = json::array();
  for (const auto& a : v) out.push_back(json::array({a.variable, a.value}));
  return out;
}

}  // namespace

Scenario parse_scenario(const json& doc, const std::filesystem::path& base_dir) {
  static const std::set<std::string> allowed = {"id",         "instruction", "kb",     "context",
                                                "tags",       "agent",       "objects", "fixed_plan",
                                                "goals",      "perturbations", "scripted"};
  if (!doc.is_object()) throw ParseError("scenario: expected an object");
  for (const auto& [key, _] : doc.items())
    if (!allowed.count(key)) throw ParseError("scenario: unknown field '" + key + "'");

  Scenario sc;
  try {
    sc.id = doc.at("id").get<std::string>();
    sc.instruction = doc.at("instruction").get<std::string>();
    if (doc.contains("kb")) sc.kb_path = base_dir / doc["kb"].get<std::string>();
    if (doc.contains("context")) sc.context = doc["context"];
    if (!sc.context.is_object()) throw ParseError("scenario " + sc.id + ": context must be an object");
    sc.tags = doc.value("tags", std::vector<std::string>{});

    for (const auto& [name, value] : doc.at("agent").items())
      sc.initial.assignments["agent." + name] = value.get<std::string>();
    for (const auto& [object, vars] : doc.at("objects").items()) {
      sc.objects.insert(object);
      for (const auto& [name, value] : vars.items())
        sc.initial.assignments[name + "(" + object + ")"] = value.get<std::string>();
    }
    if (doc.contains("fixed_plan") && !doc["fixed_plan"].is_null())
      sc.fixed_plan = plan_from_json(doc["fixed_plan"]);
    sc.goals = assignments_from(doc.at("goals"), "scenario " + sc.id + " goals");
    if (doc.contains("perturbations")) {
      for (const auto& p : doc["perturbations"]) {
        Perturbation pert;
        pert.at_tick = p.at("at_tick").get<int>();
        pert.set = assignments_from(p.at("set"), "scenario " + sc.id + " perturbation");
        sc.perturbations.push_back(std::move(pert));
      }
    }
    sc.scripted = doc.value("scripted", json());
  } catch (const json::exception& e) {
    throw ParseError("scenario " + sc.id + ": " + e.what());
  }
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  Scenario sc = parse_scenario(doc, path.parent_path());
  sc.source = path;
  return sc;
}

json scenario_to_json(const Scenario& sc) {
  json agent = json::object();
  json objects = json::object();
  for (const auto& o : sc.objects) objects[o] = json::object();
  for (const auto& [var, value] : sc.initial.assignments) {
    if (var.rfind("agent.", 0) == 0) {
      agent[var.substr(6)] = value;
    } else {
      objects[object_of_variable(var)][template_ref_of(var)] = value;
    }
  }
  json doc = {{"id", sc.id},       {"instruction", sc.instruction}, {"agent", agent},
              {"objects", objects}, {"goals", assignments_to(sc.goals)}};
  if (!sc.context.empty()) doc["context"] = sc.context;
  if (!sc.tags.empty()) doc["tags"] = sc.tags;
  if (sc.fixed_plan) doc["fixed_plan"] = plan_to_json(*sc.fixed_plan);
  if (!sc.perturbations.empty()) {
    json ps = json::array();
    for (const auto& p : sc.perturbations) ps.push_back({{"at_tick", p.at_tick}, {"set", assignments_to(p.set)}});
    doc["perturbations"] = ps;
  }
  if (!sc.scripted.is_null()) doc["scripted"] = sc.scripted;
  return doc;
}

void validate_scenario(const Scenario& sc, const ActionKB& kb) {
  const std::string where = "scenario " + sc.id + ": ";
  if (sc.goals.empty()) throw SchemaError(where + "goals must be non-empty");
  if (sc.instruction.empty()) throw SchemaError(where + "instruction is empty");
  Universe u{&kb, sc.objects};
  for (const auto& [var, value] : sc.initial.assignments) {
    try {
      u.check_assignment({var, value});
    } catch (const Error& e) {
      throw SchemaError(where + "initial state: " + e.what());
    }
  }
  for (const auto& [ref, tmpl] : kb.base_states())
    if (tmpl.scope == Scope::Agent && !sc.initial.get(ref))
      throw SchemaError(where + "agent variable '" + ref + "' has no initial value");
  auto declared = [&](const GroundedAssignment& a, const char* what) {
    if (!sc.initial.get(a.variable))
      throw SchemaError(where + what + " references undeclared variable '" + a.variable + "'");
    try {
      u.check_assignment(a);
    } catch (const Error& e) {
      throw SchemaError(where + what + ": " + e.what());
    }
  };
  for (const auto& g : sc.goals) declared(g, "goal");
  for (const auto& p : sc.perturbations) {
    if (p.at_tick < 0) throw SchemaError(where + "perturbation tick must be >= 0");
    for (const auto& a : p.set) declared(a, "perturbation");
  }
  if (sc.fixed_plan) {
    if (sc.fixed_plan->empty()) throw SchemaError(where + "fixed_plan is empty");
    for (const auto& step : *sc.fixed_plan) {
      if (!kb.has_action(step.action)) throw SchemaError(where + "unknown action in plan " + step.str());
      if (!sc.objects.count(step.object)) throw SchemaError(where + "unknown object in plan " + step.str());
    }
  }
}

json proposer_context(const Scenario& sc) {
  json ctx = sc.context;
  ctx["objects"] = sc.objects;
  return ctx;
}

}  // namespace sda
