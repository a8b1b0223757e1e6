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

#include "sda/kb.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "sda/errors.hpp"
#include "sda/proposer.hpp"

namespace sda {

namespace {

using nlohmann::json;

constexpr std::string_view kAgentPrefix = "agent.";

void require_fields(const json& obj, std::initializer_list<std::string_view> allowed,
                    const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ParseError(where + ": unknown field '" + key + "'");
  }
}

const json& field(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + ": missing field '" + key + "'");
  return *it;
}

std::string string_field(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_string()) throw ParseError(where + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

std::vector<TemplateAssignment> parse_pairs(const json& arr, const std::string& where) {
  if (!arr.is_array()) throw ParseError(where + ": expected an array of [variable, value] pairs");
  std::vector<TemplateAssignment> out;
  for (const auto& item : arr) {
    if (!item.is_array() || item.size() != 2 || !item[0].is_string() || !item[1].is_string())
      throw ParseError(where + ": entries must be [\"variable\", \"value\"]");
    out.push_back({item[0].get<std::string>(), item[1].get<std::string>()});
  }
  return out;
}

json pairs_to_json(const std::vector<TemplateAssignment>& pairs) {
  json arr = json::array();
  for (const auto& p : pairs) arr.push_back(json::array({p.variable, p.value}));
  return arr;
}

bool value_in_domain(const StateVariableTemplate& tmpl, const std::string& value) {
  if (tmpl.object_valued()) return true;
  return std::find(tmpl.values.begin(), tmpl.values.end(), value) != tmpl.values.end();
}

void validate_assignments(const std::string& action, const char* set_name,
                          const std::vector<TemplateAssignment>& pairs,
                          const std::map<std::string, StateVariableTemplate>& states,
                          bool allow_copy) {
  std::set<std::string> seen;
  for (const auto& p : pairs) {
    const std::string where = "action '" + action + "': " + set_name;
    if (!seen.insert(p.variable).second)
      throw SchemaError(where + ": duplicate variable '" + p.variable + "'");
    auto it = states.find(p.variable);
    if (it == states.end())
      throw SchemaError(where + ": variable '" + p.variable + "' is not a declared state");
    if (!p.value.empty() && p.value.front() == kCopyPrefix) {
      if (!allow_copy)
        throw SchemaError(where + ": copy value '" + p.value + "' only allowed in eff");
      auto src = states.find(p.value.substr(1));
      if (src == states.end() || src->second.scope != Scope::Agent)
        throw SchemaError(where + ": copy value '" + p.value +
                          "' must name a declared agent variable");
      continue;
    }
    if (p.value == kSubject && !it->second.object_valued())
      throw SchemaError(where + ": SUBJECT not in the domain of '" + p.variable + "'");
    if (!value_in_domain(it->second, p.value))
      throw SchemaError(where + ": value '" + p.value + "' not in the domain of '" +
                        p.variable + "'");
  }
}

}  // namespace

std::string_view to_string(Scope scope) { return scope == Scope::Agent ? "agent" : "item"; }

Scope scope_from_string(std::string_view text) {
  if (text == "agent") return Scope::Agent;
  if (text == "item") return Scope::Item;
  throw ParseError("scope must be 'agent' or 'item', got '" + std::string(text) + "'");
}

std::string StateVariableTemplate::ref() const {
  return scope == Scope::Agent ? std::string(kAgentPrefix) + name : name;
}

bool StateVariableTemplate::object_valued() const {
  return std::find(values.begin(), values.end(), kSubject) != values.end();
}

std::pair<Scope, std::string> parse_ref(std::string_view ref) {
  if (ref.substr(0, kAgentPrefix.size()) == kAgentPrefix)
    return {Scope::Agent, std::string(ref.substr(kAgentPrefix.size()))};
  return {Scope::Item, std::string(ref)};
}

ActionKB::ActionKB(std::vector<StateVariableTemplate> base_states,
                   std::vector<ActionSchema> actions) {
  for (auto& s : base_states) {
    if (s.name.empty()) throw SchemaError("state variable with empty name");
    if (s.values.empty())
      throw SchemaError("state variable '" + s.ref() + "': value domain is empty");
    std::set<std::string> uniq(s.values.begin(), s.values.end());
    if (uniq.size() != s.values.size())
      throw SchemaError("state variable '" + s.ref() + "': duplicate value in domain");
    s.values.assign(uniq.begin(), uniq.end());
    std::string key = s.ref();
    if (!states_.emplace(key, std::move(s)).second)
      throw SchemaError("state variable '" + key + "' declared twice");
  }
  for (auto& a : actions) {
    if (a.action.empty()) throw SchemaError("action with empty name");
    if (a.eff.empty()) throw SchemaError("action '" + a.action + "': eff must be non-empty");
    validate_assignments(a.action, "eff", a.eff, states_, true);
    validate_assignments(a.action, "dep", a.dep, states_, false);
    if (a.reversible_by && a.irreversible)
      throw SchemaError("action '" + a.action +
                        "': reversible_by and irreversible are mutually exclusive");
    std::sort(a.eff.begin(), a.eff.end());
    std::sort(a.dep.begin(), a.dep.end());
    std::string key = a.action;
    if (!actions_.emplace(key, std::move(a)).second)
      throw SchemaError("action '" + key + "' declared twice");
  }
  for (const auto& [name, a] : actions_) {
    if (a.reversible_by && !actions_.count(*a.reversible_by))
      throw SchemaError("action '" + name + "': reversible_by names unknown action '" +
                        *a.reversible_by + "'");
  }

  std::set<std::string> produced;
  for (const auto& [_, a] : actions_)
    for (const auto& e : a.eff) produced.insert(e.variable);
  for (const auto& [name, a] : actions_)
    for (const auto& d : a.dep)
      if (!produced.count(d.variable))
        warnings_.push_back("action '" + name + "': dependency on '" + d.variable +
                            "' is not produced by any action");
}

bool ActionKB::has_action(std::string_view action) const {
  return actions_.find(std::string(action)) != actions_.end();
}

const ActionSchema& ActionKB::schema(std::string_view action) const {
  auto it = actions_.find(std::string(action));
  if (it == actions_.end()) throw UnknownAction(std::string(action));
  return it->second;
}

const StateVariableTemplate* ActionKB::find_state(std::string_view ref) const {
  auto it = states_.find(std::string(ref));
  return it == states_.end() ? nullptr : &it->second;
}

std::set<std::string> ActionKB::skills() const {
  std::set<std::string> out;
  for (const auto& [name, _] : actions_) out.insert(name);
  return out;
}

ActionKB parse_kb(const json& doc) {
  require_fields(doc, {"base_states", "actions"}, "kb");
  std::vector<StateVariableTemplate> states;
  const json& bs = field(doc, "base_states", "kb");
  if (!bs.is_array()) throw ParseError("kb: base_states must be an array");
  for (const auto& s : bs) {
    require_fields(s, {"name", "scope", "values"}, "kb.base_states");
    StateVariableTemplate t;
    t.name = string_field(s, "name", "kb.base_states");
    t.scope = scope_from_string(string_field(s, "scope", "kb.base_states"));
    const json& vals = field(s, "values", "kb.base_states[" + t.name + "]");
    if (!vals.is_array()) throw ParseError("kb.base_states[" + t.name + "]: values must be an array");
    for (const auto& v : vals) {
      if (!v.is_string()) throw ParseError("kb.base_states[" + t.name + "]: values must be strings");
      t.values.push_back(v.get<std::string>());
    }
    states.push_back(std::move(t));
  }
  std::vector<ActionSchema> actions;
  const json& as = field(doc, "actions", "kb");
  if (!as.is_array()) throw ParseError("kb: actions must be an array");
  for (const auto& a : as) {
    require_fields(a, {"name", "eff", "dep", "reversible_by", "irreversible"}, "kb.actions");
    ActionSchema schema;
    schema.action = string_field(a, "name", "kb.actions");
    const std::string where = "kb.actions[" + schema.action + "]";
    schema.eff = parse_pairs(field(a, "eff", where), where + ".eff");
    schema.dep = parse_pairs(field(a, "dep", where), where + ".dep");
    if (auto it = a.find("reversible_by"); it != a.end() && !it->is_null()) {
      if (!it->is_string()) throw ParseError(where + ": reversible_by must be a string or null");
      schema.reversible_by = it->get<std::string>();
    }
    if (auto it = a.find("irreversible"); it != a.end()) {
      if (!it->is_boolean()) throw ParseError(where + ": irreversible must be a boolean");
      schema.irreversible = it->get<bool>();
    }
    actions.push_back(std::move(schema));
  }
  return ActionKB(std::move(states), std::move(actions));
}

ActionKB load_kb(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open KB file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return parse_kb(doc);
}

json kb_to_json(const ActionKB& kb) {
  json states = json::array();
  for (const auto& [_, s] : kb.base_states())
    states.push_back({{"name", s.name}, {"scope", to_string(s.scope)}, {"values", s.values}});
  json actions = json::array();
  for (const auto& [name, a] : kb.actions()) {
    actions.push_back({{"name", name},
                       {"eff", pairs_to_json(a.eff)},
                       {"dep", pairs_to_json(a.dep)},
                       {"reversible_by", a.reversible_by ? json(*a.reversible_by) : json(nullptr)},
                       {"irreversible", a.irreversible}});
  }
  return {{"base_states", states}, {"actions", actions}};
}

std::string dump_kb(const ActionKB& kb) { return kb_to_json(kb).dump(2) + "\n"; }

void save_kb(const ActionKB& kb, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write KB file " + path.string());
  out << dump_kb(kb);
}

ActionKB restrict_kb(const ActionKB& kb, const std::set<std::string>& skills) {
  std::vector<ActionSchema> actions;
  std::set<std::string> used;
  for (const auto& skill : skills) {
    ActionSchema a = kb.schema(skill);
    if (a.reversible_by && !skills.count(*a.reversible_by)) a.reversible_by.reset();
    for (const auto& p : a.eff) {
      used.insert(p.variable);
      if (!p.value.empty() && p.value.front() == kCopyPrefix) used.insert(p.value.substr(1));
    }
    for (const auto& p : a.dep) used.insert(p.variable);
    actions.push_back(std::move(a));
  }
  std::vector<StateVariableTemplate> states;
  for (const auto& [ref, s] : kb.base_states())
    if (used.count(ref)) states.push_back(s);
  return ActionKB(std::move(states), std::move(actions));
}

std::vector<TemplateAssignment> parse_assignment_list(const std::string& raw) {
  json doc;
  try {
    doc = json::parse(raw);
  } catch (const json::parse_error&) {
    throw InvalidResponse("expected a JSON list of [variable, value] pairs", raw);
  }
  try {
    return parse_pairs(doc, "response");
  } catch (const ParseError& e) {
    throw InvalidResponse(e.what(), raw);
  }
}

namespace {

std::vector<TemplateAssignment> query_pairs(Proposer& proposer, const ProposerRequest& request,
                                            int retries) {
  for (int attempt = 0;; ++attempt) {
    try {
      return parse_assignment_list(proposer.complete(request));
    } catch (const ProposerError&) {
      if (attempt >= retries) throw;
    } catch (const InvalidResponse&) {
      if (attempt >= retries) throw;
    }
  }
}

void absorb(std::map<std::string, StateVariableTemplate>& states,
            const std::vector<TemplateAssignment>& pairs) {
  for (const auto& p : pairs) {
    auto it = states.find(p.variable);
    if (it == states.end()) {
      auto [scope, name] = parse_ref(p.variable);
      it = states.emplace(p.variable, StateVariableTemplate{name, scope, {}}).first;
    }
    if (!p.value.empty() && p.value.front() == kCopyPrefix) continue;
    auto& vals = it->second.values;
    if (std::find(vals.begin(), vals.end(), p.value) == vals.end()) vals.push_back(p.value);
  }
}

json state_listing(const std::map<std::string, StateVariableTemplate>& states) {
  json out = json::array();
  for (const auto& [ref, s] : states)
    out.push_back({{"variable", ref}, {"scope", to_string(s.scope)}, {"values", s.values}});
  return out;
}

}  // namespace

ActionKB bootstrap_kb(const std::set<std::string>& skills, Proposer& proposer,
                      const std::vector<StateVariableTemplate>& base_states,
                      const BootstrapOptions& options) {
  if (skills.empty()) throw SchemaError("bootstrap requires a non-empty skill set");

  std::map<std::string, StateVariableTemplate> states;
  for (const auto& s : base_states) states.emplace(s.ref(), s);

  std::map<std::string, std::vector<TemplateAssignment>> eff;
  for (const auto& skill : skills) {
    ProposerRequest req{RequestKind::KbEff, "", {{"action", skill}, {"states", state_listing(states)}}};
    eff[skill] = query_pairs(proposer, req, options.retries);
    absorb(states, eff[skill]);
  }

  std::map<std::string, std::vector<TemplateAssignment>> dep;
  for (const auto& skill : skills) {
    ProposerRequest req{RequestKind::KbDep, "", {{"action", skill}, {"states", state_listing(states)}}};
    dep[skill] = query_pairs(proposer, req, options.retries);
    absorb(states, dep[skill]);
  }

  std::vector<StateVariableTemplate> all_states;
  for (auto& [_, s] : states) all_states.push_back(s);
  std::vector<ActionSchema> actions;
  for (const auto& skill : skills) {
    ActionSchema a{skill, eff[skill], dep[skill], std::nullopt, false};
    if (auto it = options.reversibility.find(skill); it != options.reversibility.end()) {
      a.irreversible = it->second.irreversible;
      if (it->second.reversible_by && skills.count(*it->second.reversible_by))
        a.reversible_by = it->second.reversible_by;
    }
    actions.push_back(std::move(a));
  }
  return ActionKB(std::move(all_states), std::move(actions));
}

}  // namespace sda
