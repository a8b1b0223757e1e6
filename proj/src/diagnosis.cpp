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

#include "sda/diagnosis.hpp"

#include <algorithm>

#include "sda/errors.hpp"

namespace sda {

std::string StateTrace::value_at(const std::string& variable, int t) const {
  const std::string* v = snapshot(t).get(variable);
  return v ? *v : std::string();
}

StateTrace simulate_trace(const WorldState& initial, const Plan& prefix, const Universe& u,
                          const std::vector<bool>& noop) {
  StateTrace trace;
  trace.snapshots.push_back(initial);
  trace.executed = prefix;
  trace.noop.assign(prefix.size(), false);
  for (std::size_t i = 0; i < noop.size() && i < prefix.size(); ++i) trace.noop[i] = noop[i];

  for (std::size_t i = 0; i < prefix.size(); ++i) {
    WorldState next = trace.snapshots.back();
    next.tick += 1;
    if (!trace.noop[i]) {
      GroundedSets g;
      try {
        g = ground_step(prefix[i], u);
      } catch (const Error& e) {
        throw SchemaError("step " + std::to_string(i + 1) + " " + prefix[i].str() +
                          " cannot be grounded: " + e.what());
      }
      const WorldState& prev = trace.snapshots.back();
      for (const auto& e : g.eff) {
        if (!e.value.empty() && e.value.front() == kCopyPrefix) {
          const std::string* src = prev.get(e.value.substr(1));
          next.assignments[e.variable] = src ? *src : std::string();
        } else {
          next.assignments[e.variable] = e.value;
        }
      }
    }
    trace.snapshots.push_back(std::move(next));
  }
  return trace;
}

std::string_view to_string(ErrorClass c) {
  switch (c) {
    case ErrorClass::EnvironmentState: return "EnvironmentState";
    case ErrorClass::PreconditionPrepOnly: return "PreconditionPrepOnly";
    case ErrorClass::PreconditionDeep: return "PreconditionDeep";
  }
  return "?";
}

namespace {

ErrorClass error_class_from_string(const std::string& s) {
  if (s == "EnvironmentState") return ErrorClass::EnvironmentState;
  if (s == "PreconditionPrepOnly") return ErrorClass::PreconditionPrepOnly;
  if (s == "PreconditionDeep") return ErrorClass::PreconditionDeep;
  throw ParseError("unknown error class '" + s + "'");
}

nlohmann::json action_json(const MidLevelAction& m) { return nlohmann::json::array({m.action, m.object}); }

MidLevelAction action_from(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) throw ParseError("expected [action, object]");
  return {j[0].get<std::string>(), j[1].get<std::string>()};
}

}  // namespace

nlohmann::json report_to_json(const DiagnosisReport& r) {
  nlohmann::json j = {{"class", to_string(r.error_class)},
                      {"failed", action_json(r.failed)},
                      {"t_error", r.t_error},
                      {"t_source", r.t_source},
                      {"t_start", r.t_start},
                      {"t_end", r.t_end},
                      {"lambda", r.lambda},
                      {"error_items", r.error_items}};
  if (r.violated) {
    j["s_error"] = r.violated->variable;
    j["v_need"] = r.violated->value;
  }
  if (r.prep_fix) j["prep_fix"] = action_json(*r.prep_fix);
  return j;
}

DiagnosisReport report_from_json(const nlohmann::json& j) {
  try {
    DiagnosisReport r;
    r.error_class = error_class_from_string(j.at("class").get<std::string>());
    r.failed = action_from(j.at("failed"));
    r.t_error = j.at("t_error").get<int>();
    r.t_source = j.at("t_source").get<int>();
    r.t_start = j.at("t_start").get<int>();
    r.t_end = j.at("t_end").get<int>();
    r.lambda = j.value("lambda", std::vector<int>{});
    r.error_items = j.value("error_items", std::set<std::string>{});
    if (j.contains("s_error"))
      r.violated = GroundedAssignment{j.at("s_error").get<std::string>(), j.at("v_need").get<std::string>()};
    if (j.contains("prep_fix")) r.prep_fix = action_from(j.at("prep_fix"));
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("diagnosis report: ") + e.what());
  }
}

std::vector<int> compute_lambda(const StateTrace& trace, const std::string& s_error,
                                const std::string& v_need, int t_error) {
  std::vector<int> out;
  int last = std::min(t_error - 1, trace.length());
  for (int t = 1; t <= last; ++t) {
    if (trace.value_at(s_error, t - 1) == v_need && trace.value_at(s_error, t) != v_need)
      out.push_back(t);
  }
  return out;
}

int compute_source(const StateTrace& trace, const std::string& s_error, const std::string& v_need,
                   int t_error) {
  auto lambda = compute_lambda(trace, s_error, v_need, t_error);
  return lambda.empty() ? 1 : lambda.back();
}

std::set<std::string> error_items(const DiagnosisReport& report, const StateTrace& trace,
                                  const std::set<std::string>& objects) {
  std::set<std::string> items{report.failed.object};
  if (!report.violated) return items;
  const std::string& var = report.violated->variable;
  if (auto obj = object_of_variable(var); !obj.empty() && objects.count(obj)) items.insert(obj);
  int t = std::clamp(report.t_source, 0, trace.length());
  if (auto value = trace.value_at(var, t); objects.count(value)) items.insert(value);
  return items;
}

std::pair<int, int> compute_window(const Plan& timeline, int t_source, int t_error,
                                   const StateDependencyGraph& g,
                                   const std::set<std::string>& items) {
  const int n = static_cast<int>(timeline.size());
  int t_start = t_source;
  while (t_start > 1 && g.prep_actions().count(timeline[t_start - 2].action)) --t_start;
  int t_end = t_error;
  while (t_end < n && items.count(timeline[t_end].object)) ++t_end;
  return {t_start, t_end};
}

DiagnosisReport classify_error(const StateTrace& trace, const ExecError& err,
                               const StateDependencyGraph& g, const Universe& u,
                               const Plan& timeline, const ClassifyOptions& options) {
  const int t_error = err.tick;
  if (t_error < 1 || t_error - 1 > trace.length())
    throw InconsistentTrace("failure at t=" + std::to_string(t_error) + " outside a trace of " +
                            std::to_string(trace.length()) + " steps");

  DiagnosisReport r;
  r.failed = err.failed;
  r.t_error = r.t_source = r.t_start = r.t_end = t_error;

  if (options.force_violation) {
    r.violated = options.force_violation;
  } else {
    const WorldState& before = trace.snapshot(t_error - 1);
    GroundedSets gs = ground_step(err.failed, u);
    for (const auto& d : gs.dep) {  // sorted, so the first miss is lexicographically first
      if (!before.holds(d)) {
        r.violated = d;
        break;
      }
    }
    if (!r.violated) {
      r.error_class = ErrorClass::EnvironmentState;
      return r;
    }

    auto producers = g.producers_of(template_ref_of(r.violated->variable));
    if (producers.size() == 1 && g.prep_actions().count(producers.front().action)) {
      r.error_class = ErrorClass::PreconditionPrepOnly;
      const auto& edge = producers.front();
      std::string object = edge.value == kSubject ? r.violated->value : err.failed.object;
      r.prep_fix = MidLevelAction{edge.action, object};
      return r;
    }
  }

  r.error_class = ErrorClass::PreconditionDeep;
  r.lambda = compute_lambda(trace, r.violated->variable, r.violated->value, t_error);
  r.t_source = r.lambda.empty() ? 1 : r.lambda.back();
  r.error_items = error_items(r, trace, u.objects);
  const Plan& plan = timeline.empty() ? trace.executed : timeline;
  std::tie(r.t_start, r.t_end) = compute_window(plan, r.t_source, t_error, g, r.error_items);
  return r;
}

}  // namespace sda
