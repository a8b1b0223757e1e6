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

#include "sda/executor.hpp"

#include <algorithm>
#include <deque>
#include <optional>
#include <sstream>

#include "sda/errors.hpp"

namespace sda {

using nlohmann::json;

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::None: return "none";
    case Strategy::Local: return "local";
    case Strategy::Global: return "global";
    case Strategy::Sda: return "sda";
    case Strategy::SdaNoTree: return "sda_no_tree";
  }
  return "?";
}

Strategy strategy_from_string(std::string_view text) {
  for (Strategy s : {Strategy::None, Strategy::Local, Strategy::Global, Strategy::Sda, Strategy::SdaNoTree})
    if (to_string(s) == text) return s;
  throw SchemaError("unknown strategy '" + std::string(text) + "'");
}

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::Initial: return "initial";
    case Provenance::Repaired: return "repaired";
    case Provenance::InsertedPrep: return "inserted-prep";
    case Provenance::Replanned: return "replanned";
    case Provenance::Reverse: return "reverse";
    case Provenance::RollbackPrep: return "rollback-prep";
  }
  return "?";
}

std::string_view to_string(StepStatus s) {
  switch (s) {
    case StepStatus::Ok: return "ok";
    case StepStatus::Failed: return "failed";
    case StepStatus::Fake: return "fake";
  }
  return "?";
}

json event_to_json(const Event& e) { return {{"tick", e.tick}, {"event", e.event}, {"payload", e.payload}}; }

std::string log_to_jsonl(const std::vector<Event>& log) {
  std::string out;
  for (const auto& e : log) out += event_to_json(e).dump() + "\n";
  return out;
}

json result_to_json(const EpisodeResult& r, bool with_log) {
  json executed = json::array();
  for (const auto& s : r.executed)
    executed.push_back({{"action", s.action.action},
                        {"object", s.action.object},
                        {"status", to_string(s.status)},
                        {"provenance", to_string(s.provenance)}});
  json doc = {{"scenario", r.scenario_id},
              {"strategy", to_string(r.strategy)},
              {"success", r.success},
              {"goal_fraction", r.goal_fraction.str()},
              {"corrections", r.corrections},
              {"steps", r.steps},
              {"end_reason", r.end_reason},
              {"executed", executed},
              {"final_world", world_to_json(r.final_world)}};
  if (with_log) {
    json log = json::array();
    for (const auto& e : r.log) log.push_back(event_to_json(e));
    doc["log"] = log;
  }
  return doc;
}

StateTrace belief_trace(const WorldState& initial, const std::vector<ExecutedStep>& executed,
                        const Universe& u) {
  Plan plan;
  std::vector<bool> noop;
  for (const auto& s : executed) {
    plan.push_back(s.action);
    noop.push_back(s.status != StepStatus::Ok);
  }
  return simulate_trace(initial, plan, u, noop);
}

namespace {

/// Preparation step that establishes an unmet dependency, if one exists.
std::optional<MidLevelAction> prep_for(const GroundedAssignment& dep, const MidLevelAction& step,
                                       const StateDependencyGraph& g) {
  const auto producers = g.producers_of(template_ref_of(dep.variable));
  if (producers.size() != 1 || !g.is_state_preparation(producers.front().action)) return std::nullopt;
  const auto& edge = producers.front();
  return MidLevelAction{edge.action, edge.value == kSubject ? dep.value : step.object};
}

}  // namespace

RollbackResult rollback(const std::vector<ExecutedStep>& executed, int t_start, int t_error,
                        Environment& env, const StateDependencyGraph& g) {
  RollbackResult out;
  const ActionKB& kb = *env.universe().kb;
  for (int t = t_error - 1; t >= t_start && t >= 1; --t) {
    const ExecutedStep& s = executed.at(static_cast<std::size_t>(t - 1));
    if (s.status == StepStatus::Failed) continue;
    const ActionSchema& schema = kb.schema(s.action.action);
    if (s.status == StepStatus::Fake || schema.irreversible) {
      out.fake_steps.push_back(t);
      out.fake_set.push_back(s.action);
      continue;
    }
    const auto rev = reverse_action(s.action, kb);
    if (!rev) continue;  // overwritten by later steps, nothing to undo

    const GroundedSets gs = ground_step(*rev, env.universe());
    for (const auto& dep : gs.dep) {
      if (env.world().holds(dep)) continue;
      if (auto prep = prep_for(dep, *rev, g)) {
        const bool ok = std::holds_alternative<WorldState>(env.step(*prep));
        out.issued.push_back({*prep, ok ? StepStatus::Ok : StepStatus::Failed, Provenance::RollbackPrep});
      }
    }
    const bool ok = std::holds_alternative<WorldState>(env.step(*rev));
    out.issued.push_back({*rev, ok ? StepStatus::Ok : StepStatus::Failed, Provenance::Reverse});
    out.reversed.push_back(*rev);
    if (!ok) out.failed.push_back(*rev);
  }
  return out;
}

namespace {

json plan_strings(const Plan& p) {
  json out = json::array();
  for (const auto& s : p) out.push_back(s.str());
  return out;
}

json assignment_json(const GroundedAssignment& a) { return json::array({a.variable, a.value}); }

class Episode {
 public:
  Episode(const Scenario& sc, Strategy strategy, Proposer& proposer, const ExecConfig& config,
          const ActionKB& kb, const StateDependencyGraph& g)
      : sc_(sc),
        strategy_(strategy),
        proposer_(proposer),
        config_(config),
        g_(g),
        u_{&kb, sc.objects},
        env_(u_, sc.initial, sc.perturbations) {
    result_.scenario_id = sc.id;
    result_.strategy = strategy;
  }

  EpisodeResult run() {
    if (!initial_plan()) return finish();
    while (!pending_.empty()) {
      if (env_.attempts() >= config_.step_budget) {
        result_.end_reason = "step_budget";
        break;
      }
      const PlannedStep step = pending_.front();
      pending_.pop_front();

      auto fake = std::find(fake_.begin(), fake_.end(), step.action);
      if (fake != fake_.end()) {
        fake_.erase(fake);
        executed_.push_back({step.action, StepStatus::Fake, step.provenance});
        emit("skip_fake", {{"action", step.action.str()}, {"t", executed_.size()}});
        continue;
      }

      StepOutcome outcome = env_.step(step.action);
      for (const auto& p : env_.last_fired()) {
        json set = json::array();
        for (const auto& a : p.set) set.push_back(assignment_json(a));
        emit("perturbation", {{"at_tick", p.at_tick}, {"set", set}});
      }
      if (std::holds_alternative<WorldState>(outcome)) {
        executed_.push_back({step.action, StepStatus::Ok, step.provenance});
        emit("step_ok", {{"action", step.action.str()}, {"t", executed_.size()}});
        continue;
      }
      const ExecError err = std::get<ExecError>(outcome);
      executed_.push_back({step.action, StepStatus::Failed, step.provenance});
      json violated = json::array();
      for (const auto& v : err.violated) violated.push_back(assignment_json(v));
      emit("step_fail", {{"action", step.action.str()}, {"t", executed_.size()}, {"violated", violated}});

      if (strategy_ == Strategy::None) continue;
      if (rounds_ >= config_.repair_rounds) {
        result_.end_reason = "repair_budget";
        break;
      }
      ++rounds_;
      ++result_.corrections;
      if (!handle_failure(step, err)) break;
    }
    if (result_.end_reason.empty()) result_.end_reason = "completed";
    return finish();
  }

 private:
  void emit(std::string event, json payload) {
    result_.log.push_back({env_.world().tick, std::move(event), std::move(payload)});
  }

  void warn_all() {
    for (auto& w : warnings_) emit("warning", {{"message", w}});
    warnings_.clear();
  }

  Plan pending_plan() const {
    Plan p;
    for (const auto& s : pending_) p.push_back(s.action);
    return p;
  }

  Plan executed_plan() const {
    Plan p;
    for (const auto& s : executed_) p.push_back(s.action);
    return p;
  }

  void set_pending(const Plan& plan, Provenance prov) {
    pending_.clear();
    for (const auto& a : plan) pending_.push_back({a, prov});
  }

  bool proposer_failed(const Error& e) {
    emit("proposer_error", {{"message", e.what()}});
    result_.end_reason = "proposer_error";
    return false;
  }

  bool initial_plan() {
    Plan plan;
    std::string source = "fixed";
    if (sc_.fixed_plan) {
      plan = *sc_.fixed_plan;
    } else {
      source = "proposer";
      try {
        plan = decompose(proposer_, sc_.instruction, proposer_context(sc_), u_);
      } catch (const ProposerError& e) {
        return proposer_failed(e);
      } catch (const InvalidResponse& e) {
        return proposer_failed(e);
      }
    }
    set_pending(plan, Provenance::Initial);
    emit("decompose", {{"source", source}, {"plan", plan_strings(plan)}});
    return true;
  }

  /// Asks for a fresh plan under the given mode; replaces pending.
  bool replan(const std::string& mode, const MidLevelAction& failed, json extra = json::object()) {
    json ctx = proposer_context(sc_);
    ctx["mode"] = mode;
    ctx["failed"] = failed.str();
    Plan done;
    for (const auto& s : executed_)
      if (s.status == StepStatus::Ok) done.push_back(s.action);
    ctx["executed"] = plan_strings(done);
    for (auto& [k, v] : extra.items()) ctx[k] = v;
    Plan plan;
    try {
      plan = decompose(proposer_, sc_.instruction, ctx, u_);
    } catch (const ProposerError& e) {
      return proposer_failed(e);
    } catch (const InvalidResponse& e) {
      return proposer_failed(e);
    }
    set_pending(plan, Provenance::Replanned);
    emit("repair", {{"mode", mode}, {"plan", plan_strings(plan)}});
    return true;
  }

  bool handle_failure(const PlannedStep& step, const ExecError& err) {
    switch (strategy_) {
      case Strategy::None: return true;
      case Strategy::Local: return replan("local", step.action, {{"remaining", plan_strings(pending_plan())}});
      case Strategy::Global:
        env_.reset();
        executed_.clear();
        fake_.clear();
        emit("reset", json::object());
        return replan("global", step.action);
      case Strategy::Sda:
      case Strategy::SdaNoTree: return adapt(step, err);
    }
    return false;
  }

  bool adapt(const PlannedStep& step, const ExecError& err) {
    const int t_error = static_cast<int>(executed_.size());
    const StateTrace trace = belief_trace(sc_.initial, executed_, u_);
    Plan timeline = executed_plan();
    for (const auto& p : pending_) timeline.push_back(p.action);

    ClassifyOptions opts;
    if (env_fail_step_ == step.action && env_fail_count_ >= config_.max_local_replans && !err.violated.empty())
      opts.force_violation = err.violated.front();
    const ExecError belief_err{step.action, err.violated, t_error};
    const DiagnosisReport report = classify_error(trace, belief_err, g_, u_, timeline, opts);
    emit("diagnosis", report_to_json(report));

    if (report.error_class == ErrorClass::EnvironmentState) {
      if (env_fail_step_ == step.action) {
        ++env_fail_count_;
      } else {
        env_fail_step_ = step.action;
        env_fail_count_ = 1;
      }
      return replan("local", step.action, {{"remaining", plan_strings(pending_plan())}});
    }
    env_fail_step_.reset();
    env_fail_count_ = 0;

    if (report.error_class == ErrorClass::PreconditionPrepOnly) {
      pending_.push_front({step.action, step.provenance});
      pending_.push_front({*report.prep_fix, Provenance::InsertedPrep});
      emit("repair", {{"mode", "prep"}, {"plan", plan_strings({*report.prep_fix, step.action})}});
      return true;
    }

    const auto t_start = static_cast<std::size_t>(report.t_start);
    const auto t_end = static_cast<std::size_t>(report.t_end);
    const Plan window(timeline.begin() + static_cast<long>(t_start - 1), timeline.begin() + static_cast<long>(t_end));
    const Plan suffix(timeline.begin() + static_cast<long>(t_end), timeline.end());

    Plan chosen;
    json repair_payload = {{"t_start", report.t_start}, {"t_end", report.t_end}, {"window", plan_strings(window)}};
    try {
      if (strategy_ == Strategy::Sda) {
        const Plan suggestions =
            suggest_corrections(proposer_, report, window, sc_.instruction, proposer_context(sc_), u_, &warnings_);
        SearchTree tree = make_tree(trace.snapshot(report.t_start - 1), build_candidates(window, suggestions, report));
        expand_tree(tree, static_cast<int>(window.size()) + config_.repair.extra_depth, g_, u_,
                    config_.repair.max_nodes);
        std::vector<Plan> options;
        try {
          options = extract_subsequences(tree, report, suffix, g_, u_,
                                         static_cast<std::size_t>(config_.repair.max_paths));
        } catch (const NoValidPath& e) {
          warn_all();
          emit("no_valid_path", {{"message", e.what()}, {"nodes", tree.nodes.size()}});
          if (fallback_used_) {
            result_.end_reason = "no_valid_path";
            return false;
          }
          fallback_used_ = true;
          return replan("local", step.action, {{"remaining", plan_strings(pending_plan())}});
        }
        json opts_json = json::array();
        for (const auto& o : options) opts_json.push_back(plan_strings(o));
        repair_payload["options"] = opts_json;
        repair_payload["nodes"] = tree.nodes.size();
        chosen = select_plan(options, sc_.instruction, proposer_context(sc_), proposer_, &warnings_);
      } else {
        json ctx = proposer_context(sc_);
        ctx["mode"] = "window";
        ctx["failed"] = step.action.str();
        ctx["violated"] = report.violated->str();
        ctx["window"] = plan_strings(window);
        chosen = decompose(proposer_, sc_.instruction, ctx, u_);
      }
    } catch (const ProposerError& e) {
      warn_all();
      return proposer_failed(e);
    } catch (const InvalidResponse& e) {
      warn_all();
      return proposer_failed(e);
    }
    warn_all();
    repair_payload["mode"] = strategy_ == Strategy::Sda ? "tree" : "direct";
    repair_payload["plan"] = plan_strings(chosen);
    emit("repair", repair_payload);

    const RollbackResult rb = rollback(executed_, report.t_start, t_error, env_, g_);
    executed_.insert(executed_.end(), rb.issued.begin(), rb.issued.end());
    fake_ = rb.fake_set;
    emit("rollback", {{"reversed", plan_strings(rb.reversed)},
                      {"failed", plan_strings(rb.failed)},
                      {"fake_steps", rb.fake_steps}});

    pending_.clear();
    for (const auto& a : chosen) pending_.push_back({a, Provenance::Repaired});
    for (const auto& a : suffix) pending_.push_back({a, Provenance::Initial});
    return true;
  }

  EpisodeResult finish() {
    result_.goal_fraction = goal_fraction(env_.world(), sc_.goals);
    result_.success = result_.goal_fraction == Rational(1);
    result_.steps = env_.attempts();
    result_.executed = executed_;
    result_.final_world = env_.world();
    result_.trace = belief_trace(sc_.initial, executed_, u_);
    emit("episode_end", {{"success", result_.success},
                         {"goal_fraction", result_.goal_fraction.str()},
                         {"corrections", result_.corrections},
                         {"end_reason", result_.end_reason}});
    return std::move(result_);
  }

  const Scenario& sc_;
  Strategy strategy_;
  Proposer& proposer_;
  const ExecConfig& config_;
  const StateDependencyGraph& g_;
  Universe u_;
  Environment env_;
  std::deque<PlannedStep> pending_;
  std::vector<ExecutedStep> executed_;
  Plan fake_;
  std::vector<std::string> warnings_;
  int rounds_ = 0;
  bool fallback_used_ = false;
  std::optional<MidLevelAction> env_fail_step_;
  int env_fail_count_ = 0;
  EpisodeResult result_;
};

}  // namespace

std::optional<FirstFailure> diagnose_scenario(const Scenario& sc, Proposer& proposer, const ActionKB& kb,
                                              const StateDependencyGraph& g) {
  Universe u{&kb, sc.objects};
  const Plan plan = sc.fixed_plan ? *sc.fixed_plan : decompose(proposer, sc.instruction, proposer_context(sc), u);
  Environment env(u, sc.initial, sc.perturbations);
  std::vector<ExecutedStep> executed;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    StepOutcome outcome = env.step(plan[i]);
    if (std::holds_alternative<WorldState>(outcome)) {
      executed.push_back({plan[i], StepStatus::Ok, Provenance::Initial});
      continue;
    }
    executed.push_back({plan[i], StepStatus::Failed, Provenance::Initial});
    const int t_error = static_cast<int>(executed.size());
    StateTrace trace = belief_trace(sc.initial, executed, u);
    const ExecError err{plan[i], std::get<ExecError>(outcome).violated, t_error};
    DiagnosisReport report = classify_error(trace, err, g, u, plan);
    return FirstFailure{std::move(executed), std::move(trace), plan, err, std::move(report), std::move(env)};
  }
  return std::nullopt;
}

RepairPreview preview_repair(const Scenario& sc, const FirstFailure& f, Proposer& proposer,
                             const StateDependencyGraph& g, const RepairConfig& config) {
  if (f.report.error_class != ErrorClass::PreconditionDeep)
    throw SchemaError("tree repair needs a deep precondition error, got " +
                      std::string(to_string(f.report.error_class)));
  const Universe& u = f.env.universe();
  RepairPreview out;
  const auto t_start = static_cast<long>(f.report.t_start);
  const auto t_end = static_cast<long>(f.report.t_end);
  out.window.assign(f.timeline.begin() + t_start - 1, f.timeline.begin() + t_end);
  out.suffix.assign(f.timeline.begin() + t_end, f.timeline.end());
  out.suggestions = suggest_corrections(proposer, f.report, out.window, sc.instruction, proposer_context(sc), u,
                                        &out.warnings);
  out.candidates = build_candidates(out.window, out.suggestions, f.report);
  SearchTree tree = make_tree(f.trace.snapshot(f.report.t_start - 1), out.candidates);
  expand_tree(tree, static_cast<int>(out.window.size()) + config.extra_depth, g, u, config.max_nodes);
  out.tree_nodes = tree.nodes.size();
  out.options = extract_subsequences(tree, f.report, out.suffix, g, u, static_cast<std::size_t>(config.max_paths));
  out.chosen = select_plan(out.options, sc.instruction, proposer_context(sc), proposer, &out.warnings);
  Environment env = f.env;
  out.rollback = rollback(f.executed, f.report.t_start, f.report.t_error, env, g);
  return out;
}

EpisodeResult run_episode(const Scenario& scenario, Strategy strategy, Proposer& proposer,
                          const ExecConfig& config, const ActionKB& kb, const StateDependencyGraph& g) {
  return Episode(scenario, strategy, proposer, config, kb, g).run();
}

}  // namespace sda
