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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sda/bench.hpp"
#include "sda/errors.hpp"
#include "sda/executor.hpp"
#include "sda/kb.hpp"
#include "sda/scenario.hpp"
#include "sda/sdg.hpp"
#include "sda/sim.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct ProposerOptions {
  std::string kind = "scripted";
  std::string endpoint;
  std::string model;
  int seed = 1;
  int retries = 2;
  double timeout = 60.0;
  std::string table;  // overrides the scenario's scripted table
};

void add_proposer_options(CLI::App* cmd, ProposerOptions& o) {
  cmd->add_option("--proposer", o.kind, "scripted or http")->check(CLI::IsMember({"scripted", "http"}));
  cmd->add_option("--endpoint", o.endpoint, "Chat-completions URL (http proposer)");
  cmd->add_option("--model", o.model, "Model name (http proposer)");
  cmd->add_option("--seed", o.seed, "Sampling seed sent to the http proposer");
  cmd->add_option("--retries", o.retries, "Retries on transport errors, 5xx and 429");
  cmd->add_option("--timeout", o.timeout, "Per-request timeout in seconds");
  cmd->add_option("--table", o.table, "Scripted table file replacing the scenario's own")->check(CLI::ExistingFile);
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw sda::ParseError("cannot open " + p.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw sda::ParseError(p.string() + ": " + e.what());
  }
}

sda::ProposerFactory make_factory(const ProposerOptions& o) {
  if (o.kind == "http") {
    sda::HttpProposerConfig cfg;
    if (!o.endpoint.empty()) cfg.endpoint = o.endpoint;
    if (!o.model.empty()) cfg.model = o.model;
    cfg = cfg.with_env_overrides();
    cfg.seed = o.seed;
    cfg.retries = o.retries;
    cfg.timeout_s = o.timeout;
    cfg.validate();
    return [cfg](const sda::Scenario&) -> std::unique_ptr<sda::Proposer> {
      return std::make_unique<sda::HttpProposer>(cfg, [](const std::string& m) { std::cerr << m << "\n"; });
    };
  }
  if (!o.table.empty()) {
    const json table = read_json(o.table);
    return [table](const sda::Scenario&) -> std::unique_ptr<sda::Proposer> {
      return std::make_unique<sda::ScriptedProposer>(sda::ScriptedProposer::from_json(table));
    };
  }
  return sda::scripted_for;
}

struct Loaded {
  sda::Scenario scenario;
  std::unique_ptr<sda::ActionKB> kb;
  std::unique_ptr<sda::StateDependencyGraph> graph;
};

Loaded load(const fs::path& scenario_path, const std::string& kb_override) {
  Loaded l;
  l.scenario = sda::load_scenario(scenario_path);
  fs::path kb_path;
  if (!kb_override.empty()) {
    kb_path = kb_override;
  } else if (l.scenario.kb_path) {
    kb_path = *l.scenario.kb_path;
  } else {
    throw sda::SchemaError("scenario names no KB; pass --kb");
  }
  l.kb = std::make_unique<sda::ActionKB>(sda::load_kb(kb_path));
  l.graph = std::make_unique<sda::StateDependencyGraph>(*l.kb);
  sda::validate_scenario(l.scenario, *l.kb);
  return l;
}

/// Diagnoses a failure given as an executed prefix plus the failed step.
sda::DiagnosisReport diagnose_trace(const Loaded& l, const json& doc) {
  for (const auto& [key, _] : doc.items())
    if (key != "executed" && key != "failed" && key != "violated" && key != "pending" && key != "noop")
      throw sda::ParseError("unknown trace field: " + key);
  const sda::Universe u{l.kb.get(), l.scenario.objects};
  const sda::Plan executed = sda::plan_from_json(doc.at("executed"));
  const sda::Plan failed = sda::plan_from_json(json::array({doc.at("failed")}));
  std::vector<bool> noop(executed.size(), false);
  for (int t : doc.value("noop", json::array())) {
    if (t < 1 || t > static_cast<int>(executed.size())) throw sda::SchemaError("noop step out of range");
    noop[static_cast<std::size_t>(t - 1)] = true;
  }
  sda::Plan prefix = executed;
  prefix.push_back(failed.front());
  noop.push_back(true);
  sda::StateTrace trace = sda::simulate_trace(l.scenario.initial, prefix, u, noop);
  sda::ExecError err{failed.front(), {}, static_cast<int>(prefix.size())};
  for (const auto& v : doc.value("violated", json::array())) err.violated.push_back({v.at(0), v.at(1)});
  std::sort(err.violated.begin(), err.violated.end());
  sda::Plan timeline = prefix;
  if (doc.contains("pending")) {
    const sda::Plan pending = sda::plan_from_json(doc.at("pending"));
    timeline.insert(timeline.end(), pending.begin(), pending.end());
  }
  return sda::classify_error(trace, err, *l.graph, u, timeline);
}

void write_output(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out);
  if (!f) throw sda::Error("cannot write " + out);
  f << text;
}

sda::MidLevelAction parse_step(const std::string& text) {
  auto comma = text.find(',');
  if (comma == std::string::npos) throw sda::ParseError("step must be 'action,object': " + text);
  auto trim = [](std::string s) {
    s.erase(0, s.find_first_not_of(" \t"));
    s.erase(s.find_last_not_of(" \t") + 1);
    return s;
  };
  return {trim(text.substr(0, comma)), trim(text.substr(comma + 1))};
}

json plan_strings(const sda::Plan& p) {
  json out = json::array();
  for (const auto& s : p) out.push_back(s.str());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Plan diagnosis and repair engine with a benchmark harness"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run one scenario under one strategy");
  std::string run_scenario, run_strategy = "sda", run_kb, run_log, run_out;
  bool run_with_log = false;
  ProposerOptions run_prop;
  run->add_option("scenario", run_scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  run->add_option("--strategy", run_strategy, "none, local, global, sda or sda_no_tree");
  run->add_option("--kb", run_kb, "KB file overriding the scenario's");
  run->add_option("--log", run_log, "Write the event log here as JSON lines");
  run->add_option("--out", run_out, "Write the episode result JSON here");
  run->add_flag("--with-log", run_with_log, "Embed the event log in the result JSON");
  add_proposer_options(run, run_prop);

  // bench
  auto* bench = app.add_subcommand("bench", "Run every scenario of a directory under several strategies");
  std::string bench_dir, bench_strategies = "sda,local,global,none,sda_no_tree", bench_out, bench_format = "table",
                         bench_kb, bench_results;
  int bench_jobs = 1;
  bool bench_timing = false;
  ProposerOptions bench_prop;
  bench->add_option("dir", bench_dir, "Scenario directory")->required()->check(CLI::ExistingDirectory);
  bench->add_option("--strategies", bench_strategies, "Comma-separated strategies");
  bench->add_option("--jobs", bench_jobs, "Worker threads")->check(CLI::PositiveNumber);
  bench->add_option("--out", bench_out, "Write the full JSON report here");
  bench->add_option("--format", bench_format, "Printed table format: table, json or csv");
  bench->add_option("--kb", bench_kb, "KB for scenarios that name none");
  bench->add_option("--results-dir", bench_results, "Persist per-episode records here");
  bench->add_flag("--timing", bench_timing, "Include wall-clock time (makes reports non-reproducible)");
  add_proposer_options(bench, bench_prop);

  // validate
  auto* validate = app.add_subcommand("validate", "Check KB and scenario files");
  std::string validate_path, validate_kb;
  validate->add_option("path", validate_path, "Scenario directory, scenario file or KB file")
      ->required()
      ->check(CLI::ExistingPath);
  validate->add_option("--kb", validate_kb, "KB for scenarios that name none");

  // graph export
  auto* graph = app.add_subcommand("graph", "State-dependency graph tools");
  graph->require_subcommand(1);
  auto* graph_export = graph->add_subcommand("export", "Export the graph of a KB");
  std::string graph_kb, graph_format = "dot", graph_out;
  graph_export->add_option("--kb", graph_kb, "KB file")->required()->check(CLI::ExistingFile);
  graph_export->add_option("--format", graph_format, "dot or json")->check(CLI::IsMember({"dot", "json"}));
  graph_export->add_option("--out", graph_out, "Output file (default stdout)");

  // diagnose
  auto* diagnose = app.add_subcommand("diagnose", "Diagnose the first failure of a scenario's plan");
  std::string diag_scenario, diag_kb, diag_trace;
  ProposerOptions diag_prop;
  diagnose->add_option("scenario", diag_scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  diagnose->add_option("--kb", diag_kb, "KB file overriding the scenario's");
  diagnose->add_option("--trace", diag_trace,
                       "Serialized trace {executed, failed, violated, pending?, noop?} replayed from the "
                       "scenario's initial world instead of running its plan")
      ->check(CLI::ExistingFile);
  add_proposer_options(diagnose, diag_prop);

  // repair
  auto* repair = app.add_subcommand("repair", "Show the tree repair of a scenario's first failure");
  std::string repair_scenario, repair_kb;
  int repair_paths = 5, repair_extra = 3;
  ProposerOptions repair_prop;
  repair->add_option("scenario", repair_scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  repair->add_option("--kb", repair_kb, "KB file overriding the scenario's");
  repair->add_option("--max-paths", repair_paths, "Accepted paths to collect");
  repair->add_option("--extra-depth", repair_extra, "Depth allowed beyond the window length");
  add_proposer_options(repair, repair_prop);

  // kb bootstrap
  auto* kb = app.add_subcommand("kb", "Knowledge base tools");
  kb->require_subcommand(1);
  auto* kb_boot = kb->add_subcommand("bootstrap", "Build a KB from proposer answers");
  std::vector<std::string> boot_skills;
  std::string boot_table, boot_out, boot_reversibility;
  kb_boot->add_option("--skill", boot_skills, "Skill name (repeatable)")->required();
  kb_boot->add_option("--table", boot_table, "Scripted answer table")->required()->check(CLI::ExistingFile);
  kb_boot->add_option("--reversibility", boot_reversibility, "KB file to copy reversal metadata from")
      ->check(CLI::ExistingFile);
  kb_boot->add_option("--out", boot_out, "Output file (default stdout)");

  // sim step
  auto* sim = app.add_subcommand("sim", "Simulator tools");
  sim->require_subcommand(1);
  auto* sim_step = sim->add_subcommand("step", "Apply steps to a world and print the result");
  std::string step_scenario, step_world, step_kb;
  std::vector<std::string> step_actions, step_objects;
  auto* src_group = sim_step->add_option_group("source");
  src_group->add_option("--scenario", step_scenario, "Start from a scenario's initial world")
      ->check(CLI::ExistingFile);
  src_group->add_option("--world", step_world, "Start from a world JSON file")->check(CLI::ExistingFile);
  src_group->require_option(1);
  sim_step->add_option("--kb", step_kb, "KB file (required with --world)");
  sim_step->add_option("--object", step_objects, "Extra object in the universe (repeatable)");
  sim_step->add_option("--step", step_actions, "'action,object' (repeatable)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      Loaded l = load(run_scenario, run_kb);
      auto proposer = make_factory(run_prop)(l.scenario);
      const auto strategy = sda::strategy_from_string(run_strategy);
      sda::EpisodeResult r = sda::run_episode(l.scenario, strategy, *proposer, {}, *l.kb, *l.graph);
      if (!run_log.empty()) write_output(sda::log_to_jsonl(r.log), run_log);
      const std::string doc = sda::result_to_json(r, run_with_log).dump(2) + "\n";
      if (!run_out.empty()) write_output(doc, run_out);
      std::cout << r.scenario_id << " [" << sda::to_string(r.strategy) << "] "
                << (r.success ? "success" : "failure") << " goal=" << r.goal_fraction.str()
                << " corrections=" << r.corrections << " steps=" << r.steps << " end=" << r.end_reason << "\n";
      for (const auto& s : r.executed)
        std::cout << "  " << s.action.str() << " " << sda::to_string(s.status) << " ("
                  << sda::to_string(s.provenance) << ")\n";
      return 0;
    }

    if (*bench) {
      sda::BatchConfig cfg;
      cfg.strategies.clear();
      std::stringstream ss(bench_strategies);
      for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) cfg.strategies.push_back(sda::strategy_from_string(item));
      cfg.jobs = bench_jobs;
      cfg.timing = bench_timing;
      cfg.proposer = make_factory(bench_prop);
      if (!bench_kb.empty()) cfg.default_kb = bench_kb;
      if (!bench_results.empty()) cfg.results_dir = bench_results;
      const auto format = sda::report_format_from_string(bench_format);
      sda::BatchResult b = sda::run_batch(bench_dir, cfg);
      std::vector<std::string> warnings;
      std::cout << sda::emit_report(b.table, format, &warnings);
      for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
      for (const auto& e : b.errors) std::cerr << "error: " << e.file << ": " << e.message << "\n";
      if (!bench_out.empty()) write_output(sda::batch_to_json(b, bench_timing).dump(2) + "\n", bench_out);
      return b.errors.empty() ? 0 : 1;
    }

    if (*validate) {
      int bad = 0;
      auto check_kb = [&](const fs::path& p) {
        try {
          sda::ActionKB k = sda::load_kb(p);
          std::cout << "ok   " << p.string() << " (" << k.actions().size() << " actions)\n";
          for (const auto& w : k.warnings()) std::cout << "     warning: " << w << "\n";
        } catch (const sda::Error& e) {
          ++bad;
          std::cout << "FAIL " << p.string() << ": " << e.what() << "\n";
        }
      };
      auto check_scenario = [&](const fs::path& p) {
        try {
          Loaded l = load(p, validate_kb);
          std::cout << "ok   " << p.string() << " (" << l.scenario.id << ")\n";
        } catch (const sda::Error& e) {
          ++bad;
          std::cout << "FAIL " << p.string() << ": " << e.what() << "\n";
        }
      };
      auto is_kb = [](const fs::path& p) {
        const json doc = read_json(p);
        return doc.is_object() && doc.contains("base_states");
      };
      auto check = [&](const fs::path& p) {
        if (is_kb(p)) {
          check_kb(p);
        } else {
          check_scenario(p);
        }
      };
      if (fs::is_directory(validate_path)) {
        for (const auto& p : sda::scenario_files(validate_path)) check(p);
      } else {
        check(validate_path);
      }
      return bad == 0 ? 0 : 1;
    }

    if (*graph_export) {
      sda::ActionKB k = sda::load_kb(graph_kb);
      sda::StateDependencyGraph g(k);
      if (graph_format == "dot") {
        write_output(g.to_dot(), graph_out);
      } else {
        json states = json::object();
        for (const auto& [ref, scope] : g.state_nodes()) states[ref] = sda::to_string(scope);
        json eff = json::array(), dep = json::array();
        for (const auto& e : g.effect_edges()) eff.push_back({e.action, e.variable, e.value});
        for (const auto& d : g.dep_edges()) dep.push_back({d.variable, d.value, d.action});
        json doc = {{"actions", g.action_nodes()}, {"states", states},       {"effect_edges", eff},
                    {"dep_edges", dep},            {"prep", g.prep_actions()}};
        write_output(doc.dump(2) + "\n", graph_out);
      }
      return 0;
    }

    if (*diagnose) {
      Loaded l = load(diag_scenario, diag_kb);
      if (!diag_trace.empty()) {
        std::cout << sda::report_to_json(diagnose_trace(l, read_json(diag_trace))).dump(2) << "\n";
        return 0;
      }
      auto proposer = make_factory(diag_prop)(l.scenario);
      auto f = sda::diagnose_scenario(l.scenario, *proposer, *l.kb, *l.graph);
      if (!f) {
        std::cout << json{{"failure", nullptr}}.dump(2) << "\n";
        return 0;
      }
      json doc = sda::report_to_json(f->report);
      std::cout << doc.dump(2) << "\n";
      return 0;
    }

    if (*repair) {
      Loaded l = load(repair_scenario, repair_kb);
      auto proposer = make_factory(repair_prop)(l.scenario);
      auto f = sda::diagnose_scenario(l.scenario, *proposer, *l.kb, *l.graph);
      if (!f) {
        std::cout << "plan executes without failure\n";
        return 0;
      }
      sda::RepairConfig rc;
      rc.max_paths = repair_paths;
      rc.extra_depth = repair_extra;
      sda::RepairPreview p = sda::preview_repair(l.scenario, *f, *proposer, *l.graph, rc);
      json options = json::array();
      for (const auto& o : p.options) options.push_back(plan_strings(o));
      json doc = {{"diagnosis", sda::report_to_json(f->report)},
                  {"window", plan_strings(p.window)},
                  {"suggestions", plan_strings(p.suggestions)},
                  {"tree_nodes", p.tree_nodes},
                  {"options", options},
                  {"chosen", plan_strings(p.chosen)},
                  {"reversed", plan_strings(p.rollback.reversed)},
                  {"fake_steps", p.rollback.fake_steps},
                  {"warnings", p.warnings}};
      std::cout << doc.dump(2) << "\n";
      return 0;
    }

    if (*kb_boot) {
      auto table = sda::ScriptedProposer::from_json(read_json(boot_table));
      sda::BootstrapOptions opts;
      if (!boot_reversibility.empty()) {
        sda::ActionKB ref = sda::load_kb(boot_reversibility);
        for (const auto& [name, a] : ref.actions()) opts.reversibility[name] = {a.reversible_by, a.irreversible};
      }
      std::set<std::string> skills(boot_skills.begin(), boot_skills.end());
      sda::ActionKB k = sda::bootstrap_kb(skills, table, {}, opts);
      write_output(sda::dump_kb(k), boot_out);
      return 0;
    }

    if (*sim_step) {
      sda::WorldState world;
      std::set<std::string> objects(step_objects.begin(), step_objects.end());
      std::unique_ptr<sda::ActionKB> k;
      if (!step_scenario.empty()) {
        Loaded l = load(step_scenario, step_kb);
        world = l.scenario.initial;
        objects.insert(l.scenario.objects.begin(), l.scenario.objects.end());
        k = std::move(l.kb);
      } else {
        if (step_kb.empty()) throw sda::SchemaError("--world needs --kb");
        k = std::make_unique<sda::ActionKB>(sda::load_kb(step_kb));
        world = sda::world_from_json(read_json(step_world));
        for (const auto& [var, _] : world.assignments) {
          const std::string obj = sda::object_of_variable(var);
          if (!obj.empty()) objects.insert(obj);
        }
      }
      sda::Universe u{k.get(), objects};
      json steps = json::array();
      for (const auto& text : step_actions) {
        const sda::MidLevelAction m = parse_step(text);
        sda::StepOutcome out = sda::apply_action(world, m, u);
        if (auto* err = std::get_if<sda::ExecError>(&out)) {
          json violated = json::array();
          for (const auto& v : err->violated) violated.push_back(v.str());
          steps.push_back({{"step", m.str()}, {"ok", false}, {"violated", violated}});
          continue;
        }
        sda::WorldState next = std::get<sda::WorldState>(std::move(out));
        json changes = json::array();
        for (const auto& c : sda::diff(world, next)) changes.push_back({c.variable, c.before, c.after});
        steps.push_back({{"step", m.str()}, {"ok", true}, {"changes", changes}});
        world = std::move(next);
      }
      std::cout << json{{"steps", steps}, {"world", sda::world_to_json(world)}}.dump(2) << "\n";
      return 0;
    }
  } catch (const sda::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
