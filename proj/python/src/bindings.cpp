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

// Thin JSON-string API; the Python package wraps it with dicts.

#include <memory>
#include <optional>
#include <string>

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sda/bench.hpp"
#include "sda/errors.hpp"
#include "sda/executor.hpp"
#include "sda/kb.hpp"
#include "sda/scenario.hpp"
#include "sda/sdg.hpp"
#include "sda/subtree.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

using PyProposerFn = std::function<std::string(std::string, std::string, std::string)>;

struct Session {
  sda::Scenario scenario;
  std::shared_ptr<sda::ActionKB> kb;
  std::shared_ptr<sda::StateDependencyGraph> graph;
};

sda::Scenario scenario_from(const std::string& source, const std::string& base_dir) {
  if (!source.empty() && source.front() == '{') return sda::parse_scenario(json::parse(source), base_dir);
  return sda::load_scenario(source);
}

Session open_session(const std::string& source, const std::string& base_dir,
                     const std::optional<std::string>& kb_path) {
  Session s;
  s.scenario = scenario_from(source, base_dir);
  std::filesystem::path path;
  if (kb_path) {
    path = *kb_path;
  } else if (s.scenario.kb_path) {
    path = *s.scenario.kb_path;
  } else {
    throw sda::SchemaError("scenario names no KB; pass kb=");
  }
  s.kb = std::make_shared<sda::ActionKB>(sda::load_kb(path));
  s.graph = std::make_shared<sda::StateDependencyGraph>(*s.kb);
  sda::validate_scenario(s.scenario, *s.kb);
  return s;
}

std::unique_ptr<sda::Proposer> make_proposer(const Session& s, const std::optional<PyProposerFn>& fn,
                                             const std::optional<std::string>& table) {
  if (fn) {
    PyProposerFn f = *fn;
    return std::make_unique<sda::CallbackProposer>([f](const sda::ProposerRequest& r) {
      return f(std::string(sda::to_string(r.kind)), r.instruction, r.context.dump());
    });
  }
  if (table) return std::make_unique<sda::ScriptedProposer>(sda::ScriptedProposer::from_json(json::parse(*table)));
  return sda::scripted_for(s.scenario);
}

json plan_strings(const sda::Plan& p) {
  json out = json::array();
  for (const auto& s : p) out.push_back(s.str());
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Plan diagnosis and repair engine";

  static py::exception<sda::Error> error(m, "SdaError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const sda::Error& e) {
      py::set_error(error, e.what());
    } catch (const json::exception& e) {
      py::set_error(PyExc_ValueError, e.what());
    }
  });

  m.def("fingerprint", [](const std::string& kind, const std::string& instruction, const std::string& context) {
    return sda::fingerprint({sda::request_kind_from_string(kind), instruction, json::parse(context)});
  });
  m.def("render_prompt", [](const std::string& kind, const std::string& instruction, const std::string& context) {
    return sda::render_prompt({sda::request_kind_from_string(kind), instruction, json::parse(context)});
  });
  m.def("parse_plan", [](const std::string& text) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& s : sda::parse_plan(text)) out.emplace_back(s.action, s.object);
    return out;
  });

  py::class_<sda::ActionKB, std::shared_ptr<sda::ActionKB>>(m, "KB")
      .def_static("load", [](const std::string& path) { return std::make_shared<sda::ActionKB>(sda::load_kb(path)); })
      .def_static("from_json",
                  [](const std::string& text) { return std::make_shared<sda::ActionKB>(sda::parse_kb(json::parse(text))); })
      .def("dump", &sda::dump_kb)
      .def("skills", &sda::ActionKB::skills)
      .def("warnings", &sda::ActionKB::warnings)
      .def("prep_actions", [](const sda::ActionKB& kb) { return sda::StateDependencyGraph(kb).prep_actions(); })
      .def("to_dot", [](const sda::ActionKB& kb) { return sda::StateDependencyGraph(kb).to_dot(); })
      .def("restrict", [](const sda::ActionKB& kb, const std::set<std::string>& skills) {
        return std::make_shared<sda::ActionKB>(sda::restrict_kb(kb, skills));
      })
      .def("not_covered", [](const sda::ActionKB& kb, std::pair<std::string, std::string> parent,
                             std::pair<std::string, std::string> child) {
        return sda::not_covered({parent.first, parent.second}, {child.first, child.second},
                                sda::StateDependencyGraph(kb));
      });

  m.def(
      "bootstrap_kb",
      [](const std::set<std::string>& skills, const PyProposerFn& fn, std::shared_ptr<sda::ActionKB> reversibility) {
        sda::CallbackProposer proposer([fn](const sda::ProposerRequest& r) {
          return fn(std::string(sda::to_string(r.kind)), r.instruction, r.context.dump());
        });
        sda::BootstrapOptions opts;
        if (reversibility)
          for (const auto& [name, a] : reversibility->actions()) opts.reversibility[name] = {a.reversible_by, a.irreversible};
        return std::make_shared<sda::ActionKB>(sda::bootstrap_kb(skills, proposer, {}, opts));
      },
      py::arg("skills"), py::arg("proposer"), py::arg("reversibility") = nullptr);

  m.def(
      "run_episode",
      [](const std::string& scenario, const std::string& strategy, std::optional<PyProposerFn> proposer,
         std::optional<std::string> table, std::optional<std::string> kb, const std::string& base_dir, bool with_log) {
        Session s = open_session(scenario, base_dir, kb);
        auto p = make_proposer(s, proposer, table);
        sda::EpisodeResult r =
            sda::run_episode(s.scenario, sda::strategy_from_string(strategy), *p, {}, *s.kb, *s.graph);
        return sda::result_to_json(r, with_log).dump();
      },
      py::arg("scenario"), py::arg("strategy") = "sda", py::arg("proposer") = py::none(),
      py::arg("table") = py::none(), py::arg("kb") = py::none(), py::arg("base_dir") = "",
      py::arg("with_log") = true);

  m.def(
      "diagnose",
      [](const std::string& scenario, std::optional<PyProposerFn> proposer, std::optional<std::string> table,
         std::optional<std::string> kb, const std::string& base_dir) -> std::optional<std::string> {
        Session s = open_session(scenario, base_dir, kb);
        auto p = make_proposer(s, proposer, table);
        auto f = sda::diagnose_scenario(s.scenario, *p, *s.kb, *s.graph);
        if (!f) return std::nullopt;
        return sda::report_to_json(f->report).dump();
      },
      py::arg("scenario"), py::arg("proposer") = py::none(), py::arg("table") = py::none(),
      py::arg("kb") = py::none(), py::arg("base_dir") = "");

  m.def(
      "repair",
      [](const std::string& scenario, std::optional<PyProposerFn> proposer, std::optional<std::string> table,
         std::optional<std::string> kb, const std::string& base_dir) -> std::optional<std::string> {
        Session s = open_session(scenario, base_dir, kb);
        auto p = make_proposer(s, proposer, table);
        auto f = sda::diagnose_scenario(s.scenario, *p, *s.kb, *s.graph);
        if (!f) return std::nullopt;
        sda::RepairPreview r = sda::preview_repair(s.scenario, *f, *p, *s.graph);
        json options = json::array();
        for (const auto& o : r.options) options.push_back(plan_strings(o));
        return json{{"diagnosis", sda::report_to_json(f->report)},
                    {"window", plan_strings(r.window)},
                    {"options", options},
                    {"chosen", plan_strings(r.chosen)},
                    {"reversed", plan_strings(r.rollback.reversed)}}
            .dump();
      },
      py::arg("scenario"), py::arg("proposer") = py::none(), py::arg("table") = py::none(),
      py::arg("kb") = py::none(), py::arg("base_dir") = "");

  m.def(
      "run_batch",
      [](const std::string& dir, const std::vector<std::string>& strategies, int jobs, std::optional<std::string> kb) {
        sda::BatchConfig cfg;
        cfg.strategies.clear();
        for (const auto& s : strategies) cfg.strategies.push_back(sda::strategy_from_string(s));
        cfg.jobs = jobs;
        if (kb) cfg.default_kb = *kb;
        py::gil_scoped_release release;
        return sda::batch_to_json(sda::run_batch(dir, cfg)).dump();
      },
      py::arg("dir"), py::arg("strategies") = std::vector<std::string>{"sda", "local", "global", "none", "sda_no_tree"},
      py::arg("jobs") = 1, py::arg("kb") = py::none());

  m.def("emit_report", [](const std::string& table_json, const std::string& format) {
    return sda::emit_report(sda::table_from_json(json::parse(table_json)), sda::report_format_from_string(format));
  });
}
