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


#include <doctest.h>

#include "sda/diagnosis.hpp"
#include "sda/errors.hpp"
#include "sda/bench.hpp"
#include "sda/executor.hpp"
#include "sda/proposer.hpp"
#include "support.hpp"

using sda::test::alfred_graph;
using sda::test::alfred_kb;
using sda::test::fixture;
using sda::test::kitchen;

namespace {

std::optional<sda::FirstFailure> first_failure(const sda::Scenario& sc) {
  auto p = sda::scripted_for(sc);
  return sda::diagnose_scenario(sc, *p, alfred_kb(), alfred_graph());
}

// Literal scan of the corruption-time definition.
std::vector<int> lambda_oracle(const sda::StateTrace& tr, const std::string& var, const std::string& need,
                               int t_error) {
  std::vector<int> out;
  for (int t = 1; t < t_error; ++t)
    if (tr.value_at(var, t - 1) == need && tr.value_at(var, t) != need) out.push_back(t);
  return out;
}

}  // namespace

TEST_SUITE("diagnosis") {
  TEST_CASE("fig2 trace holds pan from step 3") {
    const auto sc = fixture("fig2_kitchen");
    const sda::Universe u{&alfred_kb(), sc.objects};
    const sda::Plan prefix(sc.fixed_plan->begin(), sc.fixed_plan->begin() + 6);
    const auto tr = sda::simulate_trace(sc.initial, prefix, u);
    CHECK(tr.snapshots.size() == 7);
    for (int t = 0; t <= 2; ++t) CHECK(tr.value_at("agent.holding", t) == "nothing");
    for (int t = 3; t <= 6; ++t) CHECK(tr.value_at("agent.holding", t) == "pan");
  }

  TEST_CASE("empty prefix gives the initial snapshot only") {
    const auto w = kitchen({"pan"}, "pan");
    const auto tr = sda::simulate_trace(w, {}, sda::test::universe({"pan"}));
    CHECK(tr.snapshots.size() == 1);
    CHECK(tr.snapshot(0) == w);
  }

  TEST_CASE("noop steps leave the state unchanged") {
    const auto w = kitchen({"pan"}, "pan");
    const auto tr = sda::simulate_trace(w, {{"pick up", "pan"}, {"find", "pan"}}, sda::test::universe({"pan"}),
                                        {true, false});
    CHECK(tr.value_at("agent.holding", 1) == "nothing");
  }

  TEST_CASE("ungroundable step") {
    CHECK_THROWS_AS(sda::simulate_trace(kitchen({"pan"}, "pan"), {{"find", "ghost"}}, sda::test::universe({"pan"})),
                    sda::Error);
  }

  TEST_CASE("fig2 diagnosis") {
    const auto f = first_failure(fixture("fig2_kitchen"));
    REQUIRE(f);
    const auto& r = f->report;
    CHECK(r.error_class == sda::ErrorClass::PreconditionDeep);
    CHECK(r.failed == sda::MidLevelAction{"pick up", "tomato"});
    REQUIRE(r.violated);
    CHECK(r.violated->variable == "agent.holding");
    CHECK(r.violated->value == "nothing");
    CHECK(r.t_error == 7);
    CHECK(r.lambda == std::vector<int>{3});
    CHECK(r.t_source == 3);
    CHECK(r.t_start == 2);
    CHECK(r.t_end == 8);
    CHECK(r.error_items == std::set<std::string>{"pan", "tomato"});
    CHECK(sda::report_from_json(sda::report_to_json(r)).t_end == 8);
  }

  TEST_CASE("position-only failure is a preparation error") {
    const auto f = first_failure(fixture("prep_only_01"));
    REQUIRE(f);
    const auto& r = f->report;
    CHECK(r.error_class == sda::ErrorClass::PreconditionPrepOnly);
    CHECK(r.t_start == r.t_error);
    CHECK(r.t_end == r.t_error);
    REQUIRE(r.prep_fix);
    CHECK(r.prep_fix->action == "find");
    CHECK(r.prep_fix->object == r.failed.object);
  }

  TEST_CASE("pick up without position is a preparation error at its own step") {
    const std::set<std::string> objects{"tomato", "sink"};
    const sda::Universe u = sda::test::universe(objects);
    const auto w = kitchen(objects, "sink");
    sda::Plan timeline;
    for (int i = 0; i < 6; ++i) timeline.push_back({"find", "sink"});
    timeline.push_back({"pick up", "tomato"});
    const sda::Plan prefix(timeline.begin(), timeline.end() - 1);
    const auto tr = sda::simulate_trace(w, prefix, u);
    const sda::ExecError err{{"pick up", "tomato"}, {{"agent.position", "tomato"}}, 7};
    const auto r = sda::classify_error(tr, err, alfred_graph(), u, timeline);
    CHECK(r.error_class == sda::ErrorClass::PreconditionPrepOnly);
    CHECK(r.prep_fix == sda::MidLevelAction{"find", "tomato"});
    CHECK(r.t_start == 7);
    CHECK(r.t_end == 7);
  }

  TEST_CASE("perturbed fixture is an environment-state error") {
    const auto f = first_failure(fixture("env_error_01"));
    REQUIRE(f);
    CHECK(f->report.error_class == sda::ErrorClass::EnvironmentState);
    CHECK_FALSE(f->report.violated);
  }

  TEST_CASE("value never held gives source 1") {
    const std::set<std::string> objects{"knife", "tomato"};
    const sda::Universe u = sda::test::universe(objects);
    const auto w = kitchen(objects, "knife");
    const sda::Plan prefix{{"find", "tomato"}, {"find", "knife"}};
    const auto tr = sda::simulate_trace(w, prefix, u);
    CHECK(sda::compute_lambda(tr, "agent.holding", "knife", 3).empty());
    CHECK(sda::compute_source(tr, "agent.holding", "knife", 3) == 1);
  }

  TEST_CASE("toggling trace takes the latest corruption") {
    const std::set<std::string> objects{"fridge", "sink"};
    const sda::Universe u = sda::test::universe(objects);
    const auto w = kitchen(objects, "fridge");
    const sda::Plan prefix{{"open", "fridge"}, {"close", "fridge"}, {"find", "sink"}, {"find", "fridge"},
                           {"open", "fridge"}, {"find", "sink"},   {"find", "fridge"}, {"close", "fridge"},
                           {"open", "fridge"}, {"find", "sink"}};
    const auto tr = sda::simulate_trace(w, prefix, u);
    const auto lambda = sda::compute_lambda(tr, "opened(fridge)", "false", 11);
    CHECK(lambda == lambda_oracle(tr, "opened(fridge)", "false", 11));
    CHECK(lambda == std::vector<int>{1, 5, 9});
    CHECK(sda::compute_source(tr, "opened(fridge)", "false", 11) == 9);
    CHECK(sda::compute_source(tr, "opened(fridge)", "false", 9) == 5);
  }

  TEST_CASE("vacuous window") {
    const sda::Plan plan{{"pick up", "pan"}, {"open", "fridge"}, {"pick up", "tomato"}};
    CHECK(sda::compute_window(plan, 2, 3, alfred_graph(), {"tomato", "pan"}) == std::pair{2, 3});
  }

  TEST_CASE("agent-scoped value nothing contributes no item") {
    const std::set<std::string> objects{"tomato", "pan"};
    const auto w = kitchen(objects, "tomato");
    const auto tr = sda::simulate_trace(w, {{"find", "pan"}}, sda::test::universe(objects));
    sda::DiagnosisReport r;
    r.failed = {"put down", "tomato"};
    r.violated = sda::GroundedAssignment{"agent.holding", "tomato"};
    r.t_source = 1;
    CHECK(sda::error_items(r, tr, objects) == std::set<std::string>{"tomato"});
  }

  TEST_CASE("item-scoped variable and its value join the error items") {
    const std::set<std::string> objects{"tomato", "knife", "drawer", "sink"};
    auto w = kitchen(objects, "sink");
    w.assignments["position(knife)"] = "drawer";
    const auto tr = sda::simulate_trace(w, {{"find", "sink"}}, sda::test::universe(objects));
    sda::DiagnosisReport r;
    r.failed = {"slice", "tomato"};
    r.violated = sda::GroundedAssignment{"position(knife)", "countertop"};
    r.t_source = 1;
    const auto items = sda::error_items(r, tr, objects);
    CHECK(items == std::set<std::string>{"tomato", "knife", "drawer"});
    const sda::Plan timeline{{"find", "sink"}, {"slice", "tomato"}, {"open", "drawer"}, {"find", "sink"}};
    CHECK(sda::compute_window(timeline, 1, 2, alfred_graph(), items).second == 3);
    CHECK(sda::compute_window(timeline, 1, 2, alfred_graph(), {"tomato", "knife"}).second == 2);
  }

  TEST_CASE("failure outside the trace is inconsistent") {
    const auto w = kitchen({"pan"}, "pan");
    const sda::Universe u = sda::test::universe({"pan"});
    const auto tr = sda::simulate_trace(w, {{"find", "pan"}}, u);
    CHECK_THROWS_AS(sda::classify_error(tr, {{"pick up", "pan"}, {}, 5}, alfred_graph(), u, {}),
                    sda::InconsistentTrace);
    CHECK_THROWS_AS(sda::classify_error(tr, {{"pick up", "pan"}, {}, 0}, alfred_graph(), u, {}),
                    sda::InconsistentTrace);
  }

  TEST_CASE("classification is deterministic") {
    const auto a = first_failure(fixture("fig2_kitchen"));
    const auto b = first_failure(fixture("fig2_kitchen"));
    CHECK(sda::report_to_json(a->report) == sda::report_to_json(b->report));
  }
}
