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

#include "sda/errors.hpp"
#include "sda/bench.hpp"
#include "sda/executor.hpp"
#include "sda/proposer.hpp"
#include "sda/subtree.hpp"
#include "support.hpp"

using sda::test::alfred_graph;
using sda::test::alfred_kb;
using sda::test::kitchen;

namespace {

sda::DiagnosisReport deep_report(sda::MidLevelAction failed, sda::GroundedAssignment violated,
                                 std::set<std::string> items) {
  sda::DiagnosisReport r;
  r.error_class = sda::ErrorClass::PreconditionDeep;
  r.failed = std::move(failed);
  r.violated = std::move(violated);
  r.error_items = std::move(items);
  return r;
}

}  // namespace

TEST_SUITE("subtree") {
  TEST_CASE("same-object run outside the error items becomes a chain") {
    const auto r = deep_report({"slice", "tomato"}, {"agent.holding", "knife"}, {"tomato"});
    const auto c = sda::build_candidates({{"find", "knife"}, {"pick up", "knife"}, {"slice", "tomato"}}, {}, r);
    REQUIRE(c.size() == 2);
    CHECK(c[0].chain_head);
    CHECK(c[0].action == sda::MidLevelAction{"find", "knife"});
    CHECK(c[0].chain_tail == sda::Plan{{"pick up", "knife"}});
    CHECK_FALSE(c[1].chain_head);
    CHECK(c[1].chain_tail.empty());
  }

  TEST_CASE("runs on error items are not chained") {
    const auto r = deep_report({"pick up", "tomato"}, {"agent.holding", "nothing"}, {"tomato", "pan"});
    const auto c = sda::build_candidates({{"find", "tomato"}, {"pick up", "tomato"}, {"put down", "pan"}}, {}, r);
    REQUIRE(c.size() == 3);
    for (const auto& n : c) CHECK_FALSE(n.chain_head);
  }

  TEST_CASE("duplicate suggestion keeps the original origin") {
    const auto r = deep_report({"pick up", "tomato"}, {"agent.holding", "nothing"}, {"tomato", "pan"});
    const auto c = sda::build_candidates({{"find", "tomato"}}, {{"find", "tomato"}, {"put down", "pan"}}, r);
    REQUIRE(c.size() == 2);
    CHECK(c[0].origin == sda::CandidateOrigin::Original);
    CHECK(c[1].origin == sda::CandidateOrigin::Proposer);
  }

  TEST_CASE("not_covered examples") {
    const auto& g = alfred_graph();
    CHECK_FALSE(sda::not_covered({"find", "fridge"}, {"find", "tomato"}, g));
    CHECK(sda::not_covered({"find", "tomato"}, {"pick up", "tomato"}, g));
    CHECK_FALSE(sda::not_covered({"pick up", "tomato"}, {"pick up", "pan"}, g));
  }

  TEST_CASE("fig2 root children respect the expansion predicates") {
    const auto sc = sda::test::fixture("fig2_kitchen");
    auto p = sda::scripted_for(sc);
    const auto f = sda::diagnose_scenario(sc, *p, alfred_kb(), alfred_graph());
    REQUIRE(f);
    const auto& u = f->env.universe();
    const auto& r = f->report;
    const sda::Plan window(f->timeline.begin() + r.t_start - 1, f->timeline.begin() + r.t_end);
    auto tree = sda::make_tree(f->trace.snapshot(r.t_start - 1), sda::build_candidates(window, {}, r));
    const auto kids = sda::expand_children(tree, 0, alfred_graph(), u);
    CHECK_FALSE(kids.empty());
    for (int k : kids) {
      const auto& m = tree.nodes[static_cast<std::size_t>(k)].action;
      CHECK(m != sda::MidLevelAction{"pick up", "tomato"});
      CHECK(sda::satisfied(m, tree.nodes[0].state, u));
      CHECK(sda::changes(m, tree.nodes[0].state, u));
    }
    // Deeper: once holding the pan, putting it down is offered.
    sda::expand_tree(tree, static_cast<int>(window.size()) + 3, alfred_graph(), u, 100000);
    bool offered = false;
    for (const auto& n : tree.nodes) {
      if (n.parent < 0 || *n.state.get("agent.holding") != "nothing") continue;
      const auto& parent = tree.nodes[static_cast<std::size_t>(n.parent)];
      if (*parent.state.get("agent.holding") == "pan" && n.action.action == "put down") offered = true;
    }
    CHECK(offered);
    for (std::size_t i = 1; i < tree.nodes.size(); ++i) {
      const auto& n = tree.nodes[i];
      auto replay = tree.nodes[0].state;
      for (const auto& m : tree.path_to(static_cast<int>(i)))
        replay = std::get<sda::WorldState>(sda::apply_action(replay, m, u));
      CHECK(replay.assignments == n.state.assignments);
      std::set<int> used(n.used.begin(), n.used.end());
      CHECK(used.size() == n.used.size());
    }
  }

  TEST_CASE("chain head has exactly its successor as child") {
    const std::set<std::string> objects{"knife", "tomato", "sink"};
    const auto u = sda::test::universe(objects);
    const auto r = deep_report({"slice", "tomato"}, {"agent.holding", "knife"}, {"tomato"});
    auto cands = sda::build_candidates({{"find", "knife"}, {"pick up", "knife"}, {"find", "tomato"}}, {}, r);
    auto tree = sda::make_tree(kitchen(objects, "sink"), cands);
    const auto kids = sda::expand_children(tree, 0, alfred_graph(), u);
    int head = -1;
    for (int k : kids)
      if (tree.nodes[static_cast<std::size_t>(k)].action == sda::MidLevelAction{"find", "knife"}) head = k;
    REQUIRE(head >= 0);
    const auto next = sda::expand_children(tree, head, alfred_graph(), u);
    REQUIRE(next.size() == 1);
    CHECK(tree.nodes[static_cast<std::size_t>(next[0])].action == sda::MidLevelAction{"pick up", "knife"});
  }

  TEST_CASE("exhausted candidates give a leaf") {
    const std::set<std::string> objects{"pan"};
    const auto u = sda::test::universe(objects);
    auto tree = sda::make_tree(kitchen(objects, "sink"), {{{"find", "pan"}, sda::CandidateOrigin::Original, false, {}}});
    const auto kids = sda::expand_children(tree, 0, alfred_graph(), u);
    REQUIRE(kids.size() == 1);
    CHECK(sda::expand_children(tree, kids[0], alfred_graph(), u).empty());
  }

  TEST_CASE("restored root accepts the empty path first") {
    const std::set<std::string> objects{"tomato", "sink"};
    const auto u = sda::test::universe(objects);
    const auto r = deep_report({"pick up", "tomato"}, {"agent.holding", "nothing"}, {"tomato"});
    auto tree = sda::make_tree(kitchen(objects, "sink"), sda::build_candidates({{"find", "tomato"}}, {}, r));
    sda::expand_tree(tree, 4, alfred_graph(), u, 1000);
    const auto paths = sda::extract_subsequences(tree, r, {{"find", "tomato"}, {"pick up", "tomato"}}, alfred_graph(), u);
    REQUIRE_FALSE(paths.empty());
    CHECK(paths.front().empty());
  }

  TEST_CASE("unsatisfiable repair has no valid path") {
    const std::set<std::string> objects{"tomato", "pan", "sink"};
    const auto u = sda::test::universe(objects);
    const auto r = deep_report({"pick up", "tomato"}, {"agent.holding", "nothing"}, {"tomato", "pan"});
    auto tree = sda::make_tree(kitchen(objects, "sink", "pan"), sda::build_candidates({{"find", "sink"}}, {}, r));
    sda::expand_tree(tree, 4, alfred_graph(), u, 1000);
    CHECK_THROWS_AS(sda::extract_subsequences(tree, r, {}, alfred_graph(), u), sda::NoValidPath);
  }

  TEST_CASE("accepted paths are executable and restore the violated value") {
    const auto sc = sda::test::fixture("fig2_kitchen");
    auto p = sda::scripted_for(sc);
    const auto f = sda::diagnose_scenario(sc, *p, alfred_kb(), alfred_graph());
    const auto preview = sda::preview_repair(sc, *f, *p, alfred_graph());
    REQUIRE_FALSE(preview.options.empty());
    for (std::size_t i = 1; i < preview.options.size(); ++i)
      CHECK(preview.options[i - 1].size() <= preview.options[i].size());
    const auto& u = f->env.universe();
    for (const auto& path : preview.options) {
      auto w = f->trace.snapshot(f->report.t_start - 1);
      for (const auto& m : path) {
        auto out = sda::apply_action(w, m, u);
        REQUIRE(std::holds_alternative<sda::WorldState>(out));
        w = std::get<sda::WorldState>(out);
      }
      const bool ran_failed = std::find(path.begin(), path.end(), f->report.failed) != path.end();
      CHECK((ran_failed || w.holds(*f->report.violated)));
    }
  }

  TEST_CASE("select_plan") {
    const std::vector<sda::Plan> one{{{"find", "pan"}}};
    int calls = 0;
    sda::CallbackProposer counting([&](const sda::ProposerRequest&) {
      ++calls;
      return std::string("0");
    });
    CHECK(sda::select_plan(one, "go", {}, counting) == one[0]);
    CHECK(calls == 0);

    const std::vector<sda::Plan> three{{{"find", "pan"}}, {{"find", "sink"}}, {{"find", "tomato"}}};
    sda::CallbackProposer says_one([](const sda::ProposerRequest&) { return std::string("1"); });
    CHECK(sda::select_plan(three, "go", {}, says_one) == three[1]);

    sda::CallbackProposer garbage([](const sda::ProposerRequest&) { return std::string("<html>oops</html>"); });
    std::vector<std::string> warnings;
    CHECK(sda::select_plan(three, "go", {}, garbage, &warnings) == three[0]);
    CHECK_FALSE(warnings.empty());

    sda::CallbackProposer out_of_range([](const sda::ProposerRequest&) { return std::string("7"); });
    CHECK(sda::select_plan(three, "go", {}, out_of_range) == three[0]);
  }
}
