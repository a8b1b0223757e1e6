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

#include <fstream>

#include "sda/errors.hpp"
#include "sda/scenario.hpp"
#include "support.hpp"

using nlohmann::json;

namespace {

json fig2_doc() {
  std::ifstream f(sda::test::data_dir() / "scenarios" / "fig2_kitchen.json");
  return json::parse(f);
}

}  // namespace

TEST_SUITE("scenario") {
  TEST_CASE("fixture loads and validates") {
    const auto sc = sda::test::fixture("fig2_kitchen");
    CHECK(sc.id == "fig2_kitchen");
    CHECK(sc.fixed_plan->size() == 10);
    CHECK(sc.goals.size() == 2);
    CHECK(sc.kb_path);
    CHECK_NOTHROW(sda::validate_scenario(sc, sda::test::alfred_kb()));
    CHECK(*sc.initial.get("agent.holding") == "nothing");
  }

  TEST_CASE("round-trip through JSON") {
    const auto sc = sda::test::fixture("fig2_kitchen");
    const auto again = sda::parse_scenario(sda::scenario_to_json(sc), sc.source.parent_path());
    CHECK(again.initial == sc.initial);
    CHECK(again.goals == sc.goals);
    CHECK(again.fixed_plan == sc.fixed_plan);
  }

  TEST_CASE("schema violations") {
    auto doc = fig2_doc();
    doc["surprise"] = true;
    CHECK_THROWS_AS(sda::parse_scenario(doc), sda::ParseError);

    doc = fig2_doc();
    doc["goals"] = json::array();
    CHECK_THROWS_AS(sda::validate_scenario(sda::parse_scenario(doc), sda::test::alfred_kb()), sda::SchemaError);

    doc = fig2_doc();
    doc["goals"].push_back({"mood(pan)", "happy"});
    CHECK_THROWS_AS(sda::validate_scenario(sda::parse_scenario(doc), sda::test::alfred_kb()), sda::SchemaError);

    doc = fig2_doc();
    doc["fixed_plan"].push_back({"find", "ghost"});
    CHECK_THROWS_AS(sda::validate_scenario(sda::parse_scenario(doc), sda::test::alfred_kb()), sda::Error);

    doc = fig2_doc();
    doc["agent"].erase("holding");
    CHECK_THROWS_AS(sda::validate_scenario(sda::parse_scenario(doc), sda::test::alfred_kb()), sda::SchemaError);
  }

  TEST_CASE("proposer context lists the objects") {
    const auto sc = sda::test::fixture("fig2_kitchen");
    const auto ctx = sda::proposer_context(sc);
    CHECK(ctx.at("objects").size() == sc.objects.size());
  }

  TEST_CASE("every shipped scenario validates") {
    for (const char* dir : {"scenarios", "suite"})
      for (const auto& f : std::filesystem::directory_iterator(sda::test::data_dir() / dir)) {
        CAPTURE(f.path());
        const auto sc = sda::load_scenario(f.path());
        CHECK_NOTHROW(sda::validate_scenario(sc, sda::load_kb(*sc.kb_path)));
      }
  }
}
