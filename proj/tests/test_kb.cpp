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
#include <sstream>

#include "sda/errors.hpp"
#include "sda/kb.hpp"
#include "sda/proposer.hpp"
#include "support.hpp"

using nlohmann::json;
using sda::test::alfred_kb;
using sda::test::data_dir;

namespace {

json alfred_doc() {
  std::ifstream f(data_dir() / "kb" / "alfred_kb.json");
  return json::parse(f);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

json pairs(const std::vector<sda::TemplateAssignment>& v) {
  json out = json::array();
  for (const auto& p : v) out.push_back({p.variable, p.value});
  return out;
}

// Answers KB queries from an existing KB.
sda::CallbackProposer answering_from(const sda::ActionKB& kb, int* calls = nullptr) {
  return sda::CallbackProposer([&kb, calls](const sda::ProposerRequest& r) {
    if (calls) ++*calls;
    const auto& s = kb.schema(r.context.at("action").get<std::string>());
    return pairs(r.kind == sda::RequestKind::KbEff ? s.eff : s.dep).dump();
  });
}

}  // namespace

TEST_SUITE("kb") {
  TEST_CASE("fixture KB loads with seven schemas") {
    const auto& kb = alfred_kb();
    CHECK(kb.actions().size() == 7);
    CHECK(kb.skills() == std::set<std::string>{"close", "find", "open", "pick up", "put down", "slice", "turn on"});
    CHECK(kb.warnings().empty());
    CHECK(kb.schema("pick up").reversible_by == "put down");
    CHECK(kb.schema("slice").irreversible);
  }

  TEST_CASE("duplicate action key is rejected") {
    json doc = alfred_doc();
    doc["actions"].push_back(doc["actions"][0]);
    CHECK_THROWS_AS(sda::parse_kb(doc), sda::SchemaError);
  }

  TEST_CASE("duplicate effect variable is rejected") {
    json doc = alfred_doc();
    for (auto& a : doc["actions"])
      if (a["name"] == "pick up") a["eff"].push_back({"agent.holding", "nothing"});
    CHECK_THROWS_AS(sda::parse_kb(doc), sda::SchemaError);
  }

  TEST_CASE("unknown fields and malformed files") {
    json doc = alfred_doc();
    doc["extra"] = 1;
    CHECK_THROWS_AS(sda::parse_kb(doc), sda::ParseError);
    const auto path = std::filesystem::temp_directory_path() / "sda_bad_kb.json";
    std::ofstream(path) << "{not json";
    CHECK_THROWS_AS(sda::load_kb(path), sda::ParseError);
  }

  TEST_CASE("undeclared variable is rejected") {
    json doc = alfred_doc();
    doc["actions"][0]["dep"].push_back({"agent.mood", "happy"});
    CHECK_THROWS_AS(sda::parse_kb(doc), sda::SchemaError);
  }

  TEST_CASE("save and load round-trip") {
    const auto path = std::filesystem::temp_directory_path() / "sda_roundtrip_kb.json";
    sda::save_kb(alfred_kb(), path);
    CHECK(sda::load_kb(path) == alfred_kb());
    CHECK(slurp(path) == slurp(data_dir() / "kb" / "alfred_kb.json"));
  }

  TEST_CASE("orphan dependency produces a warning") {
    json doc = alfred_doc();
    json kept = json::array();
    for (auto& a : doc["actions"])
      if (a["name"] != "find") kept.push_back(a);
    doc["actions"] = kept;
    const auto kb = sda::parse_kb(doc);
    REQUIRE_FALSE(kb.warnings().empty());
    CHECK(kb.warnings().front().find("agent.position") != std::string::npos);
  }

  TEST_CASE("bootstrap of pick up from scripted answers") {
    sda::ScriptedProposer p;
    p.add({sda::RequestKind::KbEff, "", {{"action", "pick up"}, {"states", json::array()}}},
          R"([["agent.holding","SUBJECT"]])");
    const json after_eff = json::array({{{"variable", "agent.holding"}, {"scope", "agent"}, {"values", {"SUBJECT"}}}});
    p.add({sda::RequestKind::KbDep, "", {{"action", "pick up"}, {"states", after_eff}}},
          R"([["agent.position","SUBJECT"],["agent.holding","nothing"]])");
    const auto kb = sda::bootstrap_kb({"pick up"}, p, {});
    const auto& s = kb.schema("pick up");
    CHECK(s.eff == std::vector<sda::TemplateAssignment>{{"agent.holding", "SUBJECT"}});
    CHECK(s.dep == std::vector<sda::TemplateAssignment>{{"agent.holding", "nothing"}, {"agent.position", "SUBJECT"}});
    CHECK(kb.base_states().size() == 2);
  }

  TEST_CASE("bootstrap rejects an empty skill set") {
    int calls = 0;
    auto p = answering_from(alfred_kb(), &calls);
    CHECK_THROWS_AS(sda::bootstrap_kb({}, p, {}), sda::SchemaError);
    CHECK(calls == 0);
  }

  TEST_CASE("bootstrap of find and pick up matches the restricted fixture") {
    auto p = answering_from(alfred_kb());
    sda::BootstrapOptions opts;
    for (const auto& [name, a] : alfred_kb().actions()) opts.reversibility[name] = {a.reversible_by, a.irreversible};
    const auto kb = sda::bootstrap_kb({"find", "pick up"}, p, {}, opts);
    CHECK(sda::dump_kb(kb) == slurp(data_dir() / "kb" / "alfred_kb_find_pickup.json"));
    CHECK(kb == sda::restrict_kb(alfred_kb(), {"find", "pick up"}));
  }

  TEST_CASE("bootstrap is idempotent and never drops base states") {
    auto p = answering_from(alfred_kb());
    std::vector<sda::StateVariableTemplate> base;
    for (const auto& [_, s] : alfred_kb().base_states()) base.push_back(s);
    const auto a = sda::bootstrap_kb(alfred_kb().skills(), p, base);
    const auto b = sda::bootstrap_kb(alfred_kb().skills(), p, base);
    CHECK(a == b);
    CHECK(a.base_states().size() >= base.size());
  }

  TEST_CASE("bootstrap retries then reports invalid responses") {
    int calls = 0;
    sda::CallbackProposer p([&](const sda::ProposerRequest&) {
      ++calls;
      return std::string("the robot holds the thing");
    });
    try {
      sda::bootstrap_kb({"pick up"}, p, {});
      FAIL("expected InvalidResponse");
    } catch (const sda::InvalidResponse& e) {
      CHECK(e.raw() == "the robot holds the thing");
    }
    CHECK(calls == 3);
  }

  TEST_CASE("bootstrap recovers after a transient failure") {
    int calls = 0;
    auto inner = answering_from(alfred_kb());
    sda::CallbackProposer p([&](const sda::ProposerRequest& r) {
      if (++calls == 1) throw sda::ProposerError("unreachable");
      return inner.complete(r);
    });
    CHECK(sda::bootstrap_kb({"find"}, p, {}).has_action("find"));
  }
}
