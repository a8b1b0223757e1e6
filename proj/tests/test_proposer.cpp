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
#include "sda/proposer.hpp"
#include "sda/subtree.hpp"
#include "stub_server.hpp"
#include "support.hpp"

using nlohmann::json;
using sda::test::StubServer;

namespace {

sda::HttpProposerConfig stub_config(const StubServer& s) {
  sda::HttpProposerConfig c;
  c.endpoint = s.endpoint();
  c.backoff_ms = 0;
  c.timeout_s = 5;
  return c;
}

const std::vector<sda::Plan> kThree{{{"find", "pan"}}, {{"find", "sink"}}, {{"find", "tomato"}}};

}  // namespace

TEST_SUITE("proposer") {
  TEST_CASE("parse_plan") {
    const auto p = sda::parse_plan("1. (find, bread)\n2) (pick up, \"bread\")\n\n 3. ( put down , bread )\n");
    CHECK(p == sda::Plan{{"find", "bread"}, {"pick up", "bread"}, {"put down", "bread"}});
    CHECK(sda::parse_plan("").empty());
    try {
      sda::parse_plan("1. (find, bread)\nthen grab it");
      FAIL("expected InvalidResponse");
    } catch (const sda::InvalidResponse& e) {
      CHECK(e.raw().find("then grab it") != std::string::npos);
    }
  }

  TEST_CASE("decompose the bread instruction") {
    const auto u = sda::test::universe({"bread", "table"});
    sda::ScriptedProposer p;
    const std::string instruction = "put the bread on the table";
    const json ctx = {{"objects", {"bread", "table"}}};
    p.add({sda::RequestKind::Decompose, instruction, ctx},
          "1. (find, bread)\n2. (pick up, bread)\n3. (find, table)\n4. (put down, bread)");
    CHECK(sda::decompose(p, instruction, ctx, u) ==
          sda::Plan{{"find", "bread"}, {"pick up", "bread"}, {"find", "table"}, {"put down", "bread"}});
  }

  TEST_CASE("decompose rejects empty instructions and ungrounded steps") {
    const auto u = sda::test::universe({"bread"});
    int calls = 0;
    sda::CallbackProposer p([&](const sda::ProposerRequest&) {
      ++calls;
      return std::string("1. (teleport, bread)");
    });
    CHECK_THROWS_AS(sda::decompose(p, "  ", {}, u), sda::SchemaError);
    CHECK(calls == 0);
    CHECK_THROWS_AS(sda::decompose(p, "go", {}, u), sda::InvalidResponse);
  }

  TEST_CASE("scripted miss names the fingerprint") {
    sda::ScriptedProposer p;
    const sda::ProposerRequest req{sda::RequestKind::Decompose, "make tea", {}};
    try {
      p.complete(req);
      FAIL("expected InvalidResponse");
    } catch (const sda::InvalidResponse& e) {
      CHECK(std::string(e.what()).find(sda::fingerprint(req)) != std::string::npos);
    }
  }

  TEST_CASE("fingerprint ignores key order and is kind-sensitive") {
    const auto a = sda::fingerprint({sda::RequestKind::Suggest, "x", json::parse(R"({"a":1,"b":[1,2]})")});
    const auto b = sda::fingerprint({sda::RequestKind::Suggest, "x", json::parse(R"({"b":[1,2],"a":1})")});
    const auto c = sda::fingerprint({sda::RequestKind::Choose, "x", json::parse(R"({"a":1,"b":[1,2]})")});
    CHECK(a == b);
    CHECK(a != c);
  }

  TEST_CASE("scripted table from JSON entries") {
    const json table = json::array({{{"kind", "choose"}, {"instruction", "go"}, {"context", {{"k", 1}}}, {"response", "2"}}});
    auto p = sda::ScriptedProposer::from_json(table);
    CHECK(p.complete({sda::RequestKind::Choose, "go", {{"k", 1}}}) == "2");
    CHECK(p.size() == 1);
  }

  TEST_CASE("suggestions drop invalid actions") {
    const auto u = sda::test::universe({"pan", "tomato"});
    sda::CallbackProposer p([](const sda::ProposerRequest& r) {
      CHECK(r.kind == sda::RequestKind::Suggest);
      CHECK(r.context.at("violated") == "agent.holding=nothing");
      return std::string("1. (put down, pan)\n2. (teleport, tomato)\n3. (find, ghost)");
    });
    sda::DiagnosisReport r;
    r.error_class = sda::ErrorClass::PreconditionDeep;
    r.failed = {"pick up", "tomato"};
    r.violated = sda::GroundedAssignment{"agent.holding", "nothing"};
    std::vector<std::string> warnings;
    const auto s = sda::suggest_corrections(p, r, {{"pick up", "tomato"}}, "go", {}, u, &warnings);
    CHECK(s == sda::Plan{{"put down", "pan"}});
    CHECK(warnings.size() == 2);

    sda::CallbackProposer empty([](const sda::ProposerRequest&) { return std::string(""); });
    CHECK(sda::suggest_corrections(empty, r, {}, "go", {}, u).empty());
  }

  TEST_CASE("choose") {
    int calls = 0;
    sda::CallbackProposer p([&](const sda::ProposerRequest& r) {
      ++calls;
      CHECK(r.context.at("options").size() == 3);
      return std::string("2");
    });
    CHECK(sda::choose(p, {kThree[0]}, "go", {}) == 0);
    CHECK(calls == 0);
    CHECK(sda::choose(p, kThree, "go", {}) == 2);
    sda::CallbackProposer bad([](const sda::ProposerRequest&) { return std::string("the second one"); });
    CHECK(sda::choose(bad, kThree, "go", {}) == 0);
  }

  TEST_CASE("prompts render the context") {
    const auto text = sda::render_prompt({sda::RequestKind::Decompose, "put the bread on the table", {{"objects", {"bread"}}}});
    CHECK(text.find("put the bread on the table") != std::string::npos);
    CHECK(text.find("bread") != std::string::npos);
    CHECK(text.find("{{") == std::string::npos);
  }

  TEST_CASE("http request carries model, temperature and seed") {
    StubServer server({{200, "1"}});
    auto cfg = stub_config(server);
    cfg.api_key = "secret-token";
    std::vector<std::string> logs;
    sda::HttpProposer p(cfg, [&](const std::string& m) { logs.push_back(m); });
    CHECK(sda::choose(p, kThree, "go", {}) == 1);
    const auto bodies = server.bodies();
    REQUIRE(bodies.size() == 1);
    CHECK(bodies[0].at("temperature") == 0.0);
    CHECK(bodies[0].at("seed") == 1);
    CHECK(bodies[0].at("model") == cfg.model);
    CHECK(bodies[0].at("messages").back().at("role") == "user");
    CHECK(server.auth_headers()[0] == "Bearer secret-token");
    for (const auto& l : logs) CHECK(l.find("secret-token") == std::string::npos);
  }

  TEST_CASE("http retries server errors") {
    StubServer server({{500, "boom"}, {500, "boom"}, {200, "0"}});
    auto cfg = stub_config(server);
    cfg.retries = 2;
    std::vector<std::string> logs;
    sda::HttpProposer p(cfg, [&](const std::string& m) { logs.push_back(m); });
    CHECK(sda::choose(p, kThree, "go", {}) == 0);
    CHECK(p.last_retries() == 2);
    CHECK(logs.size() == 2);
    CHECK(server.bodies().size() == 3);
  }

  TEST_CASE("http gives up after the retry budget") {
    StubServer server({{429, "slow down"}});
    auto cfg = stub_config(server);
    cfg.retries = 1;
    sda::HttpProposer p(cfg);
    CHECK_THROWS_AS(p.complete({sda::RequestKind::Choose, "go", {}}), sda::ProposerError);
    CHECK(server.bodies().size() == 2);
  }

  TEST_CASE("http does not retry client errors") {
    StubServer server({{404, "no such model"}});
    sda::HttpProposer p(stub_config(server));
    CHECK_THROWS_AS(p.complete({sda::RequestKind::Choose, "go", {}}), sda::ProposerError);
    CHECK(server.bodies().size() == 1);
  }

  TEST_CASE("http garbage answer falls back to option 0") {
    StubServer server({{200, "I cannot decide"}});
    sda::HttpProposer p(stub_config(server));
    std::vector<std::string> warnings;
    CHECK(sda::select_plan(kThree, "go", {}, p, &warnings) == kThree[0]);
    CHECK(warnings.size() == 1);
  }

  TEST_CASE("http config validation") {
    sda::HttpProposerConfig c;
    c.temperature = -1;
    CHECK_THROWS_AS(sda::HttpProposer{c}, sda::SchemaError);
    c.temperature = 0;
    c.retries = -1;
    CHECK_THROWS_AS(sda::HttpProposer{c}, sda::SchemaError);
    c.retries = 0;
    c.endpoint = "ftp://nowhere";
    CHECK_THROWS_AS(sda::HttpProposer{c}, sda::ProposerError);
  }
}
