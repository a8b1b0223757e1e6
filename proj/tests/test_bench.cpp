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

#include "sda/bench.hpp"
#include "support.hpp"

using nlohmann::json;

namespace {

sda::EpisodeRecord rec(std::string id, sda::Strategy s, bool ok, sda::Rational gf, int corrections) {
  return {std::move(id), s, ok, gf, corrections, 0.0};
}

std::vector<sda::EpisodeRecord> four() {
  return {rec("a", sda::Strategy::Sda, true, 1, 1), rec("b", sda::Strategy::Sda, true, 1, 2),
          rec("c", sda::Strategy::Sda, true, {1, 2}, 3), rec("d", sda::Strategy::Sda, false, 0, 0)};
}

}  // namespace

TEST_SUITE("bench") {
  TEST_CASE("metrics arithmetic") {
    const auto m = sda::compute_metrics(four(), {sda::Strategy::Sda});
    REQUIRE(m.rows.size() == 1);
    CHECK(m.rows[0].sr == sda::Rational(3, 4));
    CHECK(m.rows[0].gc == sda::Rational(5, 8));
    CHECK(m.rows[0].no_ec == sda::Rational(3, 2));
    CHECK(m.rows[0].episodes == 4);
    CHECK_FALSE(m.rows[0].seconds);
  }

  TEST_CASE("json round-trip") {
    auto m = sda::compute_metrics(four(), {sda::Strategy::Sda, sda::Strategy::None});
    CHECK(sda::table_from_json(sda::table_to_json(m)) == m);
    const auto text = sda::emit_report(m, sda::ReportFormat::Json);
    CHECK(sda::table_from_json(json::parse(text)) == m);
    m.rows[0].seconds = 1.5;
    CHECK(sda::table_from_json(sda::table_to_json(m)) == m);
  }

  TEST_CASE("empty csv is header-only with a warning") {
    std::vector<std::string> warnings;
    const auto csv = sda::emit_report(sda::MetricsTable{}, sda::ReportFormat::Csv, &warnings);
    CHECK(csv == "Strategy,SR,GC,No.EC,N,Time\n");
    CHECK(warnings.size() == 1);
  }

  TEST_CASE("table and csv layout") {
    const auto m = sda::compute_metrics(four(), {sda::Strategy::Sda});
    const auto table = sda::emit_report(m, sda::ReportFormat::Table);
    const auto header = table.substr(0, table.find('\n'));
    CHECK(header.find("Strategy") < header.find("SR"));
    CHECK(header.find("SR") < header.find("GC"));
    CHECK(header.find("GC") < header.find("No.EC"));
    CHECK(header.find("No.EC") < header.find("N "));
    CHECK(header.find("Time") != std::string::npos);
    CHECK(table.find("75.00") != std::string::npos);
    CHECK(table.find("62.50") != std::string::npos);
    const auto csv = sda::emit_report(m, sda::ReportFormat::Csv);
    CHECK(csv.find("sda,75.00,62.50,1.50,4,-") != std::string::npos);
  }

  TEST_CASE("unknown report format") {
    CHECK_THROWS(sda::report_format_from_string("xml"));
  }

  TEST_CASE("records round-trip and recompute the table") {
    sda::BatchConfig cfg;
    cfg.jobs = 2;
    const auto b = sda::run_batch(sda::test::data_dir() / "scenarios", cfg);
    CHECK(b.errors.empty());
    const auto doc = sda::batch_to_json(b);
    std::vector<sda::EpisodeRecord> reread;
    for (const auto& e : doc.at("episodes")) reread.push_back(sda::record_from_json(e));
    CHECK(reread == b.records);
    CHECK(sda::compute_metrics(reread, cfg.strategies) == b.table);
    CHECK(sda::table_from_json(doc.at("table")) == b.table);
  }

  TEST_CASE("batch results do not depend on the worker count") {
    sda::BatchConfig one, many;
    many.jobs = 8;
    const auto a = sda::batch_to_json(sda::run_batch(sda::test::data_dir() / "suite", one)).dump();
    const auto b = sda::batch_to_json(sda::run_batch(sda::test::data_dir() / "suite", many)).dump();
    CHECK(a == b);
  }

  TEST_CASE("invalid scenarios are collected and the batch continues") {
    const auto dir = std::filesystem::temp_directory_path() / "sda_bench_invalid";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    json doc;
    std::ifstream(sda::test::data_dir() / "scenarios" / "fig2_kitchen.json") >> doc;
    doc.erase("kb");
    std::ofstream(dir / "a.json") << doc.dump();
    std::ofstream(dir / "b.json") << R"({"id": "broken"})";
    sda::BatchConfig cfg;
    cfg.strategies = {sda::Strategy::Sda};
    cfg.default_kb = sda::test::data_dir() / "kb" / "alfred_kb.json";
    cfg.results_dir = dir / "results";
    const auto b = sda::run_batch(dir, cfg);
    CHECK(b.records.size() == 1);
    REQUIRE(b.errors.size() == 1);
    CHECK(b.errors[0].file.find("b.json") != std::string::npos);
    CHECK(std::filesystem::exists(dir / "results" / "episodes.jsonl"));
  }
}
