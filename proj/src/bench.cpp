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

#include "sda/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "sda/errors.hpp"

namespace sda {

using nlohmann::json;

EpisodeRecord make_record(const EpisodeResult& r, double seconds) {
  return {r.scenario_id, r.strategy, r.success, r.goal_fraction, r.corrections, seconds};
}

json record_to_json(const EpisodeRecord& r, bool timing) {
  json doc = {{"scenario", r.scenario},
              {"strategy", to_string(r.strategy)},
              {"success", r.success},
              {"goal_fraction", r.goal_fraction.str()},
              {"corrections", r.corrections}};
  if (timing) doc["seconds"] = r.seconds;
  return doc;
}

EpisodeRecord record_from_json(const json& doc) {
  EpisodeRecord r;
  try {
    r.scenario = doc.at("scenario").get<std::string>();
    r.strategy = strategy_from_string(doc.at("strategy").get<std::string>());
    r.success = doc.at("success").get<bool>();
    r.goal_fraction = Rational::parse(doc.at("goal_fraction").get<std::string>());
    r.corrections = doc.at("corrections").get<int>();
    r.seconds = doc.value("seconds", 0.0);
  } catch (const json::exception& e) {
    throw ParseError(std::string("episode record: ") + e.what());
  }
  return r;
}

MetricsTable compute_metrics(const std::vector<EpisodeRecord>& records, const std::vector<Strategy>& order,
                             bool timing) {
  MetricsTable table;
  for (Strategy s : order) {
    MetricsRow row;
    row.strategy = s;
    Rational successes, gc_sum, ec_sum;
    double seconds = 0.0;
    for (const auto& r : records) {
      if (r.strategy != s) continue;
      ++row.episodes;
      if (r.success) successes = successes + Rational(1);
      gc_sum = gc_sum + r.goal_fraction;
      ec_sum = ec_sum + Rational(r.corrections);
      seconds += r.seconds;
    }
    if (row.episodes > 0) {
      row.sr = successes / row.episodes;
      row.gc = gc_sum / row.episodes;
      row.no_ec = ec_sum / row.episodes;
    }
    if (timing) row.seconds = seconds;
    table.rows.push_back(row);
  }
  return table;
}

ReportFormat report_format_from_string(const std::string& text) {
  if (text == "table") return ReportFormat::Table;
  if (text == "json") return ReportFormat::Json;
  if (text == "csv") return ReportFormat::Csv;
  throw SchemaError("unknown report format '" + text + "'");
}

namespace {

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

std::string percent(const Rational& r) { return fixed(r.value() * 100.0, 2); }

std::vector<std::vector<std::string>> cells(const MetricsTable& m) {
  std::vector<std::vector<std::string>> out;
  for (const auto& r : m.rows)
    out.push_back({std::string(to_string(r.strategy)), percent(r.sr), percent(r.gc), fixed(r.no_ec.value(), 2),
                   std::to_string(r.episodes), r.seconds ? fixed(*r.seconds, 3) : "-"});
  return out;
}

const std::vector<std::string> kColumns = {"Strategy", "SR", "GC", "No.EC", "N", "Time"};

}  // namespace

json table_to_json(const MetricsTable& m) {
  json rows = json::array();
  for (const auto& r : m.rows) {
    json row = {{"Strategy", to_string(r.strategy)},
                {"SR", r.sr.str()},
                {"GC", r.gc.str()},
                {"No.EC", r.no_ec.str()},
                {"N", r.episodes},
                {"Time", nullptr}};
    if (r.seconds) row["Time"] = *r.seconds;
    rows.push_back(row);
  }
  return {{"columns", kColumns}, {"rows", rows}};
}

MetricsTable table_from_json(const json& doc) {
  MetricsTable m;
  try {
    for (const auto& row : doc.at("rows")) {
      MetricsRow r;
      r.strategy = strategy_from_string(row.at("Strategy").get<std::string>());
      r.sr = Rational::parse(row.at("SR").get<std::string>());
      r.gc = Rational::parse(row.at("GC").get<std::string>());
      r.no_ec = Rational::parse(row.at("No.EC").get<std::string>());
      r.episodes = row.at("N").get<int>();
      if (row.contains("Time") && !row["Time"].is_null()) r.seconds = row["Time"].get<double>();
      m.rows.push_back(r);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("metrics table: ") + e.what());
  }
  return m;
}

std::string emit_report(const MetricsTable& m, ReportFormat format, std::vector<std::string>* warnings) {
  const auto body = cells(m);
  std::ostringstream os;
  switch (format) {
    case ReportFormat::Json:
      os << table_to_json(m).dump(2) << "\n";
      break;
    case ReportFormat::Csv:
      if (body.empty() && warnings) warnings->push_back("report has no episodes; csv holds the header only");
      for (std::size_t i = 0; i < kColumns.size(); ++i) os << (i ? "," : "") << kColumns[i];
      os << "\n";
      for (const auto& row : body) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
        os << "\n";
      }
      break;
    case ReportFormat::Table: {
      std::vector<std::size_t> width(kColumns.size());
      for (std::size_t i = 0; i < kColumns.size(); ++i) width[i] = kColumns[i].size();
      for (const auto& row : body)
        for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
      auto line = [&](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) {
          if (i == 0) {
            os << std::left << std::setw(static_cast<int>(width[i])) << row[i];
          } else {
            os << "  " << std::right << std::setw(static_cast<int>(width[i])) << row[i];
          }
        }
        os << "\n";
      };
      line(kColumns);
      std::size_t total = 0;
      for (auto w : width) total += w;
      os << std::string(total + 2 * (width.size() - 1), '-') << "\n";
      for (const auto& row : body) line(row);
      break;
    }
  }
  return os.str();
}

std::unique_ptr<Proposer> scripted_for(const Scenario& sc) {
  if (sc.scripted.is_null()) return std::make_unique<ScriptedProposer>();
  return std::make_unique<ScriptedProposer>(ScriptedProposer::from_json(sc.scripted));
}

std::vector<std::filesystem::path> scenario_files(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ParseError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json") out.push_back(entry.path());
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

struct Loaded {
  Scenario scenario;
  std::shared_ptr<const ActionKB> kb;
  std::shared_ptr<const StateDependencyGraph> graph;
};

}  // namespace

BatchResult run_batch(const std::filesystem::path& scenario_dir, const BatchConfig& config) {
  BatchResult out;
  std::vector<Loaded> loaded;
  std::map<std::string, std::pair<std::shared_ptr<const ActionKB>, std::shared_ptr<const StateDependencyGraph>>>
      kbs;

  for (const auto& file : scenario_files(scenario_dir)) {
    try {
      Scenario sc = load_scenario(file);
      auto kb_path = sc.kb_path ? sc.kb_path : config.default_kb;
      if (!kb_path) throw SchemaError("scenario " + sc.id + " names no KB and no default KB was given");
      const std::string key = std::filesystem::weakly_canonical(*kb_path).string();
      if (!kbs.count(key)) {
        auto kb = std::make_shared<const ActionKB>(load_kb(*kb_path));
        kbs[key] = {kb, std::make_shared<const StateDependencyGraph>(*kb)};
      }
      validate_scenario(sc, *kbs[key].first);
      loaded.push_back({std::move(sc), kbs[key].first, kbs[key].second});
    } catch (const Error& e) {
      out.errors.push_back({file.filename().string(), e.what()});
    }
  }
  std::sort(loaded.begin(), loaded.end(),
            [](const Loaded& a, const Loaded& b) { return a.scenario.id < b.scenario.id; });

  struct Job {
    std::size_t scenario;
    std::size_t strategy;
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < loaded.size(); ++i)
    for (std::size_t s = 0; s < config.strategies.size(); ++s) jobs.push_back({i, s});

  std::vector<std::optional<EpisodeRecord>> slots(jobs.size());
  std::vector<std::string> failures(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      const Loaded& l = loaded[jobs[j].scenario];
      const Strategy strategy = config.strategies[jobs[j].strategy];
      try {
        auto proposer = config.proposer(l.scenario);
        const auto t0 = std::chrono::steady_clock::now();
        EpisodeResult r = run_episode(l.scenario, strategy, *proposer, config.exec, *l.kb, *l.graph);
        const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
        slots[j] = make_record(r, config.timing ? dt.count() : 0.0);
      } catch (const std::exception& e) {
        failures[j] = e.what();
      }
    }
  };
  const int n_threads = std::max(1, std::min<int>(config.jobs, static_cast<int>(jobs.size())));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (std::size_t j = 0; j < jobs.size(); ++j) {
    if (slots[j]) {
      out.records.push_back(*slots[j]);
    } else {
      const Loaded& l = loaded[jobs[j].scenario];
      out.errors.push_back({l.scenario.source.filename().string(),
                            std::string(to_string(config.strategies[jobs[j].strategy])) + ": " + failures[j]});
    }
  }
  out.table = compute_metrics(out.records, config.strategies, config.timing);

  if (config.results_dir) {
    std::filesystem::create_directories(*config.results_dir);
    std::ofstream f(*config.results_dir / "episodes.jsonl");
    if (!f) throw Error("cannot write " + (*config.results_dir / "episodes.jsonl").string());
    for (const auto& r : out.records) f << record_to_json(r, config.timing).dump() << "\n";
  }
  return out;
}

json batch_to_json(const BatchResult& b, bool timing) {
  json episodes = json::array();
  for (const auto& r : b.records) episodes.push_back(record_to_json(r, timing));
  json errors = json::array();
  for (const auto& e : b.errors) errors.push_back({{"file", e.file}, {"message", e.message}});
  return {{"table", table_to_json(b.table)}, {"episodes", episodes}, {"errors", errors}};
}

}  // namespace sda
