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

#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sda/executor.hpp"
#include "sda/rational.hpp"

namespace sda {

/// Per-episode record as persisted by a batch.
struct EpisodeRecord {
  std::string scenario;
  Strategy strategy = Strategy::Sda;
  bool success = false;
  Rational goal_fraction;
  int corrections = 0;
  double seconds = 0.0;

  bool operator==(const EpisodeRecord&) const = default;
};

EpisodeRecord make_record(const EpisodeResult& r, double seconds = 0.0);
nlohmann::json record_to_json(const EpisodeRecord& r, bool timing = false);
EpisodeRecord record_from_json(const nlohmann::json& doc);

struct MetricsRow {
  Strategy strategy = Strategy::Sda;
  Rational sr;
  Rational gc;
  Rational no_ec;
  int episodes = 0;
  std::optional<double> seconds;

  bool operator==(const MetricsRow&) const = default;
};

struct MetricsTable {
  std::vector<MetricsRow> rows;
  bool operator==(const MetricsTable&) const = default;
};

/// SR = successes / N, GC = mean goal fraction, No.EC = mean corrections
/// over every episode. Rows follow `order`; strategies without episodes get
/// a zero row with N = 0.
MetricsTable compute_metrics(const std::vector<EpisodeRecord>& records,
                             const std::vector<Strategy>& order, bool timing = false);

enum class ReportFormat { Table, Json, Csv };
ReportFormat report_format_from_string(const std::string& text);

/// Columns: Strategy, SR, GC, No.EC, N, Time. Rates are printed as
/// percentages in table/csv form; json keeps exact rationals.
std::string emit_report(const MetricsTable& m, ReportFormat format,
                        std::vector<std::string>* warnings = nullptr);
nlohmann::json table_to_json(const MetricsTable& m);
MetricsTable table_from_json(const nlohmann::json& doc);

using ProposerFactory = std::function<std::unique_ptr<Proposer>(const Scenario&)>;

/// Scripted proposer built from the scenario's own table (empty if absent).
std::unique_ptr<Proposer> scripted_for(const Scenario& sc);

struct BatchConfig {
  std::vector<Strategy> strategies = {Strategy::Sda, Strategy::Local, Strategy::Global, Strategy::None,
                                      Strategy::SdaNoTree};
  int jobs = 1;
  ExecConfig exec;
  /// KB for scenarios that name none.
  std::optional<std::filesystem::path> default_kb;
  ProposerFactory proposer = scripted_for;
  bool timing = false;
  /// When set, per-episode records are written here as episodes.jsonl.
  std::optional<std::filesystem::path> results_dir;
};

struct BatchError {
  std::string file;
  std::string message;
};

struct BatchResult {
  std::vector<EpisodeRecord> records;  // sorted by scenario, then strategy order
  std::vector<BatchError> errors;
  MetricsTable table;
};

/// Scenario files (*.json) directly inside dir, sorted by name.
std::vector<std::filesystem::path> scenario_files(const std::filesystem::path& dir);

BatchResult run_batch(const std::filesystem::path& scenario_dir, const BatchConfig& config);

/// Full deterministic batch report (table, episodes, errors).
nlohmann::json batch_to_json(const BatchResult& b, bool timing = false);

}  // namespace sda
