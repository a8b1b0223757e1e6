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

#include <atomic>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sda/diagnosis.hpp"
#include "sda/sim.hpp"

namespace sda {

enum class RequestKind { Decompose, Suggest, Choose, KbEff, KbDep };

std::string_view to_string(RequestKind kind);
RequestKind request_kind_from_string(std::string_view text);

struct ProposerRequest {
  RequestKind kind = RequestKind::Decompose;
  std::string instruction;
  /// Kind-specific structured payload (visible objects, failed step,
  /// violated precondition, options, ...).
  nlohmann::json context = nlohmann::json::object();
};

/// Stable 16 hex digit hash of the kind and the canonical JSON of
/// instruction + context. Key order and whitespace do not matter.
std::string fingerprint(const ProposerRequest& request);

/// Anything that can answer a request with raw text. Implementations must be
/// safe to call from concurrent episodes.
class Proposer {
 public:
  virtual ~Proposer() = default;
  virtual std::string complete(const ProposerRequest& request) = 0;
};

/// Canned answers looked up by exact fingerprint. A miss raises
/// InvalidResponse naming the fingerprint; there is no default answer.
class ScriptedProposer : public Proposer {
 public:
  ScriptedProposer() = default;
  /// Accepts [{"fingerprint", "response"} | {"kind", "instruction"?,
  /// "context", "response"}, ...].
  static ScriptedProposer from_json(const nlohmann::json& table);

  void add(const std::string& fingerprint, std::string response);
  void add(const ProposerRequest& request, std::string response);
  std::string complete(const ProposerRequest& request) override;

  std::size_t size() const { return table_.size(); }
  std::size_t calls() const { return calls_; }

 private:
  std::map<std::string, std::string> table_;
  std::size_t calls_ = 0;
};

/// Forwards to a function; used by the Python bindings and fixture tooling.
class CallbackProposer : public Proposer {
 public:
  using Fn = std::function<std::string(const ProposerRequest&)>;
  explicit CallbackProposer(Fn fn) : fn_(std::move(fn)) {}
  std::string complete(const ProposerRequest& request) override { return fn_(request); }

 private:
  Fn fn_;
};

/// Wraps another proposer and keeps every (request, response) pair, in call
/// order. Lets a run be frozen into a scripted table.
class RecordingProposer : public Proposer {
 public:
  explicit RecordingProposer(Proposer& inner) : inner_(inner) {}
  std::string complete(const ProposerRequest& request) override;
  nlohmann::json table() const;

 private:
  Proposer& inner_;
  mutable std::mutex mu_;
  std::vector<std::pair<ProposerRequest, std::string>> log_;
};

struct HttpProposerConfig {
  std::string endpoint = "http://127.0.0.1:8000/v1/chat/completions";
  std::string model = "gpt-4o-mini";
  double temperature = 0.0;
  int seed = 1;
  double timeout_s = 60.0;
  int retries = 2;
  int backoff_ms = 500;
  std::string api_key;

  /// SDA_PROPOSER_ENDPOINT, SDA_PROPOSER_MODEL and SDA_PROPOSER_API_KEY
  /// override the corresponding fields when set.
  HttpProposerConfig with_env_overrides() const;
  void validate() const;
};

/// Chat-completions client. Retries transport failures and 5xx/429 replies.
class HttpProposer : public Proposer {
 public:
  using LogFn = std::function<void(const std::string&)>;

  explicit HttpProposer(HttpProposerConfig config, LogFn log = {});
  std::string complete(const ProposerRequest& request) override;

  const HttpProposerConfig& config() const { return config_; }
  /// Retries spent by the most recent call.
  int last_retries() const { return last_retries_.load(); }

 private:
  HttpProposerConfig config_;
  LogFn log_;
  std::atomic<int> last_retries_{0};
};

/// Request body {model, temperature, seed, messages}.
nlohmann::json chat_request_body(const HttpProposerConfig& config, const ProposerRequest& request);
/// Prompt text from the built-in template for the request kind.
std::string render_prompt(const ProposerRequest& request);

/// Parses numbered "N. (action, object)" lines. Blank lines are ignored;
/// anything else raises InvalidResponse carrying the raw text.
Plan parse_plan(const std::string& raw);

/// Asks for a full plan. Every step must name a known skill and object.
Plan decompose(Proposer& proposer, const std::string& instruction, const nlohmann::json& context,
               const Universe& u);

/// Corrective actions for a precondition failure. Unknown skills or objects
/// are dropped with a warning.
Plan suggest_corrections(Proposer& proposer, const DiagnosisReport& report, const Plan& subseq,
                         const std::string& instruction, const nlohmann::json& context,
                         const Universe& u, std::vector<std::string>* warnings = nullptr);

/// Index of the preferred option. A single option short-circuits without a
/// request; malformed or out-of-range answers yield 0 with a warning.
int choose(Proposer& proposer, const std::vector<Plan>& options, const std::string& instruction,
           const nlohmann::json& context, std::vector<std::string>* warnings = nullptr);

nlohmann::json plan_to_json(const Plan& plan);
Plan plan_from_json(const nlohmann::json& doc);

}  // namespace sda
