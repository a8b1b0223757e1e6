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

#include "sda/proposer.hpp"

#include <cctype>
#include <cstdint>
#include <iomanip>
#include <regex>
#include <sstream>

#include "sda/errors.hpp"
#include "sda/prompts_data.hpp"

namespace sda {

using nlohmann::json;

std::string_view to_string(RequestKind kind) {
  switch (kind) {
    case RequestKind::Decompose: return "decompose";
    case RequestKind::Suggest: return "suggest";
    case RequestKind::Choose: return "choose";
    case RequestKind::KbEff: return "kb_eff";
    case RequestKind::KbDep: return "kb_dep";
  }
  return "?";
}

RequestKind request_kind_from_string(std::string_view text) {
  for (auto k : {RequestKind::Decompose, RequestKind::Suggest, RequestKind::Choose,
                 RequestKind::KbEff, RequestKind::KbDep})
    if (to_string(k) == text) return k;
  throw ParseError("unknown request kind '" + std::string(text) + "'");
}

std::string fingerprint(const ProposerRequest& request) {
  const json canonical = {{"instruction", request.instruction}, {"context", request.context}};
  const std::string text = std::string(to_string(request.kind)) + "\n" + canonical.dump();
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

ScriptedProposer ScriptedProposer::from_json(const json& table) {
  if (!table.is_array()) throw ParseError("scripted table must be an array");
  ScriptedProposer p;
  for (const auto& entry : table) {
    if (!entry.is_object() || !entry.contains("response") || !entry["response"].is_string())
      throw ParseError("scripted entry needs a string 'response'");
    std::string response = entry["response"].get<std::string>();
    if (entry.contains("fingerprint")) {
      p.add(entry["fingerprint"].get<std::string>(), std::move(response));
      continue;
    }
    if (!entry.contains("kind")) throw ParseError("scripted entry needs 'fingerprint' or 'kind'");
    ProposerRequest req{request_kind_from_string(entry["kind"].get<std::string>()),
                        entry.value("instruction", std::string()),
                        entry.value("context", json::object())};
    p.add(req, std::move(response));
  }
  return p;
}

void ScriptedProposer::add(const std::string& fp, std::string response) {
  table_[fp] = std::move(response);
}

void ScriptedProposer::add(const ProposerRequest& request, std::string response) {
  add(fingerprint(request), std::move(response));
}

std::string ScriptedProposer::complete(const ProposerRequest& request) {
  ++calls_;
  const std::string fp = fingerprint(request);
  auto it = table_.find(fp);
  if (it == table_.end())
    throw InvalidResponse("scripted table has no entry for " + std::string(to_string(request.kind)) +
                              " request " + fp,
                          json{{"kind", to_string(request.kind)},
                               {"instruction", request.instruction},
                               {"context", request.context}}
                              .dump());
  return it->second;
}

std::string RecordingProposer::complete(const ProposerRequest& request) {
  std::string response = inner_.complete(request);
  std::lock_guard<std::mutex> lock(mu_);
  log_.emplace_back(request, response);
  return response;
}

json RecordingProposer::table() const {
  std::lock_guard<std::mutex> lock(mu_);
  json out = json::array();
  for (const auto& [req, resp] : log_)
    out.push_back({{"kind", to_string(req.kind)},
                   {"instruction", req.instruction},
                   {"context", req.context},
                   {"response", resp}});
  return out;
}

std::string render_prompt(const ProposerRequest& request) {
  const auto& prompts = detail::builtin_prompts();
  std::string text = prompts.at(std::string(to_string(request.kind)));
  auto replace = [&text](const std::string& key, const std::string& value) {
    for (auto pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos + value.size()))
      text.replace(pos, key.size(), value);
  };
  replace("{{instruction}}", request.instruction);
  replace("{{context}}", request.context.dump());
  return text;
}

json chat_request_body(const HttpProposerConfig& config, const ProposerRequest& request) {
  return {{"model", config.model},
          {"temperature", config.temperature},
          {"seed", config.seed},
          {"messages",
           json::array({{{"role", "system"}, {"content", "You are a careful embodied task planner."}},
                        {{"role", "user"}, {"content", render_prompt(request)}}})}};
}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string unquote(std::string s) {
  s = trim(s);
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
    s = s.substr(1, s.size() - 2);
  return trim(s);
}

bool step_is_valid(const MidLevelAction& m, const Universe& u) {
  return u.kb->has_action(m.action) && u.objects.count(m.object);
}

json base_context(const json& context) { return context.is_object() ? context : json::object(); }

}  // namespace

Plan parse_plan(const std::string& raw) {
  static const std::regex line_re(R"(^\s*\d+\s*[.)]\s*\(\s*([^,()]+?)\s*,\s*([^()]+?)\s*\)\s*$)");
  Plan plan;
  std::istringstream in(raw);
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::smatch m;
    if (!std::regex_match(line, m, line_re))
      throw InvalidResponse("unparseable plan line '" + trim(line) + "'", raw);
    plan.push_back({unquote(m[1].str()), unquote(m[2].str())});
  }
  return plan;
}

Plan decompose(Proposer& proposer, const std::string& instruction, const json& context,
               const Universe& u) {
  if (trim(instruction).empty()) throw SchemaError("decompose: instruction is empty");
  ProposerRequest req{RequestKind::Decompose, instruction, base_context(context)};
  const std::string raw = proposer.complete(req);
  Plan plan = parse_plan(raw);
  for (const auto& step : plan)
    if (!step_is_valid(step, u)) throw InvalidResponse("plan step " + step.str() + " is not grounded", raw);
  if (plan.empty()) throw InvalidResponse("empty plan", raw);
  return plan;
}

Plan suggest_corrections(Proposer& proposer, const DiagnosisReport& report, const Plan& subseq,
                         const std::string& instruction, const json& context, const Universe& u,
                         std::vector<std::string>* warnings) {
  json ctx = base_context(context);
  ctx["failed"] = report.failed.str();
  if (report.violated) ctx["violated"] = report.violated->str();
  ctx["subsequence"] = plan_to_json(subseq);
  ProposerRequest req{RequestKind::Suggest, instruction, ctx};
  Plan out;
  for (auto& step : parse_plan(proposer.complete(req))) {
    if (step_is_valid(step, u)) {
      out.push_back(std::move(step));
    } else if (warnings) {
      warnings->push_back("dropped invalid suggestion " + step.str());
    }
  }
  return out;
}

int choose(Proposer& proposer, const std::vector<Plan>& options, const std::string& instruction,
           const json& context, std::vector<std::string>* warnings) {
  if (options.empty()) throw SchemaError("choose: no options");
  if (options.size() == 1) return 0;
  json ctx = base_context(context);
  json rendered = json::array();
  for (const auto& o : options) rendered.push_back(render_plan(o));
  ctx["options"] = rendered;
  ProposerRequest req{RequestKind::Choose, instruction, ctx};
  const std::string raw = proposer.complete(req);
  const std::string text = trim(raw);
  static const std::regex index_re(R"(^\d+$)");
  if (std::regex_match(text, index_re) && text.size() < 9) {
    int idx = std::stoi(text);
    if (idx >= 0 && idx < static_cast<int>(options.size())) return idx;
  }
  if (warnings) warnings->push_back("choose: unusable answer '" + text + "', using option 0");
  return 0;
}

json plan_to_json(const Plan& plan) {
  json out = json::array();
  for (const auto& s : plan) out.push_back(json::array({s.action, s.object}));
  return out;
}

Plan plan_from_json(const json& doc) {
  if (!doc.is_array()) throw ParseError("plan must be an array of [action, object]");
  Plan plan;
  for (const auto& s : doc) {
    if (!s.is_array() || s.size() != 2 || !s[0].is_string() || !s[1].is_string())
      throw ParseError("plan steps must be [\"action\", \"object\"]");
    plan.push_back({s[0].get<std::string>(), s[1].get<std::string>()});
  }
  return plan;
}

}  // namespace sda
