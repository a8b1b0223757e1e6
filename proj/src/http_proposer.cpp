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

#include <chrono>
#include <cstdlib>
#include <regex>
#include <thread>

#include <httplib.h>

#include "sda/errors.hpp"
#include "sda/proposer.hpp"

namespace sda {

namespace {

struct Endpoint {
  std::string base;  // scheme://host[:port]
  std::string path;
};

Endpoint split_endpoint(const std::string& url) {
  static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, re)) throw ProposerError("invalid endpoint URL '" + url + "'");
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (url.rfind("https://", 0) == 0) throw ProposerError("https endpoints need a build with OpenSSL");
#endif
  return {m[1].str(), m[2].matched ? m[2].str() : "/"};
}

bool retryable_status(int status) { return status == 429 || status >= 500; }

}  // namespace

HttpProposerConfig HttpProposerConfig::with_env_overrides() const {
  HttpProposerConfig out = *this;
  if (const char* v = std::getenv("SDA_PROPOSER_ENDPOINT"); v && *v) out.endpoint = v;
  if (const char* v = std::getenv("SDA_PROPOSER_MODEL"); v && *v) out.model = v;
  if (const char* v = std::getenv("SDA_PROPOSER_API_KEY"); v && *v) out.api_key = v;
  return out;
}

void HttpProposerConfig::validate() const {
  if (temperature < 0) throw SchemaError("proposer temperature must be >= 0");
  if (retries < 0) throw SchemaError("proposer retries must be >= 0");
  split_endpoint(endpoint);
}

HttpProposer::HttpProposer(HttpProposerConfig config, LogFn log)
    : config_(std::move(config)), log_(std::move(log)) {
  config_.validate();
}

std::string HttpProposer::complete(const ProposerRequest& request) {
  const Endpoint ep = split_endpoint(config_.endpoint);
  const std::string body = chat_request_body(config_, request).dump();

  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  std::string last_error;
  for (int attempt = 0; attempt <= config_.retries; ++attempt) {
    last_retries_ = attempt;
    if (attempt > 0) {
      if (log_) log_("proposer retry " + std::to_string(attempt) + " after: " + last_error);
      std::this_thread::sleep_for(std::chrono::milliseconds(config_.backoff_ms * attempt));
    }
    httplib::Client client(ep.base);
    auto timeout = std::chrono::duration<double>(config_.timeout_s);
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    auto res = client.Post(ep.path, headers, body, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (retryable_status(res->status)) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) throw ProposerError("proposer returned HTTP " + std::to_string(res->status));

    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(res->body);
      return doc.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception&) {
      throw InvalidResponse("chat completion without choices[0].message.content", res->body);
    }
  }
  throw ProposerError("proposer failed after " + std::to_string(config_.retries) +
                      " retries: " + last_error);
}

}  // namespace sda
