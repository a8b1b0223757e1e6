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

#include <stdexcept>
#include <string>

namespace sda {

/// Base of every error raised by the planner library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input document (bad JSON, wrong field types, unknown fields).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Well-formed input that violates a model invariant.
class SchemaError : public Error {
 public:
  using Error::Error;
};

class UnknownObject : public Error {
 public:
  explicit UnknownObject(const std::string& object)
      : Error("unknown object '" + object + "'"), object_(object) {}
  const std::string& object() const { return object_; }

 private:
  std::string object_;
};

class UnknownAction : public Error {
 public:
  explicit UnknownAction(const std::string& action)
      : Error("unknown action '" + action + "'"), action_(action) {}
  const std::string& action() const { return action_; }

 private:
  std::string action_;
};

/// Transport-level proposer failure (network, HTTP status, exhausted retries).
class ProposerError : public Error {
 public:
  using Error::Error;
};

/// Proposer answered, but the answer could not be parsed. Keeps the raw text.
class InvalidResponse : public Error {
 public:
  InvalidResponse(const std::string& what, std::string raw)
      : Error(what), raw_(std::move(raw)) {}
  const std::string& raw() const { return raw_; }

 private:
  std::string raw_;
};

class InconsistentTrace : public Error {
 public:
  using Error::Error;
};

class EmptyGoal : public Error {
 public:
  EmptyGoal() : Error("goal list is empty") {}
};

/// The repair search produced no acceptable subsequence.
class NoValidPath : public Error {
 public:
  using Error::Error;
};

}  // namespace sda
