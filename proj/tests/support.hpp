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
#include <string>

#include <nlohmann/json.hpp>

#include "sda/kb.hpp"
#include "sda/scenario.hpp"
#include "sda/sdg.hpp"
#include "sda/sim.hpp"

namespace sda::test {

inline std::filesystem::path data_dir() { return SDA_TEST_DATA; }

inline const ActionKB& alfred_kb() {
  static const ActionKB kb = load_kb(data_dir() / "kb" / "alfred_kb.json");
  return kb;
}

inline const StateDependencyGraph& alfred_graph() {
  static const StateDependencyGraph g(alfred_kb());
  return g;
}

inline Scenario fixture(const std::string& name) {
  return load_scenario(data_dir() / "scenarios" / (name + ".json"));
}

inline Universe universe(std::set<std::string> objects) { return Universe{&alfred_kb(), std::move(objects)}; }

/// Kitchen world with every alfred variable assigned for the given objects.
inline WorldState kitchen(const std::set<std::string>& objects, const std::string& agent_at,
                          const std::string& holding = "nothing") {
  WorldState w;
  w.assignments["agent.position"] = agent_at;
  w.assignments["agent.holding"] = holding;
  for (const auto& o : objects) {
    w.assignments["opened(" + o + ")"] = "false";
    w.assignments["sliced(" + o + ")"] = "false";
    w.assignments["toggled(" + o + ")"] = "off";
    w.assignments["position(" + o + ")"] = "countertop";
  }
  return w;
}

}  // namespace sda::test
