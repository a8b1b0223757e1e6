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

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "sda/diagnosis.hpp"
#include "sda/proposer.hpp"
#include "sda/sdg.hpp"
#include "sda/sim.hpp"

namespace sda {

enum class CandidateOrigin { Original, Proposer };

/// A selectable node of the repair search. A chain head drags its tail in
/// fixed order; tail members are never selectable on their own.
struct CandidateNode {
  MidLevelAction action;
  CandidateOrigin origin = CandidateOrigin::Original;
  bool chain_head = false;
  Plan chain_tail;

  bool operator==(const CandidateNode&) const = default;
};

/// Merges the original window and the proposer's suggestions, deduplicated
/// by (action, object) with original steps taking precedence. Maximal runs
/// of two or more original steps on the same object outside the error items
/// become a chain.
std::vector<CandidateNode> build_candidates(const Plan& original_subseq, const Plan& suggestions,
                                            const DiagnosisReport& report);

/// True iff the parent writes some grounded variable the child leaves
/// untouched, i.e. the child does not fully override the parent.
bool not_covered(const MidLevelAction& parent, const MidLevelAction& child,
                 const StateDependencyGraph& g);

/// Every grounded dependency holds in the state.
bool satisfied(const MidLevelAction& m, const WorldState& state, const Universe& u);
/// Applying the action would alter at least one variable of the state.
bool changes(const MidLevelAction& m, const WorldState& state, const Universe& u);

struct TreeNode {
  MidLevelAction action;  // empty for the root
  WorldState state;
  int parent = -1;
  int depth = 0;
  /// Index into candidates of the selectable node this is, or -1 for the
  /// root and chain tail members.
  int candidate = -1;
  /// For chain members: owning candidate and position inside its tail
  /// (-1 for the head itself).
  int chain_owner = -1;
  int chain_pos = -1;
  std::vector<int> used;  // V_used: candidate indices along the path
  std::vector<int> children;
};

struct SearchTree {
  std::vector<CandidateNode> candidates;
  /// Node 0 is the root. Nodes are stored in breadth-first order.
  std::vector<TreeNode> nodes;
  bool truncated = false;

  Plan path_to(int node) const;
};

struct RepairConfig {
  /// Extra steps allowed beyond the original window length.
  int extra_depth = 3;
  int max_paths = 5;
  std::size_t max_nodes = 100000;
};

SearchTree make_tree(const WorldState& root_state, std::vector<CandidateNode> candidates);

/// Children of a node per the chain rule, or else the candidates not yet on
/// the path that are satisfied, change the state, and are not covered by the
/// node's action (the root imposes no coverage constraint). Appends the new
/// nodes to the tree and returns their indices.
std::vector<int> expand_children(SearchTree& tree, int node, const StateDependencyGraph& g,
                                 const Universe& u);

/// Breadth-first expansion up to depth_limit.
void expand_tree(SearchTree& tree, int depth_limit, const StateDependencyGraph& g,
                 const Universe& u, std::size_t max_nodes);

/// Why a path is accepted or not; exposed for tests and the repair CLI.
bool accepts(const SearchTree& tree, int node, const DiagnosisReport& report,
             const Plan& original_suffix, const StateDependencyGraph& g, const Universe& u);

/// Accepted root-to-node paths in breadth-first order. A path is accepted
/// when (a) it restores the violated dependency, either by executing the
/// failed step or by ending with s_error = v_need; (b) every step's
/// dependencies hold when applied; (c) the original steps after the window
/// still execute; and (d) every non-preparation step of the original window
/// is either on the path or already has all its effects in the end state.
/// Throws NoValidPath when nothing is accepted.
std::vector<Plan> extract_subsequences(const SearchTree& tree, const DiagnosisReport& report,
                                       const Plan& original_suffix, const StateDependencyGraph& g,
                                       const Universe& u,
                                       std::size_t max_paths = std::numeric_limits<std::size_t>::max());

/// Proposer-assisted pick among accepted paths; never fails.
Plan select_plan(const std::vector<Plan>& options, const std::string& instruction,
                 const nlohmann::json& context, Proposer& proposer,
                 std::vector<std::string>* warnings = nullptr);

}  // namespace sda
