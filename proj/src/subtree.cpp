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

#include "sda/subtree.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include "sda/errors.hpp"

namespace sda {

std::vector<CandidateNode> build_candidates(const Plan& original, const Plan& suggestions,
                                            const DiagnosisReport& report) {
  std::vector<CandidateNode> out;
  std::set<MidLevelAction> seen;

  for (std::size_t i = 0; i < original.size();) {
    std::size_t j = i + 1;
    while (j < original.size() && original[j].object == original[i].object) ++j;
    const bool chain = j - i >= 2 && !report.error_items.count(original[i].object);
    if (chain) {
      if (!seen.count(original[i])) {
        CandidateNode head{original[i], CandidateOrigin::Original, true, {}};
        for (std::size_t k = i + 1; k < j; ++k) head.chain_tail.push_back(original[k]);
        seen.insert(original[i]);
        for (const auto& t : head.chain_tail) seen.insert(t);
        out.push_back(std::move(head));
      }
    } else {
      for (std::size_t k = i; k < j; ++k) {
        if (seen.insert(original[k]).second)
          out.push_back({original[k], CandidateOrigin::Original, false, {}});
      }
    }
    i = j;
  }
  for (const auto& s : suggestions)
    if (seen.insert(s).second) out.push_back({s, CandidateOrigin::Proposer, false, {}});
  return out;
}

bool not_covered(const MidLevelAction& parent, const MidLevelAction& child,
                 const StateDependencyGraph& g) {
  const auto parent_vars = g.grounded_effect_variables(parent.action, parent.object);
  const auto child_vars = g.grounded_effect_variables(child.action, child.object);
  return std::any_of(parent_vars.begin(), parent_vars.end(),
                     [&](const std::string& s) { return !child_vars.count(s); });
}

bool satisfied(const MidLevelAction& m, const WorldState& state, const Universe& u) {
  const GroundedSets g = ground_step(m, u);
  return std::all_of(g.dep.begin(), g.dep.end(), [&](const auto& d) { return state.holds(d); });
}

namespace {

std::string resolved_value(const GroundedAssignment& e, const WorldState& state) {
  if (!e.value.empty() && e.value.front() == kCopyPrefix) {
    const std::string* src = state.get(e.value.substr(1));
    return src ? *src : std::string();
  }
  return e.value;
}

bool effects_hold(const MidLevelAction& m, const WorldState& state, const Universe& u) {
  const GroundedSets g = ground_step(m, u);
  return std::all_of(g.eff.begin(), g.eff.end(), [&](const auto& e) {
    const std::string* v = state.get(e.variable);
    return v && *v == resolved_value(e, state);
  });
}

}  // namespace

bool changes(const MidLevelAction& m, const WorldState& state, const Universe& u) {
  return !effects_hold(m, state, u);
}

Plan SearchTree::path_to(int node) const {
  Plan path;
  for (int n = node; n > 0; n = nodes[static_cast<std::size_t>(n)].parent)
    path.push_back(nodes[static_cast<std::size_t>(n)].action);
  std::reverse(path.begin(), path.end());
  return path;
}

SearchTree make_tree(const WorldState& root_state, std::vector<CandidateNode> candidates) {
  SearchTree tree;
  tree.candidates = std::move(candidates);
  TreeNode root;
  root.state = root_state;
  tree.nodes.push_back(std::move(root));
  return tree;
}

std::vector<int> expand_children(SearchTree& tree, int node_index, const StateDependencyGraph& g,
                                 const Universe& u) {
  std::vector<int> created;
  // Copy: push_back below may reallocate the node vector.
  const TreeNode node = tree.nodes[static_cast<std::size_t>(node_index)];

  auto add_child = [&](const MidLevelAction& action, int candidate, int owner, int pos) {
    auto next = apply_action(node.state, action, u);
    TreeNode child;
    child.action = action;
    child.state = std::get<WorldState>(std::move(next));
    child.parent = node_index;
    child.depth = node.depth + 1;
    child.candidate = candidate;
    child.chain_owner = owner;
    child.chain_pos = pos;
    child.used = node.used;
    if (candidate >= 0) child.used.push_back(candidate);
    tree.nodes.push_back(std::move(child));
    created.push_back(static_cast<int>(tree.nodes.size()) - 1);
  };

  // Inside a chain the only child is the next fixed member.
  int owner = node.candidate >= 0 && tree.candidates[static_cast<std::size_t>(node.candidate)].chain_head
                  ? node.candidate
                  : node.chain_owner;
  if (owner >= 0) {
    const Plan& tail = tree.candidates[static_cast<std::size_t>(owner)].chain_tail;
    const int next_pos = node.chain_pos + 1;
    if (next_pos < static_cast<int>(tail.size())) {
      const MidLevelAction& next = tail[static_cast<std::size_t>(next_pos)];
      if (satisfied(next, node.state, u)) add_child(next, -1, owner, next_pos);
      tree.nodes[static_cast<std::size_t>(node_index)].children = created;
      return created;
    }
  }

  for (std::size_t j = 0; j < tree.candidates.size(); ++j) {
    const int cj = static_cast<int>(j);
    if (std::find(node.used.begin(), node.used.end(), cj) != node.used.end()) continue;
    const MidLevelAction& a = tree.candidates[j].action;
    if (!satisfied(a, node.state, u) || !changes(a, node.state, u)) continue;
    if (node_index != 0 && !not_covered(node.action, a, g)) continue;
    add_child(a, cj, -1, -1);
  }
  tree.nodes[static_cast<std::size_t>(node_index)].children = created;
  return created;
}

void expand_tree(SearchTree& tree, int depth_limit, const StateDependencyGraph& g,
                 const Universe& u, std::size_t max_nodes) {
  // Nodes are appended in BFS order, so a cursor over the vector is the queue.
  for (std::size_t cursor = 0; cursor < tree.nodes.size(); ++cursor) {
    if (tree.nodes[cursor].depth >= depth_limit) continue;
    if (tree.nodes.size() >= max_nodes) {
      tree.truncated = true;
      return;
    }
    expand_children(tree, static_cast<int>(cursor), g, u);
  }
}

bool accepts(const SearchTree& tree, int node, const DiagnosisReport& report,
             const Plan& original_suffix, const StateDependencyGraph& g, const Universe& u) {
  const TreeNode& n = tree.nodes[static_cast<std::size_t>(node)];
  const int owner = n.candidate >= 0 && tree.candidates[static_cast<std::size_t>(n.candidate)].chain_head
                        ? n.candidate
                        : n.chain_owner;
  if (owner >= 0 &&
      n.chain_pos + 1 < static_cast<int>(tree.candidates[static_cast<std::size_t>(owner)].chain_tail.size()))
    return false;  // a chain is never cut short

  const Plan path = tree.path_to(node);
  WorldState state = tree.nodes.front().state;
  for (const auto& step : path) {
    auto next = apply_action(state, step, u);
    if (!std::holds_alternative<WorldState>(next)) return false;  // (b)
    state = std::get<WorldState>(std::move(next));
  }
  const WorldState terminal = state;

  if (report.violated) {  // (a)
    const bool ran_failed = std::find(path.begin(), path.end(), report.failed) != path.end();
    if (!ran_failed && !terminal.holds(*report.violated)) return false;
  }

  for (const auto& step : original_suffix) {  // (c)
    auto next = apply_action(state, step, u);
    if (!std::holds_alternative<WorldState>(next)) return false;
    state = std::get<WorldState>(std::move(next));
  }

  for (const auto& c : tree.candidates) {  // (d)
    if (c.origin != CandidateOrigin::Original) continue;
    std::vector<MidLevelAction> members{c.action};
    members.insert(members.end(), c.chain_tail.begin(), c.chain_tail.end());
    for (const auto& m : members) {
      if (g.prep_actions().count(m.action)) continue;
      if (std::find(path.begin(), path.end(), m) != path.end()) continue;
      if (!effects_hold(m, terminal, u)) return false;
    }
  }
  return true;
}

std::vector<Plan> extract_subsequences(const SearchTree& tree, const DiagnosisReport& report,
                                       const Plan& original_suffix, const StateDependencyGraph& g,
                                       const Universe& u, std::size_t max_paths) {
  std::vector<Plan> out;
  for (std::size_t n = 0; n < tree.nodes.size() && out.size() < max_paths; ++n)
    if (accepts(tree, static_cast<int>(n), report, original_suffix, g, u))
      out.push_back(tree.path_to(static_cast<int>(n)));
  if (out.empty())
    throw NoValidPath("no subsequence restores " +
                      (report.violated ? report.violated->str() : std::string("the failed step")) +
                      " while keeping the remaining plan executable");
  return out;
}

Plan select_plan(const std::vector<Plan>& options, const std::string& instruction,
                 const nlohmann::json& context, Proposer& proposer, std::vector<std::string>* warnings) {
  if (options.empty()) throw NoValidPath("select_plan: no options");
  if (options.size() == 1) return options.front();
  try {
    return options[static_cast<std::size_t>(choose(proposer, options, instruction, context, warnings))];
  } catch (const Error& e) {
    if (warnings) warnings->push_back(std::string("choose failed (") + e.what() + "), using option 0");
    return options.front();
  }
}

}  // namespace sda
