/*
 * Copyright 2026 The Chromatic Tree Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "chromatic/sim/tree_harness.hpp"

#include <algorithm>
#include <memory>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "chromatic/sync/llx_scx.hpp"
#include "chromatic/tree/tree.hpp"

namespace chromatic::sim {

using metrics::OpKind;

std::vector<std::vector<OpSpec>> parse_workload(std::string_view text) {
  std::vector<std::vector<OpSpec>> out(1);
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (c == ';') {
      out.emplace_back();
      ++i;
      continue;
    }
    if (c == ',' || c == ' ' || c == '\n' || c == '\t') {
      ++i;
      continue;
    }
    OpSpec op;
    switch (c) {
      case 'i':
        op.kind = OpKind::kInsert;
        break;
      case 'd':
        op.kind = OpKind::kDelete;
        break;
      case 'f':
        op.kind = OpKind::kFind;
        break;
      default:
        throw std::invalid_argument(std::string("workload: unknown operation '") + c + "'");
    }
    ++i;
    std::size_t start = i;
    while (i < text.size() && text[i] >= '0' && text[i] <= '9') ++i;
    if (start == i) throw std::invalid_argument("workload: missing key");
    op.key = std::stoull(std::string(text.substr(start, i - start)));
    if (op.key == kInf) throw std::invalid_argument("workload: reserved key");
    out.back().push_back(op);
  }
  return out;
}

std::string format_workload(const std::vector<std::vector<OpSpec>>& workload) {
  std::ostringstream out;
  for (std::size_t p = 0; p < workload.size(); ++p) {
    if (p != 0) out << ';';
    for (std::size_t j = 0; j < workload[p].size(); ++j) {
      if (j != 0) out << ',';
      const OpSpec& op = workload[p][j];
      out << (op.kind == OpKind::kInsert ? 'i' : op.kind == OpKind::kDelete ? 'd' : 'f') << op.key;
    }
  }
  return out.str();
}

namespace {

std::unordered_map<const Node*, const Node*> parents(const ChromaticTree& tree) {
  std::unordered_map<const Node*, const Node*> parent;
  std::vector<const Node*> todo{tree.entry()};
  parent[tree.entry()] = nullptr;
  while (!todo.empty()) {
    const Node* n = todo.back();
    todo.pop_back();
    if (n->leaf) continue;
    for (Side s : {kLeft, kRight}) {
      const Node* c = n->peek(s);
      parent[c] = n;
      todo.push_back(c);
    }
  }
  return parent;
}

std::unordered_set<const Node*> search_path(const ChromaticTree& tree, Key k) {
  std::unordered_set<const Node*> path;
  const Node* n = tree.entry();
  for (;;) {
    path.insert(n);
    if (n->leaf) break;
    n = n->peek(k < n->key ? kLeft : kRight);
  }
  return path;
}

std::string describe(const Node* n) {
  std::ostringstream out;
  out << "node " << n->id << " (key ";
  if (n->key == kInf) {
    out << "INF";
  } else {
    out << n->key;
  }
  out << ", weight " << n->weight << ')';
  return out.str();
}

}  // namespace

TreeRunResult run_tree(const TreeScenario& scenario, Chooser& chooser) {
  TreeOptions opts;
  opts.reclaim = sync::ReclaimMode::kRetain;
  opts.legacy_restart = scenario.legacy_restart;
  std::unique_ptr<ChromaticTree> tree;
  if (!scenario.initial_dump.empty()) {
    tree = ChromaticTree::build_from_dump(scenario.initial_dump, opts);
  } else {
    tree = std::make_unique<ChromaticTree>(opts);
  }
  const std::uint32_t n_procs = static_cast<std::uint32_t>(scenario.workload.size());
  {
    Process setup(*tree, n_procs + 1000);
    for (Key k : scenario.initial_keys) tree->insert(k, setup);
  }
  const std::uint64_t base_insert = tree->stats().insert_success.load();
  const std::uint64_t base_delete = tree->stats().delete_success.load();
  const std::uint64_t base_rebal = tree->stats().rebalance_success.load();
  auto& engine = sync::engine_stats();
  const std::uint64_t base_aba = engine.aba_detected.load();
  const std::uint64_t base_terminal = engine.terminal_conflicts.load();

  TreeRunResult result;
  result.setup_i = base_insert;
  result.setup_rebal = base_rebal;
  {
    auto keys = tree->keys();
    result.history.initial.insert(keys.begin(), keys.end());
  }

  std::vector<std::unique_ptr<Process>> procs;
  std::vector<ProcSpec> specs;
  for (std::uint32_t p = 0; p < n_procs; ++p) procs.push_back(std::make_unique<Process>(*tree, p));
  std::vector<std::vector<verify::Event>> events(n_procs);
  for (std::uint32_t p = 0; p < n_procs; ++p) {
    Process* proc = procs[p].get();
    const auto* ops = &scenario.workload[p];
    auto* log = &events[p];
    ChromaticTree* t = tree.get();
    specs.push_back({&proc->ctx(), [proc, ops, log, t, p] {
                       for (const OpSpec& op : *ops) {
                         bool r = false;
                         switch (op.kind) {
                           case OpKind::kFind:
                             r = t->find(op.key, *proc);
                             break;
                           case OpKind::kInsert:
                             r = t->insert(op.key, *proc);
                             break;
                           case OpKind::kDelete:
                             r = t->erase(op.key, *proc);
                             break;
                         }
                         log->push_back(
                             {p, op.kind, op.key, proc->ctx().window_first(), proc->ctx().window_last(), r});
                       }
                     }});
  }

  const std::uint32_t checks = scenario.checks;
  std::vector<Checker> checkers;
  checkers.push_back([&](std::uint64_t step) -> std::optional<std::string> {
    const bool need_census = (checks & kCheckCensus) != 0 || scenario.sample_bounds;
    if (need_census) {
      std::uint64_t v = total_violations(tree->census_between_steps());
      std::uint64_t incomplete = 0;
      std::uint64_t active = 0;
      for (auto& pr : procs) {
        if (!pr->in_op()) continue;
        ++active;
        if (pr->op_kind() != OpKind::kFind) ++incomplete;
      }
      result.max_violations = std::max(result.max_violations, v);
      if (scenario.sample_bounds) {
        result.samples.push_back({step, v, incomplete, tree->user_height(), active,
                                  static_cast<std::uint64_t>(tree->keys().size())});
      }
      if ((checks & kCheckCensus) != 0 && v > incomplete) {
        return "census has " + std::to_string(v) + " violations with " + std::to_string(incomplete) +
               " incomplete updates";
      }
    }
    if ((checks & (kCheckCleanupStack | kCheckSearchPath)) == 0) return std::nullopt;
    auto parent = parents(*tree);
    for (auto& pr : procs) {
      if (!pr->in_op()) continue;
      if ((checks & kCheckCleanupStack) != 0 && pr->in_cleanup()) {
        for (const Node* n : pr->cleanup_stack()) {
          auto it = parent.find(n);
          if (it == parent.end()) continue;
          const Node* up = it->second;
          if (n->weight > 1 || (n->weight == 0 && up != nullptr && up->weight == 0)) {
            return "process " + std::to_string(pr->pid()) + " has violation at reachable cleanup-stack " +
                   describe(n);
          }
        }
      }
      if ((checks & kCheckSearchPath) != 0) {
        auto path = search_path(*tree, pr->op_key());
        for (const auto* stack : {&pr->update_stack(), &pr->cleanup_stack()}) {
          for (const Node* n : *stack) {
            if (parent.count(n) != 0 && path.count(n) == 0) {
              return "process " + std::to_string(pr->pid()) + " stack holds reachable " + describe(n) +
                     " off the search path for " + std::to_string(pr->op_key());
            }
          }
        }
      }
    }
    return std::nullopt;
  });
  if ((checks & kCheckEngine) != 0) {
    checkers.push_back([&](std::uint64_t) -> std::optional<std::string> {
      if (engine.aba_detected.load() != base_aba) return std::string("info field ABA detected");
      if (engine.terminal_conflicts.load() != base_terminal) return std::string("SCX record left a terminal state");
      return std::nullopt;
    });
  }

  RunOutcome run = run_processes(specs, chooser, checkers, {scenario.max_steps, scenario.record_trace});
  result.trace = std::move(run.trace);
  result.steps = run.steps;
  result.grants = std::move(run.grants);

  for (std::uint32_t p = 0; p < n_procs; ++p) {
    auto rows = procs[p]->recorder().take_rows();
    std::uint64_t sum = 0;
    for (const auto& r : rows) sum += r.steps;
    if ((checks & kCheckSteps) != 0 && sum != result.grants[p]) {
      throw CheckerViolation("process " + std::to_string(p) + " recorded " + std::to_string(sum) + " steps but was granted " +
                                 std::to_string(result.grants[p]),
                             result.trace);
    }
    result.rows.insert(result.rows.end(), rows.begin(), rows.end());
    result.history.events.insert(result.history.events.end(), events[p].begin(), events[p].end());
  }
  procs.clear();

  result.i = tree->stats().insert_success.load() - base_insert;
  result.d = tree->stats().delete_success.load() - base_delete;
  result.rebal_total = tree->stats().rebalance_success.load() - base_rebal;
  result.final_dump = tree->dump();
  result.final_keys = tree->keys();
  result.structure = verify::check_structure(tree->dump_lines());
  if ((checks & kCheckStructure) != 0) {
    // Violations may legitimately remain only while updates are running;
    // at the end every update has finished its cleanup.
    if (!result.structure.ok() || result.structure.violations != 0) {
      std::string msg = "final structure check failed";
      for (const auto& p : result.structure.problems) msg += "; " + p;
      if (result.structure.violations != 0) msg += "; violations remain";
      throw CheckerViolation(msg, result.trace);
    }
  }
  if (result.history.events.size() <= verify::kMaxHistoryEvents) {
    result.history_checked = true;
    result.linearizable = verify::check_linearizable(result.history);
    if ((checks & kCheckHistory) != 0 && !result.linearizable) {
      throw CheckerViolation("history is not linearizable", result.trace);
    }
  }
  return result;
}

TreeExploreResult explore_tree(const TreeScenario& scenario, ExploreOptions options) {
  TreeExploreResult out;
  TreeScenario sc = scenario;
  sc.record_trace = true;
  auto run = [&](Chooser& chooser, std::uint64_t max_steps) -> std::uint64_t {
    sc.max_steps = max_steps;
    TreeRunResult r = run_tree(sc, chooser);
    if (r.history_checked) ++out.histories;
    out.max_violations = std::max(out.max_violations, r.max_violations);
    return r.steps;
  };
  out.summary = enumerate(run, static_cast<std::uint32_t>(scenario.workload.size()), options);
  return out;
}

}  // namespace chromatic::sim
