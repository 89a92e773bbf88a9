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

#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "chromatic/metrics/op_metrics.hpp"
#include "chromatic/sync/llx_scx.hpp"
#include "chromatic/sync/reclaim.hpp"
#include "chromatic/tree/dump.hpp"
#include "chromatic/tree/node.hpp"

namespace chromatic {

enum class TransformKind : std::uint8_t {
  kInsert,
  kDelete,
  kBlk,
  kRb1,
  kRb2,
  kW1,
  kW2,
  kW3,
  kW4,
  kW5,
  kW6,
  kW7,
  kPush,
};
inline constexpr std::size_t kTransformKinds = 13;

const char* to_string(TransformKind kind);
inline bool is_rebalancing(TransformKind kind) { return kind != TransformKind::kInsert && kind != TransformKind::kDelete; }

enum class TryResult : std::uint8_t { kSuccess, kFailedLlx, kFailedScx, kFailedNil };

const char* to_string(TryResult r);

/// Reported around every SCX issued by a tree update or rebalancing step.
struct TransformEvent {
  enum class Point : std::uint8_t { kBeforeScx, kAfterScx };
  Point point = Point::kBeforeScx;
  TransformKind kind = TransformKind::kInsert;
  bool mirrored = false;
  bool success = false;
  const Node* u = nullptr;       // node whose child pointer is swung
  const Node* center = nullptr;  // center node (rebalancing) or replaced leaf/parent (updates)
  const Node* replacement = nullptr;
  std::uint32_t pid = 0;
};

struct Violation {
  enum class Kind : std::uint8_t { kRedRed, kOverweight };
  Kind kind = Kind::kRedRed;
  Key key = 0;
  std::uint32_t weight = 0;
  std::uint32_t count = 1;  // weight - 1 for overweight
  std::uint32_t depth = 0;  // from entry
  const Node* at = nullptr;

  friend bool operator==(const Violation& a, const Violation& b) {
    return a.kind == b.kind && a.key == b.key && a.weight == b.weight && a.count == b.count && a.depth == b.depth;
  }
};

std::uint64_t total_violations(const std::vector<Violation>& census);

struct KeyIsSentinel : std::invalid_argument {
  KeyIsSentinel() : std::invalid_argument("key is the reserved sentinel value") {}
};

struct InconsistentSnapshot : std::logic_error {
  InconsistentSnapshot() : std::logic_error("census requested while operations are active") {}
};

struct TreeOptions {
  sync::ReclaimMode reclaim = sync::ReclaimMode::kEpoch;
  /// Restart every attempt from entry (the search without backtracking).
  /// For benchmarking only.
  bool legacy_restart = false;
  std::size_t max_processes = 256;
};

struct TreeStats {
  std::array<std::atomic<std::uint64_t>, kTransformKinds * 2> transforms{};  // [kind * 2 + mirrored]
  std::atomic<std::uint64_t> rebalance_success{0};
  std::atomic<std::uint64_t> rebalance_attempts{0};
  std::atomic<std::uint64_t> insert_success{0};
  std::atomic<std::uint64_t> delete_success{0};

  std::uint64_t count(TransformKind k, bool mirrored) const {
    return transforms[static_cast<std::size_t>(k) * 2 + (mirrored ? 1 : 0)].load();
  }
  std::uint64_t count(TransformKind k) const { return count(k, false) + count(k, true); }
};

class ChromaticTree;

/// Process-local state: execution context, LLX table, phase stacks and the
/// metrics recorder. Must be destroyed before the tree it was created for.
class Process {
 public:
  Process(ChromaticTree& tree, std::uint32_t pid);

  Process(const Process&) = delete;
  Process& operator=(const Process&) = delete;

  std::uint32_t pid() const { return ctx_.pid(); }
  sync::ProcessCtx& ctx() { return ctx_; }
  const sync::ProcessCtx& ctx() const { return ctx_; }
  sync::LlxTable<Node>& table() { return table_; }
  metrics::OpRecorder& recorder() { return recorder_; }
  const metrics::OpRecorder& recorder() const { return recorder_; }

  // Inspection for configuration checkers.
  bool in_op() const { return in_op_; }
  bool in_cleanup() const { return phase_ == metrics::Phase::kCleanup; }
  Key op_key() const { return op_key_; }
  metrics::OpKind op_kind() const { return op_kind_; }
  bool update_done() const { return update_done_; }
  const std::vector<Node*>& update_stack() const { return update_stack_; }
  const std::vector<Node*>& cleanup_stack() const { return cleanup_stack_; }

 private:
  friend class ChromaticTree;

  sync::ProcessCtx ctx_;
  sync::LlxTable<Node> table_;
  metrics::OpRecorder recorder_;
  std::vector<Node*> update_stack_;
  std::vector<Node*> cleanup_stack_;
  metrics::Phase phase_ = metrics::Phase::kUpdate;
  bool in_op_ = false;
  bool update_done_ = false;
  Key op_key_ = 0;
  metrics::OpKind op_kind_ = metrics::OpKind::kFind;
};

/// Lock-free chromatic tree over LLX/SCX.
///
/// Layout: `entry` (key ∞) whose left child is either a sentinel leaf (empty
/// set) or the internal sentinel n∞ whose left subtree is the user region.
/// The user root always has weight 1.
class ChromaticTree {
 public:
  struct SearchResult {
    Node* gp;
    Node* p;
    Node* l;
  };
  using TransformHook = std::function<void(const TransformEvent&)>;

  explicit ChromaticTree(TreeOptions options = {});
  ~ChromaticTree();

  ChromaticTree(const ChromaticTree&) = delete;
  ChromaticTree& operator=(const ChromaticTree&) = delete;

  bool find(Key k, Process& proc);
  bool insert(Key k, Process& proc);
  bool erase(Key k, Process& proc);

  // Phase-level operations. Callers outside the tree use these only from
  // tests and fixtures.
  SearchResult backtracking_search(Key k, std::vector<Node*>& stack, Process& proc);
  TryResult try_insert(Node* p, Node* l, Key k, Process& proc, bool* created);
  TryResult try_delete(Node* gp, Node* p, Node* l, Key k, Process& proc, bool* created);
  TryResult try_rebalance(Node* ggp, Node* gp, Node* p, Node* l, Process& proc);
  void backtracking_cleanup(Key k, Process& proc);

  // Quiescent inspection; unmetered reads.
  /// Throws InconsistentSnapshot when any operation is active.
  std::vector<Violation> census() const;
  /// Census of the current configuration without the quiescence check.
  /// Consistent only under the deterministic scheduler.
  std::vector<Violation> census_between_steps() const;
  std::vector<DumpLine> dump_lines() const;
  std::string dump() const;
  std::vector<Key> keys() const;
  std::uint32_t user_height() const;
  /// Root of the user region, or nullptr when the set is empty.
  Node* user_root() const;

  /// Builds a tree from a dump. Throws DumpParseError on malformed input.
  static std::unique_ptr<ChromaticTree> build_from_dump(std::string_view text, TreeOptions options = {});

  Node* entry() const { return entry_; }
  sync::ReclaimDomain& domain() { return *domain_; }
  metrics::Gauges& gauges() { return gauges_; }
  const TreeStats& stats() const { return stats_; }
  std::int64_t size() const { return gauges_.size.load(); }

  bool legacy_restart() const { return legacy_restart_; }
  void set_legacy_restart(bool on) { legacy_restart_ = on; }
  void set_transform_hook(TransformHook hook) { hook_ = std::move(hook); }

 private:
  class Attempt;
  class OpScope;

  TryResult fix_red_red(Node* u, Node* x, Node* xl, Node* v, Attempt& at);
  TryResult fix_overweight(Node* ggp, Node* u, Node* x, Node* v, Attempt& at);
  void push(std::vector<Node*>& stack, Node* n, Process& proc);
  Node* pop(std::vector<Node*>& stack, Process& proc);
  void help_if_in_progress(Node* l, Process& proc);
  void adopt_setup(Node* n);

  std::unique_ptr<sync::ReclaimDomain> domain_;
  Node* entry_ = nullptr;
  bool legacy_restart_ = false;
  metrics::Gauges gauges_;
  TreeStats stats_;
  TransformHook hook_;
};

}  // namespace chromatic
