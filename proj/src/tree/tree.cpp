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

#include "chromatic/tree/tree.hpp"

#include <algorithm>
#include <cassert>
#include <functional>

namespace chromatic {

using sync::LlxOutcome;
using sync::ScxState;

const char* to_string(TransformKind kind) {
  static constexpr const char* kNames[] = {"INSERT", "DELETE", "BLK", "RB1", "RB2", "W1", "W2",
                                           "W3",     "W4",     "W5",  "W6",  "W7",  "PUSH"};
  return kNames[static_cast<std::size_t>(kind)];
}

const char* to_string(TryResult r) {
  switch (r) {
    case TryResult::kSuccess:
      return "success";
    case TryResult::kFailedLlx:
      return "failed-llx";
    case TryResult::kFailedScx:
      return "failed-scx";
    case TryResult::kFailedNil:
      return "failed-nil";
  }
  return "?";
}

std::uint64_t total_violations(const std::vector<Violation>& census) {
  std::uint64_t n = 0;
  for (const auto& v : census) n += v.count;
  return n;
}

Process::Process(ChromaticTree& tree, std::uint32_t pid) : ctx_(pid, &tree.domain()), recorder_(pid) {
  recorder_.bind(&tree.gauges());
}

namespace {

// The two nodes above the user region carry key ∞. A replacement hung
// directly below one of them becomes the user root (or the empty-tree
// sentinel) and is given weight 1.
bool pins_weight(const Node* u) { return u->key == kInf; }

}  // namespace

/// One LLX/SCX attempt: linked snapshots, freshly built nodes, and the SCX.
class ChromaticTree::Attempt {
 public:
  struct Snap {
    Node* c[2];
    int side_of(const Node* n) const { return c[kLeft] == n ? kLeft : (c[kRight] == n ? kRight : -1); }
  };

  Attempt(ChromaticTree& tree, Process& proc) : tree_(tree), proc_(proc) { proc_.table().clear(); }

  ~Attempt() {
    if (!published_ && tree_.domain_->mode() == sync::ReclaimMode::kEpoch) {
      for (std::size_t i = 0; i < n_fresh_; ++i) delete fresh_[i];
    }
  }

  Process& proc() { return proc_; }

  /// LLX with reuse: a record already snapshotted in this attempt keeps its
  /// linked result.
  const Snap* llx(Node* r) {
    for (std::size_t i = 0; i < n_snaps_; ++i) {
      if (snapped_[i] == r) return &snaps_[i];
    }
    auto res = sync::llx(r, proc_.ctx(), proc_.table());
    if (res.outcome != LlxOutcome::kSnapshot) return nullptr;
    assert(n_snaps_ < snaps_.size());
    snapped_[n_snaps_] = r;
    snaps_[n_snaps_] = Snap{{res[kLeft], res[kRight]}};
    return &snaps_[n_snaps_++];
  }

  /// New node with `near` on side d and `far` on the other side.
  Node* make(Side d, Key key, std::uint32_t weight, Node* near, Node* far) {
    Node* left = d == kLeft ? near : far;
    Node* right = d == kLeft ? far : near;
    return make_lr(key, weight, left, right);
  }

  Node* make_lr(Key key, std::uint32_t weight, Node* left, Node* right) {
    assert(n_fresh_ < fresh_.size());
    auto* n = new Node(proc_.ctx().next_id(), key, weight, left, right);
    sync::adopt(proc_.ctx(), n);
    fresh_[n_fresh_++] = n;
    return n;
  }

  TryResult commit(TransformKind kind, bool mirrored, const Node* center, std::initializer_list<Node*> v,
                   std::initializer_list<Node*> r, Node* u, Side du, Node* n) {
    TransformEvent ev;
    ev.kind = kind;
    ev.mirrored = mirrored;
    ev.u = u;
    ev.center = center;
    ev.replacement = n;
    ev.pid = proc_.pid();
    if (tree_.hook_) tree_.hook_(ev);
    const bool ok = sync::scx<Node>(v, r, sync::FieldRef<Node>{u, static_cast<std::uint8_t>(du)}, n, proc_.ctx(),
                                    proc_.table());
    published_ = ok;
    ev.point = TransformEvent::Point::kAfterScx;
    ev.success = ok;
    if (ok) tree_.stats_.transforms[static_cast<std::size_t>(kind) * 2 + (mirrored ? 1 : 0)].fetch_add(1);
    if (tree_.hook_) tree_.hook_(ev);
    if (is_rebalancing(kind)) proc_.recorder().record_rebalance(ok);
    return ok ? TryResult::kSuccess : TryResult::kFailedScx;
  }

 private:
  ChromaticTree& tree_;
  Process& proc_;
  std::array<Node*, 8> snapped_{};
  std::array<Snap, 8> snaps_{};
  std::size_t n_snaps_ = 0;
  std::array<Node*, 6> fresh_{};
  std::size_t n_fresh_ = 0;
  bool published_ = false;
};

/// Brackets one public operation: reclamation critical section, metrics
/// row, history window and the active-operation gauge.
class ChromaticTree::OpScope {
 public:
  OpScope(ChromaticTree& tree, Process& proc, metrics::OpKind kind, Key key)
      : proc_(proc), guard_(&tree.domain(), proc.ctx().participant()) {
    proc_.in_op_ = true;
    proc_.update_done_ = false;
    proc_.op_key_ = key;
    proc_.op_kind_ = kind;
    proc_.phase_ = metrics::Phase::kUpdate;
    proc_.update_stack_.clear();
    proc_.cleanup_stack_.clear();
    proc_.ctx().open_window();
    proc_.recorder().begin(kind, key, proc_.ctx().steps());
    proc_.ctx().note_boundary();
  }

  bool finish(bool result) {
    proc_.recorder().end(result, proc_.ctx().steps());
    proc_.ctx().close_window();
    proc_.in_op_ = false;
    proc_.phase_ = metrics::Phase::kUpdate;
    proc_.update_stack_.clear();
    proc_.cleanup_stack_.clear();
    proc_.ctx().note_boundary();
    return result;
  }

 private:
  Process& proc_;
  sync::EpochGuard guard_;
};

ChromaticTree::ChromaticTree(TreeOptions options)
    : domain_(std::make_unique<sync::ReclaimDomain>(options.reclaim, options.max_processes)),
      legacy_restart_(options.legacy_restart) {
  auto* left = new Node(2, kInf, 1, nullptr, nullptr);
  auto* right = new Node(3, kInf, 1, nullptr, nullptr);
  entry_ = new Node(1, kInf, 1, left, right);
  adopt_setup(left);
  adopt_setup(right);
  adopt_setup(entry_);
}

void ChromaticTree::adopt_setup(Node* n) {
  domain_->on_allocate(nullptr, n, &sync::delete_record<Node>);
}

ChromaticTree::~ChromaticTree() {
  if (domain_->mode() != sync::ReclaimMode::kEpoch) return;  // the domain owns every node
  domain_->drain();
  std::vector<Node*> todo{entry_};
  while (!todo.empty()) {
    Node* n = todo.back();
    todo.pop_back();
    if (!n->leaf) {
      todo.push_back(n->peek(kLeft));
      todo.push_back(n->peek(kRight));
    }
    auto* info = n->info.peek();
    delete n;
    info->release(nullptr);
  }
  domain_->drain();
}

void ChromaticTree::push(std::vector<Node*>& stack, Node* n, Process& proc) {
  stack.push_back(n);
  proc.recorder().record_push(proc.phase_);
}

Node* ChromaticTree::pop(std::vector<Node*>& stack, Process& proc) {
  assert(!stack.empty());
  Node* n = stack.back();
  stack.pop_back();
  proc.recorder().record_pop(proc.phase_);
  return n;
}

void ChromaticTree::help_if_in_progress(Node* l, Process& proc) {
  auto& ctx = proc.ctx();
  auto* info = l->info.read(ctx, l->id);
  if (info->state.read(ctx, info->id) == ScxState::kInProgress) sync::help(info, ctx);
}

bool ChromaticTree::find(Key k, Process& proc) {
  if (k == kInf) throw KeyIsSentinel();
  OpScope scope(*this, proc, metrics::OpKind::kFind, k);
  auto& ctx = proc.ctx();
  Node* l = entry_;
  while (!l->leaf) l = l->child(ctx, k < l->key ? kLeft : kRight);
  return scope.finish(l->key == k);
}

ChromaticTree::SearchResult ChromaticTree::backtracking_search(Key k, std::vector<Node*>& stack, Process& proc) {
  auto& ctx = proc.ctx();
  Node* l = stack.empty() ? entry_ : pop(stack, proc);
  while (l->marked.read(ctx, l->id)) {
    help_if_in_progress(l, proc);
    l = pop(stack, proc);
  }
  while (!l->leaf) {
    push(stack, l, proc);
    l = l->child(ctx, k < l->key ? kLeft : kRight);
  }
  Node* p = pop(stack, proc);
  Node* gp = stack.empty() ? nullptr : stack.back();
  return {gp, p, l};
}

bool ChromaticTree::insert(Key k, Process& proc) {
  if (k == kInf) throw KeyIsSentinel();
  OpScope scope(*this, proc, metrics::OpKind::kInsert, k);
  auto& stack = proc.update_stack_;
  bool created = false;
  bool result = false;
  for (;;) {
    if (legacy_restart_) stack.clear();
    auto [gp, p, l] = backtracking_search(k, stack, proc);
    if (l->key == k) break;
    proc.recorder().record_attempt(metrics::Phase::kUpdate);
    const auto r = try_insert(p, l, k, proc, &created);
    if (r == TryResult::kSuccess) {
      result = true;
      break;
    }
    proc.recorder().record_failure(static_cast<int>(r));
  }
  proc.update_done_ = true;
  if (result) {
    gauges_.size.fetch_add(1, std::memory_order_relaxed);
    stats_.insert_success.fetch_add(1, std::memory_order_relaxed);
  }
  proc.ctx().note_boundary();
  if (created) backtracking_cleanup(k, proc);
  return scope.finish(result);
}

bool ChromaticTree::erase(Key k, Process& proc) {
  if (k == kInf) throw KeyIsSentinel();
  OpScope scope(*this, proc, metrics::OpKind::kDelete, k);
  auto& stack = proc.update_stack_;
  bool created = false;
  bool result = false;
  for (;;) {
    if (legacy_restart_) stack.clear();
    auto [gp, p, l] = backtracking_search(k, stack, proc);
    if (l->key != k) break;
    proc.recorder().record_attempt(metrics::Phase::kUpdate);
    const auto r = try_delete(gp, p, l, k, proc, &created);
    if (r == TryResult::kSuccess) {
      result = true;
      break;
    }
    proc.recorder().record_failure(static_cast<int>(r));
  }
  proc.update_done_ = true;
  if (result) {
    gauges_.size.fetch_sub(1, std::memory_order_relaxed);
    stats_.delete_success.fetch_add(1, std::memory_order_relaxed);
  }
  proc.ctx().note_boundary();
  if (created) backtracking_cleanup(k, proc);
  return scope.finish(result);
}

TryResult ChromaticTree::try_insert(Node* p, Node* l, Key k, Process& proc, bool* created) {
  Attempt at(*this, proc);
  if (created != nullptr) *created = false;
  const auto* sp = at.llx(p);
  if (sp == nullptr) return TryResult::kFailedLlx;
  const int side = sp->side_of(l);
  if (side < 0) return TryResult::kFailedLlx;
  if (at.llx(l) == nullptr) return TryResult::kFailedLlx;

  const std::uint32_t w = pins_weight(p) ? 1 : l->weight - 1;
  Node* fresh = at.make_lr(k, 1, nullptr, nullptr);
  Node* copy = at.make_lr(l->key, 1, nullptr, nullptr);
  Node* n = k < l->key ? at.make_lr(l->key, w, fresh, copy) : at.make_lr(k, w, copy, fresh);
  const auto r = at.commit(TransformKind::kInsert, side == kRight, l, {p, l}, {l}, p, static_cast<Side>(side), n);
  if (r == TryResult::kSuccess && created != nullptr) *created = n->weight == 0 && p->weight == 0;
  return r;
}

TryResult ChromaticTree::try_delete(Node* gp, Node* p, Node* l, Key k, Process& proc, bool* created) {
  (void)k;
  Attempt at(*this, proc);
  if (created != nullptr) *created = false;
  if (gp == nullptr) return TryResult::kFailedNil;
  const auto* sgp = at.llx(gp);
  if (sgp == nullptr) return TryResult::kFailedLlx;
  const int side_p = sgp->side_of(p);
  if (side_p < 0) return TryResult::kFailedLlx;
  const auto* sp = at.llx(p);
  if (sp == nullptr) return TryResult::kFailedLlx;
  const int side_l = sp->side_of(l);
  if (side_l < 0) return TryResult::kFailedLlx;
  Node* s = sp->c[other(static_cast<Side>(side_l))];
  if (at.llx(l) == nullptr) return TryResult::kFailedLlx;
  const auto* ss = at.llx(s);
  if (ss == nullptr) return TryResult::kFailedLlx;

  const bool pinned = pins_weight(gp);
  const std::uint32_t w = pinned ? 1 : p->weight + s->weight;
  Node* n = at.make_lr(s->key, w, ss->c[kLeft], ss->c[kRight]);
  const auto r =
      at.commit(TransformKind::kDelete, side_l == kRight, p, {gp, p, l, s}, {p, l, s}, gp, static_cast<Side>(side_p), n);
  if (r == TryResult::kSuccess && created != nullptr) *created = !pinned && p->weight > 0 && s->weight > 0;
  return r;
}

TryResult ChromaticTree::try_rebalance(Node* ggp, Node* gp, Node* p, Node* l, Process& proc) {
  stats_.rebalance_attempts.fetch_add(1, std::memory_order_relaxed);
  Attempt at(*this, proc);
  TryResult r;
  if (l->weight > 1) {
    r = fix_overweight(ggp, gp, p, l, at);
  } else {
    r = fix_red_red(ggp, gp, p, l, at);
  }
  if (r == TryResult::kSuccess) {
    stats_.rebalance_success.fetch_add(1, std::memory_order_relaxed);
  } else {
    proc.recorder().record_failure(static_cast<int>(r));
  }
  return r;
}

// Red-red violation at v: v and its parent xl have weight 0; x is xl's
// parent and u is x's parent.
TryResult ChromaticTree::fix_red_red(Node* u, Node* x, Node* xl, Node* v, Attempt& at) {
  if (u == nullptr || x == nullptr) return TryResult::kFailedNil;
  const auto* su = at.llx(u);
  if (su == nullptr) return TryResult::kFailedLlx;
  const int du = su->side_of(x);
  if (du < 0) return TryResult::kFailedLlx;
  const auto* sx = at.llx(x);
  if (sx == nullptr) return TryResult::kFailedLlx;
  const int dp_raw = sx->side_of(xl);
  if (dp_raw < 0) return TryResult::kFailedLlx;
  const auto d = static_cast<Side>(dp_raw);
  const auto* sxl = at.llx(xl);
  if (sxl == nullptr) return TryResult::kFailedLlx;
  const int dv = sxl->side_of(v);
  if (dv < 0) return TryResult::kFailedLlx;
  // Nodes on a stack carry no violation, so x is never red here.
  if (x->weight == 0) return TryResult::kFailedNil;

  Node* y = sx->c[other(d)];
  const bool pinned = pins_weight(u);
  const auto sdu = static_cast<Side>(du);

  if (y->weight == 0) {
    if (y->leaf) return TryResult::kFailedNil;
    const auto* sy = at.llx(y);
    if (sy == nullptr) return TryResult::kFailedLlx;
    Node* left = sx->c[kLeft];
    Node* right = sx->c[kRight];
    const auto* sl = left == xl ? sxl : sy;
    const auto* sr = right == xl ? sxl : sy;
    const Node* grand[4] = {sl->c[kLeft], sl->c[kRight], sr->c[kLeft], sr->c[kRight]};
    int ci = 0;
    while (ci < 4 && grand[ci]->weight != 0) ++ci;
    if (ci == 4) return TryResult::kFailedNil;
    const Side cs = ci < 2 ? kLeft : kRight;
    Node* near = sx->c[cs];
    Node* far = sx->c[other(cs)];
    Node* nl = at.make_lr(left->key, 1, sl->c[kLeft], sl->c[kRight]);
    Node* nr = at.make_lr(right->key, 1, sr->c[kLeft], sr->c[kRight]);
    Node* n = at.make_lr(x->key, pinned ? 1 : x->weight - 1, nl, nr);
    return at.commit(TransformKind::kBlk, cs == kRight, grand[ci], {u, x, near, far}, {x, near, far}, u, sdu, n);
  }

  if (dv == d) {
    // RB1: single rotation.
    Node* inner = at.make(d, x->key, 0, sxl->c[other(d)], y);
    Node* n = at.make(d, xl->key, pinned ? 1 : x->weight, sxl->c[d], inner);
    return at.commit(TransformKind::kRb1, d == kRight, v, {u, x, xl}, {x, xl}, u, sdu, n);
  }

  // RB2: double rotation through v.
  if (v->leaf) return TryResult::kFailedNil;
  const auto* sv = at.llx(v);
  if (sv == nullptr) return TryResult::kFailedLlx;
  Node* a = at.make(d, xl->key, 0, sxl->c[d], sv->c[d]);
  Node* b = at.make(d, x->key, 0, sv->c[other(d)], y);
  Node* n = at.make(d, v->key, pinned ? 1 : x->weight, a, b);
  return at.commit(TransformKind::kRb2, d == kRight, v, {u, x, xl, v}, {x, xl, v}, u, sdu, n);
}

// Overweight violation at v; x is v's parent, u is x's parent.
TryResult ChromaticTree::fix_overweight(Node* ggp, Node* u, Node* x, Node* v, Attempt& at) {
  if (u == nullptr || x == nullptr) return TryResult::kFailedNil;
  const auto* su = at.llx(u);
  if (su == nullptr) return TryResult::kFailedLlx;
  const int du = su->side_of(x);
  if (du < 0) return TryResult::kFailedLlx;
  const auto* sx = at.llx(x);
  if (sx == nullptr) return TryResult::kFailedLlx;
  const int d_raw = sx->side_of(v);
  if (d_raw < 0) return TryResult::kFailedLlx;
  const auto d = static_cast<Side>(d_raw);
  const auto od = other(d);
  Node* s = sx->c[od];
  const auto* sv = at.llx(v);
  if (sv == nullptr) return TryResult::kFailedLlx;
  const auto* ss = at.llx(s);
  if (ss == nullptr) return TryResult::kFailedLlx;

  const bool pinned = pins_weight(u);
  const auto sdu = static_cast<Side>(du);
  const std::uint32_t nw = pinned ? 1 : x->weight;
  const bool mirrored = d == kRight;
  auto xl_copy = [&] { return at.make(d, v->key, v->weight - 1, sv->c[d], sv->c[od]); };

  if (s->weight == 0) {
    if (s->leaf) return TryResult::kFailedNil;
    // A red sibling under a red parent is itself a red-red violation; it is
    // fixed first.
    if (x->weight == 0) return fix_red_red(ggp, u, x, s, at);
    Node* inner = ss->c[d];
    Node* outer = ss->c[od];
    if (inner->weight == 0) return fix_red_red(u, x, s, inner, at);
    const auto* si = at.llx(inner);
    if (si == nullptr) return TryResult::kFailedLlx;
    if (inner->weight > 1) {
      Node* ic = at.make(d, inner->key, inner->weight - 1, si->c[d], si->c[od]);
      Node* a = at.make(d, x->key, 1, xl_copy(), ic);
      Node* n = at.make(d, s->key, nw, a, outer);
      return at.commit(TransformKind::kW1, mirrored, v, {u, x, v, s, inner}, {x, v, s, inner}, u, sdu, n);
    }
    if (inner->leaf) return TryResult::kFailedNil;
    Node* il = si->c[d];
    Node* ir = si->c[od];
    if (il->weight == 0) {
      if (il->leaf) return TryResult::kFailedNil;
      const auto* sil = at.llx(il);
      if (sil == nullptr) return TryResult::kFailedLlx;
      Node* left = at.make(d, x->key, 1, xl_copy(), sil->c[d]);
      Node* right = at.make(d, inner->key, 1, sil->c[od], ir);
      Node* mid = at.make(d, il->key, 0, left, right);
      Node* n = at.make(d, s->key, nw, mid, outer);
      return at.commit(TransformKind::kW3, mirrored, v, {u, x, v, s, inner, il}, {x, v, s, inner, il}, u, sdu, n);
    }
    if (ir->weight == 0) {
      if (ir->leaf) return TryResult::kFailedNil;
      const auto* sir = at.llx(ir);
      if (sir == nullptr) return TryResult::kFailedLlx;
      Node* left = at.make(d, x->key, 1, xl_copy(), il);
      Node* irc = at.make(d, ir->key, 1, sir->c[d], sir->c[od]);
      Node* right = at.make(d, s->key, 0, irc, outer);
      Node* n = at.make(d, inner->key, nw, left, right);
      return at.commit(TransformKind::kW4, mirrored, v, {u, x, v, s, inner, ir}, {x, v, s, inner, ir}, u, sdu, n);
    }
    Node* ic = at.make(d, inner->key, 0, si->c[d], si->c[od]);
    Node* a = at.make(d, x->key, 1, xl_copy(), ic);
    Node* n = at.make(d, s->key, nw, a, outer);
    return at.commit(TransformKind::kW2, mirrored, v, {u, x, v, s, inner}, {x, v, s, inner}, u, sdu, n);
  }

  if (s->weight == 1) {
    if (s->leaf) return TryResult::kFailedNil;
    Node* inner = ss->c[d];
    Node* outer = ss->c[od];
    if (outer->weight == 0) {
      if (outer->leaf) return TryResult::kFailedNil;
      const auto* so = at.llx(outer);
      if (so == nullptr) return TryResult::kFailedLlx;
      Node* a = at.make(d, x->key, 1, xl_copy(), inner);
      Node* b = at.make(d, outer->key, 1, so->c[d], so->c[od]);
      Node* n = at.make(d, s->key, nw, a, b);
      return at.commit(TransformKind::kW5, mirrored, v, {u, x, v, s, outer}, {x, v, s, outer}, u, sdu, n);
    }
    if (inner->weight == 0) {
      if (inner->leaf) return TryResult::kFailedNil;
      const auto* si = at.llx(inner);
      if (si == nullptr) return TryResult::kFailedLlx;
      Node* a = at.make(d, x->key, 1, xl_copy(), si->c[d]);
      Node* b = at.make(d, s->key, 1, si->c[od], outer);
      Node* n = at.make(d, inner->key, nw, a, b);
      return at.commit(TransformKind::kW6, mirrored, v, {u, x, v, s, inner}, {x, v, s, inner}, u, sdu, n);
    }
    Node* sc = at.make(d, s->key, 0, ss->c[d], ss->c[od]);
    Node* n = at.make(d, x->key, pinned ? 1 : x->weight + 1, xl_copy(), sc);
    return at.commit(TransformKind::kPush, mirrored, v, {u, x, v, s}, {x, v, s}, u, sdu, n);
  }

  Node* sc = at.make(d, s->key, s->weight - 1, ss->c[d], ss->c[od]);
  Node* n = at.make(d, x->key, pinned ? 1 : x->weight + 1, xl_copy(), sc);
  return at.commit(TransformKind::kW7, mirrored, v, {u, x, v, s}, {x, v, s}, u, sdu, n);
}

void ChromaticTree::backtracking_cleanup(Key k, Process& proc) {
  auto& ctx = proc.ctx();
  auto& stack = proc.cleanup_stack_;
  stack.clear();
  proc.phase_ = metrics::Phase::kCleanup;
  for (;;) {
    if (legacy_restart_) stack.clear();
    Node* l = stack.empty() ? entry_ : pop(stack, proc);
    while (l->marked.read(ctx, l->id)) {
      help_if_in_progress(l, proc);
      l = pop(stack, proc);
    }
    for (;;) {
      const Node* top = stack.empty() ? nullptr : stack.back();
      if (l->weight > 1 || (top != nullptr && top->weight == 0 && l->weight == 0)) {
        Node* p = pop(stack, proc);
        Node* gp = pop(stack, proc);
        Node* ggp = stack.empty() ? nullptr : stack.back();
        proc.recorder().record_attempt(metrics::Phase::kCleanup);
        try_rebalance(ggp, gp, p, l, proc);
        break;
      }
      if (l->leaf) {
        proc.phase_ = metrics::Phase::kUpdate;
        return;
      }
      push(stack, l, proc);
      l = l->child(ctx, k < l->key ? kLeft : kRight);
    }
  }
}

std::vector<Violation> ChromaticTree::census() const {
  if (gauges_.active.load() != 0) throw InconsistentSnapshot();
  return census_between_steps();
}

std::vector<Violation> ChromaticTree::census_between_steps() const {
  std::vector<Violation> out;
  struct Item {
    const Node* n;
    const Node* parent;
    std::uint32_t depth;
  };
  std::vector<Item> todo{{entry_, nullptr, 0}};
  while (!todo.empty()) {
    auto [n, parent, depth] = todo.back();
    todo.pop_back();
    if (n->weight > 1) {
      out.push_back({Violation::Kind::kOverweight, n->key, n->weight, n->weight - 1, depth, n});
    } else if (n->weight == 0 && parent != nullptr && parent->weight == 0) {
      out.push_back({Violation::Kind::kRedRed, n->key, 0, 1, depth, n});
    }
    if (!n->leaf) {
      todo.push_back({n->peek(kRight), n, depth + 1});
      todo.push_back({n->peek(kLeft), n, depth + 1});
    }
  }
  return out;
}

std::vector<DumpLine> ChromaticTree::dump_lines() const {
  std::vector<DumpLine> out;
  std::vector<std::pair<const Node*, std::uint32_t>> todo{{entry_, 0}};
  while (!todo.empty()) {
    auto [n, depth] = todo.back();
    todo.pop_back();
    out.push_back({depth, n->key, n->weight, n->is_marked()});
    if (!n->leaf) {
      todo.emplace_back(n->peek(kRight), depth + 1);
      todo.emplace_back(n->peek(kLeft), depth + 1);
    }
  }
  return out;
}

std::string ChromaticTree::dump() const { return format_dump(dump_lines()); }

Node* ChromaticTree::user_root() const {
  Node* top = entry_->peek(kLeft);
  if (top->leaf) return nullptr;
  return top->peek(kLeft);
}

std::vector<Key> ChromaticTree::keys() const {
  std::vector<Key> out;
  Node* root = user_root();
  if (root == nullptr) return out;
  std::vector<const Node*> todo{root};
  while (!todo.empty()) {
    const Node* n = todo.back();
    todo.pop_back();
    if (n->leaf) {
      out.push_back(n->key);
    } else {
      todo.push_back(n->peek(kRight));
      todo.push_back(n->peek(kLeft));
    }
  }
  return out;
}

std::uint32_t ChromaticTree::user_height() const {
  Node* root = user_root();
  if (root == nullptr) return 0;
  std::uint32_t h = 0;
  std::vector<std::pair<const Node*, std::uint32_t>> todo{{root, 0}};
  while (!todo.empty()) {
    auto [n, depth] = todo.back();
    todo.pop_back();
    h = std::max(h, depth);
    if (!n->leaf) {
      todo.emplace_back(n->peek(kLeft), depth + 1);
      todo.emplace_back(n->peek(kRight), depth + 1);
    }
  }
  return h;
}

std::unique_ptr<ChromaticTree> ChromaticTree::build_from_dump(std::string_view text, TreeOptions options) {
  const auto lines = parse_dump(text);
  if (lines.empty() || lines[0].depth != 0) throw DumpParseError("dump must start with entry at depth 0");
  auto tree = std::make_unique<ChromaticTree>(options);
  sync::RecordId next_id = 16;
  std::size_t pos = 0;
  std::vector<Node*> built;
  std::function<Node*(std::uint32_t)> build = [&](std::uint32_t depth) -> Node* {
    if (pos >= lines.size() || lines[pos].depth != depth) {
      throw DumpParseError("expected node at depth " + std::to_string(depth) + " (line " + std::to_string(pos + 1) +
                           ")");
    }
    const DumpLine line = lines[pos++];
    Node* left = nullptr;
    Node* right = nullptr;
    if (pos < lines.size() && lines[pos].depth == depth + 1) {
      left = build(depth + 1);
      right = build(depth + 1);
    }
    auto* n = new Node(next_id++, line.key, line.weight, left, right);
    n->marked.init(line.marked);
    tree->adopt_setup(n);
    built.push_back(n);
    return n;
  };
  auto fail = [&](const std::string& why) {
    if (tree->domain_->mode() == sync::ReclaimMode::kEpoch) {
      for (Node* n : built) delete n;
    }
    throw DumpParseError(why);
  };
  Node* root = nullptr;
  try {
    root = build(0);
  } catch (const DumpParseError& e) {
    fail(e.what());
  }
  if (pos != lines.size()) fail("trailing lines after the tree");
  if (root->leaf || root->key != kInf) fail("entry must be an internal node with key INF");

  // Swap in the parsed tree; the placeholder sentinels are released with it.
  Node* old = tree->entry_;
  tree->entry_ = root;
  std::int64_t size = 0;
  for (Key k : tree->keys()) size += k != kInf ? 1 : 0;
  tree->gauges_.size.store(size);
  if (tree->domain_->mode() == sync::ReclaimMode::kEpoch) {
    delete old->peek(kLeft);
    delete old->peek(kRight);
    delete old;
  }
  return tree;
}

}  // namespace chromatic
