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

// LLX/SCX over Data-records, built from single-word CAS.
//
// A Data-record carries a fixed set of mutable reference fields, an `info`
// pointer to the SCX-record it is (or was last) frozen for, and a monotone
// `marked` bit. SCX freezes every record of V in order, marks R, performs
// one update CAS on `fld`, and commits; any process may finish an SCX on the
// owner's behalf through `help`.

#include <array>
#include <atomic>
#include <cassert>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>

#include "chromatic/sync/reclaim.hpp"
#include "chromatic/sync/step.hpp"

namespace chromatic::sync {

enum class ScxState : std::uint8_t { kInProgress, kCommitted, kAborted };

template <class Rec>
struct ScxRecord;

/// Base of every record managed by the engine. `M` is the number of mutable
/// reference fields; immutable payload lives in the derived type.
template <class Rec, std::size_t M>
struct DataRecord {
  static constexpr std::size_t kFields = M;

  explicit DataRecord(RecordId record_id) : id(record_id) {
    info.init(ScxRecord<Rec>::committed_dummy());
    marked.init(false);
  }

  const RecordId id;
  Shared<ScxRecord<Rec>*> info;
  Shared<bool> marked;
  std::array<Shared<Rec*>, M> fields;
};

/// Counters for engine-level invariants, checked by tests.
struct EngineStats {
  std::atomic<std::uint64_t> aba_detected{0};
  std::atomic<std::uint64_t> terminal_conflicts{0};  // commit after abort or vice versa
};
inline EngineStats& engine_stats() {
  static EngineStats stats;
  return stats;
}

template <class Rec>
struct ScxRecord {
  static constexpr std::size_t kMaxV = 6;
  static constexpr std::size_t kFields = Rec::kFields;

  RecordId id = 0;
  std::array<Rec*, kMaxV> v{};
  std::array<bool, kMaxV> finalize{};  // R, aligned with V
  std::array<ScxRecord*, kMaxV> info_fields{};
  std::uint8_t v_size = 0;
  Shared<Rec*>* fld = nullptr;
  RecordId fld_owner = 0;
  Rec* old_value = nullptr;
  Rec* new_value = nullptr;
  Shared<ScxState> state{ScxState::kInProgress};
  Shared<bool> all_frozen{false};

  // Reclamation bookkeeping (epoch mode only): one reference per record
  // whose info points here, plus one held by the invoking process.
  ReclaimDomain* domain = nullptr;
  std::atomic<int> refs{1};
  bool immortal = false;
  std::array<std::atomic<bool>, kMaxV> installed{};

  static ScxRecord* committed_dummy() {
    static ScxRecord dummy = [] {
      ScxRecord d;
      d.state.init(ScxState::kCommitted);
      d.immortal = true;
      return d;
    }();
    return &dummy;
  }

  ScxRecord() = default;
  ScxRecord(const ScxRecord& o) : id(o.id), immortal(o.immortal) { state.init(o.state.peek()); }

  bool counted() const { return !immortal && domain != nullptr && domain->mode() == ReclaimMode::kEpoch; }

  bool try_acquire() {
    if (!counted()) return true;
    int n = refs.load();
    while (n > 0) {
      if (refs.compare_exchange_weak(n, n + 1)) return true;
    }
    return false;
  }

  void release(Participant* p) {
    if (!counted()) return;
    if (refs.fetch_sub(1) == 1) {
      domain->retire(p, this, [](void* ptr) { delete static_cast<ScxRecord*>(ptr); });
    }
  }
};

enum class LlxOutcome : std::uint8_t { kSnapshot, kFail, kFinalized };

template <class Rec>
struct LlxResult {
  LlxOutcome outcome = LlxOutcome::kFail;
  std::array<Rec*, Rec::kFields> values{};
  ScxRecord<Rec>* linked_info = nullptr;

  bool ok() const { return outcome == LlxOutcome::kSnapshot; }
  Rec* operator[](std::size_t i) const { return values[i]; }
};

/// The per-process table of LLX results an SCX links to.
template <class Rec>
class LlxTable {
 public:
  static constexpr std::size_t kCapacity = 8;

  void store(Rec* r, ScxRecord<Rec>* info, const std::array<Rec*, Rec::kFields>& values) {
    for (std::size_t i = 0; i < size_; ++i) {
      if (entries_[i].record == r) {
        entries_[i] = {r, info, values};
        return;
      }
    }
    if (size_ == kCapacity) {
      // Oldest entry can no longer be linked by a bounded-size SCX.
      for (std::size_t i = 1; i < size_; ++i) entries_[i - 1] = entries_[i];
      --size_;
    }
    entries_[size_++] = {r, info, values};
  }

  const auto* find(const Rec* r) const {
    for (std::size_t i = 0; i < size_; ++i) {
      if (entries_[i].record == r) return &entries_[i];
    }
    return static_cast<const Entry*>(nullptr);
  }

  void clear() { size_ = 0; }
  std::size_t size() const { return size_; }

 private:
  struct Entry {
    Rec* record;
    ScxRecord<Rec>* info;
    std::array<Rec*, Rec::kFields> values;
  };
  std::array<Entry, kCapacity> entries_{};
  std::size_t size_ = 0;
};

/// Identifies one mutable field of one record in V.
template <class Rec>
struct FieldRef {
  Rec* owner;
  std::uint8_t index;
};

template <class Rec>
void delete_record(void* p) {
  delete static_cast<Rec*>(p);
}

// Epoch-mode deleter for finalized records: the record's info reference is
// dropped together with the record.
template <class Rec>
void retire_record(void* p) {
  auto* rec = static_cast<Rec*>(p);
  ScxRecord<Rec>* info = rec->info.peek();
  delete rec;
  info->release(nullptr);
}

/// Registers a freshly allocated record with the context's domain.
template <class Rec>
Rec* adopt(ProcessCtx& ctx, Rec* rec) {
  if (ctx.domain() != nullptr) ctx.domain()->on_allocate(ctx.participant(), rec, &delete_record<Rec>);
  return rec;
}

template <class Rec>
bool help(ScxRecord<Rec>* u, ProcessCtx& ctx) {
  // A terminal state is final, so the outcome can be answered without
  // touching V again.
  const ScxState seen = u->state.read(ctx, u->id);
  if (seen == ScxState::kCommitted) return true;
  if (seen == ScxState::kAborted) return false;

  for (std::size_t i = 0; i < u->v_size; ++i) {
    Rec* r = u->v[i];
    ScxRecord<Rec>* rinfo = u->info_fields[i];
    const bool held = u->try_acquire();
    if (held && r->info.cas(ctx, r->id, rinfo, u)) {  // freezing CAS
      if (u->installed[i].exchange(true)) {
        engine_stats().aba_detected.fetch_add(1);
        assert(false && "freezing CAS installed a previously held info value");
      }
      rinfo->release(ctx.participant());
      continue;
    }
    if (held) u->release(ctx.participant());
    if (r->info.read(ctx, r->id) != u) {
      if (u->all_frozen.read(ctx, u->id)) {  // frozen check step
        return true;
      }
      if (u->state.peek() == ScxState::kCommitted) engine_stats().terminal_conflicts.fetch_add(1);
      u->state.write(ctx, u->id, ScxState::kAborted);  // abort step
      return false;
    }
  }
  u->all_frozen.write(ctx, u->id, true);  // frozen step
  for (std::size_t i = 0; i < u->v_size; ++i) {
    if (u->finalize[i]) u->v[i]->marked.write(ctx, u->v[i]->id, true);  // mark step
  }
  u->fld->cas(ctx, u->fld_owner, u->old_value, u->new_value);  // update CAS
  if (u->state.peek() == ScxState::kAborted) engine_stats().terminal_conflicts.fetch_add(1);
  u->state.write(ctx, u->id, ScxState::kCommitted);  // commit step
  return true;
}

template <class Rec>
LlxResult<Rec> llx(Rec* r, ProcessCtx& ctx, LlxTable<Rec>& table) {
  assert(r != nullptr);
  LlxResult<Rec> result;
  // The order of these four reads matters.
  const bool marked1 = r->marked.read(ctx, r->id);
  ScxRecord<Rec>* rinfo = r->info.read(ctx, r->id);
  const ScxState state = rinfo->state.read(ctx, rinfo->id);
  const bool marked2 = r->marked.read(ctx, r->id);

  if (state == ScxState::kAborted || (state == ScxState::kCommitted && !marked2)) {
    for (std::size_t i = 0; i < Rec::kFields; ++i) result.values[i] = r->fields[i].read(ctx, r->id);
    if (r->info.read(ctx, r->id) == rinfo) {
      table.store(r, rinfo, result.values);
      result.outcome = LlxOutcome::kSnapshot;
      result.linked_info = rinfo;
      return result;
    }
  }

  const ScxState again = rinfo->state.read(ctx, rinfo->id);
  if ((again == ScxState::kCommitted || (again == ScxState::kInProgress && help(rinfo, ctx))) && marked1) {
    result.outcome = LlxOutcome::kFinalized;
    return result;
  }
  ScxRecord<Rec>* current = r->info.read(ctx, r->id);
  if (current->state.read(ctx, current->id) == ScxState::kInProgress) help(current, ctx);
  result.outcome = LlxOutcome::kFail;
  return result;
}

/// SCX(V, R, fld, new). V is the freeze order; R must be a subset of V.
/// Every record in V must have a linked LLX in `table`. On success the
/// records of R are retired through the context's domain.
template <class Rec>
bool scx(std::span<Rec* const> v, std::span<Rec* const> r, FieldRef<Rec> fld, Rec* new_value, ProcessCtx& ctx,
         LlxTable<Rec>& table) {
  assert(!v.empty() && v.size() <= ScxRecord<Rec>::kMaxV);
  auto* u = new ScxRecord<Rec>();
  adopt(ctx, u);
  u->id = ctx.next_id();
  u->domain = ctx.domain();
  u->v_size = static_cast<std::uint8_t>(v.size());
  bool fld_linked = false;
  for (std::size_t i = 0; i < v.size(); ++i) {
    u->v[i] = v[i];
    const auto* entry = table.find(v[i]);
    assert(entry != nullptr && "SCX without a linked LLX");
    u->info_fields[i] = entry->info;
    if (v[i] == fld.owner) {
      u->old_value = entry->values[fld.index];
      fld_linked = true;
    }
    for (Rec* rec : r) {
      if (rec == v[i]) u->finalize[i] = true;
    }
  }
  assert(fld_linked && "fld must belong to a record in V");
  (void)fld_linked;
  u->fld = &fld.owner->fields[fld.index];
  u->fld_owner = fld.owner->id;
  u->new_value = new_value;
  assert(u->new_value != u->old_value);

  const bool ok = help(u, ctx);
  table.clear();
  if (ok && u->counted()) {
    for (Rec* rec : r) ctx.domain()->retire(ctx.participant(), rec, &retire_record<Rec>);
  }
  u->release(ctx.participant());
  return ok;
}

template <class Rec>
bool scx(std::initializer_list<Rec*> v, std::initializer_list<Rec*> r, FieldRef<Rec> fld, Rec* new_value,
         ProcessCtx& ctx, LlxTable<Rec>& table) {
  return scx<Rec>(std::span<Rec* const>(v.begin(), v.size()), std::span<Rec* const>(r.begin(), r.size()), fld,
                  new_value, ctx, table);
}

}  // namespace chromatic::sync
