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

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <vector>

namespace chromatic::sync {

/// How records removed from the structure are returned to the allocator.
enum class ReclaimMode : std::uint8_t {
  /// Epoch-based deferred reclamation: a retired record is freed only after
  /// every participant has passed a quiescent point later than the retire.
  kEpoch,
  /// Nothing is freed before the domain is destroyed. Used under the
  /// deterministic scheduler so traces can inspect dead records.
  kRetain,
};

using Deleter = void (*)(void*);

struct Retired {
  void* ptr;
  Deleter deleter;
  std::uint64_t epoch;
};

/// Per-process reclamation state. Owned by the domain, handed out by
/// `ReclaimDomain::join`.
struct Participant {
  std::atomic<bool> active{false};
  std::atomic<std::uint64_t> epoch{0};
  std::atomic<bool> in_use{false};
  std::deque<Retired> limbo;
  std::size_t since_scan = 0;
};

class ReclaimDomain {
 public:
  explicit ReclaimDomain(ReclaimMode mode, std::size_t max_participants = 256);
  ~ReclaimDomain();

  ReclaimDomain(const ReclaimDomain&) = delete;
  ReclaimDomain& operator=(const ReclaimDomain&) = delete;

  ReclaimMode mode() const { return mode_; }

  Participant* join();
  void leave(Participant* p);

  // Critical section brackets; an operation holds record references only
  // between enter and exit.
  void enter(Participant& p);
  void exit(Participant& p);

  /// Registers a fresh allocation. Retain mode takes ownership here.
  void on_allocate(Participant* p, void* ptr, Deleter deleter);

  /// Hands an unlinked record to the domain. Exactly one retire per record.
  void retire(Participant* p, void* ptr, Deleter deleter);

  /// Frees every retired record. Caller guarantees no participant is inside
  /// a critical section. Returns the number of records freed.
  std::size_t drain();

  std::uint64_t epoch() const { return global_epoch_.load(); }
  std::uint64_t freed() const { return freed_.load(); }

 private:
  void try_advance();
  void collect(Participant& p);

  ReclaimMode mode_;
  std::atomic<std::uint64_t> global_epoch_{2};
  std::vector<std::unique_ptr<Participant>> slots_;
  std::atomic<std::uint64_t> freed_{0};

  std::mutex orphan_mu_;
  std::vector<Retired> orphans_;  // limbo of departed participants
  std::mutex retained_mu_;
  std::vector<Retired> retained_;  // retain-mode ownership list
};

/// RAII critical section.
class EpochGuard {
 public:
  EpochGuard(ReclaimDomain* domain, Participant* p) : domain_(domain), p_(p) {
    if (domain_ != nullptr) domain_->enter(*p_);
  }
  ~EpochGuard() {
    if (domain_ != nullptr) domain_->exit(*p_);
  }
  EpochGuard(const EpochGuard&) = delete;
  EpochGuard& operator=(const EpochGuard&) = delete;

 private:
  ReclaimDomain* domain_;
  Participant* p_;
};

}  // namespace chromatic::sync
