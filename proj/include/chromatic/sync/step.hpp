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
#include <cstdint>

namespace chromatic::sync {

using RecordId = std::uint64_t;

/// Kind of a single shared-memory access. One access is one step.
enum class StepKind : std::uint8_t { kRead, kWrite, kCas };

const char* to_string(StepKind kind);

class ReclaimDomain;
struct Participant;

/// Hook invoked before every shared-memory access of a process.
///
/// The deterministic scheduler installs one of these per logical process and
/// suspends the caller inside `before_step` until the access is granted.
class StepObserver {
 public:
  virtual ~StepObserver() = default;
  virtual void before_step(StepKind kind, RecordId record) = 0;
};

/// Process-local execution context shared by every layer above the engine.
///
/// Holds the step counter, the optional scheduler gate and the process's
/// reclamation participant. Not thread-safe: one context per process.
class ProcessCtx {
 public:
  ProcessCtx(std::uint32_t pid, ReclaimDomain* domain);
  ~ProcessCtx();

  ProcessCtx(const ProcessCtx&) = delete;
  ProcessCtx& operator=(const ProcessCtx&) = delete;

  std::uint32_t pid() const { return pid_; }
  std::uint64_t steps() const { return steps_; }
  ReclaimDomain* domain() const { return domain_; }
  Participant* participant() const { return participant_; }

  void set_observer(StepObserver* observer) { observer_ = observer; }
  StepObserver* observer() const { return observer_; }

  void step(StepKind kind, RecordId record) {
    if (observer_ != nullptr) {
      observer_->before_step(kind, record);
    }
    ++steps_;
    if (window_open_ && !window_started_) {
      window_first_ = clock_;
      window_started_ = true;
    }
    window_last_ = clock_;
  }

  /// Fresh record id, unique across processes and deterministic per process.
  RecordId next_id() { return (static_cast<RecordId>(pid_) + 1) << 40 | ++id_seq_; }

  // Logical clock, advanced by the scheduler before granting a step. Used to
  // stamp the first and last access of an operation for history recording.
  void set_clock(std::uint64_t clock) { clock_ = clock; }
  std::uint64_t clock() const { return clock_; }
  void open_window() {
    window_open_ = true;
    window_started_ = false;
  }
  void close_window() { window_open_ = false; }
  std::uint64_t window_first() const { return window_first_; }
  std::uint64_t window_last() const { return window_last_; }

  // Set when process-local state relevant to configuration checkers changes
  // (an operation starts or ends). Cleared by the scheduler.
  void note_boundary() { boundary_ = true; }
  bool take_boundary() {
    bool b = boundary_;
    boundary_ = false;
    return b;
  }

 private:
  std::uint32_t pid_;
  std::uint64_t steps_ = 0;
  StepObserver* observer_ = nullptr;
  ReclaimDomain* domain_;
  Participant* participant_ = nullptr;
  RecordId id_seq_ = 0;
  std::uint64_t clock_ = 0;
  bool window_open_ = false;
  bool window_started_ = false;
  std::uint64_t window_first_ = 0;
  std::uint64_t window_last_ = 0;
  bool boundary_ = false;
};

/// A shared-memory cell. Every metered access reports one step to the
/// owning process's context before touching memory.
template <class T>
class Shared {
 public:
  Shared() = default;
  explicit Shared(T value) : value_(value) {}

  T read(ProcessCtx& ctx, RecordId owner) const {
    ctx.step(StepKind::kRead, owner);
    return value_.load();
  }

  void write(ProcessCtx& ctx, RecordId owner, T value) {
    ctx.step(StepKind::kWrite, owner);
    value_.store(value);
  }

  bool cas(ProcessCtx& ctx, RecordId owner, T expected, T desired) {
    ctx.step(StepKind::kCas, owner);
    return value_.compare_exchange_strong(expected, desired);
  }

  // Unmetered access for records not yet published, for verifiers running
  // at quiescence, and for teardown.
  T peek() const { return value_.load(); }
  void init(T value) { value_.store(value, std::memory_order_relaxed); }

 private:
  std::atomic<T> value_{};
};

}  // namespace chromatic::sync
