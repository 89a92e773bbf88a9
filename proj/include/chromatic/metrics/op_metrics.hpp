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
#include <iosfwd>
#include <string>
#include <vector>

namespace chromatic::metrics {

enum class Phase : std::uint8_t { kUpdate, kCleanup };
enum class OpKind : std::uint8_t { kFind, kInsert, kDelete };

const char* to_string(OpKind kind);

/// Counters for one completed operation.
struct OpMetrics {
  std::uint32_t pid = 0;
  std::uint64_t seq = 0;
  OpKind kind = OpKind::kFind;
  std::uint64_t key = 0;
  bool result = false;
  std::uint64_t attempts_up = 0;
  std::uint64_t attempts_cp = 0;
  std::uint64_t pushes_up = 0;
  std::uint64_t pushes_cp = 0;
  std::uint64_t pops_up = 0;
  std::uint64_t pops_cp = 0;
  std::uint64_t steps = 0;
  std::uint64_t c_dot = 0;  // max sampled active-op count
  std::uint64_t n_op = 0;   // max sampled set size
  std::uint64_t rebal_success = 0;
  std::uint64_t failed_llx = 0;
  std::uint64_t failed_scx = 0;
  std::uint64_t failed_nil = 0;

  std::uint64_t counter_sum() const { return attempts_up + attempts_cp + pushes_up + pushes_cp; }
};

/// Shared gauges sampled by every operation on one structure. Relaxed
/// ordering: the samples are a lower bound on true point contention under
/// real threads and exact under the deterministic scheduler.
struct Gauges {
  std::atomic<std::int64_t> active{0};
  std::atomic<std::int64_t> size{0};
};

/// Per-process accumulator. Not thread-safe; one per process.
class OpRecorder {
 public:
  explicit OpRecorder(std::uint32_t pid = 0) : pid_(pid) {}

  void set_keep_rows(bool keep) { keep_rows_ = keep; }
  void bind(Gauges* gauges) { gauges_ = gauges; }

  void begin(OpKind kind, std::uint64_t key, std::uint64_t steps_now);
  void record_attempt(Phase phase);
  void record_push(Phase phase);
  void record_pop(Phase phase);
  void record_rebalance(bool success);
  void record_failure(int reason);  // 1 llx, 2 scx, 3 nil
  void sample();
  const OpMetrics& end(bool result, std::uint64_t steps_now);

  bool in_op() const { return in_op_; }
  const OpMetrics& current() const { return cur_; }
  const std::vector<OpMetrics>& rows() const { return rows_; }
  std::vector<OpMetrics> take_rows() { return std::move(rows_); }
  std::uint64_t ops() const { return seq_; }

 private:
  std::uint32_t pid_;
  Gauges* gauges_ = nullptr;
  bool keep_rows_ = true;
  bool in_op_ = false;
  std::uint64_t seq_ = 0;
  std::uint64_t steps_at_begin_ = 0;
  OpMetrics cur_;
  std::vector<OpMetrics> rows_;
};

void write_csv_header(std::ostream& out);
void write_csv_row(std::ostream& out, const OpMetrics& m);
void write_csv(std::ostream& out, const std::vector<OpMetrics>& rows);
/// Reads what write_csv wrote. Throws std::invalid_argument on malformed input.
std::vector<OpMetrics> read_csv(std::istream& in);

/// Aggregate means over a set of rows.
struct Summary {
  std::uint64_t ops = 0;
  std::uint64_t updates = 0;
  double mean_steps = 0;
  double mean_update_steps = 0;
  double mean_attempts_up = 0;
  double mean_attempts_cp = 0;
  double mean_pushes_up = 0;
  double mean_pushes_cp = 0;
  std::uint64_t c_dot_alpha = 0;  // max over ops
  std::uint64_t max_n = 0;
  std::uint64_t rebal_success = 0;
};

Summary summarize(const std::vector<OpMetrics>& rows);

/// Ratio bound steps <= K * counter_sum for update operations.
struct StepBound {
  double k = 0;

  /// Smallest K covering every update row (ceil to a multiple of 0.5).
  static StepBound calibrate(const std::vector<OpMetrics>& rows);
  /// Index of the first update row exceeding the bound, or -1.
  std::int64_t first_violation(const std::vector<OpMetrics>& rows) const;
};

/// Twice the largest ratio seen in the sequential calibration sweep (14.0).
/// The factor covers helping, which a lone process never does.
inline constexpr double kSequentialStepK = 14.0;
inline constexpr double kFrozenStepK = 2 * kSequentialStepK;

}  // namespace chromatic::metrics
