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

#include "chromatic/metrics/op_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace chromatic::metrics {

const char* to_string(OpKind kind) {
  switch (kind) {
    case OpKind::kFind:
      return "find";
    case OpKind::kInsert:
      return "insert";
    case OpKind::kDelete:
      return "delete";
  }
  return "?";
}

void OpRecorder::begin(OpKind kind, std::uint64_t key, std::uint64_t steps_now) {
  cur_ = OpMetrics{};
  cur_.pid = pid_;
  cur_.seq = seq_;
  cur_.kind = kind;
  cur_.key = key;
  steps_at_begin_ = steps_now;
  in_op_ = true;
  if (gauges_ != nullptr) gauges_->active.fetch_add(1, std::memory_order_relaxed);
  sample();
}

void OpRecorder::record_attempt(Phase phase) {
  (phase == Phase::kUpdate ? cur_.attempts_up : cur_.attempts_cp)++;
  sample();
}

void OpRecorder::record_push(Phase phase) { (phase == Phase::kUpdate ? cur_.pushes_up : cur_.pushes_cp)++; }

void OpRecorder::record_pop(Phase phase) { (phase == Phase::kUpdate ? cur_.pops_up : cur_.pops_cp)++; }

void OpRecorder::record_rebalance(bool success) {
  if (success) ++cur_.rebal_success;
}

void OpRecorder::record_failure(int reason) {
  switch (reason) {
    case 1:
      ++cur_.failed_llx;
      break;
    case 2:
      ++cur_.failed_scx;
      break;
    case 3:
      ++cur_.failed_nil;
      break;
    default:
      break;
  }
}

void OpRecorder::sample() {
  if (gauges_ == nullptr) return;
  const auto active = gauges_->active.load(std::memory_order_relaxed);
  const auto size = gauges_->size.load(std::memory_order_relaxed);
  cur_.c_dot = std::max<std::uint64_t>(cur_.c_dot, active > 0 ? static_cast<std::uint64_t>(active) : 0);
  cur_.n_op = std::max<std::uint64_t>(cur_.n_op, size > 0 ? static_cast<std::uint64_t>(size) : 0);
}

const OpMetrics& OpRecorder::end(bool result, std::uint64_t steps_now) {
  sample();
  if (gauges_ != nullptr) gauges_->active.fetch_sub(1, std::memory_order_relaxed);
  cur_.result = result;
  cur_.steps = steps_now - steps_at_begin_;
  in_op_ = false;
  ++seq_;
  if (keep_rows_) rows_.push_back(cur_);
  return cur_;
}

void write_csv_header(std::ostream& out) {
  out << "pid,seq,kind,key,result,attempts_up,attempts_cp,pushes_up,pushes_cp,pops_up,pops_cp,steps,c_dot,n_op,"
         "rebal_success,failed_llx,failed_scx,failed_nil\n";
}

void write_csv_row(std::ostream& out, const OpMetrics& m) {
  out << m.pid << ',' << m.seq << ',' << to_string(m.kind) << ',' << m.key << ',' << (m.result ? 1 : 0) << ','
      << m.attempts_up << ',' << m.attempts_cp << ',' << m.pushes_up << ',' << m.pushes_cp << ',' << m.pops_up << ','
      << m.pops_cp << ',' << m.steps << ',' << m.c_dot << ',' << m.n_op << ',' << m.rebal_success << ','
      << m.failed_llx << ',' << m.failed_scx << ',' << m.failed_nil << '\n';
}

void write_csv(std::ostream& out, const std::vector<OpMetrics>& rows) {
  write_csv_header(out);
  for (const auto& m : rows) write_csv_row(out, m);
}

std::vector<OpMetrics> read_csv(std::istream& in) {
  std::vector<OpMetrics> rows;
  std::string line;
  if (!std::getline(in, line) || line.rfind("pid,seq,kind", 0) != 0) throw std::invalid_argument("metrics csv: bad header");
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 18) throw std::invalid_argument("metrics csv line " + std::to_string(lineno) + ": expected 18 fields");
    try {
      OpMetrics m;
      auto u = [&](int i) { return static_cast<std::uint64_t>(std::stoull(f[i])); };
      m.pid = static_cast<std::uint32_t>(u(0));
      m.seq = u(1);
      if (f[2] == "find") {
        m.kind = OpKind::kFind;
      } else if (f[2] == "insert") {
        m.kind = OpKind::kInsert;
      } else if (f[2] == "delete") {
        m.kind = OpKind::kDelete;
      } else {
        throw std::invalid_argument("kind");
      }
      m.key = u(3);
      m.result = u(4) != 0;
      m.attempts_up = u(5);
      m.attempts_cp = u(6);
      m.pushes_up = u(7);
      m.pushes_cp = u(8);
      m.pops_up = u(9);
      m.pops_cp = u(10);
      m.steps = u(11);
      m.c_dot = u(12);
      m.n_op = u(13);
      m.rebal_success = u(14);
      m.failed_llx = u(15);
      m.failed_scx = u(16);
      m.failed_nil = u(17);
      rows.push_back(m);
    } catch (const std::exception&) {
      throw std::invalid_argument("metrics csv line " + std::to_string(lineno) + ": bad field");
    }
  }
  return rows;
}

Summary summarize(const std::vector<OpMetrics>& rows) {
  Summary s;
  s.ops = rows.size();
  if (rows.empty()) return s;
  double steps = 0, up_steps = 0, a_up = 0, a_cp = 0, p_up = 0, p_cp = 0;
  for (const auto& m : rows) {
    steps += static_cast<double>(m.steps);
    a_up += static_cast<double>(m.attempts_up);
    a_cp += static_cast<double>(m.attempts_cp);
    p_up += static_cast<double>(m.pushes_up);
    p_cp += static_cast<double>(m.pushes_cp);
    if (m.kind != OpKind::kFind) {
      ++s.updates;
      up_steps += static_cast<double>(m.steps);
    }
    s.c_dot_alpha = std::max(s.c_dot_alpha, m.c_dot);
    s.max_n = std::max(s.max_n, m.n_op);
    s.rebal_success += m.rebal_success;
  }
  const auto n = static_cast<double>(rows.size());
  s.mean_steps = steps / n;
  s.mean_update_steps = s.updates == 0 ? 0 : up_steps / static_cast<double>(s.updates);
  s.mean_attempts_up = a_up / n;
  s.mean_attempts_cp = a_cp / n;
  s.mean_pushes_up = p_up / n;
  s.mean_pushes_cp = p_cp / n;
  return s;
}

StepBound StepBound::calibrate(const std::vector<OpMetrics>& rows) {
  double k = 0;
  for (const auto& m : rows) {
    if (m.kind == OpKind::kFind || m.counter_sum() == 0) continue;
    k = std::max(k, static_cast<double>(m.steps) / static_cast<double>(m.counter_sum()));
  }
  return StepBound{std::ceil(k * 2) / 2};
}

std::int64_t StepBound::first_violation(const std::vector<OpMetrics>& rows) const {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& m = rows[i];
    if (m.kind == OpKind::kFind) continue;
    if (static_cast<double>(m.steps) > k * static_cast<double>(m.counter_sum())) return static_cast<std::int64_t>(i);
  }
  return -1;
}

}  // namespace chromatic::metrics
