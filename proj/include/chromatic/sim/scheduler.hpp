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

// Step-granular deterministic scheduler. Each logical process runs on its
// own fiber and suspends at the gate in front of every shared-memory access;
// the scheduler grants exactly one access at a time.

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "chromatic/sync/step.hpp"

namespace chromatic::sim {

struct StepRecord {
  std::uint64_t step = 0;
  std::uint32_t proc = 0;
  sync::StepKind kind = sync::StepKind::kRead;
  sync::RecordId record = 0;

  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

using Trace = std::vector<StepRecord>;

/// `step proc kind record`, one line per granted access.
std::string format_trace(const Trace& trace);
Trace parse_trace(std::string_view text);
/// The process column of a trace, usable as a script.
std::vector<std::uint32_t> script_of(const Trace& trace);

struct CheckerViolation : std::runtime_error {
  CheckerViolation(std::string message, Trace prefix)
      : std::runtime_error(message), prefix_(std::move(prefix)) {}
  const Trace& prefix() const { return prefix_; }

 private:
  Trace prefix_;
};

struct StateSpaceExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Picks the next process to grant among the enabled ones (ascending pid).
/// `last` is the process granted the previous step, -1 before the first.
class Chooser {
 public:
  virtual ~Chooser() = default;
  virtual std::uint32_t choose(std::uint64_t step, const std::vector<std::uint32_t>& enabled, int last) = 0;
};

class RandomChooser : public Chooser {
 public:
  explicit RandomChooser(std::uint64_t seed) : rng_(seed) {}
  std::uint32_t choose(std::uint64_t step, const std::vector<std::uint32_t>& enabled, int last) override;

 private:
  std::mt19937_64 rng_;
};

/// Lockstep: grants one step to each enabled process in turn.
class RoundRobinChooser : public Chooser {
 public:
  std::uint32_t choose(std::uint64_t step, const std::vector<std::uint32_t>& enabled, int last) override;
};

/// Follows an explicit pid sequence, skipping entries whose process has
/// finished; afterwards runs the lowest enabled pid.
class ScriptChooser : public Chooser {
 public:
  explicit ScriptChooser(std::vector<std::uint32_t> script) : script_(std::move(script)) {}
  std::uint32_t choose(std::uint64_t step, const std::vector<std::uint32_t>& enabled, int last) override;

 private:
  std::vector<std::uint32_t> script_;
  std::size_t pos_ = 0;
};

struct ProcSpec {
  sync::ProcessCtx* ctx = nullptr;
  std::function<void()> body;
};

/// Evaluated after every write/CAS step and after every operation boundary.
/// Returns an error message on failure.
using Checker = std::function<std::optional<std::string>(std::uint64_t step)>;

struct RunLimits {
  std::uint64_t max_steps = 10'000'000;
  bool record_trace = true;
};

struct RunOutcome {
  Trace trace;
  std::uint64_t steps = 0;
  std::vector<std::uint64_t> grants;  // per process
};

/// Runs every process to completion. Throws CheckerViolation (with the
/// trace so far) on the first failing checker, StateSpaceExceeded when the
/// step limit is hit, and rethrows any exception escaping a process body.
RunOutcome run_processes(std::vector<ProcSpec>& procs, Chooser& chooser, const std::vector<Checker>& checkers,
                         RunLimits limits = {});

}  // namespace chromatic::sim
