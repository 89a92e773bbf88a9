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

// Runs chromatic-tree workloads under the deterministic scheduler and checks
// every configuration along the way.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chromatic/metrics/op_metrics.hpp"
#include "chromatic/sim/explore.hpp"
#include "chromatic/sim/scheduler.hpp"
#include "chromatic/tree/node.hpp"
#include "chromatic/verify/bounds.hpp"
#include "chromatic/verify/history.hpp"
#include "chromatic/verify/structure.hpp"

namespace chromatic::sim {

struct OpSpec {
  metrics::OpKind kind = metrics::OpKind::kFind;
  Key key = 0;

  friend bool operator==(const OpSpec&, const OpSpec&) = default;
};

/// `i5,d5;f5` : processes separated by ';', operations by ','.
std::vector<std::vector<OpSpec>> parse_workload(std::string_view text);
std::string format_workload(const std::vector<std::vector<OpSpec>>& workload);

enum Check : std::uint32_t {
  kCheckCensus = 1u << 0,        // violations <= incomplete updates
  kCheckCleanupStack = 1u << 1,  // reachable cleanup-stack nodes carry no violation
  kCheckSearchPath = 1u << 2,    // reachable stack nodes lie on the search path
  kCheckEngine = 1u << 3,        // no ABA on info fields, no terminal-state conflicts
  kCheckStructure = 1u << 4,     // quiescent shape at the end
  kCheckHistory = 1u << 5,       // linearizability of the recorded history
  kCheckSteps = 1u << 6,         // per-op metric steps add up to grants
  kCheckAll = (1u << 7) - 1,
};

struct TreeScenario {
  /// Either an initial dump or a key list inserted before the run.
  std::string initial_dump;
  std::vector<Key> initial_keys;
  std::vector<std::vector<OpSpec>> workload;
  bool legacy_restart = false;
  std::uint32_t checks = kCheckAll;
  bool record_trace = true;
  bool sample_bounds = false;  // fill TreeRunResult::samples at each check point
  std::uint64_t max_steps = 1'000'000;
};

struct TreeRunResult {
  Trace trace;
  std::uint64_t steps = 0;
  std::vector<std::uint64_t> grants;
  verify::History history;
  std::vector<metrics::OpMetrics> rows;
  verify::StructReport structure;
  bool linearizable = true;
  bool history_checked = false;  // false when the history exceeds the checker's limit
  std::uint64_t max_violations = 0;
  // Counted over the scheduled run only; setup_* cover the initial inserts.
  std::uint64_t i = 0;
  std::uint64_t d = 0;
  std::uint64_t rebal_total = 0;
  std::uint64_t setup_i = 0;
  std::uint64_t setup_rebal = 0;
  std::vector<verify::ConfigSample> samples;
  std::string final_dump;
  std::vector<Key> final_keys;
};

/// Throws CheckerViolation when any enabled check fails; the final
/// structure and history checks also throw CheckerViolation, carrying the
/// full trace.
TreeRunResult run_tree(const TreeScenario& scenario, Chooser& chooser);

struct TreeExploreResult {
  ExploreSummary summary;
  std::uint64_t histories = 0;
  std::uint64_t max_violations = 0;
};

/// Every schedule of the scenario within the enumeration bounds.
TreeExploreResult explore_tree(const TreeScenario& scenario, ExploreOptions options);

}  // namespace chromatic::sim
