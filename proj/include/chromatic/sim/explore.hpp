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

#include <cstdint>
#include <functional>
#include <vector>

#include "chromatic/sim/scheduler.hpp"

namespace chromatic::sim {

struct ExploreOptions {
  /// Context switches away from a still-enabled process allowed per trace.
  std::uint32_t preemption_bound = 2;
  /// Identical workloads: only pid 0 may take the first step.
  bool symmetric = false;
  std::uint64_t max_traces = 2'000'000;
  /// Longest trace allowed; longer traces raise StateSpaceExceeded.
  std::uint64_t depth_bound = 600;
  std::uint32_t max_processes = 3;
};

struct ExploreSummary {
  std::uint64_t traces = 0;
  std::uint64_t longest = 0;
  std::uint64_t choice_points = 0;
};

/// One execution of the system under test, driven by `chooser`, limited to
/// `max_steps`. Returns the number of steps taken.
using RunOnce = std::function<std::uint64_t(Chooser& chooser, std::uint64_t max_steps)>;

/// Depth-first enumeration of every schedule within the preemption bound,
/// replaying from scratch for each trace. Throws StateSpaceExceeded when
/// `max_traces` or `depth_bound` is exceeded, or when `processes` exceeds
/// `max_processes`; CheckerViolation propagates from `run`.
ExploreSummary enumerate(const RunOnce& run, std::uint32_t processes, const ExploreOptions& options);

}  // namespace chromatic::sim
