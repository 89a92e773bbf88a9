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
#include <set>
#include <string>
#include <vector>

#include "chromatic/bench/workload.hpp"
#include "chromatic/metrics/op_metrics.hpp"
#include "chromatic/metrics/report.hpp"
#include "chromatic/verify/bounds.hpp"
#include "chromatic/verify/structure.hpp"

namespace chromatic::bench {

enum class Mode : std::uint8_t { kThreads, kDeterministic };
/// Deterministic-mode interleaving: seeded random, or lockstep round robin.
enum class Schedule : std::uint8_t { kRandom, kRoundRobin };

struct CampaignConfig {
  WorkloadSpec workload;
  Mode mode = Mode::kThreads;
  Schedule schedule = Schedule::kRandom;
  bool legacy_restart = false;
  bool keep_rows = true;
  bool keep_dump = false;
};

struct CampaignResult {
  std::vector<metrics::OpMetrics> rows;  // prefill excluded
  metrics::Summary summary;
  std::uint64_t prefill_rebal = 0;
  std::uint64_t i = 0;  // successful inserts, prefill included
  std::uint64_t d = 0;
  std::uint64_t rebal_total = 0;
  std::uint64_t size = 0;
  std::uint32_t height = 0;
  std::uint64_t census_after = 0;
  verify::StructReport structure;
  bool size_consistent = true;  // final size = prefill + inserts - deletes
  double seconds = 0;
  std::vector<Key> final_keys;
  std::string final_dump;  // when keep_dump
};

/// Prefills, then runs the workload. Threads mode runs one OpenMP thread
/// per process; deterministic mode interleaves the processes with a seeded
/// random schedule on the calling thread.
CampaignResult run_campaign(const CampaignConfig& config);

/// Serial reference: the same operation streams applied in process order to
/// a std::set. Returns the per-op results in stream order.
struct SerialResult {
  std::vector<std::vector<bool>> results;
  std::set<Key> final_set;
};
SerialResult run_serial_reference(const WorkloadSpec& spec);

/// Runs the campaign over every (n, threads) cell; the key universe is
/// [1, 2n] with n prefilled keys, so the size stays near n under a balanced
/// mix.
std::vector<metrics::RunPoint> run_grid(const WorkloadSpec& base, const std::vector<std::uint64_t>& sizes,
                                        const std::vector<std::uint32_t>& threads, Mode mode);

}  // namespace chromatic::bench
