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

#include "chromatic/bench/campaign.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <stdexcept>

#include <omp.h>

#include "chromatic/sim/scheduler.hpp"
#include "chromatic/sim/tree_harness.hpp"
#include "chromatic/tree/tree.hpp"

namespace chromatic::bench {

using metrics::OpKind;

namespace {

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool apply_op(ChromaticTree& tree, Process& proc, const sim::OpSpec& op) {
  switch (op.kind) {
    case OpKind::kFind:
      return tree.find(op.key, proc);
    case OpKind::kInsert:
      return tree.insert(op.key, proc);
    case OpKind::kDelete:
      return tree.erase(op.key, proc);
  }
  return false;
}

CampaignResult run_threads(const CampaignConfig& cfg, const std::vector<Key>& prefill,
                           const std::vector<std::vector<sim::OpSpec>>& streams) {
  const std::uint32_t procs = cfg.workload.processes;
  TreeOptions opts;
  opts.legacy_restart = cfg.legacy_restart;
  opts.max_processes = std::max<std::size_t>(256, procs + 2);
  ChromaticTree tree(opts);
  CampaignResult out;
  {
    Process setup(tree, procs);
    setup.recorder().set_keep_rows(false);
    for (Key k : prefill) tree.insert(k, setup);
  }
  out.prefill_rebal = tree.stats().rebalance_success.load();

  std::vector<std::vector<metrics::OpMetrics>> rows(procs);
  std::vector<std::int64_t> net(procs, 0);
  std::exception_ptr error;
  int team = 0;
  const auto t0 = std::chrono::steady_clock::now();
  omp_set_dynamic(0);
#pragma omp parallel num_threads(static_cast<int>(procs))
  {
    const int t = omp_get_thread_num();
#pragma omp single
    team = omp_get_num_threads();
    try {
      Process proc(tree, static_cast<std::uint32_t>(t));
      for (const sim::OpSpec& op : streams[t]) {
        bool r = apply_op(tree, proc, op);
        if (r && op.kind == OpKind::kInsert) ++net[t];
        if (r && op.kind == OpKind::kDelete) --net[t];
      }
      rows[t] = proc.recorder().take_rows();
    } catch (...) {
#pragma omp critical
      error = std::current_exception();
    }
  }
  out.seconds = since(t0);
  if (error) std::rethrow_exception(error);
  if (team != static_cast<int>(procs)) {
    throw std::runtime_error("OpenMP granted " + std::to_string(team) + " threads, wanted " + std::to_string(procs));
  }

  for (auto& r : rows) out.rows.insert(out.rows.end(), r.begin(), r.end());
  std::int64_t expected = static_cast<std::int64_t>(prefill.size());
  for (auto v : net) expected += v;
  out.i = tree.stats().insert_success.load();
  out.d = tree.stats().delete_success.load();
  out.rebal_total = tree.stats().rebalance_success.load();
  out.final_keys = tree.keys();
  out.size = out.final_keys.size();
  out.size_consistent = static_cast<std::int64_t>(out.size) == expected && tree.size() == expected;
  out.height = tree.user_height();
  out.census_after = total_violations(tree.census());
  out.structure = verify::check_structure(tree.dump_lines());
  if (cfg.keep_dump) out.final_dump = tree.dump();
  return out;
}

CampaignResult run_deterministic(const CampaignConfig& cfg, const std::vector<Key>& prefill,
                                 std::vector<std::vector<sim::OpSpec>> streams) {
  sim::TreeScenario sc;
  sc.initial_keys = prefill;
  sc.workload = std::move(streams);
  sc.legacy_restart = cfg.legacy_restart;
  sc.checks = sim::kCheckSteps;
  sc.record_trace = false;
  sc.max_steps = ~std::uint64_t{0};
  sim::RandomChooser random(cfg.workload.seed);
  sim::RoundRobinChooser lockstep;
  sim::Chooser& chooser = cfg.schedule == Schedule::kRandom ? static_cast<sim::Chooser&>(random) : lockstep;
  const auto t0 = std::chrono::steady_clock::now();
  sim::TreeRunResult r = sim::run_tree(sc, chooser);
  CampaignResult out;
  out.seconds = since(t0);
  out.rows = std::move(r.rows);
  out.prefill_rebal = r.setup_rebal;
  out.i = r.setup_i + r.i;
  out.d = r.d;
  out.rebal_total = r.setup_rebal + r.rebal_total;
  out.structure = r.structure;
  out.size = r.structure.n;
  out.height = r.structure.height;
  out.census_after = r.structure.violations;
  std::int64_t expected = static_cast<std::int64_t>(prefill.size());
  for (const auto& m : out.rows) {
    if (m.result && m.kind == OpKind::kInsert) ++expected;
    if (m.result && m.kind == OpKind::kDelete) --expected;
  }
  out.size_consistent = static_cast<std::int64_t>(out.size) == expected;
  out.final_keys = std::move(r.final_keys);
  if (cfg.keep_dump) out.final_dump = std::move(r.final_dump);
  return out;
}

}  // namespace

CampaignResult run_campaign(const CampaignConfig& cfg) {
  cfg.workload.validate();
  const std::vector<Key> prefill = prefill_keys(cfg.workload);
  std::vector<std::vector<sim::OpSpec>> streams;
  for (std::uint32_t p = 0; p < cfg.workload.processes; ++p) streams.push_back(generate_ops(cfg.workload, p));
  CampaignResult out = cfg.mode == Mode::kThreads ? run_threads(cfg, prefill, streams)
                                                  : run_deterministic(cfg, prefill, std::move(streams));
  out.summary = metrics::summarize(out.rows);
  if (!cfg.keep_rows) out.rows.clear();
  return out;
}

SerialResult run_serial_reference(const WorkloadSpec& spec) {
  spec.validate();
  SerialResult out;
  for (Key k : prefill_keys(spec)) out.final_set.insert(k);
  for (std::uint32_t p = 0; p < spec.processes; ++p) {
    auto ops = generate_ops(spec, p);
    auto& res = out.results.emplace_back();
    res.reserve(ops.size());
    for (const auto& op : ops) res.push_back(verify::apply(out.final_set, op.kind, op.key));
  }
  return out;
}

std::vector<metrics::RunPoint> run_grid(const WorkloadSpec& base, const std::vector<std::uint64_t>& sizes,
                                        const std::vector<std::uint32_t>& threads, Mode mode) {
  std::vector<metrics::RunPoint> points;
  for (std::uint64_t n : sizes) {
    for (std::uint32_t t : threads) {
      CampaignConfig cfg;
      cfg.workload = base;
      cfg.workload.key_lo = 1;
      cfg.workload.key_hi = 2 * n;
      cfg.workload.prefill = n;
      cfg.workload.processes = t;
      cfg.mode = mode;
      cfg.keep_rows = false;
      CampaignResult r = run_campaign(cfg);
      metrics::RunPoint pt;
      pt.n = n;
      pt.threads = t;
      pt.summary = r.summary;
      pt.height_samples.push_back(r.height);
      points.push_back(std::move(pt));
    }
  }
  return points;
}

}  // namespace chromatic::bench
