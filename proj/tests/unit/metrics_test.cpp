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

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "chromatic/bench/campaign.hpp"
#include "chromatic/metrics/op_metrics.hpp"
#include "chromatic/metrics/report.hpp"

namespace {

using namespace chromatic;
using metrics::OpKind;
using metrics::OpMetrics;

bench::CampaignConfig sweep_config(unsigned procs, bench::Distribution dist, std::uint64_t n, unsigned seed) {
  bench::CampaignConfig c;
  c.mode = bench::Mode::kDeterministic;
  c.workload.processes = procs;
  c.workload.distribution = dist;
  c.workload.key_lo = 1;
  c.workload.key_hi = 2 * n + 1;
  c.workload.prefill = n;
  c.workload.ops_per_process = 2000;
  c.workload.seed = seed;
  return c;
}

constexpr bench::Distribution kDists[] = {bench::Distribution::kUniform, bench::Distribution::kZipf,
                                          bench::Distribution::kAdversarialSameKey};

// Rerunning the sweep reproduces the frozen sequential constant.
TEST(StepBound, SequentialCalibrationIsFrozen) {
  double k = 0;
  for (auto dist : kDists) {
    for (std::uint64_t n : {1, 2, 4, 8, 64}) {
      for (unsigned seed = 1; seed <= 5; ++seed) {
        const auto r = bench::run_campaign(sweep_config(1, dist, n, seed));
        k = std::max(k, metrics::StepBound::calibrate(r.rows).k);
      }
    }
  }
  EXPECT_EQ(k, metrics::kSequentialStepK);
}

TEST(StepBound, HoldsUnderInterleaving) {
  const metrics::StepBound bound{metrics::kFrozenStepK};
  for (auto dist : kDists) {
    for (unsigned procs : {2u, 8u}) {
      for (std::uint64_t n : {2, 64}) {
        const auto r = bench::run_campaign(sweep_config(procs, dist, n, 11));
        EXPECT_EQ(bound.first_violation(r.rows), -1) << "procs " << procs << " n " << n;
      }
    }
  }
}

TEST(StepBound, CalibrateAndFirstViolation) {
  OpMetrics a;
  a.kind = OpKind::kInsert;
  a.attempts_up = 1;
  a.pushes_up = 2;
  a.steps = 20;  // ratio 6.67 -> 7.0
  OpMetrics f;
  f.kind = OpKind::kFind;
  f.steps = 1000;
  const std::vector<OpMetrics> rows{f, a};
  const auto k = metrics::StepBound::calibrate(rows);
  EXPECT_EQ(k.k, 7.0);
  EXPECT_EQ(k.first_violation(rows), -1);
  EXPECT_EQ(metrics::StepBound{6.5}.first_violation(rows), 1);
}

TEST(Recorder, CountsPerPhase) {
  metrics::Gauges g;
  g.size = 5;
  metrics::OpRecorder rec(3);
  rec.bind(&g);
  rec.begin(OpKind::kInsert, 42, 100);
  rec.record_attempt(metrics::Phase::kUpdate);
  rec.record_push(metrics::Phase::kUpdate);
  rec.record_push(metrics::Phase::kUpdate);
  rec.record_attempt(metrics::Phase::kCleanup);
  rec.record_push(metrics::Phase::kCleanup);
  rec.record_pop(metrics::Phase::kCleanup);
  rec.record_rebalance(true);
  rec.record_failure(2);
  const auto& m = rec.end(true, 130);
  EXPECT_EQ(m.pid, 3u);
  EXPECT_EQ(m.key, 42u);
  EXPECT_EQ(m.steps, 30u);
  EXPECT_EQ(m.attempts_up, 1u);
  EXPECT_EQ(m.attempts_cp, 1u);
  EXPECT_EQ(m.pushes_up, 2u);
  EXPECT_EQ(m.pushes_cp, 1u);
  EXPECT_EQ(m.pops_cp, 1u);
  EXPECT_EQ(m.rebal_success, 1u);
  EXPECT_EQ(m.failed_scx, 1u);
  EXPECT_EQ(m.counter_sum(), 5u);
  EXPECT_GE(m.n_op, 5u);
  EXPECT_EQ(rec.rows().size(), 1u);
}

TEST(Summary, ZeroOps) {
  const auto s = metrics::summarize({});
  EXPECT_EQ(s.ops, 0u);
  EXPECT_EQ(s.mean_steps, 0.0);
  EXPECT_TRUE(metrics::amortized_report({}).points.empty());
}

TEST(Summary, Means) {
  OpMetrics a, b;
  a.kind = OpKind::kInsert;
  a.steps = 10;
  a.c_dot = 2;
  b.kind = OpKind::kFind;
  b.steps = 30;
  b.c_dot = 5;
  const auto s = metrics::summarize({a, b});
  EXPECT_EQ(s.ops, 2u);
  EXPECT_EQ(s.updates, 1u);
  EXPECT_DOUBLE_EQ(s.mean_steps, 20.0);
  EXPECT_DOUBLE_EQ(s.mean_update_steps, 10.0);
  EXPECT_EQ(s.c_dot_alpha, 5u);
}

TEST(Csv, RoundTrip) {
  std::vector<OpMetrics> rows(3);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto& m = rows[i];
    m.pid = static_cast<std::uint32_t>(i);
    m.seq = i * 7;
    m.kind = static_cast<OpKind>(i);
    m.key = 1000 + i;
    m.result = i % 2;
    m.attempts_up = i + 1;
    m.pushes_cp = 3 * i;
    m.steps = 99 + i;
    m.c_dot = 4;
    m.n_op = 17;
    m.failed_nil = i;
  }
  std::stringstream ss;
  metrics::write_csv(ss, rows);
  const auto back = metrics::read_csv(ss);
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::stringstream a, b;
    metrics::write_csv_row(a, rows[i]);
    metrics::write_csv_row(b, back[i]);
    EXPECT_EQ(a.str(), b.str());
  }
  std::stringstream bad("pid,seq\n1,2\n");
  EXPECT_THROW(metrics::read_csv(bad), std::invalid_argument);
}

TEST(Fit, RecoversPlantedCoefficients) {
  std::vector<double> l, c, y;
  for (int n = 10; n <= 20; n += 2) {
    for (int t : {1, 2, 4}) {
      l.push_back(n);
      c.push_back(t);
      y.push_back(3.0 * n + 0.5 * t + 7.0);
    }
  }
  const auto fit = metrics::fit_affine(l, c, y, true);
  EXPECT_NEAR(fit.a, 3.0, 1e-9);
  EXPECT_NEAR(fit.b, 0.5, 1e-9);
  EXPECT_NEAR(fit.c, 7.0, 1e-9);
  EXPECT_NEAR(fit.r2, 1.0, 1e-12);
  EXPECT_THROW(metrics::fit_affine({1}, {1}, {1}, false), metrics::InsufficientGrid);
}

TEST(Fit, ReportFlagsQuadraticGrowth) {
  std::vector<metrics::RunPoint> log_pts, sq_pts;
  for (int e = 10; e <= 20; e += 2) {
    metrics::RunPoint p;
    p.n = 1ull << e;
    p.summary.ops = 100;
    p.summary.mean_steps = 4.0 * e + 3;
    log_pts.push_back(p);
    p.summary.mean_steps = 0.5 * e * e;
    sq_pts.push_back(p);
  }
  const auto good = metrics::amortized_report(log_pts);
  EXPECT_NEAR(good.single_thread_fit.a, 4.0, 1e-9);
  EXPECT_FALSE(good.super_logarithmic);
  EXPECT_TRUE(metrics::amortized_report(sq_pts).super_logarithmic);
  EXPECT_NE(metrics::to_json(good).find("single_thread_fit"), std::string::npos);
}

TEST(ContentionGrowth, LinearPasses) {
  const auto g = metrics::contention_growth({1, 2, 4, 8}, {10, 12, 16, 24}, 2.0, 0.01);
  ASSERT_EQ(g.ratios.size(), 2u);
  EXPECT_DOUBLE_EQ(g.ratios[0], 1.0);
  EXPECT_TRUE(g.within);
}

TEST(ContentionGrowth, QuadraticFails) {
  const auto g = metrics::contention_growth({1, 2, 3, 4}, {1, 4, 9, 16}, 2.0, 0.01);
  EXPECT_TRUE(g.within);  // 3, 5, 7: ratios below 2
  const auto h = metrics::contention_growth({1, 2, 4, 8}, {1, 2, 10, 100}, 2.0, 0.01);
  EXPECT_FALSE(h.within);
}

TEST(ContentionGrowth, NoiseFloorClamps) {
  const auto g = metrics::contention_growth({1, 2, 4}, {10, 9.9, 10.5}, 2.0, 0.1);
  EXPECT_DOUBLE_EQ(g.slopes[0], 0.1);
  EXPECT_DOUBLE_EQ(g.slopes[1], 0.3);
  EXPECT_FALSE(g.within);  // 0.3 / 0.1
  EXPECT_TRUE(metrics::contention_growth({1, 2, 4}, {10, 9.9, 10.5}, 2.0, 0.3).within);
}

}  // namespace
