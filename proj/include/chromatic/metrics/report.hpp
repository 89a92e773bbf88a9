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
#include <stdexcept>
#include <string>
#include <vector>

#include "chromatic/metrics/op_metrics.hpp"

namespace chromatic::metrics {

/// One campaign cell: a run at a given initial size and worker count.
struct RunPoint {
  std::uint64_t n = 0;
  std::uint32_t threads = 1;
  Summary summary;
  std::vector<std::uint64_t> height_samples;
};

struct InsufficientGrid : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// mean_steps ~ a*log2(n) + b*c_dot + c, ordinary least squares.
struct AffineFit {
  double a = 0;
  double b = 0;
  double c = 0;
  double r2 = 0;
  std::vector<double> residuals;
  bool uses_contention = false;
};

struct RunReport {
  std::vector<RunPoint> points;
  AffineFit fit;                  // all points
  AffineFit single_thread_fit;    // threads == 1, log2 n only
  double mean_steps = 0;          // over all ops of all points
  std::uint64_t c_dot_alpha = 0;  // max over points
  bool super_logarithmic = false; // positive curvature beyond tolerance at threads == 1
};

/// Fits the log2 n model on `log2n` and the optional contention column.
/// Throws InsufficientGrid when there are fewer rows than parameters.
AffineFit fit_affine(const std::vector<double>& log2n, const std::vector<double>& c_dot, const std::vector<double>& y,
                     bool with_contention);

/// Builds the report. An empty input yields an empty report.
RunReport amortized_report(const std::vector<RunPoint>& runs);

std::string to_json(const RunReport& report);

/// Growth check at fixed n: increments of mean steps between successive
/// contention levels, normalised by the contention increment, may not grow
/// by more than `max_ratio` from one step to the next. Slopes below
/// `noise_floor` are clamped to it before taking ratios.
struct ContentionGrowth {
  std::vector<double> slopes;
  std::vector<double> ratios;
  bool within = true;
};
ContentionGrowth contention_growth(const std::vector<double>& c_dot, const std::vector<double>& mean_steps,
                                   double max_ratio, double noise_floor);

}  // namespace chromatic::metrics
