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

#include "chromatic/metrics/report.hpp"

#include <algorithm>
#include <cmath>
#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace chromatic::metrics {

namespace {

double r_squared(const Eigen::VectorXd& y, const Eigen::VectorXd& fitted) {
  const double mean = y.mean();
  const double ss_tot = (y.array() - mean).square().sum();
  const double ss_res = (y - fitted).squaredNorm();
  if (ss_tot == 0) return ss_res == 0 ? 1.0 : 0.0;
  return 1.0 - ss_res / ss_tot;
}

}  // namespace

AffineFit fit_affine(const std::vector<double>& log2n, const std::vector<double>& c_dot, const std::vector<double>& y,
                     bool with_contention) {
  const auto rows = static_cast<Eigen::Index>(y.size());
  const Eigen::Index cols = with_contention ? 3 : 2;
  if (rows < cols) throw InsufficientGrid("need at least " + std::to_string(cols) + " grid points");
  Eigen::MatrixXd a(rows, cols);
  Eigen::VectorXd b(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    a(i, 0) = log2n[static_cast<std::size_t>(i)];
    if (with_contention) a(i, 1) = c_dot[static_cast<std::size_t>(i)];
    a(i, cols - 1) = 1.0;
    b(i) = y[static_cast<std::size_t>(i)];
  }
  // Rank-deficient grids (e.g. a single contention level) get the
  // minimum-norm solution.
  Eigen::VectorXd x = a.completeOrthogonalDecomposition().solve(b);
  AffineFit fit;
  fit.uses_contention = with_contention;
  fit.a = x(0);
  fit.b = with_contention ? x(1) : 0.0;
  fit.c = x(cols - 1);
  Eigen::VectorXd fitted = a * x;
  fit.r2 = r_squared(b, fitted);
  fit.residuals.resize(static_cast<std::size_t>(rows));
  for (Eigen::Index i = 0; i < rows; ++i) fit.residuals[static_cast<std::size_t>(i)] = b(i) - fitted(i);
  return fit;
}

RunReport amortized_report(const std::vector<RunPoint>& runs) {
  RunReport report;
  report.points = runs;
  if (runs.empty()) return report;

  std::vector<double> lx, cx, y, lx1, cx1, y1;
  double total_steps = 0;
  std::uint64_t total_ops = 0;
  for (const auto& p : runs) {
    const double l = std::log2(static_cast<double>(std::max<std::uint64_t>(p.n, 1)));
    lx.push_back(l);
    cx.push_back(static_cast<double>(p.summary.c_dot_alpha));
    y.push_back(p.summary.mean_steps);
    if (p.threads == 1) {
      lx1.push_back(l);
      cx1.push_back(0);
      y1.push_back(p.summary.mean_steps);
    }
    total_steps += p.summary.mean_steps * static_cast<double>(p.summary.ops);
    total_ops += p.summary.ops;
    report.c_dot_alpha = std::max(report.c_dot_alpha, p.summary.c_dot_alpha);
  }
  report.mean_steps = total_ops == 0 ? 0 : total_steps / static_cast<double>(total_ops);
  report.fit = fit_affine(lx, cx, y, true);
  if (lx1.size() >= 2) {
    report.single_thread_fit = fit_affine(lx1, cx1, y1, false);
    if (lx1.size() >= 3) {
      // Curvature test: a quadratic term contributing more than 10% of the
      // mean over the grid's span marks growth faster than log n.
      const auto rows = static_cast<Eigen::Index>(lx1.size());
      Eigen::MatrixXd a(rows, 3);
      Eigen::VectorXd b(rows);
      for (Eigen::Index i = 0; i < rows; ++i) {
        const double l = lx1[static_cast<std::size_t>(i)];
        a(i, 0) = l * l;
        a(i, 1) = l;
        a(i, 2) = 1;
        b(i) = y1[static_cast<std::size_t>(i)];
      }
      Eigen::VectorXd q = a.completeOrthogonalDecomposition().solve(b);
      const auto [lo, hi] = std::minmax_element(lx1.begin(), lx1.end());
      const double span = *hi - *lo;
      report.super_logarithmic = q(0) * span * span > 0.1 * b.mean();
    }
  }
  return report;
}

std::string to_json(const RunReport& report) {
  nlohmann::json j;
  j["mean_steps"] = report.mean_steps;
  j["c_dot_alpha"] = report.c_dot_alpha;
  j["super_logarithmic"] = report.super_logarithmic;
  auto fit_json = [](const AffineFit& f) {
    return nlohmann::json{{"a", f.a}, {"b", f.b}, {"c", f.c}, {"r2", f.r2}, {"residuals", f.residuals}};
  };
  j["fit"] = fit_json(report.fit);
  j["single_thread_fit"] = fit_json(report.single_thread_fit);
  j["points"] = nlohmann::json::array();
  for (const auto& p : report.points) {
    j["points"].push_back({{"n", p.n},
                           {"threads", p.threads},
                           {"ops", p.summary.ops},
                           {"mean_steps", p.summary.mean_steps},
                           {"mean_update_steps", p.summary.mean_update_steps},
                           {"mean_attempts_up", p.summary.mean_attempts_up},
                           {"mean_attempts_cp", p.summary.mean_attempts_cp},
                           {"mean_pushes_up", p.summary.mean_pushes_up},
                           {"mean_pushes_cp", p.summary.mean_pushes_cp},
                           {"c_dot_alpha", p.summary.c_dot_alpha},
                           {"max_n", p.summary.max_n},
                           {"rebal_success", p.summary.rebal_success},
                           {"heights", p.height_samples}});
  }
  return j.dump(2);
}

ContentionGrowth contention_growth(const std::vector<double>& c_dot, const std::vector<double>& mean_steps,
                                   double max_ratio, double noise_floor) {
  ContentionGrowth g;
  for (std::size_t i = 0; i + 1 < c_dot.size() && i + 1 < mean_steps.size(); ++i) {
    const double dc = c_dot[i + 1] - c_dot[i];
    const double dy = mean_steps[i + 1] - mean_steps[i];
    const double slope = dc > 0 ? dy / dc : (dy > 0 ? dy : 0.0);
    g.slopes.push_back(std::max(slope, noise_floor));
  }
  for (std::size_t i = 0; i + 1 < g.slopes.size(); ++i) {
    const double r = g.slopes[i + 1] / g.slopes[i];
    g.ratios.push_back(r);
    if (r > max_ratio) g.within = false;
  }
  return g;
}

}  // namespace chromatic::metrics
