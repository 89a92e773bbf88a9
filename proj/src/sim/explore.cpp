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

#include "chromatic/sim/explore.hpp"

#include <algorithm>
#include <string>

namespace chromatic::sim {

namespace {

struct Point {
  std::vector<std::uint32_t> options;
  std::size_t idx = 0;
};

class DfsChooser : public Chooser {
 public:
  DfsChooser(std::vector<Point>& path, const ExploreOptions& opt) : path_(path), opt_(opt) {}

  std::uint32_t choose(std::uint64_t step, const std::vector<std::uint32_t>& enabled, int last) override {
    options_.clear();
    bool last_enabled =
        last >= 0 && std::find(enabled.begin(), enabled.end(), static_cast<std::uint32_t>(last)) != enabled.end();
    if (last_enabled) {
      options_.push_back(static_cast<std::uint32_t>(last));
      if (preemptions_ < opt_.preemption_bound) {
        for (std::uint32_t p : enabled) {
          if (p != static_cast<std::uint32_t>(last)) options_.push_back(p);
        }
      }
    } else if (step == 0 && opt_.symmetric) {
      options_.push_back(enabled.front());
    } else {
      options_ = enabled;
    }

    std::uint32_t pick;
    if (options_.size() == 1) {
      pick = options_.front();
    } else {
      if (pos_ < path_.size()) {
        const Point& pt = path_[pos_];
        if (pt.options != options_) throw std::logic_error("nondeterministic replay during enumeration");
        pick = pt.options[pt.idx];
      } else {
        path_.push_back({options_, 0});
        pick = options_.front();
        ++fresh_;
      }
      ++pos_;
    }
    if (last_enabled && pick != static_cast<std::uint32_t>(last)) ++preemptions_;
    return pick;
  }

  std::uint64_t fresh() const { return fresh_; }

 private:
  std::vector<Point>& path_;
  const ExploreOptions& opt_;
  std::vector<std::uint32_t> options_;
  std::size_t pos_ = 0;
  std::uint32_t preemptions_ = 0;
  std::uint64_t fresh_ = 0;
};

}  // namespace

ExploreSummary enumerate(const RunOnce& run, std::uint32_t processes, const ExploreOptions& options) {
  if (processes > options.max_processes) {
    throw StateSpaceExceeded("exhaustive enumeration limited to " + std::to_string(options.max_processes) +
                             " processes");
  }
  ExploreSummary summary;
  std::vector<Point> path;
  for (;;) {
    if (summary.traces >= options.max_traces) {
      throw StateSpaceExceeded("more than " + std::to_string(options.max_traces) + " traces");
    }
    DfsChooser chooser(path, options);
    std::uint64_t steps = run(chooser, options.depth_bound);
    ++summary.traces;
    summary.longest = std::max(summary.longest, steps);
    summary.choice_points += chooser.fresh();
    while (!path.empty() && path.back().idx + 1 >= path.back().options.size()) path.pop_back();
    if (path.empty()) break;
    ++path.back().idx;
  }
  return summary;
}

}  // namespace chromatic::sim
