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

#include "chromatic/verify/bounds.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>
#include <sstream>

namespace chromatic::verify {

BoundReport check_bounds(const BoundInput& in, bool throw_on_violation) {
  BoundReport r;
  r.i = in.i;
  r.d = in.d;
  r.rebal_total = in.rebal_total;
  if (in.i > 0) {
    r.bound = static_cast<std::int64_t>(3 * in.i + in.d) - 2;
    if (static_cast<std::int64_t>(in.rebal_total) > r.bound) {
      r.rebal_ok = false;
      if (throw_on_violation) {
        throw BoundViolation("rebalancing bound",
                             "rebal_total=" + std::to_string(in.rebal_total) + " > " + std::to_string(r.bound));
      }
    }
  }
  for (const auto& s : in.samples) {
    ++r.samples;
    r.max_violations = std::max(r.max_violations, s.violations);
    r.height_samples.push_back({s.height, s.c, s.n});
    if (s.violations > s.incomplete_updates && r.violations_ok) {
      r.violations_ok = false;
      if (throw_on_violation) {
        throw BoundViolation("violation bound", "step " + std::to_string(s.step) + ": " +
                                                    std::to_string(s.violations) + " violations, " +
                                                    std::to_string(s.incomplete_updates) + " incomplete updates");
      }
    }
  }
  return r;
}

std::string to_key_value(const BoundReport& r) {
  std::ostringstream out;
  out << "i=" << r.i << "\nd=" << r.d << "\nrebal_total=" << r.rebal_total << "\nbound=" << r.bound
      << "\nrebal_ok=" << (r.rebal_ok ? 1 : 0) << "\nviolations_ok=" << (r.violations_ok ? 1 : 0)
      << "\nsamples=" << r.samples << "\nmax_violations=" << r.max_violations << '\n';
  return out.str();
}

std::string to_json(const BoundReport& r) {
  nlohmann::json j{{"i", r.i},
                   {"d", r.d},
                   {"rebal_total", r.rebal_total},
                   {"bound", r.bound},
                   {"rebal_ok", r.rebal_ok},
                   {"violations_ok", r.violations_ok},
                   {"samples", r.samples},
                   {"max_violations", r.max_violations}};
  auto& hs = j["height_samples"] = nlohmann::json::array();
  for (const auto& t : r.height_samples) hs.push_back({{"height", t.height}, {"c", t.c}, {"n", t.n}});
  return j.dump(2);
}

}  // namespace chromatic::verify
