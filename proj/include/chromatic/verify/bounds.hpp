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

namespace chromatic::verify {

/// Configuration sample for the violation and height bounds.
struct ConfigSample {
  std::uint64_t step = 0;
  std::uint64_t violations = 0;
  std::uint64_t incomplete_updates = 0;
  std::uint32_t height = 0;
  std::uint64_t c = 0;  // active operations
  std::uint64_t n = 0;
};

struct BoundInput {
  std::uint64_t i = 0;  // successful inserts
  std::uint64_t d = 0;  // successful deletes
  std::uint64_t rebal_total = 0;
  std::vector<ConfigSample> samples;
};

struct BoundReport {
  std::uint64_t i = 0;
  std::uint64_t d = 0;
  std::uint64_t rebal_total = 0;
  std::int64_t bound = -1;  // 3i+d-2, -1 when i = 0 (no bound applies)
  bool rebal_ok = true;
  bool violations_ok = true;
  std::uint64_t samples = 0;
  std::uint64_t max_violations = 0;
  struct Triple {
    std::uint32_t height;
    std::uint64_t c;
    std::uint64_t n;
  };
  std::vector<Triple> height_samples;
};

struct BoundViolation : std::runtime_error {
  BoundViolation(std::string which, std::string where)
      : std::runtime_error(which + " at " + where), which_(std::move(which)), where_(std::move(where)) {}
  const std::string& which() const { return which_; }
  const std::string& where() const { return where_; }

 private:
  std::string which_;
  std::string where_;
};

/// Evaluates both bounds. Throws BoundViolation on the first failure when
/// `throw_on_violation` is set; otherwise records it in the flags.
BoundReport check_bounds(const BoundInput& in, bool throw_on_violation = true);

std::string to_key_value(const BoundReport& r);
std::string to_json(const BoundReport& r);

}  // namespace chromatic::verify
