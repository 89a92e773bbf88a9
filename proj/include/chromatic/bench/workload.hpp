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
#include <string_view>
#include <vector>

#include "chromatic/sim/tree_harness.hpp"
#include "chromatic/tree/node.hpp"

namespace chromatic::bench {

enum class Distribution : std::uint8_t { kUniform, kZipf, kAdversarialSameKey };

const char* to_string(Distribution d);

struct WorkloadError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct WorkloadSpec {
  Key key_lo = 1;
  Key key_hi = 1 << 17;  // inclusive
  std::uint32_t insert_pct = 40;
  std::uint32_t delete_pct = 40;
  std::uint32_t find_pct = 20;
  std::uint64_t ops_per_process = 10000;
  std::uint32_t processes = 1;
  Distribution distribution = Distribution::kUniform;
  double zipf_s = 1.0;
  std::uint64_t seed = 1;
  /// Keys inserted before the measured phase.
  std::uint64_t prefill = 0;

  /// Throws WorkloadError when the mix does not sum to 100 or the key
  /// universe is empty, reversed, or contains the reserved key.
  void validate() const;
};

/// Parses "40/40/20" into the mix fields.
void parse_mix(std::string_view text, WorkloadSpec& spec);

/// Distinct prefill keys, deterministic in the seed.
std::vector<Key> prefill_keys(const WorkloadSpec& spec);

/// Operation stream of process `pid`, deterministic in (seed, pid).
std::vector<sim::OpSpec> generate_ops(const WorkloadSpec& spec, std::uint32_t pid);

/// Key hammered by every process under kAdversarialSameKey: an odd key
/// near the middle of the universe, absent from the prefill.
Key hot_key(const WorkloadSpec& spec);

}  // namespace chromatic::bench
