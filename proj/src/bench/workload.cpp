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

#include "chromatic/bench/workload.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_set>

namespace chromatic::bench {

const char* to_string(Distribution d) {
  switch (d) {
    case Distribution::kUniform:
      return "uniform";
    case Distribution::kZipf:
      return "zipf";
    case Distribution::kAdversarialSameKey:
      return "adversarial-same-key";
  }
  return "?";
}

void WorkloadSpec::validate() const {
  if (insert_pct + delete_pct + find_pct != 100) throw WorkloadError("mix must sum to 100");
  if (key_lo == 0 || key_lo > key_hi) throw WorkloadError("key universe must be a non-empty range of positive keys");
  if (key_hi == kInf) throw WorkloadError("key universe may not contain the reserved key");
  if (processes == 0) throw WorkloadError("need at least one process");
  if (distribution == Distribution::kZipf && !(zipf_s > 0)) throw WorkloadError("zipf exponent must be positive");
  const Key universe = key_hi - key_lo + 1;
  const Key usable = distribution == Distribution::kAdversarialSameKey ? universe - 1 : universe;
  if (prefill > usable) throw WorkloadError("prefill larger than the key universe");
}

void parse_mix(std::string_view text, WorkloadSpec& spec) {
  std::uint32_t parts[3];
  const char* p = text.data();
  const char* end = text.data() + text.size();
  for (int i = 0; i < 3; ++i) {
    auto [next, ec] = std::from_chars(p, end, parts[i]);
    if (ec != std::errc()) throw WorkloadError("mix must look like 40/40/20");
    p = next;
    if (i < 2) {
      if (p == end || *p != '/') throw WorkloadError("mix must look like 40/40/20");
      ++p;
    }
  }
  if (p != end) throw WorkloadError("mix must look like 40/40/20");
  spec.insert_pct = parts[0];
  spec.delete_pct = parts[1];
  spec.find_pct = parts[2];
  spec.validate();
}

Key hot_key(const WorkloadSpec& spec) {
  Key mid = spec.key_lo + (spec.key_hi - spec.key_lo) / 2;
  if ((mid | 1) <= spec.key_hi) mid |= 1;
  return mid;
}

std::vector<Key> prefill_keys(const WorkloadSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed ^ 0x5bd1e995u);
  const bool skip_hot = spec.distribution == Distribution::kAdversarialSameKey;
  const Key hot = hot_key(spec);
  const Key universe = spec.key_hi - spec.key_lo + 1;
  std::vector<Key> out;
  out.reserve(spec.prefill);
  if (universe <= (Key{1} << 24)) {
    std::vector<Key> all(universe);
    std::iota(all.begin(), all.end(), spec.key_lo);
    if (skip_hot) all.erase(std::find(all.begin(), all.end(), hot));
    // Partial Fisher-Yates.
    for (std::uint64_t i = 0; i < spec.prefill; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, all.size() - 1);
      std::swap(all[i], all[pick(rng)]);
      out.push_back(all[i]);
    }
    return out;
  }
  std::unordered_set<Key> seen;
  std::uniform_int_distribution<Key> key(spec.key_lo, spec.key_hi);
  while (out.size() < spec.prefill) {
    Key k = key(rng);
    if (skip_hot && k == hot) continue;
    if (seen.insert(k).second) out.push_back(k);
  }
  return out;
}

std::vector<sim::OpSpec> generate_ops(const WorkloadSpec& spec, std::uint32_t pid) {
  spec.validate();
  std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32), pid, 0x9e3779b9u};
  std::mt19937_64 rng(seq);
  std::uniform_int_distribution<std::uint32_t> pct(0, 99);
  std::uniform_int_distribution<Key> uniform(spec.key_lo, spec.key_hi);
  std::discrete_distribution<std::uint64_t> zipf;
  if (spec.distribution == Distribution::kZipf) {
    const std::uint64_t universe = spec.key_hi - spec.key_lo + 1;
    std::vector<double> w(universe);
    for (std::uint64_t r = 0; r < universe; ++r) w[r] = 1.0 / std::pow(static_cast<double>(r + 1), spec.zipf_s);
    zipf = std::discrete_distribution<std::uint64_t>(w.begin(), w.end());
  }
  const Key hot = hot_key(spec);

  std::vector<sim::OpSpec> ops;
  ops.reserve(spec.ops_per_process);
  for (std::uint64_t j = 0; j < spec.ops_per_process; ++j) {
    sim::OpSpec op;
    std::uint32_t r = pct(rng);
    op.kind = r < spec.insert_pct                     ? metrics::OpKind::kInsert
              : r < spec.insert_pct + spec.delete_pct ? metrics::OpKind::kDelete
                                                      : metrics::OpKind::kFind;
    switch (spec.distribution) {
      case Distribution::kUniform:
        op.key = uniform(rng);
        break;
      case Distribution::kZipf:
        op.key = spec.key_lo + zipf(rng);
        break;
      case Distribution::kAdversarialSameKey:
        op.key = hot;
        break;
    }
    ops.push_back(op);
  }
  return ops;
}

}  // namespace chromatic::bench
