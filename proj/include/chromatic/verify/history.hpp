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
#include <stdexcept>
#include <vector>

#include "chromatic/metrics/op_metrics.hpp"
#include "chromatic/tree/node.hpp"

namespace chromatic::verify {

/// One completed operation. `invoke` and `response` are the global step
/// indices of its first and last shared-memory access.
struct Event {
  std::uint32_t proc = 0;
  metrics::OpKind kind = metrics::OpKind::kFind;
  Key key = 0;
  std::uint64_t invoke = 0;
  std::uint64_t response = 0;
  bool result = false;
};

struct History {
  std::vector<Event> events;
  std::set<Key> initial;  // set contents before the first event
};

struct HistoryTooLarge : std::length_error {
  using std::length_error::length_error;
};

inline constexpr std::size_t kMaxHistoryEvents = 14;

/// Exact check against the sorted-set specification: some total order
/// consistent with real-time precedence replays every result. Depth-first
/// search over minimal events, memoising (linearized subset, set state).
bool check_linearizable(const History& h);

/// Applies one operation to a set and returns its specified result.
bool apply(std::set<Key>& s, metrics::OpKind kind, Key key);

/// True when `a` responded before `b` was invoked.
inline bool precedes(const Event& a, const Event& b) { return a.response < b.invoke; }

}  // namespace chromatic::verify
