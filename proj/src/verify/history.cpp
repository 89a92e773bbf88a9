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

#include "chromatic/verify/history.hpp"

#include <algorithm>
#include <map>
#include <unordered_set>

namespace chromatic::verify {

bool apply(std::set<Key>& s, metrics::OpKind kind, Key key) {
  switch (kind) {
    case metrics::OpKind::kFind:
      return s.count(key) != 0;
    case metrics::OpKind::kInsert:
      return s.insert(key).second;
    case metrics::OpKind::kDelete:
      return s.erase(key) != 0;
  }
  return false;
}

namespace {

// Set state restricted to the keys the history mentions, one bit per key.
class Search {
 public:
  explicit Search(const History& h) : events_(h.events) {
    for (const auto& e : events_) slot_.emplace(e.key, 0);
    int i = 0;
    for (auto& [k, s] : slot_) s = i++;
    for (Key k : h.initial) {
      auto it = slot_.find(k);
      if (it != slot_.end()) initial_ |= 1u << it->second;
    }
    const auto n = events_.size();
    preds_.assign(n, 0);
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        if (a != b && precedes(events_[a], events_[b])) preds_[b] |= 1u << a;
      }
    }
  }

  bool run() { return visit(0, initial_); }

 private:
  bool visit(std::uint32_t done, std::uint32_t state) {
    const auto n = events_.size();
    if (done == (1u << n) - 1) return true;
    const std::uint64_t memo_key = (static_cast<std::uint64_t>(done) << 32) | state;
    if (!seen_.insert(memo_key).second) return false;
    for (std::size_t i = 0; i < n; ++i) {
      if ((done >> i) & 1u) continue;
      if ((preds_[i] & ~done) != 0) continue;  // a real-time predecessor is still pending
      const auto& e = events_[i];
      const std::uint32_t bit = 1u << slot_.at(e.key);
      const bool present = (state & bit) != 0;
      bool result = false;
      std::uint32_t next = state;
      switch (e.kind) {
        case metrics::OpKind::kFind:
          result = present;
          break;
        case metrics::OpKind::kInsert:
          result = !present;
          next |= bit;
          break;
        case metrics::OpKind::kDelete:
          result = present;
          next &= ~bit;
          break;
      }
      if (result != e.result) continue;
      if (visit(done | (1u << i), next)) return true;
    }
    return false;
  }

  const std::vector<Event>& events_;
  std::map<Key, int> slot_;
  std::uint32_t initial_ = 0;
  std::vector<std::uint32_t> preds_;
  std::unordered_set<std::uint64_t> seen_;
};

}  // namespace

bool check_linearizable(const History& h) {
  if (h.events.size() > kMaxHistoryEvents) {
    throw HistoryTooLarge("history has " + std::to_string(h.events.size()) + " events; limit is " +
                          std::to_string(kMaxHistoryEvents));
  }
  return Search(h).run();
}

}  // namespace chromatic::verify
