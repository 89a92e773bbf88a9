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
#include <limits>

#include "chromatic/sync/llx_scx.hpp"

namespace chromatic {

using Key = std::uint64_t;
inline constexpr Key kInf = std::numeric_limits<Key>::max();

enum Side : std::uint8_t { kLeft = 0, kRight = 1 };

inline Side other(Side s) { return s == kLeft ? kRight : kLeft; }

/// Tree node. Key, weight and leaf-ness are fixed at creation; the two
/// child pointers are the mutable fields managed by LLX/SCX.
struct Node : sync::DataRecord<Node, 2> {
  Node(sync::RecordId id, Key k, std::uint32_t w, Node* left, Node* right)
      : DataRecord(id), key(k), weight(w), leaf(left == nullptr) {
    fields[kLeft].init(left);
    fields[kRight].init(right);
  }

  const Key key;
  const std::uint32_t weight;
  const bool leaf;

  Node* child(sync::ProcessCtx& ctx, Side s) const { return fields[s].read(ctx, id); }
  Node* peek(Side s) const { return fields[s].peek(); }
  bool is_marked() const { return marked.peek(); }
};

}  // namespace chromatic
