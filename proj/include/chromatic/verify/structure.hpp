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
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "chromatic/tree/dump.hpp"

namespace chromatic::verify {

struct StructuralViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StructReport {
  bool leaf_oriented = true;
  bool bst_order = true;
  bool sentinels = true;
  bool c1 = true;  // no red user leaf
  bool c2 = true;  // equal weighted level over user leaves
  bool height_ok = true;
  bool unmarked = true;  // no reachable node is marked
  std::uint64_t n = 0;                 // user keys
  std::uint32_t height = 0;            // user region, in edges
  std::uint64_t violations = 0;        // red-red + overweight units
  std::int64_t weighted_level = -1;    // common level from the user root, -1 when C2 fails
  std::vector<std::string> problems;

  bool ok() const { return leaf_oriented && bst_order && sentinels && c1 && c2 && height_ok && unmarked; }
};

/// Checks a quiescent dump. Never throws for tree-shape problems; they are
/// listed in `problems`. Throws DumpParseError for malformed text.
StructReport check_structure(std::string_view dump);
StructReport check_structure(const std::vector<DumpLine>& lines);

/// As check_structure, but throws StructuralViolation on the first problem.
StructReport require_structure(std::string_view dump);

/// 2*log2(n+1)+2.
double height_bound(std::uint64_t n);

/// Weighted level (from the user root, inclusive) of every user leaf, keyed
/// by leaf key. Empty for the empty tree.
std::map<Key, std::uint64_t> leaf_levels(const std::vector<DumpLine>& lines);

}  // namespace chromatic::verify
