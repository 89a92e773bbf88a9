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

#include "chromatic/tree/node.hpp"

namespace chromatic {

/// One line of the pre-order dump: `depth key weight marked`, key ∞ as INF.
struct DumpLine {
  std::uint32_t depth = 0;
  Key key = 0;
  std::uint32_t weight = 0;
  bool marked = false;
};

struct DumpParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string format_dump(const std::vector<DumpLine>& lines);
std::vector<DumpLine> parse_dump(std::string_view text);

}  // namespace chromatic
