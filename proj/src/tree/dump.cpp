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

#include "chromatic/tree/dump.hpp"

#include <charconv>
#include <sstream>

namespace chromatic {

std::string format_dump(const std::vector<DumpLine>& lines) {
  std::ostringstream out;
  for (const auto& l : lines) {
    out << l.depth << ' ';
    if (l.key == kInf) {
      out << "INF";
    } else {
      out << l.key;
    }
    out << ' ' << l.weight << ' ' << (l.marked ? 1 : 0) << '\n';
  }
  return out.str();
}

namespace {

template <class T>
T parse_number(std::string_view tok, std::size_t line_no) {
  T v{};
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw DumpParseError("line " + std::to_string(line_no) + ": bad number '" + std::string(tok) + "'");
  }
  return v;
}

}  // namespace

std::vector<DumpLine> parse_dump(std::string_view text) {
  std::vector<DumpLine> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::vector<std::string_view> toks;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
      std::size_t j = i;
      while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
      if (j > i) toks.push_back(line.substr(i, j - i));
      i = j;
    }
    if (toks.empty() || toks[0].front() == '#') continue;
    if (toks.size() != 4) throw DumpParseError("line " + std::to_string(line_no) + ": expected 4 fields");
    DumpLine d;
    d.depth = parse_number<std::uint32_t>(toks[0], line_no);
    d.key = toks[1] == "INF" ? kInf : parse_number<Key>(toks[1], line_no);
    d.weight = parse_number<std::uint32_t>(toks[2], line_no);
    const auto m = parse_number<unsigned>(toks[3], line_no);
    if (m > 1) throw DumpParseError("line " + std::to_string(line_no) + ": mark flag must be 0 or 1");
    d.marked = m == 1;
    out.push_back(d);
  }
  return out;
}

}  // namespace chromatic
