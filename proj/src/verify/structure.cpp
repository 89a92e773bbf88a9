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

#include "chromatic/verify/structure.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace chromatic::verify {

namespace {

struct TNode {
  DumpLine line;
  int left = -1;
  int right = -1;
};

// Rebuilds parent/child links from depths. Records a problem and returns
// false when some node does not have exactly 0 or 2 children.
bool link(const std::vector<DumpLine>& lines, std::vector<TNode>& nodes, StructReport& r) {
  nodes.clear();
  nodes.reserve(lines.size());
  std::vector<int> path;
  std::vector<int> child_count(lines.size(), 0);
  bool ok = true;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& l = lines[i];
    nodes.push_back({l});
    if (i == 0) {
      if (l.depth != 0) {
        r.problems.push_back("first line must have depth 0");
        return false;
      }
      path.push_back(0);
      continue;
    }
    if (l.depth == 0 || l.depth > path.size()) {
      r.problems.push_back("line " + std::to_string(i + 1) + ": depth jump");
      return false;
    }
    path.resize(l.depth);
    const int parent = path.back();
    const int idx = static_cast<int>(i);
    auto& pc = child_count[static_cast<std::size_t>(parent)];
    if (pc == 0) {
      nodes[static_cast<std::size_t>(parent)].left = idx;
    } else if (pc == 1) {
      nodes[static_cast<std::size_t>(parent)].right = idx;
    } else {
      r.problems.push_back("line " + std::to_string(i + 1) + ": third child");
      ok = false;
    }
    ++pc;
    path.push_back(idx);
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (child_count[i] == 1) {
      r.problems.push_back("line " + std::to_string(i + 1) + ": node with a single child");
      ok = false;
    }
  }
  return ok;
}

bool is_leaf(const TNode& n) { return n.left < 0; }

bool is_sentinel_leaf(const TNode& n) { return is_leaf(n) && n.line.key == kInf && n.line.weight == 1; }

// Index of the user root, or -1 for the empty layout. Sets r.sentinels.
int locate_user_root(const std::vector<TNode>& nodes, StructReport& r) {
  const TNode& entry = nodes[0];
  auto bad = [&](const std::string& why) {
    r.sentinels = false;
    r.problems.push_back("sentinel layout: " + why);
    return -1;
  };
  if (is_leaf(entry) || entry.line.key != kInf || entry.line.weight != 1) return bad("entry must be internal INF/1");
  if (!is_sentinel_leaf(nodes[static_cast<std::size_t>(entry.right)])) return bad("entry.right must be leaf INF/1");
  const TNode& top = nodes[static_cast<std::size_t>(entry.left)];
  if (is_leaf(top)) {
    if (!is_sentinel_leaf(top)) return bad("empty tree needs leaf INF/1 under entry");
    return -1;
  }
  if (top.line.key != kInf || top.line.weight != 1) return bad("second sentinel must be internal INF/1");
  if (!is_sentinel_leaf(nodes[static_cast<std::size_t>(top.right)])) return bad("second sentinel's right must be leaf INF/1");
  const TNode& root = nodes[static_cast<std::size_t>(top.left)];
  if (root.line.key == kInf && is_leaf(root)) return bad("user root cannot be a sentinel leaf");
  return top.left;
}

}  // namespace

double height_bound(std::uint64_t n) { return 2.0 * std::log2(static_cast<double>(n) + 1.0) + 2.0; }

StructReport check_structure(std::string_view dump) { return check_structure(parse_dump(dump)); }

StructReport check_structure(const std::vector<DumpLine>& lines) {
  StructReport r;
  if (lines.empty()) {
    r.leaf_oriented = false;
    r.problems.push_back("empty dump");
    return r;
  }
  std::vector<TNode> nodes;
  if (!link(lines, nodes, r)) {
    r.leaf_oriented = false;
    return r;
  }
  for (const auto& n : nodes) {
    if (n.line.marked) {
      r.unmarked = false;
      r.problems.push_back("reachable marked node with key " +
                           (n.line.key == kInf ? std::string("INF") : std::to_string(n.line.key)));
      break;
    }
  }
  const int root = locate_user_root(nodes, r);
  if (root < 0) return r;

  // Violations over the whole tree (sentinels have weight 1 and never count).
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    if (n.line.weight > 1) r.violations += n.line.weight - 1;
    if (!is_leaf(n)) {
      for (int c : {n.left, n.right}) {
        const auto& ch = nodes[static_cast<std::size_t>(c)];
        if (n.line.weight == 0 && ch.line.weight == 0) ++r.violations;
      }
    }
  }

  struct Frame {
    int idx;
    std::optional<Key> lo;  // inclusive
    std::optional<Key> hi;  // exclusive
    std::uint64_t level;
    std::uint32_t depth;
  };
  std::vector<Frame> todo{{root, std::nullopt, std::nullopt, 0, 0}};
  std::optional<std::uint64_t> common;
  while (!todo.empty()) {
    Frame f = todo.back();
    todo.pop_back();
    const auto& n = nodes[static_cast<std::size_t>(f.idx)];
    const Key k = n.line.key;
    const std::uint64_t level = f.level + n.line.weight;
    r.height = std::max(r.height, f.depth);
    if (is_leaf(n)) {
      ++r.n;
      if ((f.lo && k < *f.lo) || (f.hi && k >= *f.hi) || k == kInf) {
        r.bst_order = false;
        r.problems.push_back("leaf " + std::to_string(k) + " out of order");
      }
      if (n.line.weight == 0) {
        r.c1 = false;
        r.problems.push_back("red leaf " + std::to_string(k));
      }
      if (!common) {
        common = level;
      } else if (*common != level) {
        r.c2 = false;
      }
      continue;
    }
    if ((f.lo && k < *f.lo) || (f.hi && k > *f.hi)) {
      r.bst_order = false;
      r.problems.push_back("routing key " + std::to_string(k) + " out of range");
    }
    todo.push_back({n.right, k, f.hi, level, f.depth + 1});
    todo.push_back({n.left, f.lo, k, level, f.depth + 1});
  }
  if (!r.c2) {
    r.problems.push_back("leaves have different weighted levels");
  } else if (common) {
    r.weighted_level = static_cast<std::int64_t>(*common);
  }
  if (r.violations == 0 && static_cast<double>(r.height) > height_bound(r.n)) {
    r.height_ok = false;
    r.problems.push_back("height " + std::to_string(r.height) + " exceeds red-black bound");
  }
  return r;
}

StructReport require_structure(std::string_view dump) {
  auto r = check_structure(dump);
  if (!r.ok()) throw StructuralViolation(r.problems.empty() ? "structure check failed" : r.problems.front());
  return r;
}

std::map<Key, std::uint64_t> leaf_levels(const std::vector<DumpLine>& lines) {
  std::map<Key, std::uint64_t> out;
  StructReport scratch;
  std::vector<TNode> nodes;
  if (lines.empty() || !link(lines, nodes, scratch)) return out;
  const int root = locate_user_root(nodes, scratch);
  if (root < 0) return out;
  std::vector<std::pair<int, std::uint64_t>> todo{{root, 0}};
  while (!todo.empty()) {
    auto [idx, level] = todo.back();
    todo.pop_back();
    const auto& n = nodes[static_cast<std::size_t>(idx)];
    level += n.line.weight;
    if (is_leaf(n)) {
      out[n.line.key] = level;
    } else {
      todo.emplace_back(n.left, level);
      todo.emplace_back(n.right, level);
    }
  }
  return out;
}

}  // namespace chromatic::verify
