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

#include "transform_fixtures.hpp"

#include <algorithm>
#include <cctype>
#include <iterator>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace chromatic::fixtures {

namespace {

struct Shape {
  std::uint32_t w = 1;
  std::unique_ptr<Shape> l, r;
  Key key = 0;
};

std::unique_ptr<Shape> parse_shape(const std::string& s, std::size_t& pos) {
  auto n = std::make_unique<Shape>();
  std::size_t end = pos;
  while (end < s.size() && std::isdigit(static_cast<unsigned char>(s[end]))) ++end;
  if (end == pos) throw std::invalid_argument("bad shape: " + s);
  n->w = static_cast<std::uint32_t>(std::stoul(s.substr(pos, end - pos)));
  pos = end;
  if (pos < s.size() && s[pos] == '[') {
    ++pos;
    n->l = parse_shape(s, pos);
    if (s.at(pos) != ',') throw std::invalid_argument("bad shape: " + s);
    ++pos;
    n->r = parse_shape(s, pos);
    if (s.at(pos) != ']') throw std::invalid_argument("bad shape: " + s);
    ++pos;
  }
  return n;
}

void mirror(Shape& n) {
  if (!n.l) return;
  std::swap(n.l, n.r);
  mirror(*n.l);
  mirror(*n.r);
}

// Leaves get 10, 20, ... in order; an internal node takes the smallest key of
// its right subtree.
Key assign_keys(Shape& n, Key& next) {
  if (!n.l) {
    n.key = next;
    next += 10;
    return n.key;
  }
  const Key lo = assign_keys(*n.l, next);
  n.key = assign_keys(*n.r, next);
  return lo;
}

void emit(const Shape& n, std::uint32_t depth, std::ostream& os) {
  os << depth << ' ' << n.key << ' ' << n.w << " 0\n";
  if (n.l) {
    emit(*n.l, depth + 1, os);
    emit(*n.r, depth + 1, os);
  }
}

// Path from the user root.
std::vector<Side> role_path(const std::string& role, bool mirrored) {
  std::vector<Side> path{kLeft};
  if (role == "u") return path;
  if (role.empty() || (role[0] != 'x' && role[0] != 'n')) throw std::invalid_argument("bad role: " + role);
  path.push_back(mirrored ? kRight : kLeft);
  for (std::size_t i = 1; i < role.size(); ++i) {
    Side s = role[i] == 'l' ? kLeft : kRight;
    path.push_back(mirrored ? other(s) : s);
  }
  return path;
}

Node* walk(Node* root, const std::vector<Side>& path, std::size_t len) {
  Node* n = root;
  for (std::size_t i = 0; i < len; ++i) {
    if (n == nullptr || n->leaf) return nullptr;
    n = n->peek(path[i]);
  }
  return n;
}

using Entry = std::tuple<const Node*, Violation::Kind, std::uint32_t>;

std::vector<Entry> entries(const std::vector<Violation>& census) {
  std::vector<Entry> out;
  for (const auto& v : census) out.emplace_back(v.at, v.kind, v.count);
  std::sort(out.begin(), out.end());
  return out;
}

std::map<Key, std::uint32_t> weighted_levels(const ChromaticTree& t) {
  std::map<Key, std::uint32_t> out;
  std::vector<std::pair<const Node*, std::uint32_t>> todo{{t.entry(), 0}};
  while (!todo.empty()) {
    auto [n, level] = todo.back();
    todo.pop_back();
    level += n->weight;
    if (n->leaf) {
      if (n->key != kInf) out[n->key] = level;
    } else {
      todo.emplace_back(n->peek(kLeft), level);
      todo.emplace_back(n->peek(kRight), level);
    }
  }
  return out;
}

std::string describe(const std::vector<Entry>& es, const std::map<const Node*, std::string>& names) {
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (const auto& [n, kind, count] : es) {
    if (!first) os << ", ";
    first = false;
    auto it = names.find(n);
    os << (kind == Violation::Kind::kRedRed ? "rr@" : "ow@") << (it == names.end() ? "?" : it->second);
    if (kind == Violation::Kind::kOverweight) os << 'x' << count;
  }
  os << '}';
  return os.str();
}

// Every role name the fixtures use, for readable diagnostics.
void name_nodes(Node* root, char top, bool mirrored, std::map<const Node*, std::string>& names) {
  std::vector<std::pair<std::string, Node*>> todo;
  if (top == 'x') names[walk(root, role_path("u", mirrored), 1)] = "u";
  const auto base = role_path(std::string(1, top), mirrored);
  todo.emplace_back(std::string(1, top), walk(root, base, base.size()));
  while (!todo.empty()) {
    auto [name, n] = todo.back();
    todo.pop_back();
    if (n == nullptr) continue;
    names.emplace(n, name);
    if (n->leaf || name.size() > 6) continue;
    const Side l = mirrored ? kRight : kLeft;
    todo.emplace_back(name + "l", n->peek(l));
    todo.emplace_back(name + "r", n->peek(other(l)));
  }
}

}  // namespace

std::string shape_dump(const std::string& shape, bool mirrored) {
  std::size_t pos = 0;
  auto u = parse_shape(shape, pos);
  if (pos != shape.size()) throw std::invalid_argument("bad shape: " + shape);
  if (mirrored) mirror(*u);
  Shape root;
  root.w = 1;
  root.l = std::move(u);
  root.r = std::make_unique<Shape>();
  Key next = 10;
  assign_keys(root, next);
  std::ostringstream os;
  os << "0 INF 1 0\n1 INF 1 0\n";
  emit(root, 2, os);
  os << "2 INF 1 0\n1 INF 1 0\n";
  return os.str();
}

Outcome run(const Fixture& f, bool mirrored) {
  Outcome out;
  auto fail = [&](const std::string& why) {
    out.ok = false;
    out.detail = f.name + (mirrored ? " (mirrored): " : ": ") + why;
    return out;
  };

  TreeOptions opts;
  opts.reclaim = sync::ReclaimMode::kRetain;  // retired nodes stay addressable for the diff
  auto tree = ChromaticTree::build_from_dump(shape_dump(f.shape, mirrored), opts);
  Process proc(*tree, 0);
  Node* root = tree->user_root();

  auto resolve = [&](const std::string& role) {
    const auto path = role_path(role, mirrored);
    return walk(root, path, path.size());
  };

  const auto target_path = role_path(f.target, mirrored);
  Node* v = walk(root, target_path, target_path.size());
  if (v == nullptr) return fail("target role does not resolve");
  const std::size_t depth = target_path.size();
  Node* p = walk(root, target_path, depth - 1);
  Node* gp = depth >= 2 ? walk(root, target_path, depth - 2) : nullptr;
  Node* ggp = depth >= 3 ? walk(root, target_path, depth - 3) : nullptr;
  const Node* center = resolve(f.center);

  std::map<const Node*, std::string> names;
  name_nodes(root, 'x', mirrored, names);
  std::vector<Entry> want_removed;
  for (const auto& e : f.removed) want_removed.emplace_back(resolve(e.role), e.kind, e.count);

  const auto before = entries(tree->census());
  const auto levels_before = weighted_levels(*tree);
  auto keys_want = tree->keys();

  std::vector<TransformEvent> events;
  tree->set_transform_hook([&](const TransformEvent& ev) {
    if (ev.point == TransformEvent::Point::kAfterScx) events.push_back(ev);
  });

  TryResult r;
  bool created = false;
  switch (f.kind) {
    case TransformKind::kInsert:
      r = tree->try_insert(p, v, v->key + 1, proc, &created);
      keys_want.push_back(v->key + 1);
      break;
    case TransformKind::kDelete:
      r = tree->try_delete(gp, p, v, v->key, proc, &created);
      keys_want.erase(std::find(keys_want.begin(), keys_want.end(), v->key));
      break;
    default:
      r = tree->try_rebalance(ggp, gp, p, v, proc);
      break;
  }
  tree->set_transform_hook(nullptr);

  if (r != TryResult::kSuccess) return fail(std::string("transformation returned ") + to_string(r));
  if (events.size() != 1 || !events[0].success) return fail("expected exactly one successful SCX");
  const auto& ev = events[0];
  if (ev.kind != f.kind) return fail(std::string("fired ") + to_string(ev.kind));
  if (ev.mirrored != mirrored) return fail("mirror flag disagrees");
  if (ev.center != center) return fail("center is not " + f.center);

  name_nodes(tree->user_root(), 'n', mirrored, names);
  std::vector<Entry> want_added;
  for (const auto& e : f.added) want_added.emplace_back(resolve(e.role), e.kind, e.count);

  const auto after = entries(tree->census());
  std::vector<Entry> removed, added;
  std::set_difference(before.begin(), before.end(), after.begin(), after.end(), std::back_inserter(removed));
  std::set_difference(after.begin(), after.end(), before.begin(), before.end(), std::back_inserter(added));
  std::sort(want_removed.begin(), want_removed.end());
  std::sort(want_added.begin(), want_added.end());
  if (removed != want_removed || added != want_added) {
    return fail("removed " + describe(removed, names) + " added " + describe(added, names) + ", expected removed " +
                describe(want_removed, names) + " added " + describe(want_added, names));
  }

  std::sort(keys_want.begin(), keys_want.end());
  const auto keys = tree->keys();
  if (keys != keys_want || !std::is_sorted(keys.begin(), keys.end())) return fail("key set or order broken");
  if (is_rebalancing(f.kind) && weighted_levels(*tree) != levels_before) return fail("leaf weighted levels changed");
  if (!is_rebalancing(f.kind) && created != f.creates) return fail("created flag disagrees with the table");
  out.ok = true;
  out.detail = f.name + (mirrored ? " (mirrored)" : "");
  return out;
}

const std::vector<Fixture>& catalog() {
  using K = TransformKind;
  static const std::vector<Fixture> all = {
      // INSERT
      {"insert-under-red", K::kInsert, "0[1,1]", "x", "x", {}, {rr("n")}, true},
      {"insert-overweight-leaf", K::kInsert, "1[3,1]", "x", "x", {ow("x", 2)}, {ow("n", 1)}},
      {"insert-plain", K::kInsert, "1[1,1]", "x", "x", {}, {}},
      // DELETE: x is the parent, xl the removed leaf, xr the sibling
      {"delete-both-black", K::kDelete, "1[1[2,2],1]", "xl", "x", {ow("xl", 1), ow("xr", 1)}, {ow("n", 2)}, true},
      {"delete-red-parent", K::kDelete, "0[0[1,1],1]", "xl", "x", {rr("x")}, {}},
      {"delete-red-sibling", K::kDelete, "1[1[1,0[0[1,1],1]],1]", "xl", "x", {rr("xrl")}, {}},
      {"delete-red-red-sibling", K::kDelete, "1[0[1,0[1,1]],1]", "xl", "x", {rr("xr")}, {}},
      // BLK
      {"blk", K::kBlk, "1[1[0[0[1,1],1],0[1,1]],1]", "xll", "xll", {rr("xll")}, {}},
      {"blk-red-u", K::kBlk, "0[1[0[0[1,1],1],0[1,1]],1]", "xll", "xll", {rr("xll")}, {rr("n")}},
      {"blk-overweight-x", K::kBlk, "1[2[0[0[1,1],1],0[1,1]],1]", "xll", "xll", {ow("x", 1), rr("xll")}, {}},
      {"blk-inner", K::kBlk, "1[1[0[1,0[1,1]],0[1,1]],1]", "xlr", "xlr", {rr("xlr")}, {}},
      {"blk-first-red-grandchild", K::kBlk, "1[1[0[1,0[1,1]],0[0[1,1],1]],1]", "xrl", "xlr", {rr("xlr"), rr("xrl")},
       {}, false, false},
      // RB1, RB2
      {"rb1", K::kRb1, "1[1[0[0[1,1],1],1],1]", "xll", "xll", {rr("xll")}, {}},
      {"rb1-overweight-x", K::kRb1, "1[2[0[0[1,1],1],1],1]", "xll", "xll", {ow("x", 1), rr("xll")}, {ow("n", 1)}},
      {"rb2", K::kRb2, "1[1[0[1,0[1,1]],1],1]", "xlr", "xlr", {rr("xlr")}, {}},
      {"rb2-overweight-x", K::kRb2, "1[2[0[1,0[1,1]],1],1]", "xlr", "xlr", {ow("x", 1), rr("xlr")}, {ow("n", 1)}},
      // W1..W7, PUSH: overweight at xl
      {"w1", K::kW1, "1[1[3,0[2,0[1,1]]],1]", "xl", "xl", {ow("xl", 2), ow("xrl", 1), rr("xrr")}, {ow("nll", 1)}},
      {"w1-heavy", K::kW1, "1[2[3,0[3,1]],1]", "xl", "xl", {ow("x", 1), ow("xl", 2), ow("xrl", 2)},
       {ow("n", 1), ow("nll", 1), ow("nlr", 1)}},
      {"w2", K::kW2, "1[1[3,0[1[1,1],0[1,1]]],1]", "xl", "xl", {ow("xl", 2), rr("xrr")}, {ow("nll", 1)}},
      {"w3", K::kW3, "1[1[3,0[1[0[0[1,1],1],1],0[1,1]]],1]", "xl", "xl", {ow("xl", 2), rr("xrlll"), rr("xrr")},
       {ow("nlll", 1)}},
      {"w4", K::kW4, "1[1[3,0[1[1,0[0[1,1],1]],1]],1]", "xl", "xl", {ow("xl", 2), rr("xrlrl")}, {ow("nll", 1)}},
      {"w5", K::kW5, "1[1[3,1[1,0[0[1,1],1]]],1]", "xl", "xl", {ow("xl", 2), rr("xrrl")}, {ow("nll", 1)}},
      {"w6", K::kW6, "1[1[3,1[0[1,0[1,1]],1]],1]", "xl", "xl", {ow("xl", 2), rr("xrlr")}, {ow("nll", 1)}},
      {"w7", K::kW7, "1[1[3,2],1]", "xl", "xl", {ow("xl", 2), ow("xr", 1)}, {ow("n", 1), ow("nl", 1)}},
      {"w7-red", K::kW7, "0[0[2,3],1]", "xl", "xl", {rr("x"), ow("xl", 1), ow("xr", 2)}, {ow("nr", 1)}},
      {"push", K::kPush, "1[1[3,1[1,1]],1]", "xl", "xl", {ow("xl", 2)}, {ow("n", 1), ow("nl", 1)}},
      {"push-red", K::kPush, "0[0[2,1[1,1]],1]", "xl", "xl", {rr("x"), ow("xl", 1)}, {}},
  };
  return all;
}

}  // namespace chromatic::fixtures
