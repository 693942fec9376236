#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "splitstreams/error.hpp"

namespace splitstreams {

using NodeIndex = std::size_t;

/// Id given to the synthesized parent of several top-level nodes.
inline constexpr std::string_view kArtificialRootId = "__root__";

/// Addresses one node occurrence: timestep plus index inside that snapshot.
struct NodeRef {
  std::size_t t = 0;
  NodeIndex index = 0;

  friend auto operator<=>(const NodeRef&, const NodeRef&) = default;
};

/// One node's existence at one timestep.
///
/// `prev` indexes into the snapshot at t-1, `next` into the snapshot at t+1.
/// `aggregate`, `size`, `pos` and `spacing` are filled in by the layout
/// module; after parsing they are zero.
struct TemporalNode {
  std::string id;
  std::size_t t = 0;
  std::size_t seq = 0;  // position in the input document
  std::optional<NodeIndex> parent;
  std::vector<NodeIndex> children;  // sibling order
  int orderIndex = 0;               // rank among siblings
  std::optional<double> ownValue;
  std::optional<double> explicitPos;
  double aggregate = 0.0;
  double size = 0.0;
  double pos = 0.0;
  double spacing = 0.0;
  int depth = 0;
  bool artificial = false;
  std::vector<NodeIndex> prev;
  std::vector<NodeIndex> next;
  // Links exactly as written in the document; empty optional when omitted.
  std::optional<std::vector<NodeIndex>> declaredPrev;
  std::optional<std::vector<NodeIndex>> declaredNext;

  bool is_leaf() const noexcept { return children.empty(); }
};

struct TreeSnapshot {
  std::vector<TemporalNode> nodes;
  NodeIndex root = 0;
  int maxDepth = 0;

  std::optional<NodeIndex> find(std::string_view id) const {
    auto it = byId_.find(std::string(id));
    if (it == byId_.end()) return std::nullopt;
    return it->second;
  }

  const TemporalNode& operator[](NodeIndex i) const { return nodes[i]; }
  TemporalNode& operator[](NodeIndex i) { return nodes[i]; }
  std::size_t size() const noexcept { return nodes.size(); }

  /// Rebuilds the id lookup; call after editing `nodes` by hand.
  void reindex() {
    byId_.clear();
    for (NodeIndex i = 0; i < nodes.size(); ++i) byId_.emplace(nodes[i].id, i);
  }

  /// True when `ancestor` lies strictly above `node`.
  bool is_ancestor(NodeIndex ancestor, NodeIndex node) const {
    auto p = nodes[node].parent;
    while (p) {
      if (*p == ancestor) return true;
      p = nodes[*p].parent;
    }
    return false;
  }

 private:
  std::unordered_map<std::string, NodeIndex> byId_;
};

struct TemporalForest {
  std::vector<TreeSnapshot> timesteps;
  std::vector<double> timeAxis;

  const TemporalNode& node(NodeRef r) const { return timesteps[r.t].nodes[r.index]; }
  TemporalNode& node(NodeRef r) { return timesteps[r.t].nodes[r.index]; }

  std::size_t node_count() const {
    std::size_t n = 0;
    for (const auto& s : timesteps) n += s.size();
    return n;
  }
};

namespace detail {

inline std::string at_timestep(std::string_view id, std::size_t t) {
  return "'" + std::string(id) + "' at timestep " + std::to_string(t);
}

inline std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  const std::size_t end = std::min(byte > 0 ? byte - 1 : 0, text.size());
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

inline const nlohmann::json* member(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return nullptr;
  return &*it;
}

inline std::vector<std::string> string_list(const nlohmann::json& v, const std::string& where) {
  if (!v.is_array()) throw ParseError(where + ": expected an array of ids");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) throw ParseError(where + ": expected an array of ids");
    out.push_back(e.get<std::string>());
  }
  return out;
}

struct RawNode {
  std::string id;
  std::optional<std::string> parent;
  std::optional<double> value;
  std::optional<long long> order;
  std::optional<double> pos;
  std::optional<std::vector<std::string>> prev;
  std::optional<std::vector<std::string>> next;
};

inline RawNode read_node(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object()) throw ParseError(where + ": expected an object");
  RawNode n;
  const auto* id = member(j, "id");
  if (id == nullptr || !id->is_string()) throw ParseError(where + ": missing string field 'id'");
  n.id = id->get<std::string>();
  if (const auto* p = member(j, "parent")) {
    if (!p->is_string()) throw ParseError(where + ".parent: expected a string or null");
    n.parent = p->get<std::string>();
  }
  if (const auto* v = member(j, "value")) {
    if (!v->is_number()) throw ParseError(where + ".value: expected a number");
    n.value = v->get<double>();
  }
  if (const auto* o = member(j, "order")) {
    if (!o->is_number_integer()) throw ParseError(where + ".order: expected an integer");
    n.order = o->get<long long>();
  }
  if (const auto* p = member(j, "pos")) {
    if (!p->is_number()) throw ParseError(where + ".pos: expected a number");
    n.pos = p->get<double>();
  }
  if (const auto* p = member(j, "prev")) n.prev = string_list(*p, where + ".prev");
  if (const auto* p = member(j, "next")) n.next = string_list(*p, where + ".next");
  return n;
}

// Sizes with unit leaves and no padding; used to reject declared values that
// cannot hold their children.
inline void check_values(const TreeSnapshot& snap) {
  std::vector<double> size(snap.size(), 0.0);
  std::vector<NodeIndex> order;
  order.reserve(snap.size());
  order.push_back(snap.root);
  for (std::size_t i = 0; i < order.size(); ++i)
    for (NodeIndex c : snap[order[i]].children) order.push_back(c);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const auto& n = snap[*it];
    if (n.is_leaf()) {
      size[*it] = n.ownValue.value_or(1.0);
      continue;
    }
    double aggregate = 0.0;
    for (NodeIndex c : n.children) aggregate += size[c];
    if (n.ownValue && *n.ownValue < aggregate) {
      throw StructureError("node " + at_timestep(n.id, n.t) + " declares value " +
                               std::to_string(*n.ownValue) +
                               " below the sum of its children " + std::to_string(aggregate),
                           n.id);
    }
    size[*it] = n.ownValue.value_or(aggregate);
  }
}

inline TreeSnapshot build_snapshot(const std::vector<RawNode>& raw, std::size_t t) {
  TreeSnapshot snap;
  snap.nodes.reserve(raw.size() + 1);
  std::unordered_map<std::string, NodeIndex> index;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const auto& r = raw[i];
    if (r.id == kArtificialRootId)
      throw StructureError("id '" + r.id + "' is reserved (timestep " + std::to_string(t) + ")", r.id);
    if (!index.emplace(r.id, i).second)
      throw StructureError("node " + at_timestep(r.id, t) +
                               " is listed more than once (multiple parents)",
                           r.id);
    if (r.value && (!std::isfinite(*r.value) || *r.value < 0.0))
      throw StructureError("node " + at_timestep(r.id, t) + " has a negative or non-finite value",
                           r.id);
    if (r.pos && (!std::isfinite(*r.pos) || *r.pos < 0.0))
      throw StructureError("node " + at_timestep(r.id, t) + " has a negative or non-finite pos",
                           r.id);
    TemporalNode n;
    n.id = r.id;
    n.t = t;
    n.seq = i;
    n.ownValue = r.value;
    n.explicitPos = r.pos;
    snap.nodes.push_back(std::move(n));
  }
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!raw[i].parent) continue;
    auto it = index.find(*raw[i].parent);
    if (it == index.end())
      throw StructureError("node " + at_timestep(raw[i].id, t) + " names unknown parent '" +
                               *raw[i].parent + "'",
                           raw[i].id);
    if (it->second == i)
      throw StructureError("node " + at_timestep(raw[i].id, t) + " is its own parent", raw[i].id);
    snap.nodes[i].parent = it->second;
  }

  // 0 = unvisited, 1 = on the current walk, 2 = known to reach a root
  std::vector<char> state(snap.size(), 0);
  for (NodeIndex start = 0; start < snap.size(); ++start) {
    std::vector<NodeIndex> walk;
    auto cur = std::optional<NodeIndex>(start);
    while (cur && state[*cur] == 0) {
      state[*cur] = 1;
      walk.push_back(*cur);
      cur = snap.nodes[*cur].parent;
    }
    if (cur && state[*cur] == 1)
      throw StructureError("parent links of " + at_timestep(snap.nodes[*cur].id, t) +
                               " form a cycle",
                           snap.nodes[*cur].id);
    for (NodeIndex w : walk) state[w] = 2;
  }

  std::vector<NodeIndex> roots;
  for (NodeIndex i = 0; i < snap.size(); ++i)
    if (!snap.nodes[i].parent) roots.push_back(i);

  if (roots.size() == 1) {
    snap.root = roots.front();
  } else {
    TemporalNode root;
    root.id = std::string(kArtificialRootId);
    root.t = t;
    root.seq = raw.size();
    root.artificial = true;
    if (roots.empty()) root.ownValue = 0.0;  // empty snapshot
    snap.root = snap.size();
    snap.nodes.push_back(std::move(root));
    for (NodeIndex r : roots) snap.nodes[r].parent = snap.root;
  }

  for (NodeIndex i = 0; i < snap.size(); ++i)
    if (snap.nodes[i].parent) snap.nodes[*snap.nodes[i].parent].children.push_back(i);
  auto key = [&](NodeIndex i) {
    const auto& r = i < raw.size() ? raw[i].order : std::nullopt;
    return std::pair<long long, std::size_t>(r.value_or(static_cast<long long>(i)), i);
  };
  for (auto& n : snap.nodes) {
    std::stable_sort(n.children.begin(), n.children.end(),
                     [&](NodeIndex a, NodeIndex b) { return key(a) < key(b); });
    for (std::size_t k = 0; k < n.children.size(); ++k)
      snap.nodes[n.children[k]].orderIndex = static_cast<int>(k);
  }

  std::vector<NodeIndex> queue{snap.root};
  snap.nodes[snap.root].depth = 0;
  for (std::size_t i = 0; i < queue.size(); ++i) {
    const auto& n = snap.nodes[queue[i]];
    snap.maxDepth = std::max(snap.maxDepth, n.depth);
    for (NodeIndex c : n.children) {
      snap.nodes[c].depth = n.depth + 1;
      queue.push_back(c);
    }
  }
  snap.reindex();
  check_values(snap);
  return snap;
}

inline std::vector<NodeIndex> resolve_refs(const std::vector<std::string>& ids,
                                           const TreeSnapshot* other, const TemporalNode& from,
                                           const char* what) {
  std::vector<NodeIndex> out;
  for (const auto& id : ids) {
    std::optional<NodeIndex> hit;
    if (other != nullptr && id != kArtificialRootId) hit = other->find(id);
    if (!hit)
      throw LinkError("node " + at_timestep(from.id, from.t) + " references unknown " + what +
                      " '" + id + "'");
    out.push_back(*hit);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace detail

/// Parses a dataset document into a forest. Explicit prev/next references are
/// resolved and checked but not yet completed; see link_across_time().
inline TemporalForest parse_dataset(std::string_view raw) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(raw.begin(), raw.end());
  } catch (const nlohmann::json::parse_error& e) {
    auto [line, column] = detail::line_column(raw, e.byte);
    throw ParseError("syntax error at line " + std::to_string(line) + ", column " +
                         std::to_string(column) + ": " + e.what(),
                     line, column);
  }
  if (!doc.is_object()) throw ParseError("document must be an object");
  const auto* steps = detail::member(doc, "timesteps");
  if (steps == nullptr || !steps->is_array())
    throw ParseError("document needs a 'timesteps' array");

  std::vector<std::vector<detail::RawNode>> raw_steps;
  for (std::size_t t = 0; t < steps->size(); ++t) {
    const auto& step = (*steps)[t];
    const std::string where = "timesteps[" + std::to_string(t) + "]";
    if (!step.is_object()) throw ParseError(where + ": expected an object");
    std::vector<detail::RawNode> nodes;
    if (const auto* list = detail::member(step, "nodes")) {
      if (!list->is_array()) throw ParseError(where + ".nodes: expected an array");
      for (std::size_t i = 0; i < list->size(); ++i)
        nodes.push_back(detail::read_node((*list)[i], where + ".nodes[" + std::to_string(i) + "]"));
    }
    raw_steps.push_back(std::move(nodes));
  }

  TemporalForest forest;
  if (const auto* axis = detail::member(doc, "timeAxis")) {
    if (!axis->is_array()) throw ParseError("timeAxis: expected an array of numbers");
    for (const auto& v : *axis) {
      if (!v.is_number()) throw ParseError("timeAxis: expected an array of numbers");
      forest.timeAxis.push_back(v.get<double>());
    }
    if (forest.timeAxis.size() != raw_steps.size())
      throw StructureError("timeAxis has " + std::to_string(forest.timeAxis.size()) +
                           " entries for " + std::to_string(raw_steps.size()) + " timesteps");
    for (std::size_t i = 0; i < forest.timeAxis.size(); ++i) {
      if (!std::isfinite(forest.timeAxis[i]) ||
          (i > 0 && !(forest.timeAxis[i] > forest.timeAxis[i - 1])))
        throw StructureError("timeAxis must be finite and strictly increasing");
    }
  } else {
    for (std::size_t i = 0; i < raw_steps.size(); ++i)
      forest.timeAxis.push_back(static_cast<double>(i));
  }

  for (std::size_t t = 0; t < raw_steps.size(); ++t)
    forest.timesteps.push_back(detail::build_snapshot(raw_steps[t], t));

  for (std::size_t t = 0; t < raw_steps.size(); ++t) {
    const TreeSnapshot* before = t > 0 ? &forest.timesteps[t - 1] : nullptr;
    const TreeSnapshot* after = t + 1 < raw_steps.size() ? &forest.timesteps[t + 1] : nullptr;
    for (std::size_t i = 0; i < raw_steps[t].size(); ++i) {
      auto& n = forest.timesteps[t].nodes[i];
      if (raw_steps[t][i].prev)
        n.declaredPrev = detail::resolve_refs(*raw_steps[t][i].prev, before, n, "predecessor");
      if (raw_steps[t][i].next)
        n.declaredNext = detail::resolve_refs(*raw_steps[t][i].next, after, n, "successor");
    }
  }
  return forest;
}

/// Completes and cross-checks the links between consecutive snapshots.
///
/// Declared links are kept as written. A node without a declared `prev` is
/// linked to the same-id node of the previous snapshot, unless that node
/// declared its own `next` list. Afterwards m in n.prev iff n in m.next.
inline TemporalForest link_across_time(TemporalForest forest) {
  for (auto& snap : forest.timesteps)
    for (auto& n : snap.nodes) {
      n.prev.clear();
      n.next.clear();
    }
  for (std::size_t t = 0; t + 1 < forest.timesteps.size(); ++t) {
    auto& from = forest.timesteps[t];
    auto& to = forest.timesteps[t + 1];
    std::set<std::pair<NodeIndex, NodeIndex>> edges;
    for (NodeIndex n = 0; n < to.size(); ++n)
      if (to[n].declaredPrev)
        for (NodeIndex m : *to[n].declaredPrev) edges.emplace(m, n);
    for (NodeIndex m = 0; m < from.size(); ++m)
      if (from[m].declaredNext)
        for (NodeIndex n : *from[m].declaredNext) edges.emplace(m, n);

    for (auto [m, n] : edges) {
      const auto& dp = to[n].declaredPrev;
      const auto& dn = from[m].declaredNext;
      if (dp && !std::binary_search(dp->begin(), dp->end(), m))
        throw LinkError("node " + detail::at_timestep(from[m].id, t) + " lists successor '" +
                        to[n].id + "', which does not list it as predecessor");
      if (dn && !std::binary_search(dn->begin(), dn->end(), n))
        throw LinkError("node " + detail::at_timestep(to[n].id, t + 1) + " lists predecessor '" +
                        from[m].id + "', which does not list it as successor");
    }

    for (NodeIndex n = 0; n < to.size(); ++n) {
      if (to[n].declaredPrev) continue;
      auto m = from.find(to[n].id);
      if (m && !from[*m].declaredNext) edges.emplace(*m, n);
    }
    for (auto [m, n] : edges) {
      from[m].next.push_back(n);
      to[n].prev.push_back(m);
    }
    for (auto& n : to.nodes) std::sort(n.prev.begin(), n.prev.end());
  }
  return forest;
}

/// parse_dataset() followed by link_across_time().
inline TemporalForest load_dataset(std::string_view raw) {
  return link_across_time(parse_dataset(raw));
}

}  // namespace splitstreams
