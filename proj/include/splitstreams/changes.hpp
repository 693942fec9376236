#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <tuple>
#include <type_traits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "splitstreams/model.hpp"

namespace splitstreams {

namespace change {

struct Add {
  NodeRef node;
  friend bool operator==(const Add&, const Add&) = default;
};

struct Remove {
  NodeRef node;
  friend bool operator==(const Remove&, const Remove&) = default;
};

struct Split {
  NodeRef source;
  std::vector<NodeRef> targets;
  friend bool operator==(const Split&, const Split&) = default;
};

struct Merge {
  std::vector<NodeRef> sources;
  NodeRef target;
  friend bool operator==(const Merge&, const Merge&) = default;
};

/// Reordering among siblings: the link from -> node crosses another link
/// between the same pair of parents.
struct MoveWithin {
  NodeRef from;
  NodeRef node;
  int oldIndex = 0;
  int newIndex = 0;
  friend bool operator==(const MoveWithin&, const MoveWithin&) = default;
};

/// The parent of `node` is not a successor of the parent of `from`. An empty
/// parent means top level (no parent, or the synthesized root).
struct MoveAcross {
  NodeRef from;
  NodeRef node;
  std::optional<NodeRef> oldParent;
  std::optional<NodeRef> newParent;
  friend bool operator==(const MoveAcross&, const MoveAcross&) = default;
};

/// `formerAncestor` was above `node` at the earlier timestep and a successor
/// of `node` is above a successor of `formerAncestor` at the later one. Both
/// refer to the earlier snapshot.
struct AncestorInversion {
  NodeRef node;
  NodeRef formerAncestor;
  friend bool operator==(const AncestorInversion&, const AncestorInversion&) = default;
};

}  // namespace change

using ChangeEvent = std::variant<change::Add, change::Remove, change::Split, change::Merge,
                                 change::MoveWithin, change::MoveAcross,
                                 change::AncestorInversion>;

struct ChangeSet {
  std::size_t fromT = 0;
  std::size_t toT = 0;
  std::vector<ChangeEvent> events;  // grouped by kind in variant order
};

namespace detail {

constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

// Flat copy of the fields classification reads, so the random accesses it
// makes stay within a few small arrays instead of whole nodes.
struct SnapshotIndex {
  std::size_t t = 0;
  std::vector<std::uint32_t> parent;     // kNone at the root
  std::vector<std::uint32_t> topParent;  // kNone when absent or synthesized
  std::vector<int> order;
  std::vector<std::uint8_t> artificial;
  std::vector<std::uint32_t> firstNext;  // CSR offsets into `next`
  std::vector<std::uint32_t> next;       // empty for synthesized nodes
  std::vector<std::uint32_t> enter;      // Euler tour
  std::vector<std::uint32_t> leave;

  std::size_t size() const noexcept { return parent.size(); }

  explicit SnapshotIndex(const TreeSnapshot& s) {
    const std::size_t n = s.size();
    parent.assign(n, kNone);
    topParent.assign(n, kNone);
    order.resize(n);
    artificial.resize(n);
    firstNext.resize(n + 1);
    enter.assign(n, 0);
    leave.assign(n, 0);
    for (NodeIndex i = 0; i < n; ++i) {
      const auto& node = s[i];
      t = node.t;
      if (node.parent) parent[i] = static_cast<std::uint32_t>(*node.parent);
      order[i] = node.orderIndex;
      artificial[i] = node.artificial;
      firstNext[i] = static_cast<std::uint32_t>(next.size());
      if (!node.artificial) next.insert(next.end(), node.next.begin(), node.next.end());
    }
    firstNext[n] = static_cast<std::uint32_t>(next.size());
    for (NodeIndex i = 0; i < n; ++i)
      if (parent[i] != kNone && !artificial[parent[i]]) topParent[i] = parent[i];
    if (n == 0) return;
    std::uint32_t clock = 0;
    std::vector<std::pair<NodeIndex, std::size_t>> stack{{s.root, 0}};
    enter[s.root] = clock++;
    while (!stack.empty()) {
      auto& [node, child] = stack.back();
      if (child < s[node].children.size()) {
        NodeIndex c = s[node].children[child++];
        enter[c] = clock++;
        stack.emplace_back(c, 0);
      } else {
        leave[node] = clock++;
        stack.pop_back();
      }
    }
  }

  bool strictly_above(std::uint32_t a, std::uint32_t b) const noexcept {
    return a != b && enter[a] < enter[b] && leave[b] < leave[a];
  }
  bool has_next(std::uint32_t i, std::uint32_t target) const noexcept {
    return std::binary_search(next.begin() + firstNext[i], next.begin() + firstNext[i + 1], target);
  }
};

inline std::vector<change::AncestorInversion> ancestor_inversions(const SnapshotIndex& from,
                                                                  const SnapshotIndex& to) {
  std::vector<change::AncestorInversion> out;
  if (from.size() == 0 || to.size() == 0) return out;
  for (std::uint32_t n = 0; n < from.size(); ++n) {
    const std::uint32_t nb = from.firstNext[n], ne = from.firstNext[n + 1];
    if (nb == ne) continue;
    for (std::uint32_t a = from.parent[n]; a != kNone; a = from.parent[a]) {
      const std::uint32_t ab = from.firstNext[a], ae = from.firstNext[a + 1];
      bool hit = false;
      for (std::uint32_t i = nb; i < ne && !hit; ++i)
        for (std::uint32_t j = ab; j < ae && !hit; ++j) hit = to.strictly_above(from.next[i], from.next[j]);
      if (hit) out.push_back({NodeRef{from.t, n}, NodeRef{from.t, a}});
    }
  }
  return out;
}

}  // namespace detail

/// Every (n, m) with m strictly above n in `from` and some successor of n
/// strictly above some successor of m in `to`. Both snapshots must be linked.
inline std::vector<change::AncestorInversion> detect_ancestor_inversions(const TreeSnapshot& from,
                                                                         const TreeSnapshot& to) {
  return detail::ancestor_inversions(detail::SnapshotIndex(from), detail::SnapshotIndex(to));
}

namespace detail {

struct Link {
  NodeIndex from;
  NodeIndex to;
  int oldOrder;
  int newOrder;
};

// Marks every link that crosses another link of the same group: one with a
// strictly larger old order and strictly smaller new order, or vice versa.
inline void crossing_links(std::vector<Link>& links, std::vector<bool>& crosses) {
  std::sort(links.begin(), links.end(), [](const Link& a, const Link& b) {
    return std::tie(a.oldOrder, a.newOrder) < std::tie(b.oldOrder, b.newOrder);
  });
  const std::size_t k = links.size();
  crosses.assign(k, false);
  // prefix max of newOrder over links with strictly smaller oldOrder
  int best = -1;
  for (std::size_t i = 0; i < k;) {
    std::size_t j = i;
    while (j < k && links[j].oldOrder == links[i].oldOrder) ++j;
    for (std::size_t q = i; q < j; ++q)
      if (best > links[q].newOrder) crosses[q] = true;
    for (std::size_t q = i; q < j; ++q) best = std::max(best, links[q].newOrder);
    i = j;
  }
  // suffix min of newOrder over links with strictly larger oldOrder
  int least = std::numeric_limits<int>::max();
  for (std::size_t end = k; end > 0;) {
    std::size_t start = end;
    while (start > 0 && links[start - 1].oldOrder == links[end - 1].oldOrder) --start;
    for (std::size_t q = start; q < end; ++q)
      if (least < links[q].newOrder) crosses[q] = true;
    for (std::size_t q = start; q < end; ++q) least = std::min(least, links[q].newOrder);
    end = start;
  }
}

inline std::size_t kind_rank(const ChangeEvent& e) { return e.index(); }

inline NodeRef primary_ref(const ChangeEvent& e) {
  return std::visit(
      [](const auto& ev) -> NodeRef {
        using T = std::decay_t<decltype(ev)>;
        if constexpr (std::is_same_v<T, change::Split>) return ev.source;
        else if constexpr (std::is_same_v<T, change::Merge>) return ev.target;
        else return ev.node;
      },
      e);
}

inline NodeRef secondary_ref(const ChangeEvent& e) {
  return std::visit(
      [](const auto& ev) -> NodeRef {
        using T = std::decay_t<decltype(ev)>;
        if constexpr (std::is_same_v<T, change::MoveWithin> || std::is_same_v<T, change::MoveAcross>)
          return ev.from;
        else if constexpr (std::is_same_v<T, change::AncestorInversion>) return ev.formerAncestor;
        else return NodeRef{};
      },
      e);
}

inline ChangeSet classify_indexed(const TreeSnapshot& from, const TreeSnapshot& to, const SnapshotIndex& fi,
                                  const SnapshotIndex& ti, std::size_t t) {
  ChangeSet cs{t, t + 1, {}};
  auto ref_from = [&](NodeIndex i) { return NodeRef{t, i}; };
  auto ref_to = [&](NodeIndex i) { return NodeRef{t + 1, i}; };

  for (NodeIndex n = 0; n < to.size(); ++n)
    if (!to[n].artificial && to[n].prev.empty()) cs.events.emplace_back(change::Add{ref_to(n)});
  for (NodeIndex m = 0; m < from.size(); ++m)
    if (!from[m].artificial && from[m].next.empty())
      cs.events.emplace_back(change::Remove{ref_from(m)});
  for (NodeIndex m = 0; m < from.size(); ++m) {
    if (from[m].artificial || from[m].next.size() < 2) continue;
    change::Split s{ref_from(m), {}};
    for (NodeIndex n : from[m].next) s.targets.push_back(ref_to(n));
    cs.events.emplace_back(std::move(s));
  }
  for (NodeIndex n = 0; n < to.size(); ++n) {
    if (to[n].artificial || to[n].prev.size() < 2) continue;
    change::Merge g{{}, ref_to(n)};
    for (NodeIndex m : to[n].prev) g.sources.push_back(ref_from(m));
    cs.events.emplace_back(std::move(g));
  }

  // Links grouped by (old top parent, new top parent) when the parents
  // correspond; the rest are moves across.
  struct Keyed {
    std::uint32_t gm, gn;
    Link link;
  };
  std::vector<Keyed> within;
  std::vector<ChangeEvent> across;
  for (std::uint32_t m = 0; m < fi.size(); ++m) {
    const std::uint32_t pm = fi.topParent[m];
    for (std::uint32_t k = fi.firstNext[m]; k < fi.firstNext[m + 1]; ++k) {
      const std::uint32_t n = fi.next[k];
      if (ti.artificial[n]) continue;
      const std::uint32_t pn = ti.topParent[n];
      const bool same = (pm == kNone && pn == kNone) || (pm != kNone && pn != kNone && fi.has_next(pm, pn));
      if (!same) {
        change::MoveAcross ev{ref_from(m), ref_to(n), std::nullopt, std::nullopt};
        if (pm != kNone) ev.oldParent = ref_from(pm);
        if (pn != kNone) ev.newParent = ref_to(pn);
        across.emplace_back(ev);
        continue;
      }
      within.push_back({pm, pn, {m, n, fi.order[m], ti.order[n]}});
    }
  }
  std::sort(within.begin(), within.end(), [](const Keyed& a, const Keyed& b) {
    return std::tie(a.gm, a.gn, a.link.from, a.link.to) < std::tie(b.gm, b.gn, b.link.from, b.link.to);
  });
  std::vector<Link> group;
  std::vector<bool> crosses;
  for (std::size_t i = 0; i < within.size();) {
    std::size_t j = i;
    group.clear();
    while (j < within.size() && within[j].gm == within[i].gm && within[j].gn == within[i].gn)
      group.push_back(within[j++].link);
    crossing_links(group, crosses);
    for (std::size_t q = 0; q < group.size(); ++q)
      if (crosses[q])
        cs.events.emplace_back(change::MoveWithin{ref_from(group[q].from), ref_to(group[q].to),
                                                  group[q].oldOrder, group[q].newOrder});
    i = j;
  }
  for (auto& ev : across) cs.events.emplace_back(std::move(ev));
  for (const auto& inv : ancestor_inversions(fi, ti)) cs.events.emplace_back(inv);

  std::stable_sort(cs.events.begin(), cs.events.end(), [](const ChangeEvent& a, const ChangeEvent& b) {
    auto ka = kind_rank(a);
    auto kb = kind_rank(b);
    if (ka != kb) return ka < kb;
    auto pa = primary_ref(a);
    auto pb = primary_ref(b);
    if (pa != pb) return pa < pb;
    return secondary_ref(a) < secondary_ref(b);
  });
  return cs;
}

}  // namespace detail

/// Classifies the changes between snapshots t and t+1 of a linked forest.
inline ChangeSet classify_pair(const TemporalForest& forest, std::size_t t) {
  const auto& from = forest.timesteps[t];
  const auto& to = forest.timesteps[t + 1];
  return detail::classify_indexed(from, to, detail::SnapshotIndex(from), detail::SnapshotIndex(to), t);
}

/// One ChangeSet per consecutive snapshot pair.
inline std::vector<ChangeSet> classify_changes(const TemporalForest& forest) {
  std::vector<ChangeSet> out;
  if (forest.timesteps.size() < 2) return out;
  std::optional<detail::SnapshotIndex> prev(std::in_place, forest.timesteps[0]);
  for (std::size_t t = 0; t + 1 < forest.timesteps.size(); ++t) {
    detail::SnapshotIndex cur(forest.timesteps[t + 1]);
    out.push_back(detail::classify_indexed(forest.timesteps[t], forest.timesteps[t + 1], *prev, cur, t));
    prev.emplace(std::move(cur));
  }
  return out;
}

/// Human-readable, id-based rendering of an event, e.g. "MoveWithin(A,0,1)".
inline std::string describe(const ChangeEvent& e, const TemporalForest& forest) {
  auto id = [&](NodeRef r) { return forest.node(r).id; };
  auto ids = [&](const std::vector<NodeRef>& rs) {
    std::string s = "[";
    for (std::size_t i = 0; i < rs.size(); ++i) s += (i ? "," : "") + id(rs[i]);
    return s + "]";
  };
  auto opt = [&](const std::optional<NodeRef>& r) { return r ? id(*r) : std::string("-"); };
  return std::visit(
      [&](const auto& ev) -> std::string {
        using T = std::decay_t<decltype(ev)>;
        if constexpr (std::is_same_v<T, change::Add>) return "Add(" + id(ev.node) + ")";
        else if constexpr (std::is_same_v<T, change::Remove>) return "Remove(" + id(ev.node) + ")";
        else if constexpr (std::is_same_v<T, change::Split>)
          return "Split(" + id(ev.source) + "," + ids(ev.targets) + ")";
        else if constexpr (std::is_same_v<T, change::Merge>)
          return "Merge(" + ids(ev.sources) + "," + id(ev.target) + ")";
        else if constexpr (std::is_same_v<T, change::MoveWithin>)
          return "MoveWithin(" + id(ev.from) + "->" + id(ev.node) + "," +
                 std::to_string(ev.oldIndex) + "," + std::to_string(ev.newIndex) + ")";
        else if constexpr (std::is_same_v<T, change::MoveAcross>)
          return "MoveAcross(" + id(ev.from) + "->" + id(ev.node) + "," + opt(ev.oldParent) + "," +
                 opt(ev.newParent) + ")";
        else return "AncestorInversion(" + id(ev.node) + "," + id(ev.formerAncestor) + ")";
      },
      e);
}

}  // namespace splitstreams
