#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <utility>
#include <variant>
#include <vector>

#include "splitstreams/changes.hpp"
#include "splitstreams/layout.hpp"
#include "splitstreams/model.hpp"

namespace splitstreams {

struct YBand {
  double y0 = 0.0;
  double y1 = 0.0;
  friend bool operator==(const YBand&, const YBand&) = default;
};

/// Pixel anchors between a timestep and the next one: flat from t to t1,
/// curve from t1 to t2, flat from t2 to next.
struct TimeAnchor {
  double t = 0.0;
  double t1 = 0.0;
  double t2 = 0.0;
};

inline TimeAnchor time_anchor(double t, double next, double hcr) {
  const double d = next - t;
  const double t1 = t + 0.5 * hcr * d;
  // measured from whichever end keeps the degenerate case exact: t2 == t1
  // at hcr 1, t2 == next at hcr 0
  const double t2 = hcr >= 0.5 ? t1 + (1.0 - hcr) * d : next - 0.5 * hcr * d;
  return {t, t1, t2};
}

enum class CapSide { Start, End };

/// Whole transition, or one half of a transition cut for a hole/thread pass.
enum class TransitionPart { Whole, Approach, Exit };

namespace segment {

/// Axis-aligned rectangle of one node occurrence. Visible extent is
/// [window0, window1] minus the split opening (gap0, gap1).
struct Flat {
  NodeRef node;
  double x0 = 0.0;
  double x1 = 0.0;
  YBand band;
  double window0 = 0.0;
  double window1 = 0.0;
  double gap0 = 0.0;
  double gap1 = 0.0;
};

struct Transition {
  NodeRef from;
  NodeRef to;
  double x0 = 0.0;
  double x1 = 0.0;
  YBand fromBand;
  YBand toBand;
  TransitionPart part = TransitionPart::Whole;
};

/// Half ellipse; its flat side sits at x1 (Start) or x0 (End). Clipped like
/// Flat.
struct Cap {
  NodeRef node;
  CapSide side = CapSide::Start;
  double x0 = 0.0;
  double x1 = 0.0;
  YBand band;
  double window0 = 0.0;
  double window1 = 0.0;
  double gap0 = 0.0;
  double gap1 = 0.0;

  double centre_x() const noexcept { return side == CapSide::Start ? x1 : x0; }
};

}  // namespace segment

using Segment = std::variant<segment::Flat, segment::Transition, segment::Cap>;

/// A run of segments that is contiguous in x and drawn as one shape.
struct Strand {
  int depth = 0;
  std::vector<Segment> segments;
};

/// Hole-and-thread pass for an ancestor inversion: the thread transition is
/// cut in half; the approach half paints above the pierced transition, the
/// exit half below it, and a hole is carved from the pierced stream.
struct HolePass {
  NodeRef threadFrom;
  NodeRef threadTo;
  NodeRef piercedFrom;
  NodeRef piercedTo;
  double x = 0.0;          // crossing abscissa
  double halfWidth = 0.0;  // half of the hole width
  YBand hole;              // empty when y0 >= y1
};

/// Lifetime geometry of one predecessor-free chain.
struct StreamPath {
  std::size_t chainId = 0;
  std::vector<NodeRef> nodeChain;  // nodes whose flat belongs to this path
  std::vector<Strand> strands;
  std::vector<HolePass> holes;
};

inline double segment_x0(const Segment& s) {
  return std::visit([](const auto& v) { return v.x0; }, s);
}
inline double segment_x1(const Segment& s) {
  return std::visit([](const auto& v) { return v.x1; }, s);
}

/// y of the cubic with horizontal tangents from (x0, y0) to (x1, y1) at
/// abscissa x. Control points sit at the horizontal midpoint.
inline double bezier_edge_y(double x0, double y0, double x1, double y1, double x) {
  if (!(x1 > x0)) return x <= x0 ? y0 : y1;
  const double u = std::clamp((x - x0) / (x1 - x0), 0.0, 1.0);
  // x(s) = 1.5 s (1 - s) + s^3 is strictly increasing on [0, 1]
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < 60; ++i) {
    const double s = 0.5 * (lo + hi);
    const double xs = 1.5 * s * (1.0 - s) + s * s * s;
    (xs < u ? lo : hi) = s;
  }
  const double s = 0.5 * (lo + hi);
  return y0 + (y1 - y0) * (3.0 * s * s - 2.0 * s * s * s);
}

/// Half-ellipse cap for a node without predecessor (Start) or successor (End).
/// Its width is 0.5 * hcr * timestepGap.
inline segment::Cap make_cap(NodeRef node, CapSide side, double timestepX, YBand band,
                             const RenderConfig& cfg) {
  const double w = half_flat_width(cfg);
  segment::Cap cap;
  cap.node = node;
  cap.side = side;
  cap.band = band;
  cap.x0 = side == CapSide::Start ? timestepX - w : timestepX;
  cap.x1 = side == CapSide::Start ? timestepX : timestepX + w;
  cap.window0 = cap.x0;
  cap.window1 = cap.x1;
  cap.gap0 = cap.gap1 = cap.x0;
  return cap;
}

namespace detail {

inline YBand band_of(const LayoutFrame& f, NodeIndex i) { return {f.bands[i].y0, f.bands[i].y1}; }

// Splits `band` into consecutive pieces proportional to `weights`; the pieces
// share endpoints and cover the band exactly.
inline std::vector<YBand> partition(YBand band, const std::vector<double>& weights) {
  std::vector<YBand> out(weights.size());
  double total = 0.0;
  for (double w : weights) total += w;
  double acc = 0.0;
  double y = band.y0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += total > 0.0 ? weights[i] : 1.0;
    const double denom = total > 0.0 ? total : static_cast<double>(weights.size());
    const double end = i + 1 == weights.size() ? band.y1 : band.y0 + (band.y1 - band.y0) * (acc / denom);
    out[i] = {y, end};
    y = end;
  }
  return out;
}

}  // namespace detail

/// Builds one StreamPath per node without predecessor by walking successor
/// links depth first. A node with several predecessors is emitted once, by
/// the walk that reaches it last; each incoming link still yields its own
/// transition. Split sources and merge targets divide their band among the
/// links in proportion to the linked nodes' sizes.
///
/// Strands break wherever a link is not one-to-one or the depth changes, so
/// each strand has a single depth and is contiguous in x.
inline std::vector<StreamPath> assemble_streams(const TemporalForest& forest,
                                                const std::vector<LayoutFrame>& frames,
                                                const RenderConfig& cfg) {
  const std::size_t T = forest.timesteps.size();
  std::vector<StreamPath> paths;
  if (T == 0) return paths;
  const double h = half_flat_width(cfg);

  std::vector<std::vector<std::size_t>> arrived(T);
  std::vector<std::vector<std::optional<std::size_t>>> pending(T);
  for (std::size_t t = 0; t < T; ++t) {
    arrived[t].assign(forest.timesteps[t].size(), 0);
    pending[t].assign(forest.timesteps[t].size(), std::nullopt);
  }
  std::vector<TimeAnchor> anchors;
  for (std::size_t t = 0; t + 1 < T; ++t)
    anchors.push_back(time_anchor(frames[t].x, frames[t + 1].x, cfg.hcr));

  auto new_strand = [](StreamPath& p, int depth) {
    p.strands.push_back({depth, {}});
    return p.strands.size() - 1;
  };

  // Emits the flat (and caps) of `r`; returns the strand holding the flat.
  auto emit_node = [&](StreamPath& path, NodeRef r) {
    const auto& node = forest.node(r);
    const auto& frame = frames[r.t];
    const YBand band = detail::band_of(frame, r.index);
    std::size_t strand;
    if (cfg.connect && pending[r.t][r.index]) strand = *pending[r.t][r.index];
    else strand = new_strand(path, node.depth);

    segment::Flat flat;
    flat.node = r;
    flat.band = band;
    if (cfg.connect) {
      flat.x0 = node.prev.empty() ? frame.x : anchors[r.t - 1].t2;
      flat.x1 = node.next.empty() ? frame.x : anchors[r.t].t1;
    } else {
      flat.x0 = frame.x - h;
      flat.x1 = frame.x + h;
    }
    flat.window0 = flat.x0;
    flat.window1 = flat.x1;
    flat.gap0 = flat.gap1 = flat.x0;

    auto& segs = path.strands[strand].segments;
    if (cfg.connect && node.prev.empty()) segs.emplace_back(make_cap(r, CapSide::Start, frame.x, band, cfg));
    segs.emplace_back(flat);
    if (cfg.connect && node.next.empty()) segs.emplace_back(make_cap(r, CapSide::End, frame.x, band, cfg));
    path.nodeChain.push_back(r);
    return strand;
  };

  struct Visit {
    NodeRef node;
    std::size_t strand;
    std::size_t nextIdx;
  };
  std::vector<Visit> stack;
  for (std::size_t t0 = 0; t0 < T; ++t0) {
    for (NodeIndex i0 = 0; i0 < forest.timesteps[t0].size(); ++i0) {
      if (!forest.timesteps[t0][i0].prev.empty()) continue;
      StreamPath path;
      path.chainId = paths.size();
      stack.clear();
      stack.push_back({NodeRef{t0, i0}, emit_node(path, NodeRef{t0, i0}), 0});
      while (!stack.empty()) {
        auto& top = stack.back();
        const auto& node = forest.node(top.node);
        if (top.nextIdx >= node.next.size()) {
          stack.pop_back();
          continue;
        }
        const std::size_t k = top.nextIdx++;
        const NodeRef from = top.node;
        const std::size_t fromStrand = top.strand;
        const NodeRef to{from.t + 1, node.next[k]};
        const auto& target = forest.node(to);

        if (cfg.connect) {
          segment::Transition tr;
          tr.from = from;
          tr.to = to;
          tr.x0 = anchors[from.t].t1;
          tr.x1 = anchors[from.t].t2;
          tr.fromBand = detail::band_of(frames[from.t], from.index);
          tr.toBand = detail::band_of(frames[to.t], to.index);
          if (node.next.size() > 1) {
            std::vector<double> w;
            for (NodeIndex n : node.next) w.push_back(forest.timesteps[to.t][n].size);
            tr.fromBand = detail::partition(tr.fromBand, w)[k];
          }
          if (target.prev.size() > 1) {
            std::vector<double> w;
            std::size_t slot = 0;
            for (std::size_t q = 0; q < target.prev.size(); ++q) {
              w.push_back(forest.timesteps[from.t][target.prev[q]].size);
              if (target.prev[q] == from.index) slot = q;
            }
            tr.toBand = detail::partition(tr.toBand, w)[slot];
          }
          const bool joinLeft = node.next.size() == 1;
          const bool joinRight = target.prev.size() == 1 && target.depth == node.depth;
          std::size_t strand = joinLeft ? fromStrand : new_strand(path, node.depth);
          if (!joinLeft && joinRight) path.strands[strand].depth = target.depth;
          path.strands[strand].segments.emplace_back(tr);
          if (joinRight) pending[to.t][to.index] = strand;
        }

        if (++arrived[to.t][to.index] == target.prev.size()) {
          std::size_t s = emit_node(path, to);
          stack.push_back({to, s, 0});
        }
      }
      paths.push_back(std::move(path));
    }
  }
  return paths;
}

/// Cuts every stream open at its splits, removing a part equal to the node's
/// own x-margin from both sides of the split. Widths clamp at zero; clamped
/// nodes are flagged `collapsed` in `frames`, which also receive the final
/// horizontal extents.
inline std::vector<StreamPath> apply_splits(std::vector<StreamPath> paths,
                                            std::vector<LayoutFrame>& frames,
                                            const RenderConfig& cfg) {
  if (cfg.splits == SplitPlacement::None) return paths;
  const double h = half_flat_width(cfg);

  for (auto& frame : frames) {
    for (auto& b : frame.bands) {
      if (cfg.splits == SplitPlacement::AtTimesteps) {
        const double m = std::min(b.margin, h);
        b.gap0 = frame.x - m;
        b.gap1 = frame.x + m;
        b.collapsed = b.margin > 0.0 && !(h > b.margin);
      } else {
        const double m = b.margin + cfg.margin.value;
        b.x0 = frame.x - h + m;
        b.x1 = frame.x + h - m;
        b.collapsed = m > 0.0 && !(b.x1 > b.x0);
        if (b.collapsed) b.x0 = b.x1 = frame.x;
        b.gap0 = b.gap1 = frame.x;
      }
    }
  }

  auto clip = [&](auto& seg) {
    const auto& b = frames[seg.node.t].bands[seg.node.index];
    if (cfg.splits == SplitPlacement::AtTimesteps) {
      seg.gap0 = b.gap0;
      seg.gap1 = b.gap1;
    } else {
      seg.window0 = std::max(seg.x0, b.x0);
      seg.window1 = std::min(seg.x1, b.x1);
    }
  };
  for (auto& p : paths)
    for (auto& s : p.strands)
      for (auto& seg : s.segments) {
        if (auto* f = std::get_if<segment::Flat>(&seg)) clip(*f);
        else if (auto* c = std::get_if<segment::Cap>(&seg)) clip(*c);
      }
  return paths;
}

namespace detail {

inline std::pair<double, double> transition_y_at(const segment::Transition& tr, double x) {
  return {bezier_edge_y(tr.x0, tr.fromBand.y0, tr.x1, tr.toBand.y0, x),
          bezier_edge_y(tr.x0, tr.fromBand.y1, tr.x1, tr.toBand.y1, x)};
}

inline int strand_depth_after_cut(const TemporalForest& forest, const Strand& s, NodeRef to) {
  for (const auto& seg : s.segments)
    if (const auto* f = std::get_if<segment::Flat>(&seg)) return forest.node(f->node).depth;
  return forest.node(to).depth;
}

}  // namespace detail

/// Hole-and-thread handling of ancestor inversions. For each inversion (n, m)
/// the transition of n towards a successor that ends up above a successor of
/// m is cut at its midpoint; the exit half starts a new strand. A HolePass
/// records the paint order and the hole carved from m's transition.
inline std::vector<StreamPath> resolve_ancestor_inversions(std::vector<StreamPath> paths,
                                                           const std::vector<ChangeSet>& changeSets,
                                                           const TemporalForest& forest,
                                                           double holeGap) {
  using LinkKey = std::pair<NodeRef, NodeRef>;
  std::set<LinkKey> threads;
  std::vector<std::pair<LinkKey, LinkKey>> passes;
  for (const auto& cs : changeSets) {
    const auto& to = forest.timesteps[cs.toT];
    for (const auto& ev : cs.events) {
      const auto* inv = std::get_if<change::AncestorInversion>(&ev);
      if (inv == nullptr) continue;
      const auto& n = forest.node(inv->node);
      const auto& m = forest.node(inv->formerAncestor);
      for (NodeIndex ns : n.next)
        for (NodeIndex ms : m.next) {
          if (!to.is_ancestor(ns, ms)) continue;
          LinkKey thread{inv->node, NodeRef{cs.toT, ns}};
          LinkKey pierced{inv->formerAncestor, NodeRef{cs.toT, ms}};
          threads.insert(thread);
          if (std::find(passes.begin(), passes.end(), std::pair{thread, pierced}) == passes.end())
            passes.emplace_back(thread, pierced);
        }
    }
  }
  if (passes.empty()) return paths;

  std::map<LinkKey, std::size_t> pathOfLink;
  for (std::size_t p = 0; p < paths.size(); ++p) {
    auto& path = paths[p];
    for (std::size_t si = 0; si < path.strands.size(); ++si) {
      auto& segs = path.strands[si].segments;
      for (std::size_t k = 0; k < segs.size(); ++k) {
        auto* tr = std::get_if<segment::Transition>(&segs[k]);
        if (tr == nullptr) continue;
        pathOfLink[{tr->from, tr->to}] = p;
        if (tr->part != TransitionPart::Whole || !threads.count({tr->from, tr->to})) continue;
        const double xc = 0.5 * (tr->x0 + tr->x1);
        const YBand mid{0.5 * (tr->fromBand.y0 + tr->toBand.y0), 0.5 * (tr->fromBand.y1 + tr->toBand.y1)};
        segment::Transition exit = *tr;
        exit.x0 = xc;
        exit.fromBand = mid;
        exit.part = TransitionPart::Exit;
        tr->x1 = xc;
        tr->toBand = mid;
        tr->part = TransitionPart::Approach;

        Strand rest;
        rest.segments.emplace_back(exit);
        rest.segments.insert(rest.segments.end(), std::make_move_iterator(segs.begin() + k + 1),
                             std::make_move_iterator(segs.end()));
        segs.erase(segs.begin() + k + 1, segs.end());
        rest.depth = detail::strand_depth_after_cut(forest, rest, exit.to);
        path.strands.push_back(std::move(rest));  // scanned later by the outer loop
        break;
      }
    }
  }

  auto find_transitions = [&](const LinkKey& key) {
    std::vector<const segment::Transition*> out;
    auto it = pathOfLink.find(key);
    if (it == pathOfLink.end()) return out;
    for (const auto& s : paths[it->second].strands)
      for (const auto& seg : s.segments)
        if (const auto* tr = std::get_if<segment::Transition>(&seg))
          if (tr->from == key.first && tr->to == key.second) out.push_back(tr);
    return out;
  };

  for (const auto& [thread, pierced] : passes) {
    auto threadSegs = find_transitions(thread);
    auto piercedSegs = find_transitions(pierced);
    if (threadSegs.empty() || piercedSegs.empty()) continue;
    HolePass hp;
    hp.threadFrom = thread.first;
    hp.threadTo = thread.second;
    hp.piercedFrom = pierced.first;
    hp.piercedTo = pierced.second;
    const auto* approach = threadSegs.front();
    hp.x = approach->x1;
    double px0 = piercedSegs.front()->x0;
    double px1 = piercedSegs.front()->x1;
    for (const auto* s : piercedSegs) {
      px0 = std::min(px0, s->x0);
      px1 = std::max(px1, s->x1);
    }
    hp.halfWidth = std::max(0.0, std::min({0.5 * holeGap, hp.x - px0, px1 - hp.x}));
    double top = approach->toBand.y0;
    double bottom = approach->toBand.y1;
    for (double x : {hp.x - hp.halfWidth, hp.x, hp.x + hp.halfWidth})
      for (const auto* s : piercedSegs)
        if (s->x0 <= x && x <= s->x1) {
          auto [pt, pb] = detail::transition_y_at(*s, x);
          top = std::max(top, pt);
          bottom = std::min(bottom, pb);
        }
    hp.hole = top < bottom ? YBand{top, bottom} : YBand{top, top};
    paths[pathOfLink[thread]].holes.push_back(hp);
  }
  return paths;
}

}  // namespace splitstreams
