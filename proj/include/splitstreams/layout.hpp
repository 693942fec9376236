#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "splitstreams/error.hpp"
#include "splitstreams/model.hpp"

namespace splitstreams {

enum class MarginKind { Fixed, Hierarchical, HierarchicalReversed };

/// Horizontal inset applied at splits. The root always gets 0.
struct MarginSpec {
  MarginKind kind = MarginKind::Fixed;
  double value = 4.0;  // pixels
};

/// Extra size added to nodes without a declared value so parents stay
/// visible behind their children.
struct YPadding {
  enum class Mode { None, Auto, Constant };
  Mode mode = Mode::None;
  double constant = 0.0;

  static YPadding none() { return {}; }
  static YPadding automatic() { return {Mode::Auto, 0.0}; }
  static YPadding fixed(double c) { return {Mode::Constant, c}; }
};

enum class Baseline { Zero, Expand, Silhouette };

/// Where streams are cut open. SplitStreams cut at every timestep; juxtaposed
/// treemaps cut halfway between timesteps.
enum class SplitPlacement { AtTimesteps, BetweenTimesteps, None };

struct RenderConfig {
  double hcr = 0.5;
  MarginSpec margin{};
  YPadding yPadding{};
  double yMargin = 0.0;  // value units
  Baseline baseline = Baseline::Silhouette;
  double canvasWidth = 800.0;
  double canvasHeight = 400.0;
  double timestepGap = 200.0;
  SplitPlacement splits = SplitPlacement::AtTimesteps;
  bool connect = true;  // false draws the per-timestep treemaps only
};

inline void validate(const RenderConfig& cfg) {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(cfg.hcr) || cfg.hcr < 0.0 || cfg.hcr > 1.0)
    throw ConfigError("hcr must lie in [0, 1]");
  if (!finite(cfg.margin.value) || cfg.margin.value < 0.0)
    throw ConfigError("margin value must be non-negative");
  if (cfg.yPadding.mode == YPadding::Mode::Constant &&
      (!finite(cfg.yPadding.constant) || cfg.yPadding.constant < 0.0))
    throw ConfigError("y-padding must be non-negative");
  if (!finite(cfg.yMargin) || cfg.yMargin < 0.0) throw ConfigError("y-margin must be non-negative");
  if (!finite(cfg.canvasWidth) || cfg.canvasWidth <= 0.0 || !finite(cfg.canvasHeight) ||
      cfg.canvasHeight <= 0.0)
    throw ConfigError("canvas size must be positive");
  if (!finite(cfg.timestepGap) || cfg.timestepGap <= 0.0)
    throw ConfigError("timestep gap must be positive");
  if (cfg.splits == SplitPlacement::BetweenTimesteps && cfg.connect && cfg.hcr < 1.0)
    throw ConfigError("splits between timesteps need hcr = 1 or unconnected treemaps");
}

/// Per node and timestep geometry in pixels.
///
/// [y0, y1] is the vertical band. [x0, x1] is the horizontal footprint around
/// the timestep and (gap0, gap1) the opening cut out of it by the split; the
/// visible extent is [x0, gap0] united with [gap1, x1]. With no opening,
/// gap0 == gap1.
struct Band {
  double y0 = 0.0;
  double y1 = 0.0;
  double x0 = 0.0;
  double x1 = 0.0;
  double gap0 = 0.0;
  double gap1 = 0.0;
  double margin = 0.0;     // x-margin of the node at this timestep
  bool hidden = false;     // y-margin reduced the height to zero
  bool collapsed = false;  // x-margin consumed the whole flat width

  double height() const noexcept { return y1 - y0; }
};

struct LayoutFrame {
  std::size_t t = 0;
  double x = 0.0;      // pixel coordinate of the timestep
  double scale = 0.0;  // pixels per value unit
  std::vector<Band> bands;  // indexed like the snapshot's nodes
};

inline double timestep_x(std::size_t t, const RenderConfig& cfg) {
  return cfg.timestepGap * (static_cast<double>(t) + 0.5);
}

/// Half of the treemap (flat) width around a timestep.
inline double half_flat_width(const RenderConfig& cfg) { return 0.5 * cfg.hcr * cfg.timestepGap; }

namespace detail {

inline std::vector<NodeIndex> preorder(const TreeSnapshot& snap) {
  std::vector<NodeIndex> order;
  if (snap.size() == 0) return order;
  order.reserve(snap.size());
  std::vector<NodeIndex> stack{snap.root};
  while (!stack.empty()) {
    NodeIndex n = stack.back();
    stack.pop_back();
    order.push_back(n);
    const auto& ch = snap[n].children;
    for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
  }
  return order;
}

inline double margin_increment(int depth, const MarginSpec& spec) {
  if (depth <= 0) return 0.0;
  switch (spec.kind) {
    case MarginKind::Fixed: return spec.value;
    case MarginKind::Hierarchical: return static_cast<double>(depth) * spec.value;
    case MarginKind::HierarchicalReversed: return spec.value / static_cast<double>(depth);
  }
  return 0.0;
}

}  // namespace detail

/// Fills leaf defaults, aggregates and sizes bottom-up.
///
/// Leaves without a value get 1. A node with a declared value keeps it (or
/// its aggregate, if padding pushed the aggregate higher); other inner nodes
/// get their aggregate plus the padding.
inline TreeSnapshot compute_values(TreeSnapshot snap, const YPadding& padding) {
  auto order = detail::preorder(snap);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    auto& n = snap[*it];
    if (n.is_leaf()) {
      n.aggregate = 0.0;
      n.size = n.ownValue.value_or(1.0);
      continue;
    }
    double aggregate = 0.0;
    for (NodeIndex c : n.children) aggregate += snap[c].size;
    n.aggregate = aggregate;
    if (n.ownValue) {
      n.size = std::max(*n.ownValue, aggregate);
      continue;
    }
    double pad = 0.0;
    if (padding.mode == YPadding::Mode::Auto) pad = 1.0 + static_cast<double>(n.children.size());
    else if (padding.mode == YPadding::Mode::Constant) pad = padding.constant;
    n.size = aggregate + pad;
  }
  return snap;
}

/// Spreads children evenly inside their parent:
///   spacing = (size - aggregate) / (#children + 1)
///   pos(child i) = i * spacing + sizes of children before i    (i from 1)
/// Declared positions are kept, clamped so the child still fits.
inline TreeSnapshot compute_spacing_positions(TreeSnapshot snap) {
  if (snap.size() == 0) return snap;
  snap[snap.root].pos = 0.0;
  for (auto& n : snap.nodes) {
    if (n.is_leaf()) {
      n.spacing = 0.0;
      continue;
    }
    const double slack = std::max(0.0, n.size - n.aggregate);
    n.spacing = slack / static_cast<double>(n.children.size() + 1);
    double aggregate = 0.0;
    for (std::size_t i = 1; i <= n.children.size(); ++i) {
      auto& child = snap[n.children[i - 1]];
      child.pos = static_cast<double>(i) * n.spacing + aggregate;
      aggregate += child.size;
      if (child.explicitPos)
        child.pos = std::clamp(*child.explicitPos, 0.0, std::max(0.0, n.size - child.size));
    }
  }
  return snap;
}

/// Cumulative x-margin of a node, following the recursive definitions
///   Fixed:                m(n) = m(p) + value
///   Hierarchical:         m(n) = m(p) + depth(n) * value
///   HierarchicalReversed: m(n) = m(p) + value / depth(n)
/// with m(root) = 0.
inline double margin_x(const TreeSnapshot& snap, NodeIndex node, const MarginSpec& spec) {
  const auto& n = snap[node];
  if (!n.parent) return 0.0;
  return margin_x(snap, *n.parent, spec) + detail::margin_increment(n.depth, spec);
}

/// margin_x() for every node of a snapshot in one top-down pass.
inline std::vector<double> margins(const TreeSnapshot& snap, const MarginSpec& spec) {
  std::vector<double> m(snap.size(), 0.0);
  for (NodeIndex n : detail::preorder(snap)) {
    const auto& node = snap[n];
    if (node.parent) m[n] = m[*node.parent] + detail::margin_increment(node.depth, spec);
  }
  return m;
}

/// Margin of any node at `depth`; margins depend on depth alone.
inline double margin_at_depth(int depth, const MarginSpec& spec) {
  double m = 0.0;
  for (int d = 1; d <= depth; ++d) m += detail::margin_increment(d, spec);
  return m;
}

/// Largest root size over all timesteps; sizes must be computed.
inline double max_root_size(const TemporalForest& forest) {
  double best = 0.0;
  for (const auto& s : forest.timesteps)
    if (s.size() > 0) best = std::max(best, s[s.root].size);
  return best;
}

/// Maps value-space positions to pixel bands. One scale (canvasHeight over
/// the largest root) applies to the whole document, except with the Expand
/// baseline where each root fills the canvas.
inline LayoutFrame compute_vertical_extents(const TreeSnapshot& snap, const RenderConfig& cfg,
                                            double maxRootSize, std::size_t t = 0) {
  LayoutFrame frame;
  frame.t = t;
  frame.x = timestep_x(t, cfg);
  frame.bands.resize(snap.size());
  if (snap.size() == 0) return frame;

  const double H = cfg.canvasHeight;
  const auto& root = snap[snap.root];
  double scale = maxRootSize > 0.0 ? H / maxRootSize : 0.0;
  auto& rb = frame.bands[snap.root];
  switch (cfg.baseline) {
    case Baseline::Zero:
      rb.y0 = 0.0;
      rb.y1 = scale * root.size;
      break;
    case Baseline::Expand:
      scale = root.size > 0.0 ? H / root.size : 0.0;
      rb.y0 = 0.0;
      rb.y1 = H;
      break;
    case Baseline::Silhouette: {
      const double half = 0.5 * scale * root.size;
      rb.y0 = 0.5 * H - half;
      rb.y1 = 0.5 * H + half;
      break;
    }
  }
  frame.scale = scale;
  for (NodeIndex n : detail::preorder(snap)) {
    const auto& node = snap[n];
    if (!node.parent) continue;
    const auto& pb = frame.bands[*node.parent];
    auto& b = frame.bands[n];
    b.y0 = pb.y0 + scale * node.pos;
    b.y1 = b.y0 + scale * node.size;
  }
  return frame;
}

/// Shrinks every non-root band by scale * yMargin about its centre. Bands
/// that reach zero height are marked hidden.
inline LayoutFrame apply_y_margin(LayoutFrame frame, double yMargin, const TreeSnapshot& snap) {
  if (yMargin <= 0.0) return frame;
  const double delta = frame.scale * yMargin;
  for (NodeIndex n = 0; n < snap.size(); ++n) {
    if (!snap[n].parent) continue;
    auto& b = frame.bands[n];
    const double centre = 0.5 * (b.y0 + b.y1);
    const double h = std::max(0.0, b.height() - delta);
    b.y0 = centre - 0.5 * h;
    b.y1 = centre + 0.5 * h;
    b.hidden = h <= 0.0;
  }
  return frame;
}

/// Sets the unclipped horizontal footprint and the node margins.
inline LayoutFrame compute_horizontal_extents(LayoutFrame frame, const TreeSnapshot& snap,
                                              const RenderConfig& cfg) {
  const double h = half_flat_width(cfg);
  const auto m = margins(snap, cfg.margin);
  for (NodeIndex n = 0; n < snap.size(); ++n) {
    auto& b = frame.bands[n];
    b.x0 = frame.x - h;
    b.x1 = frame.x + h;
    b.gap0 = b.gap1 = frame.x;
    b.margin = m[n];
  }
  return frame;
}

/// Runs compute_values and compute_spacing_positions on every snapshot.
inline TemporalForest compute_node_values(TemporalForest forest, const RenderConfig& cfg) {
  for (auto& s : forest.timesteps) s = compute_spacing_positions(compute_values(std::move(s), cfg.yPadding));
  return forest;
}

/// Frames for every timestep of a forest whose values are computed.
inline std::vector<LayoutFrame> compute_frames(const TemporalForest& forest, const RenderConfig& cfg) {
  const double maxRoot = max_root_size(forest);
  std::vector<LayoutFrame> frames;
  frames.reserve(forest.timesteps.size());
  for (std::size_t t = 0; t < forest.timesteps.size(); ++t) {
    const auto& snap = forest.timesteps[t];
    auto frame = compute_vertical_extents(snap, cfg, maxRoot, t);
    frame = apply_y_margin(std::move(frame), cfg.yMargin, snap);
    frames.push_back(compute_horizontal_extents(std::move(frame), snap, cfg));
  }
  return frames;
}

struct Violation {
  enum class Kind {
    PairBudget,  // HCR * dist > m(dmax(t_i)) + m(dmax(t_i+1)) fails
    SideBudget,  // a flat half at one timestep is narrower than its deepest margin
  };
  Kind kind = Kind::PairBudget;
  std::size_t fromT = 0;
  std::size_t toT = 0;
  double available = 0.0;
  double required = 0.0;
  double deficit = 0.0;  // required - available
};

/// Effective margin used by the split placement at a given depth.
inline double split_margin_at_depth(int depth, const RenderConfig& cfg) {
  if (cfg.splits == SplitPlacement::None) return 0.0;
  double m = margin_at_depth(depth, cfg.margin);
  // treemaps also separate the roots from each other
  if (cfg.splits == SplitPlacement::BetweenTimesteps) m += cfg.margin.value;
  return m;
}

/// Screen-space check between consecutive timesteps (pair budget) plus the
/// per-timestep check that each flat half keeps a positive width.
inline std::vector<Violation> check_feasibility(const TemporalForest& forest, const RenderConfig& cfg) {
  std::vector<Violation> out;
  if (cfg.splits == SplitPlacement::None || cfg.margin.value <= 0.0) return out;
  const std::size_t T = forest.timesteps.size();
  if (cfg.splits == SplitPlacement::AtTimesteps) {
    const double lhs = cfg.hcr * cfg.timestepGap;
    for (std::size_t t = 0; t + 1 < T; ++t) {
      const double rhs = margin_at_depth(forest.timesteps[t].maxDepth, cfg.margin) +
                         margin_at_depth(forest.timesteps[t + 1].maxDepth, cfg.margin);
      if (!(lhs > rhs)) out.push_back({Violation::Kind::PairBudget, t, t + 1, lhs, rhs, rhs - lhs});
    }
  }
  const double h = half_flat_width(cfg);
  for (std::size_t t = 0; t < T; ++t) {
    const double m = split_margin_at_depth(forest.timesteps[t].maxDepth, cfg);
    if (m > 0.0 && !(h > m)) out.push_back({Violation::Kind::SideBudget, t, t, h, m, m - h});
  }
  return out;
}

inline std::string describe(const Violation& v) {
  std::string kind = v.kind == Violation::Kind::PairBudget ? "pair" : "side";
  return kind + " t" + std::to_string(v.fromT) + "-t" + std::to_string(v.toT) + ": available " +
         std::to_string(v.available) + ", required " + std::to_string(v.required) + ", deficit " +
         std::to_string(v.deficit);
}

}  // namespace splitstreams
