#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <string_view>
#include <tuple>
#include <variant>
#include <vector>

#include "splitstreams/error.hpp"
#include "splitstreams/layout.hpp"
#include "splitstreams/stream.hpp"

namespace splitstreams {

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

struct Cubic {
  Point p0, c1, c2, p3;
};

/// Edge between two stream boundary points. Both control points sit at the
/// horizontal midpoint, level with their endpoint, so the tangent is
/// horizontal at both ends and joins flat segments with G1 continuity.
/// A zero-width edge yields nothing.
inline std::optional<Cubic> bezier_edge(double xFrom, double yFrom, double xTo, double yTo) {
  if (xFrom == xTo) return std::nullopt;
  const double xm = 0.5 * (xFrom + xTo);
  return Cubic{{xFrom, yFrom}, {xm, yFrom}, {xm, yTo}, {xTo, yTo}};
}

struct StyleConfig {
  std::vector<std::string> palette{"#deebf7", "#c6dbef", "#9ecae1", "#6baed6",
                                   "#4292c6", "#2171b5", "#08519c", "#08306b"};
  bool outlineOnly = false;
  double strokeWidth = 0.0;
  std::string stroke = "#1f2933";
  std::string background = "#ffffff";
  double holeGap = 6.0;
};

/// Light-to-dark ramps by name.
inline std::vector<std::string> named_palette(std::string_view name) {
  if (name == "blues")
    return {"#deebf7", "#c6dbef", "#9ecae1", "#6baed6", "#4292c6", "#2171b5", "#08519c", "#08306b"};
  if (name == "greens")
    return {"#e5f5e0", "#c7e9c0", "#a1d99b", "#74c476", "#41ab5d", "#238b45", "#006d2c", "#00441b"};
  if (name == "greys")
    return {"#f0f0f0", "#d9d9d9", "#bdbdbd", "#969696", "#737373", "#525252", "#252525", "#000000"};
  if (name == "oranges")
    return {"#fee6ce", "#fdd0a2", "#fdae6b", "#fd8d3c", "#f16913", "#d94801", "#a63603", "#7f2704"};
  throw ConfigError("unknown palette '" + std::string(name) + "'");
}

inline const std::string& depth_color(int depth, const StyleConfig& style) {
  if (style.palette.empty()) throw ConfigError("palette must not be empty");
  return style.palette[static_cast<std::size_t>(depth < 0 ? 0 : depth) % style.palette.size()];
}

/// Fixed three-decimal serialization; negative zero prints as 0.000.
inline std::string fmt3(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 3);
  std::string s(buf, res.ptr);
  if (s == "-0.000") return "0.000";
  return s;
}

namespace outline {

struct FlatPiece {
  double x0, x1;
  YBand band;
};
struct CurvePiece {
  double x0, x1;
  YBand from, to;
};
/// Visible part [x0, x1] of a half ellipse centred at (cx, cy).
struct CapPiece {
  double x0, x1;
  double cx, cy, rx, ry;

  double dy(double x) const {
    if (rx <= 0.0) return 0.0;
    const double u = (x - cx) / rx;
    return ry * std::sqrt(std::max(0.0, 1.0 - u * u));
  }
};
using Piece = std::variant<FlatPiece, CurvePiece, CapPiece>;
using Subpath = std::vector<Piece>;

inline double piece_x0(const Piece& p) {
  return std::visit([](const auto& v) { return v.x0; }, p);
}
inline double piece_x1(const Piece& p) {
  return std::visit([](const auto& v) { return v.x1; }, p);
}

// [x0, x1] within [w0, w1] minus the open interval (g0, g1).
inline std::vector<std::pair<double, double>> visible(double x0, double x1, double w0, double w1,
                                                      double g0, double g1) {
  std::vector<std::pair<double, double>> out;
  const double a = std::max(x0, w0);
  const double b = std::min(x1, w1);
  if (a > b) return out;
  if (!(g0 < g1) || g1 <= a || b <= g0) {
    out.emplace_back(a, b);
    return out;
  }
  if (a < g0) out.emplace_back(a, g0);
  if (g1 < b) out.emplace_back(g1, b);
  return out;
}

/// Visible geometry of a strand, broken into closed subpaths wherever a
/// split or window removes part of it. Zero-width pieces are dropped.
inline std::vector<Subpath> strand_subpaths(const Strand& strand) {
  std::vector<Subpath> out;
  std::optional<double> lastEnd;
  auto push = [&](Piece p) {
    const double a = piece_x0(p);
    const double b = piece_x1(p);
    if (!(b > a)) return;
    if (out.empty() || !lastEnd || *lastEnd != a) out.emplace_back();
    out.back().push_back(std::move(p));
    lastEnd = b;
  };
  for (const auto& seg : strand.segments) {
    if (const auto* f = std::get_if<segment::Flat>(&seg)) {
      for (auto [a, b] : visible(f->x0, f->x1, f->window0, f->window1, f->gap0, f->gap1))
        push(FlatPiece{a, b, f->band});
    } else if (const auto* tr = std::get_if<segment::Transition>(&seg)) {
      push(CurvePiece{tr->x0, tr->x1, tr->fromBand, tr->toBand});
    } else if (const auto* c = std::get_if<segment::Cap>(&seg)) {
      const double cy = 0.5 * (c->band.y0 + c->band.y1);
      const double ry = 0.5 * (c->band.y1 - c->band.y0);
      for (auto [a, b] : visible(c->x0, c->x1, c->window0, c->window1, c->gap0, c->gap1))
        push(CapPiece{a, b, c->centre_x(), cy, c->x1 - c->x0, ry});
    }
  }
  return out;
}

}  // namespace outline

struct SvgElement {
  std::string id;
  std::size_t chainId = 0;
  std::size_t strandIndex = 0;
  int depth = 0;
  std::string d;
  std::string fill;
  bool evenOdd = false;
};

struct SvgDocument {
  double width = 0.0;
  double height = 0.0;
  std::string background;
  bool outlineOnly = false;
  double strokeWidth = 0.0;
  std::string stroke;
  std::vector<SvgElement> elements;  // paint order

  std::string str() const {
    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + fmt3(width) +
           "\" height=\"" + fmt3(height) + "\" viewBox=\"0 0 " + fmt3(width) + " " + fmt3(height) +
           "\">\n";
    out += "<rect x=\"0\" y=\"0\" width=\"" + fmt3(width) + "\" height=\"" + fmt3(height) +
           "\" fill=\"" + background + "\"/>\n";
    for (const auto& e : elements) {
      out += "<path id=\"" + e.id + "\" d=\"" + e.d + "\"";
      if (outlineOnly) {
        out += " fill=\"none\" stroke=\"" + e.fill + "\" stroke-width=\"" +
               fmt3(strokeWidth > 0.0 ? strokeWidth : 1.0) + "\"";
      } else {
        out += " fill=\"" + e.fill + "\"";
        if (e.evenOdd) out += " fill-rule=\"evenodd\"";
        if (strokeWidth > 0.0) out += " stroke=\"" + stroke + "\" stroke-width=\"" + fmt3(strokeWidth) + "\"";
      }
      out += "/>\n";
    }
    out += "</svg>\n";
    return out;
  }
};

namespace detail {

// Points are compared in serialized form, so joins that differ only below
// the printed precision do not produce zero-length commands.
class PathWriter {
 public:
  void move(Point p) {
    cur_ = pt(p);
    d_ += (d_.empty() ? "M" : " M") + cur_;
  }
  void line(Point p) {
    std::string s = pt(p);
    if (s == cur_) return;
    d_ += " L" + s;
    cur_ = std::move(s);
  }
  void cubic(const Cubic& c) {
    line(c.p0);
    cur_ = pt(c.p3);
    d_ += " C" + pt(c.c1) + " " + pt(c.c2) + " " + cur_;
  }
  void arc(double rx, double ry, Point to) {
    std::string s = pt(to);
    if (s == cur_) return;
    d_ += " A" + fmt3(rx) + " " + fmt3(ry) + " 0 0 1 " + s;
    cur_ = std::move(s);
  }
  void close() { d_ += " Z"; }
  const std::string& str() const { return d_; }
  bool empty() const { return d_.empty(); }

 private:
  static std::string pt(Point p) { return fmt3(p.x) + " " + fmt3(p.y); }
  std::string d_;
  std::string cur_;
};

inline Point top_start(const outline::Piece& p) {
  return std::visit(
      [](const auto& v) -> Point {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, outline::FlatPiece>) return {v.x0, v.band.y0};
        else if constexpr (std::is_same_v<T, outline::CurvePiece>) return {v.x0, v.from.y0};
        else return {v.x0, v.cy - v.dy(v.x0)};
      },
      p);
}

inline Point bottom_end(const outline::Piece& p) {
  return std::visit(
      [](const auto& v) -> Point {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, outline::FlatPiece>) return {v.x1, v.band.y1};
        else if constexpr (std::is_same_v<T, outline::CurvePiece>) return {v.x1, v.to.y1};
        else return {v.x1, v.cy + v.dy(v.x1)};
      },
      p);
}

// Top edge left to right.
inline void trace_top(PathWriter& w, const outline::Piece& p) {
  if (const auto* f = std::get_if<outline::FlatPiece>(&p)) {
    w.line({f->x0, f->band.y0});
    w.line({f->x1, f->band.y0});
  } else if (const auto* c = std::get_if<outline::CurvePiece>(&p)) {
    if (auto cubic = bezier_edge(c->x0, c->from.y0, c->x1, c->to.y0)) w.cubic(*cubic);
  } else {
    const auto& e = std::get<outline::CapPiece>(p);
    w.line({e.x0, e.cy - e.dy(e.x0)});
    w.arc(e.rx, e.ry, {e.x1, e.cy - e.dy(e.x1)});
  }
}

// Bottom edge right to left.
inline void trace_bottom(PathWriter& w, const outline::Piece& p) {
  if (const auto* f = std::get_if<outline::FlatPiece>(&p)) {
    w.line({f->x1, f->band.y1});
    w.line({f->x0, f->band.y1});
  } else if (const auto* c = std::get_if<outline::CurvePiece>(&p)) {
    if (auto cubic = bezier_edge(c->x1, c->to.y1, c->x0, c->from.y1)) w.cubic(*cubic);
  } else {
    const auto& e = std::get<outline::CapPiece>(p);
    w.line({e.x1, e.cy + e.dy(e.x1)});
    w.arc(e.rx, e.ry, {e.x0, e.cy + e.dy(e.x0)});
  }
}

inline void trace_subpath(PathWriter& w, const outline::Subpath& sp) {
  w.move(top_start(sp.front()));
  for (const auto& p : sp) trace_top(w, p);
  w.line(bottom_end(sp.back()));
  for (auto it = sp.rbegin(); it != sp.rend(); ++it) trace_bottom(w, *it);
  w.close();
}

}  // namespace detail

/// Serializes stream geometry into an SVG document.
///
/// Every strand becomes one path element (one closed subpath per visible
/// piece run). Elements are painted by ascending depth; hole/thread passes
/// reorder locally so the exit half of the thread lies under the pierced
/// stream and the approach half above it.
inline SvgDocument emit_svg(const std::vector<StreamPath>& paths, const std::vector<LayoutFrame>& frames,
                            const StyleConfig& style, const RenderConfig& cfg) {
  (void)frames;
  SvgDocument doc;
  doc.width = cfg.canvasWidth;
  doc.height = cfg.canvasHeight;
  doc.background = style.background;
  doc.outlineOnly = style.outlineOnly;
  doc.strokeWidth = style.strokeWidth;
  doc.stroke = style.stroke;

  struct Item {
    SvgElement element;
    std::tuple<int, std::size_t, std::size_t> key;
  };
  std::vector<Item> items;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> itemOf;  // (path, strand) -> item
  std::vector<detail::PathWriter> writers;

  for (std::size_t p = 0; p < paths.size(); ++p) {
    const auto& path = paths[p];
    for (std::size_t s = 0; s < path.strands.size(); ++s) {
      const auto& strand = path.strands[s];
      auto subpaths = outline::strand_subpaths(strand);
      if (subpaths.empty()) continue;
      detail::PathWriter w;
      for (const auto& sp : subpaths) detail::trace_subpath(w, sp);
      SvgElement e;
      e.id = "stream-" + std::to_string(path.chainId) + "-" + std::to_string(s);
      e.chainId = path.chainId;
      e.strandIndex = s;
      e.depth = strand.depth;
      e.fill = depth_color(strand.depth, style);
      itemOf[{p, s}] = items.size();
      items.push_back({std::move(e), {strand.depth, path.chainId, s}});
      writers.push_back(std::move(w));
    }
  }

  auto locate = [&](NodeRef from, NodeRef to, std::optional<TransitionPart> part,
                    std::optional<double> atX) -> std::optional<std::size_t> {
    for (std::size_t p = 0; p < paths.size(); ++p)
      for (std::size_t s = 0; s < paths[p].strands.size(); ++s)
        for (const auto& seg : paths[p].strands[s].segments) {
          const auto* tr = std::get_if<segment::Transition>(&seg);
          if (tr == nullptr || tr->from != from || tr->to != to) continue;
          if (part && tr->part != *part) continue;
          if (atX && !(tr->x0 <= *atX && *atX <= tr->x1)) continue;
          auto it = itemOf.find({p, s});
          if (it != itemOf.end()) return it->second;
        }
    return std::nullopt;
  };

  std::vector<std::vector<std::size_t>> after(items.size());  // edges a -> b: paint a before b
  std::vector<std::size_t> indegree(items.size(), 0);
  for (const auto& path : paths)
    for (const auto& hp : path.holes) {
      auto over = locate(hp.threadFrom, hp.threadTo, TransitionPart::Approach, std::nullopt);
      auto under = locate(hp.threadFrom, hp.threadTo, TransitionPart::Exit, std::nullopt);
      auto pierced = locate(hp.piercedFrom, hp.piercedTo, std::nullopt, hp.x);
      if (pierced && hp.hole.y0 < hp.hole.y1 && hp.halfWidth > 0.0) {
        auto& w = writers[*pierced];
        const double xa = hp.x - hp.halfWidth;
        const double xb = hp.x + hp.halfWidth;
        w.move({xa, hp.hole.y0});
        w.line({xb, hp.hole.y0});
        w.line({xb, hp.hole.y1});
        w.line({xa, hp.hole.y1});
        w.close();
        items[*pierced].element.evenOdd = true;
      }
      auto edge = [&](std::optional<std::size_t> a, std::optional<std::size_t> b) {
        if (!a || !b || *a == *b) return;
        after[*a].push_back(*b);
        ++indegree[*b];
      };
      edge(under, pierced);
      edge(pierced, over);
    }

  // Kahn's algorithm, preferring the smallest base key; a cycle falls back to
  // the smallest remaining key.
  std::vector<bool> done(items.size(), false);
  using Entry = std::pair<std::tuple<int, std::size_t, std::size_t>, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> ready;
  for (std::size_t i = 0; i < items.size(); ++i)
    if (indegree[i] == 0) ready.push({items[i].key, i});
  std::size_t emitted = 0;
  while (emitted < items.size()) {
    std::size_t next;
    if (!ready.empty()) {
      next = ready.top().second;
      ready.pop();
      if (done[next]) continue;
    } else {
      std::optional<std::size_t> best;
      for (std::size_t i = 0; i < items.size(); ++i)
        if (!done[i] && (!best || items[i].key < items[*best].key)) best = i;
      next = *best;
    }
    done[next] = true;
    ++emitted;
    items[next].element.d = writers[next].str();
    doc.elements.push_back(items[next].element);
    for (std::size_t b : after[next])
      if (--indegree[b] == 0 && !done[b]) ready.push({items[b].key, b});
  }
  return doc;
}

}  // namespace splitstreams
