#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "splitstreams/changes.hpp"
#include "splitstreams/error.hpp"
#include "splitstreams/layout.hpp"
#include "splitstreams/model.hpp"
#include "splitstreams/render.hpp"
#include "splitstreams/stream.hpp"

namespace splitstreams {

/// Raised in strict mode when the screen-space check fails.
class InfeasibleError : public Error {
 public:
  explicit InfeasibleError(std::vector<Violation> violations)
      : Error(summary(violations)), violations_(std::move(violations)) {}

  const std::vector<Violation>& violations() const noexcept { return violations_; }

 private:
  static std::string summary(const std::vector<Violation>& vs) {
    std::string s = "layout is infeasible:";
    for (const auto& v : vs) s += "\n  " + describe(v);
    return s;
  }
  std::vector<Violation> violations_;
};

/// Construction stages of a SplitStreams chart, from juxtaposed treemaps to
/// the final split streams.
enum class Stage { Treemap, NestedStreamgraph, FixedWidth, Connected, SplitStream };

inline Stage parse_stage(std::string_view s) {
  if (s == "treemap") return Stage::Treemap;
  if (s == "nsg" || s == "streamgraph") return Stage::NestedStreamgraph;
  if (s == "fixed-width") return Stage::FixedWidth;
  if (s == "connected") return Stage::Connected;
  if (s == "splitstream") return Stage::SplitStream;
  throw ConfigError("unknown stage '" + std::string(s) + "'");
}

inline void apply_stage(RenderConfig& cfg, Stage stage) {
  switch (stage) {
    case Stage::Treemap:
      cfg.hcr = 1.0;
      cfg.connect = false;
      cfg.splits = SplitPlacement::BetweenTimesteps;
      break;
    case Stage::NestedStreamgraph:
      cfg.hcr = 0.0;
      cfg.connect = true;
      cfg.splits = SplitPlacement::None;
      break;
    case Stage::FixedWidth:
      cfg.hcr = 0.5;
      cfg.connect = false;
      cfg.splits = SplitPlacement::None;
      break;
    case Stage::Connected:
      cfg.hcr = 0.5;
      cfg.connect = true;
      cfg.splits = SplitPlacement::None;
      break;
    case Stage::SplitStream:
      cfg.hcr = 0.5;
      cfg.connect = true;
      cfg.splits = SplitPlacement::AtTimesteps;
      break;
  }
}

struct Params {
  RenderConfig render;
  StyleConfig style;
  bool strict = false;
  // Canvas width and timestep gap; whichever is missing follows from the
  // other and the number of timesteps.
  std::optional<double> width;
  std::optional<double> gap;
};

inline RenderConfig resolve(const Params& p, std::size_t timesteps) {
  RenderConfig cfg = p.render;
  const double T = static_cast<double>(timesteps > 0 ? timesteps : 1);
  if (p.width) cfg.canvasWidth = *p.width;
  if (p.gap) {
    cfg.timestepGap = *p.gap;
    if (!p.width) cfg.canvasWidth = T * *p.gap;
  } else {
    cfg.timestepGap = cfg.canvasWidth / T;
  }
  validate(cfg);
  return cfg;
}

inline MarginKind parse_margin_kind(std::string_view s) {
  if (s == "fixed") return MarginKind::Fixed;
  if (s == "hierarchical") return MarginKind::Hierarchical;
  if (s == "reversed" || s == "hierarchical-reversed") return MarginKind::HierarchicalReversed;
  throw ConfigError("unknown margin function '" + std::string(s) + "'");
}

inline Baseline parse_baseline(std::string_view s) {
  if (s == "zero") return Baseline::Zero;
  if (s == "expand") return Baseline::Expand;
  if (s == "silhouette") return Baseline::Silhouette;
  throw ConfigError("unknown baseline '" + std::string(s) + "'");
}

inline SplitPlacement parse_splits(std::string_view s) {
  if (s == "timesteps") return SplitPlacement::AtTimesteps;
  if (s == "between") return SplitPlacement::BetweenTimesteps;
  if (s == "none") return SplitPlacement::None;
  throw ConfigError("unknown split placement '" + std::string(s) + "'");
}

/// "none", "auto", or a non-negative number.
inline YPadding parse_y_padding(std::string_view s) {
  if (s == "none") return YPadding::none();
  if (s == "auto") return YPadding::automatic();
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw ConfigError("y-padding must be none, auto or a number");
  return YPadding::fixed(v);
}

/// Reads request parameters; unknown keys are rejected so typos surface.
inline Params params_from_json(const nlohmann::json& j) {
  Params p;
  if (j.is_null()) return p;
  if (!j.is_object()) throw ConfigError("params must be an object");
  auto number = [](const nlohmann::json& v, const std::string& key) {
    if (!v.is_number()) throw ConfigError("param '" + key + "' must be a number");
    return v.get<double>();
  };
  auto text = [](const nlohmann::json& v, const std::string& key) {
    if (!v.is_string()) throw ConfigError("param '" + key + "' must be a string");
    return v.get<std::string>();
  };
  auto flag = [](const nlohmann::json& v, const std::string& key) {
    if (!v.is_boolean()) throw ConfigError("param '" + key + "' must be a boolean");
    return v.get<bool>();
  };
  // the stage preset goes first so explicit fields can override it
  if (auto it = j.find("stage"); it != j.end()) apply_stage(p.render, parse_stage(text(*it, "stage")));
  for (const auto& [key, v] : j.items()) {
    if (key == "stage") continue;
    else if (key == "hcr") p.render.hcr = number(v, key);
    else if (key == "margin") p.render.margin.kind = parse_margin_kind(text(v, key));
    else if (key == "marginValue") p.render.margin.value = number(v, key);
    else if (key == "yPadding") {
      if (v.is_number()) p.render.yPadding = YPadding::fixed(v.get<double>());
      else p.render.yPadding = parse_y_padding(text(v, key));
    } else if (key == "yMargin") p.render.yMargin = number(v, key);
    else if (key == "baseline") p.render.baseline = parse_baseline(text(v, key));
    else if (key == "width") p.width = number(v, key);
    else if (key == "height") p.render.canvasHeight = number(v, key);
    else if (key == "gap") p.gap = number(v, key);
    else if (key == "splits") p.render.splits = parse_splits(text(v, key));
    else if (key == "connect") p.render.connect = flag(v, key);
    else if (key == "palette") {
      if (v.is_string()) {
        p.style.palette = named_palette(v.get<std::string>());
      } else if (v.is_array() && !v.empty()) {
        p.style.palette.clear();
        for (const auto& c : v) p.style.palette.push_back(text(c, key));
      } else {
        throw ConfigError("param 'palette' must be a name or a non-empty list of colors");
      }
    } else if (key == "outlineOnly") p.style.outlineOnly = flag(v, key);
    else if (key == "strokeWidth") p.style.strokeWidth = number(v, key);
    else if (key == "background") p.style.background = text(v, key);
    else if (key == "holeGap") p.style.holeGap = number(v, key);
    else if (key == "strict") p.strict = flag(v, key);
    else throw ConfigError("unknown param '" + key + "'");
  }
  if (!std::isfinite(p.style.strokeWidth) || p.style.strokeWidth < 0.0)
    throw ConfigError("stroke width must be non-negative");
  if (!std::isfinite(p.style.holeGap) || p.style.holeGap < 0.0)
    throw ConfigError("hole gap must be non-negative");
  return p;
}

struct Result {
  TemporalForest forest;  // with computed values
  RenderConfig config;
  std::vector<ChangeSet> changes;
  std::vector<LayoutFrame> frames;
  std::vector<StreamPath> paths;
  std::vector<Violation> violations;
};

/// Runs layout and geometry on a linked forest. Stops with InfeasibleError
/// when `strict` is set and the screen-space check fails.
inline Result generate(TemporalForest forest, const Params& params) {
  Result r;
  r.config = resolve(params, forest.timesteps.size());
  r.forest = compute_node_values(std::move(forest), r.config);
  r.violations = check_feasibility(r.forest, r.config);
  if (params.strict && !r.violations.empty()) throw InfeasibleError(r.violations);
  r.changes = classify_changes(r.forest);
  r.frames = compute_frames(r.forest, r.config);
  r.paths = assemble_streams(r.forest, r.frames, r.config);
  r.paths = apply_splits(std::move(r.paths), r.frames, r.config);
  r.paths = resolve_ancestor_inversions(std::move(r.paths), r.changes, r.forest, params.style.holeGap);
  return r;
}

inline SvgDocument render(const Result& r, const StyleConfig& style) {
  return emit_svg(r.paths, r.frames, style, r.config);
}

/// Dataset text to SVG text.
inline std::string render_dataset(std::string_view dataset, const Params& params) {
  return render(generate(load_dataset(dataset), params), params.style).str();
}

inline nlohmann::json violations_json(const std::vector<Violation>& vs) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& v : vs)
    out.push_back({{"kind", v.kind == Violation::Kind::PairBudget ? "pair" : "side"},
                   {"fromT", v.fromT},
                   {"toT", v.toT},
                   {"available", v.available},
                   {"required", v.required},
                   {"deficit", v.deficit}});
  return out;
}

/// Computed bands per node and timestep.
inline nlohmann::json layout_json(const Result& r) {
  nlohmann::json doc;
  doc["width"] = r.config.canvasWidth;
  doc["height"] = r.config.canvasHeight;
  doc["gap"] = r.config.timestepGap;
  doc["timeAxis"] = r.forest.timeAxis;
  nlohmann::json steps = nlohmann::json::array();
  for (std::size_t t = 0; t < r.frames.size(); ++t) {
    const auto& snap = r.forest.timesteps[t];
    const auto& frame = r.frames[t];
    nlohmann::json nodes = nlohmann::json::array();
    for (NodeIndex i = 0; i < snap.size(); ++i) {
      const auto& n = snap[i];
      const auto& b = frame.bands[i];
      nlohmann::json node = {{"id", n.id},
                             {"parent", n.parent ? nlohmann::json(snap[*n.parent].id) : nlohmann::json()},
                             {"depth", n.depth},
                             {"size", n.size},
                             {"aggregate", n.aggregate},
                             {"pos", n.pos},
                             {"spacing", n.spacing},
                             {"y0", b.y0},
                             {"y1", b.y1},
                             {"x0", b.x0},
                             {"x1", b.x1},
                             {"gap0", b.gap0},
                             {"gap1", b.gap1},
                             {"margin", b.margin},
                             {"hidden", b.hidden},
                             {"collapsed", b.collapsed}};
      if (n.artificial) node["artificial"] = true;
      nodes.push_back(std::move(node));
    }
    steps.push_back({{"t", t}, {"x", frame.x}, {"scale", frame.scale}, {"nodes", std::move(nodes)}});
  }
  doc["timesteps"] = std::move(steps);
  doc["violations"] = violations_json(r.violations);
  return doc;
}

}  // namespace splitstreams
