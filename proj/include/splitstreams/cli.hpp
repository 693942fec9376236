#pragma once

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "splitstreams/error.hpp"
#include "splitstreams/pipeline.hpp"
#include "splitstreams/service.hpp"
#include "splitstreams/synthetic.hpp"

namespace splitstreams::cli {

enum ExitCode : int { kOk = 0, kIoError = 1, kValidation = 2, kUsage = 64 };

class IoError : public Error {
 public:
  using Error::Error;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f || !(f << text)) throw IoError("cannot write '" + path + "'");
}

struct BenchRow {
  std::string name;
  std::size_t nodes = 0;
  double millis = 0.0;
};

/// Times layout and geometry (parse and SVG serialization excluded) for every
/// *.json dataset of a directory, in name order.
inline std::vector<BenchRow> bench_directory(const std::string& dir, const Params& params) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("not a directory: '" + dir + "'");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<BenchRow> rows;
  for (const auto& f : files) {
    auto forest = load_dataset(read_file(f.string()));
    const std::size_t nodes = forest.node_count();
    const auto t0 = std::chrono::steady_clock::now();
    auto result = generate(std::move(forest), params);
    const auto t1 = std::chrono::steady_clock::now();
    rows.push_back({f.stem().string(), nodes, std::chrono::duration<double, std::milli>(t1 - t0).count()});
  }
  return rows;
}

/// Parses arguments and runs one mode: render (default), --serve, --bench or
/// --synthesize.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Render evolving hierarchies as split streams"};
  app.set_version_flag("--version", "splitstreams 1.0.0");

  std::string input;
  std::string output = "-";
  std::string layoutDump;
  std::optional<double> hcr, marginValue, yMargin, width, height, gap, strokeWidth, holeGap;
  std::string marginFn, yPadding, baseline, palette, splits, stage, background;
  bool outlineOnly = false, strict = false, noConnect = false;
  std::string benchDir;
  std::optional<int> servePort;
  std::optional<std::size_t> synthesizeNodes;
  std::uint64_t seed = 1;

  auto* inOpt = app.add_option("-i,--input", input, "dataset document");
  auto* outOpt = app.add_option("-o,--output", output, "SVG output file, - for standard output");
  app.add_option("--layout-dump", layoutDump, "also write the computed layout as JSON");
  app.add_option("--hcr", hcr, "horizontal compression ratio in [0, 1]");
  app.add_option("--margin", marginFn, "margin function")
      ->check(CLI::IsMember({"fixed", "hierarchical", "reversed"}));
  app.add_option("--margin-value", marginValue, "margin value in pixels");
  app.add_option("--y-padding", yPadding, "none, auto or a constant");
  app.add_option("--y-margin", yMargin, "vertical margin in value units");
  app.add_option("--baseline", baseline, "vertical alignment")
      ->check(CLI::IsMember({"zero", "expand", "silhouette"}));
  app.add_option("--width", width, "canvas width in pixels");
  app.add_option("--height", height, "canvas height in pixels");
  app.add_option("--gap", gap, "distance between timesteps in pixels");
  app.add_option("--palette", palette, "blues, greens, greys or oranges");
  app.add_flag("--outline-only", outlineOnly, "draw outlines instead of fills");
  app.add_option("--stroke-width", strokeWidth, "outline width in pixels");
  app.add_option("--background", background, "background color");
  app.add_option("--hole-gap", holeGap, "hole width for ancestor inversions in pixels");
  app.add_option("--splits", splits, "split placement")
      ->check(CLI::IsMember({"timesteps", "between", "none"}));
  app.add_flag("--no-connect", noConnect, "draw the per-timestep treemaps only");
  app.add_option("--stage", stage, "construction stage preset")
      ->check(CLI::IsMember({"treemap", "nsg", "fixed-width", "connected", "splitstream"}));
  app.add_flag("--strict", strict, "treat feasibility violations as errors");
  auto* benchOpt = app.add_option("--bench", benchDir, "time every dataset of a directory");
  auto* serveOpt = app.add_option("--serve", servePort, "serve HTTP on 127.0.0.1:PORT");
  auto* synthOpt = app.add_option("--synthesize", synthesizeNodes, "write a synthetic dataset of about N nodes");
  app.add_option("--seed", seed, "seed for --synthesize");

  benchOpt->excludes(serveOpt)->excludes(synthOpt)->excludes(outOpt)->excludes(inOpt);
  serveOpt->excludes(synthOpt)->excludes(outOpt)->excludes(inOpt);
  synthOpt->excludes(inOpt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion& e) {
    out << e.what() << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    Params params;
    if (!stage.empty()) apply_stage(params.render, parse_stage(stage));
    if (hcr) params.render.hcr = *hcr;
    if (!marginFn.empty()) params.render.margin.kind = parse_margin_kind(marginFn);
    if (marginValue) params.render.margin.value = *marginValue;
    if (!yPadding.empty()) params.render.yPadding = parse_y_padding(yPadding);
    if (yMargin) params.render.yMargin = *yMargin;
    if (!baseline.empty()) params.render.baseline = parse_baseline(baseline);
    if (height) params.render.canvasHeight = *height;
    if (!splits.empty()) params.render.splits = parse_splits(splits);
    if (noConnect) params.render.connect = false;
    params.width = width;
    params.gap = gap;
    if (!palette.empty()) params.style.palette = named_palette(palette);
    params.style.outlineOnly = outlineOnly;
    if (strokeWidth) params.style.strokeWidth = *strokeWidth;
    if (!background.empty()) params.style.background = background;
    if (holeGap) params.style.holeGap = *holeGap;
    params.strict = strict;
    if (params.style.strokeWidth < 0.0 || params.style.holeGap < 0.0)
      throw ConfigError("stroke width and hole gap must be non-negative");
    // surface configuration errors before any I/O
    (void)resolve(params, 1);

    if (servePort) {
      service::Server server;
      const int port = server.bind("127.0.0.1", *servePort);
      if (port < 0) throw IoError("cannot bind 127.0.0.1:" + std::to_string(*servePort));
      err << "listening on http://127.0.0.1:" << port << "\n";
      return server.listen() ? kOk : kIoError;
    }
    if (!benchDir.empty()) {
      out << "name\tnodes\tmillis\n";
      for (const auto& row : bench_directory(benchDir, params))
        out << row.name << "\t" << row.nodes << "\t" << fmt3(row.millis) << "\n";
      return kOk;
    }
    if (synthesizeNodes) {
      SyntheticOptions opt;
      opt.totalNodes = *synthesizeNodes;
      opt.seed = seed;
      write_file(output, synthesize(opt).dump() + "\n", out);
      return kOk;
    }
    if (input.empty()) {
      err << "error: --input is required\n";
      return kUsage;
    }

    auto forest = load_dataset(read_file(input));
    Result result = generate(std::move(forest), params);
    for (const auto& v : result.violations) err << "warning: " << describe(v) << "\n";
    write_file(output, render(result, params.style).str(), out);
    if (!layoutDump.empty()) write_file(layoutDump, layout_json(result).dump(2) + "\n", out);
    return kOk;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const InfeasibleError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const ParseError& e) {
    err << "error: " << e.what();
    if (e.line() > 0) err << " (line " << e.line() << ", column " << e.column() << ")";
    err << "\n";
    return kValidation;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  }
}

}  // namespace splitstreams::cli
