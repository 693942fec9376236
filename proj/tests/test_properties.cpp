#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "splitstreams/pipeline.hpp"
#include "support/generators.hpp"

using namespace splitstreams;

namespace {

struct Case {
  std::string text;
  Params params;
};

Case random_case(gen::Rng& rng) {
  gen::ForestOptions opt;
  opt.tree.maxNodes = 12;
  opt.poolSize = 12;
  opt.maxSteps = 4;
  Case c{gen::to_text(gen::random_forest(rng, opt)), {}};
  auto& p = c.params;
  p.render.hcr = std::uniform_real_distribution<double>(0.05, 1.0)(rng);
  const MarginKind kinds[] = {MarginKind::Fixed, MarginKind::Hierarchical, MarginKind::HierarchicalReversed};
  p.render.margin = {kinds[gen::uniform(rng, 0, 2)], std::uniform_real_distribution<double>(0.0, 6.0)(rng)};
  const Baseline bases[] = {Baseline::Zero, Baseline::Silhouette, Baseline::Expand};
  p.render.baseline = bases[gen::uniform(rng, 0, 2)];
  p.render.canvasHeight = std::uniform_real_distribution<double>(50.0, 800.0)(rng);
  p.gap = std::uniform_real_distribution<double>(20.0, 300.0)(rng);
  return c;
}

bool near(double a, double b, double tol = 1e-9) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

}  // namespace

TEST(Containment, ChildBandsNestInsideParents) {
  gen::Rng rng(101);
  for (int iter = 0; iter < 1000; ++iter) {
    auto c = random_case(rng);
    auto r = generate(load_dataset(c.text), c.params);
    const bool margins = r.config.margin.value > 0.0 && r.violations.empty();
    for (std::size_t t = 0; t < r.frames.size(); ++t) {
      const auto& snap = r.forest.timesteps[t];
      const auto& bands = r.frames[t].bands;
      for (NodeIndex n = 0; n < snap.size(); ++n) {
        if (!snap[n].parent) continue;
        const auto& b = bands[n];
        const auto& p = bands[*snap[n].parent];
        ASSERT_GE(b.y0, p.y0 - 1e-9 * std::max(1.0, std::abs(p.y0))) << c.text;
        ASSERT_LE(b.y1, p.y1 + 1e-9 * std::max(1.0, std::abs(p.y1))) << c.text;
        ASSERT_GE(b.x0, p.x0);
        ASSERT_LE(b.x1, p.x1);
        ASSERT_LE(b.gap0, p.gap0);
        ASSERT_GE(b.gap1, p.gap1);
        if (margins) {
          // a child's drawn flat halves are strictly shorter than its parent's
          ASSERT_LT(b.gap0, p.gap0) << c.text;
          ASSERT_GT(b.gap1, p.gap1) << c.text;
        }
      }
    }
  }
}

TEST(Containment, SiblingsDoNotOverlap) {
  gen::Rng rng(103);
  for (int iter = 0; iter < 1000; ++iter) {
    auto c = random_case(rng);
    auto r = generate(load_dataset(c.text), c.params);
    for (std::size_t t = 0; t < r.frames.size(); ++t) {
      const auto& snap = r.forest.timesteps[t];
      for (NodeIndex n = 0; n < snap.size(); ++n) {
        const auto& kids = snap[n].children;
        for (std::size_t i = 1; i < kids.size(); ++i) {
          const auto& a = r.frames[t].bands[kids[i - 1]];
          const auto& b = r.frames[t].bands[kids[i]];
          ASSERT_LE(a.y1, b.y0 + 1e-9 * std::max(1.0, std::abs(b.y0)));
        }
      }
    }
  }
}

TEST(Proportionality, BandHeightIsSizeTimesScale) {
  gen::Rng rng(107);
  for (int iter = 0; iter < 1000; ++iter) {
    auto c = random_case(rng);
    auto r = generate(load_dataset(c.text), c.params);
    for (std::size_t t = 0; t < r.frames.size(); ++t) {
      const auto& snap = r.forest.timesteps[t];
      const double scale = r.frames[t].scale;
      for (NodeIndex n = 0; n < snap.size(); ++n) {
        const auto& b = r.frames[t].bands[n];
        ASSERT_TRUE(near(b.y1 - b.y0, scale * snap[n].size)) << c.text;
      }
      // one scale for every timestep unless the baseline stretches each one
      if (c.params.render.baseline != Baseline::Expand) {
        ASSERT_DOUBLE_EQ(scale, r.frames[0].scale);
      }
    }
  }
}

TEST(ScaleInvariance, MultiplyingValuesLeavesGeometryUnchanged) {
  gen::Rng rng(109);
  gen::ForestOptions opt;
  opt.tree.maxNodes = 10;
  opt.poolSize = 10;
  opt.maxSteps = 4;
  for (int iter = 0; iter < 500; ++iter) {
    auto g = gen::random_forest(rng, opt);
    // spell out default leaf values so scaling reaches them too
    for (auto& step : g.steps)
      for (auto& n : step) {
        const bool leaf = std::none_of(step.begin(), step.end(), [&](const gen::Node& o) { return o.parent == n.id; });
        if (leaf && !n.value) n.value = 1.0;
      }
    const double k = std::uniform_real_distribution<double>(0.01, 1000.0)(rng);
    auto scaled = g;
    for (auto& step : scaled.steps)
      for (auto& n : step)
        if (n.value) *n.value *= k;
    Params p;
    p.render.margin.value = 2.0;
    auto a = generate(load_dataset(gen::to_text(g)), p);
    auto b = generate(load_dataset(gen::to_text(scaled)), p);
    ASSERT_EQ(a.frames.size(), b.frames.size());
    for (std::size_t t = 0; t < a.frames.size(); ++t)
      for (std::size_t n = 0; n < a.frames[t].bands.size(); ++n) {
        const auto& x = a.frames[t].bands[n];
        const auto& y = b.frames[t].bands[n];
        ASSERT_TRUE(near(x.y0, y.y0, 1e-9) && near(x.y1, y.y1, 1e-9)) << k << " " << gen::to_text(g);
        ASSERT_EQ(x.gap0, y.gap0);
        ASSERT_EQ(x.gap1, y.gap1);
      }
  }
}

// The screen-space check reports a problem exactly when some drawn flat half
// would vanish or a split opening would be cut short.
TEST(Feasibility, CheckIsSoundAndComplete) {
  gen::Rng rng(113);
  std::size_t feasible = 0, infeasible = 0;
  for (int iter = 0; iter < 2000; ++iter) {
    auto c = random_case(rng);
    c.params.render.margin.value = std::uniform_real_distribution<double>(0.5, 12.0)(rng);
    auto r = generate(load_dataset(c.text), c.params);
    bool broken = false;
    for (std::size_t t = 0; t < r.frames.size(); ++t)
      for (const auto& b : r.frames[t].bands) {
        const double x = r.frames[t].x;
        // x + m - x can round below m
        const bool truncated = b.gap1 - x < b.margin - 1e-9 * std::max(1.0, x);
        const bool vanished = !(b.gap0 > b.x0) || !(b.x1 > b.gap1);
        broken = broken || ((truncated || vanished) && b.margin > 0.0);
      }
    if (r.violations.empty()) {
      ++feasible;
      ASSERT_FALSE(broken) << c.text << " hcr " << r.config.hcr << " gap " << r.config.timestepGap;
    } else {
      ++infeasible;
      ASSERT_TRUE(broken) << c.text;
    }
  }
  EXPECT_GT(feasible, 100u);
  EXPECT_GT(infeasible, 100u);
}
