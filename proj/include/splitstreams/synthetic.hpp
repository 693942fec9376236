#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

namespace splitstreams {

struct SyntheticOptions {
  std::size_t totalNodes = 1000;  // approximate, summed over all timesteps
  std::size_t timesteps = 20;
  double survival = 0.92;   // chance a node lives on to the next timestep
  double reparent = 0.03;   // chance a surviving node changes its parent
  std::uint64_t seed = 1;
};

/// Evolving hierarchy in the dataset document format. Parents always precede
/// their children in creation order, so every snapshot is a tree; identities
/// persist by id and are linked implicitly.
inline nlohmann::json synthesize(const SyntheticOptions& opt) {
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> leafValue(1, 10);
  const std::size_t T = opt.timesteps > 0 ? opt.timesteps : 1;
  const std::size_t perStep = std::max<std::size_t>(2, opt.totalNodes / T);

  struct Live {
    std::size_t id;
    std::size_t parentSlot;  // index into `alive`; the root points to itself
    int value;
  };
  std::vector<Live> alive;
  std::size_t nextId = 0;
  auto add = [&](std::vector<Live>& v) {
    const std::size_t parent = v.empty() ? 0 : std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng);
    v.push_back({nextId++, parent, leafValue(rng)});
  };

  nlohmann::json steps = nlohmann::json::array();
  for (std::size_t t = 0; t < T; ++t) {
    if (t > 0) {
      // survivors keep creation order; a dropped parent hands its children up
      std::vector<Live> kept;
      std::vector<std::size_t> slot(alive.size());
      for (std::size_t i = 0; i < alive.size(); ++i) {
        std::size_t p = alive[i].parentSlot;
        const bool keep = i == 0 || unit(rng) < opt.survival;
        if (!keep) {
          slot[i] = i == 0 ? 0 : slot[p];
          continue;
        }
        Live n = alive[i];
        n.parentSlot = i == 0 ? 0 : slot[p];
        if (i > 0 && !kept.empty() && unit(rng) < opt.reparent)
          n.parentSlot = std::uniform_int_distribution<std::size_t>(0, kept.size() - 1)(rng);
        slot[i] = kept.size();
        kept.push_back(n);
      }
      alive = std::move(kept);
    }
    while (alive.size() < perStep) add(alive);

    nlohmann::json nodes = nlohmann::json::array();
    std::vector<bool> hasChild(alive.size(), false);
    for (std::size_t i = 1; i < alive.size(); ++i) hasChild[alive[i].parentSlot] = true;
    for (std::size_t i = 0; i < alive.size(); ++i) {
      nlohmann::json n = {{"id", "n" + std::to_string(alive[i].id)}};
      n["parent"] = i == 0 ? nlohmann::json() : nlohmann::json("n" + std::to_string(alive[alive[i].parentSlot].id));
      if (!hasChild[i]) n["value"] = alive[i].value;
      nodes.push_back(std::move(n));
    }
    steps.push_back({{"nodes", std::move(nodes)}});
  }
  return {{"timesteps", std::move(steps)}};
}

}  // namespace splitstreams
