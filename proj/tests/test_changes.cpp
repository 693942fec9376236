#include <gtest/gtest.h>

#include <algorithm>
#include <string>
#include <vector>

#include "splitstreams/changes.hpp"
#include "support/generators.hpp"
#include "support/oracle.hpp"

using namespace splitstreams;

namespace {

std::vector<std::string> described(const TemporalForest& f, const ChangeSet& cs) {
  std::vector<std::string> out;
  for (const auto& e : cs.events) out.push_back(describe(e, f));
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> changes_of(const std::string& doc) {
  auto f = load_dataset(doc);
  return described(f, classify_pair(f, 0));
}

using Strings = std::vector<std::string>;

}  // namespace

TEST(Classify, AddAndRemove) {
  EXPECT_EQ(changes_of(R"({"timesteps":[
      {"nodes":[{"id":"R"},{"id":"A","parent":"R"}]},
      {"nodes":[{"id":"R"},{"id":"B","parent":"R"}]}]})"),
            (Strings{"Add(B)", "Remove(A)"}));
}

TEST(Classify, SplitAndMerge) {
  EXPECT_EQ(changes_of(R"({"timesteps":[
      {"nodes":[{"id":"R"},{"id":"A","parent":"R","next":["X","Y"]}]},
      {"nodes":[{"id":"R"},{"id":"X","parent":"R"},{"id":"Y","parent":"R"}]}]})"),
            (Strings{"Split(A,[X,Y])"}));
  EXPECT_EQ(changes_of(R"({"timesteps":[
      {"nodes":[{"id":"R"},{"id":"A","parent":"R"},{"id":"B","parent":"R"}]},
      {"nodes":[{"id":"R"},{"id":"C","parent":"R","prev":["A","B"]}]}]})"),
            (Strings{"Merge([A,B],C)"}));
}

TEST(Classify, SiblingSwapIsMoveWithin) {
  EXPECT_EQ(changes_of(R"({"timesteps":[
      {"nodes":[{"id":"R"},{"id":"A","parent":"R"},{"id":"B","parent":"R"}]},
      {"nodes":[{"id":"R"},{"id":"B","parent":"R"},{"id":"A","parent":"R"}]}]})"),
            (Strings{"MoveWithin(A->A,0,1)", "MoveWithin(B->B,1,0)"}));
}

TEST(Classify, ParentChangeIsMoveAcross) {
  EXPECT_EQ(changes_of(R"({"timesteps":[
      {"nodes":[{"id":"R"},{"id":"P","parent":"R"},{"id":"Q","parent":"R"},{"id":"N","parent":"P"}]},
      {"nodes":[{"id":"R"},{"id":"P","parent":"R"},{"id":"Q","parent":"R"},{"id":"N","parent":"Q"}]}]})"),
            (Strings{"MoveAcross(N->N,P,Q)"}));
}

TEST(Classify, MoveToTopLevel) {
  // R keeps being top level; N leaves R for the top level
  EXPECT_EQ(changes_of(R"({"timesteps":[
      {"nodes":[{"id":"R"},{"id":"N","parent":"R"}]},
      {"nodes":[{"id":"R"},{"id":"N"}]}]})"),
            (Strings{"MoveAcross(N->N,R,-)"}));
}

TEST(Classify, AncestorInversion) {
  // B sat below A and ends up above it
  EXPECT_EQ(changes_of(R"({"timesteps":[
      {"nodes":[{"id":"R"},{"id":"A","parent":"R"},{"id":"B","parent":"A"}]},
      {"nodes":[{"id":"R"},{"id":"B","parent":"R"},{"id":"A","parent":"B"}]}]})"),
            (Strings{"AncestorInversion(B,A)", "MoveAcross(A->A,R,B)", "MoveAcross(B->B,A,R)"}));
}

TEST(Classify, UnchangedForestHasNoEvents) {
  EXPECT_TRUE(changes_of(R"({"timesteps":[
      {"nodes":[{"id":"R"},{"id":"A","parent":"R"},{"id":"B","parent":"A"}]},
      {"nodes":[{"id":"R"},{"id":"A","parent":"R"},{"id":"B","parent":"A"}]}]})")
                  .empty());
}

TEST(Classify, EventsGroupedByKind) {
  auto f = load_dataset(R"({"timesteps":[
      {"nodes":[{"id":"R"},{"id":"A","parent":"R"},{"id":"B","parent":"A"},{"id":"Z","parent":"R"}]},
      {"nodes":[{"id":"R"},{"id":"B","parent":"R"},{"id":"A","parent":"B"},{"id":"N","parent":"R"}]}]})");
  auto cs = classify_pair(f, 0);
  for (std::size_t i = 1; i < cs.events.size(); ++i)
    EXPECT_LE(cs.events[i - 1].index(), cs.events[i].index());
}

TEST(ClassifyProperty, MatchesBruteForceOracle) {
  gen::Rng rng(2024);
  gen::ForestOptions opt;
  for (int iter = 0; iter < 1000; ++iter) {
    auto g = gen::random_forest(rng, opt);
    auto f = load_dataset(gen::to_text(g));
    auto sets = classify_changes(f);
    ASSERT_EQ(sets.size(), f.timesteps.size() - 1);
    for (std::size_t t = 0; t < sets.size(); ++t)
      ASSERT_EQ(described(f, sets[t]), oracle::classify(g, t)) << gen::to_text(g);
  }
}

TEST(ClassifyProperty, CompletenessEveryLinkAndNodeAccountedFor) {
  gen::Rng rng(99);
  gen::ForestOptions opt;
  opt.tree.maxNodes = 8;
  opt.poolSize = 8;
  for (int iter = 0; iter < 1000; ++iter) {
    auto f = load_dataset(gen::to_text(gen::random_forest(rng, opt)));
    for (const auto& cs : classify_changes(f)) {
      const auto& from = f.timesteps[cs.fromT];
      const auto& to = f.timesteps[cs.toT];
      // every real node without predecessor is added, every one without
      // successor removed, and nothing else
      std::size_t adds = 0, removes = 0;
      for (const auto& e : cs.events) {
        if (const auto* a = std::get_if<change::Add>(&e)) {
          ++adds;
          ASSERT_TRUE(to[a->node.index].prev.empty());
        }
        if (const auto* r = std::get_if<change::Remove>(&e)) {
          ++removes;
          ASSERT_TRUE(from[r->node.index].next.empty());
        }
      }
      std::size_t expectAdds = 0, expectRemoves = 0;
      for (const auto& n : to.nodes) expectAdds += !n.artificial && n.prev.empty();
      for (const auto& n : from.nodes) expectRemoves += !n.artificial && n.next.empty();
      ASSERT_EQ(adds, expectAdds);
      ASSERT_EQ(removes, expectRemoves);
    }
  }
}

TEST(ClassifyProperty, InversionSoundness) {
  gen::Rng rng(5);
  gen::ForestOptions opt;
  opt.tree.maxNodes = 8;
  opt.poolSize = 8;
  for (int iter = 0; iter < 1000; ++iter) {
    auto f = load_dataset(gen::to_text(gen::random_forest(rng, opt)));
    for (const auto& cs : classify_changes(f)) {
      const auto& from = f.timesteps[cs.fromT];
      const auto& to = f.timesteps[cs.toT];
      for (const auto& e : cs.events) {
        const auto* inv = std::get_if<change::AncestorInversion>(&e);
        if (inv == nullptr) continue;
        // recompute the ancestor chains by walking parents
        auto above = [](const TreeSnapshot& s, NodeIndex a, NodeIndex n) {
          for (auto p = s[n].parent; p; p = s[*p].parent)
            if (*p == a) return true;
          return false;
        };
        ASSERT_TRUE(above(from, inv->formerAncestor.index, inv->node.index));
        bool witnessed = false;
        for (NodeIndex ns : from[inv->node.index].next)
          for (NodeIndex ms : from[inv->formerAncestor.index].next)
            witnessed = witnessed || above(to, ns, ms);
        ASSERT_TRUE(witnessed);
      }
    }
  }
}
