#include "hazard/planner.hpp"

#include <cmath>
#include <functional>

#include "gtest/gtest.h"
#include "hazard/error.hpp"
#include "test_util.hpp"

namespace hazard {
namespace {

using testing::GraphBuilder;
using testing::RandomGraph;
using testing::RandomPmf;

const DangerLevel kTau3(3);

// PMF whose CDF at any tau in 1..4 is `s`.
DangerPmf SurvivalPmf(double s) { return DangerPmf({s, 0, 0, 0, 1.0 - s}); }

BeliefMap Beliefs(const EnvironmentGraph& g, const std::vector<double>& survival) {
  std::vector<DangerPosterior> post;
  for (std::size_t i = 0; i < g.size(); ++i) post.push_back({SurvivalPmf(survival[i]), 0});
  return BeliefMap(std::move(post));
}

std::vector<NodeId> Ids(std::initializer_list<std::uint32_t> ids) {
  std::vector<NodeId> out;
  for (auto v : ids) out.push_back(NodeId{v});
  return out;
}

// Independent enumeration of simple paths; returns the best product.
double BestSurvivalByEnumeration(const EnvironmentGraph& g, const std::vector<double>& s,
                                 NodeId from) {
  double best = -1.0;
  std::vector<bool> on(g.size(), false);
  std::function<void(std::size_t, double)> dfs = [&](std::size_t u, double prod) {
    if (g.IsExitIndex(u)) best = std::max(best, prod);
    on[u] = true;
    for (NodeId v : g.Neighbors(g.IdAt(u))) {
      const std::size_t vi = g.IndexOf(v);
      if (!on[vi]) dfs(vi, prod * s[vi]);
    }
    on[u] = false;
  };
  dfs(g.IndexOf(from), 1.0);
  return best;
}

TEST(EdgeSurvival, Examples) {
  const auto g = GraphBuilder{}.Node(0, DangerPmf::Uniform()).Node(1, DangerPmf::Uniform())
                     .Link(0, 1).Build(0, {1});
  EXPECT_NEAR(EdgeSurvival(g, BeliefMap::Uniform(g), NodeId{1}, DangerLevel(2)), 0.4, 1e-15);
  BeliefMap b = BeliefMap::Uniform(g);
  b.Set(1, {DangerPmf::Delta(DangerLevel(1)), 1});
  for (int tau = 1; tau <= 5; ++tau) {
    EXPECT_EQ(EdgeSurvival(g, b, NodeId{1}, DangerLevel(tau)), 1.0);
  }
  b.Set(1, {DangerPmf({0.05, 0.10, 0.20, 0.50, 0.15}), 1});
  EXPECT_NEAR(EdgeSurvival(g, b, NodeId{1}, kTau3), 0.35, 1e-15);
  EXPECT_THROW(EdgeSurvival(g, b, NodeId{9}, kTau3), Error);
}

TEST(PathSurvival, Examples) {
  const auto g = GraphBuilder{}.Node(0, DangerPmf::Uniform()).Node(1, DangerPmf::Uniform())
                     .Node(2, DangerPmf::Uniform()).Link(0, 1).Link(1, 2).Build(0, {2});
  EXPECT_NEAR(PathSurvival(g, Beliefs(g, {0.1, 0.9, 0.8}), Ids({0, 1, 2}), kTau3), 0.72, 1e-15);
  EXPECT_EQ(PathSurvival(g, Beliefs(g, {0.1, 0.9, 0.8}), Ids({2}), kTau3), 1.0);
  EXPECT_EQ(PathSurvival(g, Beliefs(g, {0.1, 0.0, 0.8}), Ids({0, 1, 2}), kTau3), 0.0);
  try {
    PathSurvival(g, Beliefs(g, {1, 1, 1}), Ids({0, 2}), kTau3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kContract);
  }
}

TEST(SafestPath, PrefersLongerSaferRoute) {
  // Direct arc into exit 3 (0.5) against 0 -> 1 -> 2 (0.8 * 0.8).
  const auto g2 = GraphBuilder{}
                      .Node(0, DangerPmf::Uniform())
                      .Node(1, DangerPmf::Uniform())
                      .Node(2, DangerPmf::Uniform())
                      .Node(3, DangerPmf::Uniform())
                      .Link(0, 3)
                      .Link(0, 1)
                      .Link(1, 2)
                      .Build(0, {2, 3});
  const auto b = Beliefs(g2, {1.0, 0.8, 0.8, 0.5});
  const auto p = SafestPath(g2, b, kTau3, NodeId{0}, g2.exits());
  EXPECT_EQ(p.nodes, Ids({0, 1, 2}));
  EXPECT_NEAR(p.survival_estimate, 0.64, 1e-15);
  const auto oracle = BruteForceSafestPath(g2, b, kTau3, NodeId{0}, g2.exits());
  EXPECT_EQ(oracle.nodes, p.nodes);
}

TEST(SafestPath, EqualSurvivalsGiveMinimumHops) {
  GraphBuilder b;
  for (std::uint32_t i = 0; i < 6; ++i) b.Node(i, DangerPmf::Uniform());
  b.Link(0, 1).Link(1, 2).Link(2, 5).Link(0, 3).Link(3, 5).Link(0, 4).Link(4, 3);
  const auto g = b.Build(0, {5});
  const auto p = SafestPath(g, BeliefMap::Uniform(g), kTau3, NodeId{0}, g.exits());
  EXPECT_EQ(p.nodes, Ids({0, 3, 5}));
}

TEST(SafestPath, LexicographicTieBreak) {
  GraphBuilder b;
  for (std::uint32_t i = 0; i < 4; ++i) b.Node(i, DangerPmf::Uniform());
  b.Link(0, 2).Link(0, 1).Link(2, 3).Link(1, 3);
  const auto g = b.Build(0, {3});
  EXPECT_EQ(SafestPath(g, BeliefMap::Uniform(g), kTau3, NodeId{0}, g.exits()).nodes,
            Ids({0, 1, 3}));
}

TEST(SafestPath, StartIsExit) {
  const auto g = GraphBuilder{}.Node(0, DangerPmf::Uniform()).Node(1, DangerPmf::Uniform())
                     .Link(1, 0).Build(0, {0});
  const auto p = SafestPath(g, BeliefMap::Uniform(g), kTau3, NodeId{0}, g.exits());
  EXPECT_EQ(p.nodes, Ids({0}));
  EXPECT_EQ(p.survival_estimate, 1.0);
  EXPECT_EQ(BruteForceSafestPath(g, BeliefMap::Uniform(g), kTau3, NodeId{0}, g.exits()).nodes,
            Ids({0}));
}

TEST(SafestPath, NoRouteIsPlanningError) {
  const auto g = GraphBuilder{}.Node(0, DangerPmf::Uniform()).Node(1, DangerPmf::Uniform())
                     .Node(2, DangerPmf::Uniform()).Link(0, 2).Link(1, 0).Build(0, {2});
  try {
    SafestPath(g, BeliefMap::Uniform(g), kTau3, NodeId{2}, Ids({1}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kPlanning);
    EXPECT_EQ(e.code(), "E_NO_ROUTE");
  }
}

TEST(SafestPath, ZeroSurvivalArcsRemainUsable) {
  const auto g = GraphBuilder{}.Node(0, DangerPmf::Uniform()).Node(1, DangerPmf::Uniform())
                     .Node(2, DangerPmf::Uniform()).Link(0, 1).Link(1, 2).Build(0, {2});
  const auto p = SafestPath(g, Beliefs(g, {1, 0, 0}), kTau3, NodeId{0}, g.exits());
  EXPECT_EQ(p.nodes, Ids({0, 1, 2}));
  EXPECT_EQ(p.survival_estimate, 0.0);
}

TEST(SafestPath, SinglePathGraph) {
  GraphBuilder b;
  for (std::uint32_t i = 0; i < 5; ++i) b.Node(i, DangerPmf::Uniform());
  b.Link(0, 1).Link(1, 2).Link(2, 3).Link(3, 4);
  const auto g = b.Build(0, {4});
  Rng rng(1);
  std::vector<double> s(5);
  for (double& v : s) v = rng.Uniform();
  EXPECT_EQ(BruteForceSafestPath(g, Beliefs(g, s), kTau3, NodeId{0}, g.exits()).nodes,
            Ids({0, 1, 2, 3, 4}));
}

TEST(SafestPath, MatchesOracleOnRandomGraphs) {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    SCOPED_TRACE("trial " + std::to_string(trial));
    const std::size_t n = 2 + rng.Below(8);
    const auto g = RandomGraph(rng, n, 0.3, trial % 3 == 0);
    std::vector<double> s(n);
    for (double& v : s) {
      const double r = rng.Uniform();
      // Mix coarse values (ties) with continuous ones and a few zeros.
      v = r < 0.3 ? 0.5 : r < 0.35 ? 0.0 : rng.Uniform();
    }
    const auto b = Beliefs(g, s);
    const auto fast = SafestPath(g, b, kTau3, g.start(), g.exits());
    const auto slow = BruteForceSafestPath(g, b, kTau3, g.start(), g.exits());
    EXPECT_NEAR(fast.survival_estimate, slow.survival_estimate, 1e-12);
    EXPECT_EQ(fast.nodes, slow.nodes);
    EXPECT_NEAR(fast.survival_estimate, PathSurvival(g, b, fast.nodes, kTau3), 1e-15);
    const double best = BestSurvivalByEnumeration(g, s, g.start());
    if (best > kSurvivalFloor) {
      EXPECT_GE(fast.survival_estimate, best - 1e-12);
    }
  }
}

TEST(SafestPath, MonotoneInTau) {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const auto g = RandomGraph(rng, 3 + rng.Below(10), 0.25, true);
    std::vector<DangerPosterior> post;
    for (std::size_t i = 0; i < g.size(); ++i) post.push_back({RandomPmf(rng, true), 1});
    const BeliefMap b(std::move(post));
    double prev = -1.0;
    for (int tau = 1; tau <= 5; ++tau) {
      const double s = SafestPath(g, b, DangerLevel(tau), g.start(), g.exits()).survival_estimate;
      EXPECT_GE(s, prev - 1e-15);
      prev = s;
    }
    EXPECT_NEAR(prev, 1.0, 1e-12);
  }
}

TEST(SafestPath, FixedHopScalingKeepsRoute) {
  // Layered graphs: every start-to-exit path has the same number of arcs.
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    GraphBuilder b;
    std::uint32_t next = 0;
    std::vector<std::vector<std::uint32_t>> layers{{next++}};
    const std::size_t depth = 2 + rng.Below(4);
    for (std::size_t l = 0; l < depth; ++l) {
      std::vector<std::uint32_t> layer;
      for (std::size_t k = 1 + rng.Below(3); k > 0; --k) layer.push_back(next++);
      layers.push_back(layer);
    }
    layers.push_back({next++});
    for (std::uint32_t i = 0; i < next; ++i) b.Node(i, DangerPmf::Uniform());
    for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
      for (auto u : layers[l]) {
        for (auto v : layers[l + 1]) b.Link(u, v);
      }
    }
    const auto g = b.Build(0, {next - 1});
    std::vector<double> s(next), scaled(next);
    const double c = 0.2 + 0.8 * rng.Uniform();
    for (std::uint32_t i = 0; i < next; ++i) {
      s[i] = 0.05 + 0.95 * rng.Uniform();
      scaled[i] = c * s[i];
    }
    EXPECT_EQ(SafestPath(g, Beliefs(g, s), kTau3, g.start(), g.exits()).nodes,
              SafestPath(g, Beliefs(g, scaled), kTau3, g.start(), g.exits()).nodes);
  }
}

TEST(SafestPath, Deterministic) {
  Rng rng(9);
  const auto g = RandomGraph(rng, 40, 0.1, true);
  const auto b = BeliefMap::Uniform(g);
  const auto first = SafestPath(g, b, kTau3, g.start(), g.exits());
  for (int k = 0; k < 5; ++k) {
    EXPECT_EQ(SafestPath(g, b, kTau3, g.start(), g.exits()).nodes, first.nodes);
  }
}

TEST(SafestPath, BeliefsMustCoverGraph) {
  const auto g = GraphBuilder{}.Node(0, DangerPmf::Uniform()).Node(1, DangerPmf::Uniform())
                     .Link(0, 1).Build(0, {1});
  const BeliefMap short_map(std::vector<DangerPosterior>(1));
  EXPECT_THROW(SafestPath(g, short_map, kTau3, NodeId{0}, g.exits()), Error);
}

TEST(BruteForceSafestPath, RefusesLargeGraphs) {
  Rng rng(10);
  const auto g = RandomGraph(rng, 13, 0.1);
  try {
    BruteForceSafestPath(g, BeliefMap::Uniform(g), kTau3, g.start(), g.exits());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "E_TOO_LARGE");
  }
}

}  // namespace
}  // namespace hazard
