#include "hazard/environment.hpp"

#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "gtest/gtest.h"
#include "hazard/error.hpp"
#include "test_util.hpp"

namespace hazard {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using testing::GraphBuilder;
using testing::RandomPmf;

const fs::path kSchool = fs::path(HAZARD_TEST_ASSET_DIR) / "school54.json";

std::string ErrorCode(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

std::string ErrorMessage(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

fs::path TempPath(const std::string& name) {
  return fs::temp_directory_path() / ("hazard_env_" + name);
}

// Independent breadth-first reachability over the public arc list.
bool ExitReachable(const EnvironmentGraph& g) {
  std::map<std::uint32_t, std::vector<std::uint32_t>> out;
  for (const Arc& a : g.arcs()) out[a.from.value].push_back(a.to.value);
  std::set<std::uint32_t> seen{g.start().value};
  std::deque<std::uint32_t> q{g.start().value};
  while (!q.empty()) {
    const auto u = q.front();
    q.pop_front();
    for (auto v : out[u]) {
      if (seen.insert(v).second) q.push_back(v);
    }
  }
  for (NodeId e : g.exits()) {
    if (seen.contains(e.value)) return true;
  }
  return false;
}

void ExpectValid(const EnvironmentGraph& g) {
  std::set<std::uint32_t> ids;
  for (const auto& n : g.nodes()) EXPECT_TRUE(ids.insert(n.id.value).second);
  for (const Arc& a : g.arcs()) {
    EXPECT_NE(a.from, a.to);
    EXPECT_TRUE(ids.contains(a.from.value));
    EXPECT_TRUE(ids.contains(a.to.value));
  }
  EXPECT_TRUE(ids.contains(g.start().value));
  EXPECT_FALSE(g.exits().empty());
  for (NodeId e : g.exits()) EXPECT_TRUE(ids.contains(e.value));
  EXPECT_TRUE(ExitReachable(g));
}

TEST(LoadEnvironment, BundledSchool) {
  const auto g = LoadEnvironment(kSchool);
  EXPECT_EQ(g.size(), 54u);
  EXPECT_EQ(g.exits().size(), 2u);
  ExpectValid(g);
}

TEST(LoadEnvironment, NeighborsMatchFile) {
  const auto g = LoadEnvironment(kSchool);
  std::ifstream in(kSchool);
  const json j = json::parse(in);
  std::map<std::uint32_t, std::set<std::uint32_t>> adj;
  for (const auto& a : j["arcs"]) {
    const auto u = a[0].get<std::uint32_t>();
    const auto v = a[1].get<std::uint32_t>();
    adj[u].insert(v);
    if (j["undirected"].get<bool>()) adj[v].insert(u);
  }
  for (const auto& n : g.nodes()) {
    std::vector<NodeId> want;
    for (auto v : adj[n.id.value]) want.push_back(NodeId{v});
    EXPECT_EQ(g.Neighbors(n.id), want) << "node " << n.id.value;
  }
}

TEST(LoadEnvironment, MissingFile) {
  EXPECT_EQ(ErrorCode([] { LoadEnvironment(TempPath("does_not_exist.json")); }),
            "E_ENV_MISSING");
}

TEST(LoadEnvironment, MalformedJson) {
  const auto p = TempPath("bad.json");
  std::ofstream(p) << "{\"nodes\": [";
  EXPECT_EQ(ErrorCode([&] { LoadEnvironment(p); }), "E_PARSE");
  fs::remove(p);
}

json TinyJson() {
  return json::parse(R"({
    "undirected": false,
    "nodes": [{"id": 0, "truth": [1,0,0,0,0]}, {"id": 1, "truth": [0,0,0,0,1]}],
    "arcs": [[0, 1]], "start": 0, "exits": [1]})");
}

TEST(EnvironmentFromJson, ArcToMissingNodeIsNamed) {
  json j = TinyJson();
  j["arcs"].push_back({1, 7});
  EXPECT_EQ(ErrorCode([&] { EnvironmentFromJson(j); }), "E_VALIDATION");
  EXPECT_NE(ErrorMessage([&] { EnvironmentFromJson(j); }).find("1->7"),
            std::string::npos);
}

TEST(EnvironmentFromJson, EmptyExits) {
  json j = TinyJson();
  j["exits"] = json::array();
  EXPECT_EQ(ErrorCode([&] { EnvironmentFromJson(j); }), "E_VALIDATION");
}

TEST(EnvironmentFromJson, OtherViolations) {
  json self_loop = TinyJson();
  self_loop["arcs"].push_back({0, 0});
  EXPECT_EQ(ErrorCode([&] { EnvironmentFromJson(self_loop); }), "E_VALIDATION");

  json dup = TinyJson();
  dup["nodes"].push_back(dup["nodes"][0]);
  EXPECT_EQ(ErrorCode([&] { EnvironmentFromJson(dup); }), "E_VALIDATION");

  json unreachable = TinyJson();
  unreachable["arcs"] = json::array({json::array({1, 0})});
  EXPECT_EQ(ErrorCode([&] { EnvironmentFromJson(unreachable); }), "E_VALIDATION");

  json bad_start = TinyJson();
  bad_start["start"] = 9;
  EXPECT_EQ(ErrorCode([&] { EnvironmentFromJson(bad_start); }), "E_VALIDATION");

  json bad_pmf = TinyJson();
  bad_pmf["nodes"][0]["truth"] = {0.5, 0.5, 0.5, 0, 0};
  EXPECT_NE(ErrorCode([&] { EnvironmentFromJson(bad_pmf); }), "");

  json unknown = TinyJson();
  unknown["colour"] = "red";
  EXPECT_NE(ErrorCode([&] { EnvironmentFromJson(unknown); }), "");
}

TEST(EnvironmentFromJson, UndirectedAddsReverseArcs) {
  json j = TinyJson();
  j["undirected"] = true;
  const auto g = EnvironmentFromJson(j);
  EXPECT_TRUE(g.HasArc(NodeId{0}, NodeId{1}));
  EXPECT_TRUE(g.HasArc(NodeId{1}, NodeId{0}));
}

TEST(Neighbors, Examples) {
  const auto g = GraphBuilder{}
                     .Node(0, DangerPmf::Uniform())
                     .Node(1, DangerPmf::Uniform())
                     .Node(2, DangerPmf::Uniform())
                     .Link(0, 2)
                     .Link(0, 1)
                     .Build(0, {2});
  EXPECT_EQ(g.Neighbors(NodeId{0}), (std::vector<NodeId>{NodeId{1}, NodeId{2}}));
  EXPECT_TRUE(g.Neighbors(NodeId{2}).empty());
  EXPECT_EQ(ErrorCode([&] { g.Neighbors(NodeId{5}); }), "E_UNKNOWN_NODE");
}

TEST(EnvironmentJson, RoundTripIsExact) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    auto g = testing::RandomGraph(rng, 2 + rng.Below(12), 0.2, trial % 2 == 0);
    const auto p = TempPath("roundtrip.json");
    SaveEnvironment(g, p);
    EXPECT_EQ(LoadEnvironment(p), g);
    fs::remove(p);
  }
  const auto school = LoadEnvironment(kSchool);
  EXPECT_EQ(EnvironmentFromJson(ToJson(school)), school);
}

TEST(EnvironmentJson, KeepsFullPrecision) {
  GraphBuilder b;
  b.Node(0, DangerPmf::Normalized({1.0 / 3, 1.0 / 7, 1.0 / 11, 0.1, 0.2}))
      .Node(1, DangerPmf::Uniform())
      .Link(0, 1);
  const auto g = b.Build(0, {1});
  EXPECT_EQ(EnvironmentFromJson(json::parse(ToJson(g).dump())), g);
}

SyntheticEnvSpec FourRegions(std::uint64_t seed) {
  SyntheticEnvSpec s;
  s.nodes = 54;
  s.connectivity = 3.0;
  s.exits = 2;
  s.seed = seed;
  s.regions = {{0.4, DangerPmf::Delta(DangerLevel(1)), "safe"},
               {0.2, DangerPmf({0.05, 0.25, 0.45, 0.2, 0.05}), "smoke"},
               {0.2, DangerPmf({0, 0.05, 0.25, 0.45, 0.25}), "flood"},
               {0.2, DangerPmf({0, 0, 0.05, 0.3, 0.65}), "fire"}};
  return s;
}

TEST(GenerateSynthetic, TwoNodes) {
  SyntheticEnvSpec s;
  s.nodes = 2;
  s.connectivity = 1.0;
  s.exits = 1;
  s.regions = {{1.0, DangerPmf::Delta(DangerLevel(1)), ""}};
  const auto g = GenerateSynthetic(s);
  ASSERT_EQ(g.size(), 2u);
  ASSERT_EQ(g.exits().size(), 1u);
  EXPECT_NE(g.start(), g.exits()[0]);
  EXPECT_TRUE(g.HasArc(g.start(), g.exits()[0]));
  for (const auto& n : g.nodes()) EXPECT_EQ(n.truth, DangerPmf::Delta(DangerLevel(1)));
}

TEST(GenerateSynthetic, Deterministic) {
  EXPECT_EQ(GenerateSynthetic(FourRegions(5)), GenerateSynthetic(FourRegions(5)));
  EXPECT_NE(GenerateSynthetic(FourRegions(5)), GenerateSynthetic(FourRegions(6)));
}

TEST(GenerateSynthetic, FiftyFourNodesFourRegions) {
  const auto g = GenerateSynthetic(FourRegions(20230517));
  EXPECT_EQ(g.size(), 54u);
  EXPECT_EQ(g.exits().size(), 2u);
  ExpectValid(g);
  // Validation again through the loader.
  EXPECT_EQ(EnvironmentFromJson(ToJson(g)), g);
  // Start sits in the safe region.
  EXPECT_EQ(g.NodeAt(g.IndexOf(g.start())).label, "safe");
  std::map<std::string, int> count;
  for (const auto& n : g.nodes()) ++count[*n.label];
  // 54 * (0.4, 0.2, 0.2, 0.2) = (21.6, 10.8, 10.8, 10.8); largest remainders win.
  EXPECT_EQ(count["safe"], 21);
  EXPECT_EQ(count["smoke"], 11);
  EXPECT_EQ(count["flood"], 11);
  EXPECT_EQ(count["fire"], 11);
}

TEST(GenerateSynthetic, RegionsAreContiguous) {
  const auto g = GenerateSynthetic(FourRegions(3));
  std::vector<std::string> order;
  for (const auto& n : g.nodes()) {
    if (order.empty() || order.back() != *n.label) order.push_back(*n.label);
  }
  EXPECT_EQ(order, (std::vector<std::string>{"safe", "smoke", "flood", "fire"}));
}

TEST(GenerateSynthetic, RandomParameterizationsValidate) {
  Rng rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    SyntheticEnvSpec s;
    s.nodes = 2 + rng.Below(79);
    s.connectivity = 1.0 + rng.Uniform() * std::min<double>(4.0, s.nodes - 2);
    s.exits = 1 + rng.Below(std::min<std::size_t>(3, s.nodes - 1));
    s.seed = rng.NextU64();
    const std::size_t nr = 1 + rng.Below(std::min<std::size_t>(5, s.nodes));
    std::vector<double> w(nr);
    double total = 0.0;
    for (double& v : w) total += (v = 0.1 + rng.Uniform());
    double acc = 0.0;
    for (std::size_t r = 0; r < nr; ++r) {
      const double f = r + 1 == nr ? 1.0 - acc : w[r] / total;
      acc += f;
      s.regions.push_back({f, RandomPmf(rng, true), "r" + std::to_string(r)});
    }
    SCOPED_TRACE("trial " + std::to_string(trial));
    const auto g = GenerateSynthetic(s);
    EXPECT_EQ(g.size(), s.nodes);
    EXPECT_EQ(g.exits().size(), s.exits);
    EXPECT_FALSE(std::binary_search(g.exits().begin(), g.exits().end(), g.start()));
    ExpectValid(g);
  }
}

TEST(GenerateSynthetic, RejectsInfeasible) {
  auto s = FourRegions(1);
  s.nodes = 1;
  EXPECT_EQ(ErrorCode([&] { GenerateSynthetic(s); }), "E_GEN");
  s = FourRegions(1);
  s.connectivity = 0.5;
  EXPECT_EQ(ErrorCode([&] { GenerateSynthetic(s); }), "E_GEN");
  s = FourRegions(1);
  s.regions[0].fraction = 0.3;
  EXPECT_EQ(ErrorCode([&] { GenerateSynthetic(s); }), "E_GEN");
  s = FourRegions(1);
  s.exits = 0;
  EXPECT_EQ(ErrorCode([&] { GenerateSynthetic(s); }), "E_GEN");
  s = FourRegions(1);
  s.nodes = 3;
  EXPECT_EQ(ErrorCode([&] { GenerateSynthetic(s); }), "E_GEN");
}

}  // namespace
}  // namespace hazard
