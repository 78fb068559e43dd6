#include "hazard/environment.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "hazard/error.hpp"
#include "hazard/rng.hpp"

namespace hazard {
namespace {

[[noreturn]] void Invalid(const std::string& msg) {
  ThrowInput("E_VALIDATION", msg);
}

std::string ArcName(const Arc& a) {
  return "(" + std::to_string(a.from.value) + "->" +
         std::to_string(a.to.value) + ")";
}

}  // namespace

EnvironmentGraph::EnvironmentGraph(std::vector<Node> nodes,
                                   std::vector<Arc> arcs, NodeId start,
                                   std::vector<NodeId> exits)
    : nodes_(std::move(nodes)),
      arcs_(std::move(arcs)),
      start_(start),
      exits_(std::move(exits)) {
  if (nodes_.empty()) Invalid("graph has no nodes");
  std::sort(nodes_.begin(), nodes_.end(),
            [](const Node& a, const Node& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    if (nodes_[i].id == nodes_[i - 1].id) {
      Invalid("duplicate node id " + std::to_string(nodes_[i].id.value));
    }
  }
  std::sort(arcs_.begin(), arcs_.end());
  arcs_.erase(std::unique(arcs_.begin(), arcs_.end()), arcs_.end());
  std::sort(exits_.begin(), exits_.end());
  exits_.erase(std::unique(exits_.begin(), exits_.end()), exits_.end());

  succ_.assign(nodes_.size(), {});
  for (const Arc& a : arcs_) {
    if (a.from == a.to) Invalid("self-loop arc " + ArcName(a));
    if (!Contains(a.from) || !Contains(a.to)) {
      Invalid("arc " + ArcName(a) + " references a missing node");
    }
    succ_[IndexOf(a.from)].push_back(IndexOf(a.to));
  }
  if (!Contains(start_)) {
    Invalid("start node " + std::to_string(start_.value) + " does not exist");
  }
  if (exits_.empty()) Invalid("exit set is empty");
  is_exit_.assign(nodes_.size(), false);
  for (NodeId e : exits_) {
    if (!Contains(e)) {
      Invalid("exit node " + std::to_string(e.value) + " does not exist");
    }
    is_exit_[IndexOf(e)] = true;
  }

  std::vector<bool> seen(nodes_.size(), false);
  std::deque<std::size_t> frontier{IndexOf(start_)};
  seen[frontier.front()] = true;
  bool reachable = false;
  while (!frontier.empty()) {
    const std::size_t u = frontier.front();
    frontier.pop_front();
    if (is_exit_[u]) {
      reachable = true;
      break;
    }
    for (std::size_t v : succ_[u]) {
      if (!seen[v]) {
        seen[v] = true;
        frontier.push_back(v);
      }
    }
  }
  if (!reachable) Invalid("no exit is reachable from the start node");
}

bool EnvironmentGraph::Contains(NodeId id) const {
  auto it = std::lower_bound(
      nodes_.begin(), nodes_.end(), id,
      [](const Node& n, NodeId v) { return n.id < v; });
  return it != nodes_.end() && it->id == id;
}

std::size_t EnvironmentGraph::IndexOf(NodeId id) const {
  auto it = std::lower_bound(
      nodes_.begin(), nodes_.end(), id,
      [](const Node& n, NodeId v) { return n.id < v; });
  if (it == nodes_.end() || it->id != id) {
    ThrowInput("E_UNKNOWN_NODE",
               "unknown node " + std::to_string(id.value));
  }
  return static_cast<std::size_t>(it - nodes_.begin());
}

bool EnvironmentGraph::HasArc(NodeId from, NodeId to) const {
  return std::binary_search(arcs_.begin(), arcs_.end(), Arc{from, to});
}

std::vector<NodeId> EnvironmentGraph::Neighbors(NodeId node) const {
  std::vector<NodeId> out;
  for (std::size_t v : succ_[IndexOf(node)]) out.push_back(nodes_[v].id);
  return out;
}

EnvironmentGraph EnvironmentFromJson(const nlohmann::json& j) {
  try {
    for (const auto& [key, _] : j.items()) {
      if (key != "undirected" && key != "nodes" && key != "arcs" &&
          key != "start" && key != "exits") {
        ThrowInput("E_PARSE", "unknown environment key '" + key + "'");
      }
    }
    const bool undirected = j.value("undirected", false);
    std::vector<EnvironmentGraph::Node> nodes;
    for (const auto& n : j.at("nodes")) {
      const auto& t = n.at("truth");
      if (!t.is_array() || t.size() != kNumLevels) {
        ThrowInput("E_PARSE", "node truth must be 5 probabilities");
      }
      LevelArray p;
      for (int i = 0; i < kNumLevels; ++i) p[i] = t[i].get<double>();
      EnvironmentGraph::Node node{NodeId{n.at("id").get<std::uint32_t>()},
                                  DangerPmf(p), std::nullopt};
      if (n.contains("label") && !n["label"].is_null()) {
        node.label = n["label"].get<std::string>();
      }
      nodes.push_back(std::move(node));
    }
    std::vector<Arc> arcs;
    for (const auto& a : j.at("arcs")) {
      if (!a.is_array() || a.size() != 2) {
        ThrowInput("E_PARSE", "arcs must be [from, to] pairs");
      }
      const Arc arc{NodeId{a[0].get<std::uint32_t>()},
                    NodeId{a[1].get<std::uint32_t>()}};
      arcs.push_back(arc);
      if (undirected) arcs.push_back({arc.to, arc.from});
    }
    std::vector<NodeId> exits;
    for (const auto& e : j.at("exits")) {
      exits.push_back(NodeId{e.get<std::uint32_t>()});
    }
    return EnvironmentGraph(std::move(nodes), std::move(arcs),
                            NodeId{j.at("start").get<std::uint32_t>()},
                            std::move(exits));
  } catch (const nlohmann::json::exception& e) {
    ThrowInput("E_PARSE", std::string("environment: ") + e.what());
  }
}

nlohmann::json ToJson(const EnvironmentGraph& g) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : g.nodes()) {
    nlohmann::json node = {{"id", n.id.value}, {"truth", n.truth.probs()}};
    if (n.label) node["label"] = *n.label;
    nodes.push_back(std::move(node));
  }
  nlohmann::json arcs = nlohmann::json::array();
  for (const Arc& a : g.arcs()) arcs.push_back({a.from.value, a.to.value});
  nlohmann::json exits = nlohmann::json::array();
  for (NodeId e : g.exits()) exits.push_back(e.value);
  return {{"undirected", false},
          {"nodes", std::move(nodes)},
          {"arcs", std::move(arcs)},
          {"start", g.start().value},
          {"exits", std::move(exits)}};
}

EnvironmentGraph LoadEnvironment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) ThrowInput("E_ENV_MISSING", "cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    ThrowInput("E_PARSE", path.string() + ": " + e.what());
  }
  return EnvironmentFromJson(j);
}

void SaveEnvironment(const EnvironmentGraph& g,
                     const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) ThrowInput("E_IO", "cannot write " + path.string());
  // nlohmann emits the shortest round-trip representation of doubles.
  out << ToJson(g).dump(1) << '\n';
}

EnvironmentGraph GenerateSynthetic(const SyntheticEnvSpec& spec) {
  const std::size_t n = spec.nodes;
  if (n < 2) ThrowInput("E_GEN", "need at least 2 nodes");
  if (!(spec.connectivity >= 1.0) ||
      spec.connectivity > static_cast<double>(n - 1)) {
    ThrowInput("E_GEN", "connectivity must lie in [1, n-1]");
  }
  if (spec.exits < 1 || spec.exits > n - 1) {
    ThrowInput("E_GEN", "exit count must lie in [1, n-1]");
  }
  if (spec.regions.empty()) ThrowInput("E_GEN", "no danger regions given");
  double total = 0.0;
  for (const auto& r : spec.regions) {
    if (!(r.fraction > 0.0)) ThrowInput("E_GEN", "region fractions must be > 0");
    total += r.fraction;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    ThrowInput("E_GEN", "region fractions must sum to 1");
  }
  if (spec.regions.size() > n) {
    ThrowInput("E_GEN", "more regions than nodes");
  }

  Rng rng(spec.seed);
  struct Point {
    double x, y;
  };
  std::vector<Point> pts(n);
  for (auto& p : pts) {
    p.x = rng.Uniform();
    p.y = rng.Uniform();
  }
  // Ids follow x order so that regions are contiguous id ranges.
  std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  auto dist = [&](std::size_t a, std::size_t b) {
    return std::hypot(pts[a].x - pts[b].x, pts[a].y - pts[b].y);
  };

  // Prim's spanning tree on the complete Euclidean graph.
  std::vector<std::pair<std::size_t, std::size_t>> links;
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> parent(n, 0);
  std::vector<bool> in_tree(n, false);
  best[0] = 0.0;
  for (std::size_t it = 0; it < n; ++it) {
    std::size_t u = n;
    for (std::size_t v = 0; v < n; ++v) {
      if (!in_tree[v] && (u == n || best[v] < best[u])) u = v;
    }
    in_tree[u] = true;
    if (u != 0) links.emplace_back(std::min(u, parent[u]), std::max(u, parent[u]));
    for (std::size_t v = 0; v < n; ++v) {
      if (!in_tree[v] && dist(u, v) < best[v]) {
        best[v] = dist(u, v);
        parent[v] = u;
      }
    }
  }
  const auto target = static_cast<std::size_t>(
      std::llround(spec.connectivity * static_cast<double>(n) / 2.0));
  if (links.size() < target) {
    std::vector<std::pair<std::size_t, std::size_t>> extra;
    std::sort(links.begin(), links.end());
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        if (!std::binary_search(links.begin(), links.end(), std::pair{a, b})) {
          extra.emplace_back(a, b);
        }
      }
    }
    std::stable_sort(extra.begin(), extra.end(), [&](auto& l, auto& r) {
      return dist(l.first, l.second) < dist(r.first, r.second);
    });
    for (std::size_t k = 0; links.size() < target && k < extra.size(); ++k) {
      links.push_back(extra[k]);
    }
  }

  // Largest-remainder apportionment, at least one node per region.
  const std::size_t nr = spec.regions.size();
  std::vector<std::size_t> counts(nr, 1);
  std::size_t assigned = nr;
  std::vector<double> remainder(nr);
  for (std::size_t r = 0; r < nr; ++r) {
    const double want = spec.regions[r].fraction * static_cast<double>(n);
    const auto extra = static_cast<std::size_t>(std::max(0.0, std::floor(want) - 1.0));
    counts[r] += extra;
    assigned += extra;
    remainder[r] = want - static_cast<double>(counts[r]);
  }
  while (assigned > n) {
    std::size_t r = std::distance(
        remainder.begin(), std::min_element(remainder.begin(), remainder.end()));
    if (counts[r] > 1) {
      --counts[r];
      --assigned;
    }
    remainder[r] += 1.0;
  }
  while (assigned < n) {
    std::size_t r = std::distance(
        remainder.begin(), std::max_element(remainder.begin(), remainder.end()));
    ++counts[r];
    ++assigned;
    remainder[r] -= 1.0;
  }

  std::vector<EnvironmentGraph::Node> nodes;
  std::vector<std::size_t> region_of(n);
  for (std::size_t r = 0, id = 0; r < nr; ++r) {
    for (std::size_t k = 0; k < counts[r]; ++k, ++id) {
      region_of[id] = r;
      nodes.push_back({NodeId{static_cast<std::uint32_t>(id)},
                       spec.regions[r].truth,
                       spec.regions[r].label.empty()
                           ? std::nullopt
                           : std::optional<std::string>(spec.regions[r].label)});
    }
  }
  std::vector<Arc> arcs;
  std::vector<std::vector<std::size_t>> adj(n);
  for (auto [a, b] : links) {
    arcs.push_back({NodeId{static_cast<std::uint32_t>(a)},
                    NodeId{static_cast<std::uint32_t>(b)}});
    arcs.push_back({NodeId{static_cast<std::uint32_t>(b)},
                    NodeId{static_cast<std::uint32_t>(a)}});
    adj[a].push_back(b);
    adj[b].push_back(a);
  }

  // Start: the member of the safest region nearest that region's centroid.
  std::size_t safest = 0;
  for (std::size_t r = 1; r < nr; ++r) {
    if (spec.regions[r].truth.ExpectedLevel() <
        spec.regions[safest].truth.ExpectedLevel()) {
      safest = r;
    }
  }
  double cx = 0.0, cy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (region_of[i] == safest) {
      cx += pts[i].x;
      cy += pts[i].y;
    }
  }
  cx /= static_cast<double>(counts[safest]);
  cy /= static_cast<double>(counts[safest]);
  std::size_t start = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (region_of[i] != safest) continue;
    if (start == n || std::hypot(pts[i].x - cx, pts[i].y - cy) <
                          std::hypot(pts[start].x - cx, pts[start].y - cy)) {
      start = i;
    }
  }

  std::vector<std::size_t> hops(n, n);
  std::deque<std::size_t> frontier{start};
  hops[start] = 0;
  while (!frontier.empty()) {
    const std::size_t u = frontier.front();
    frontier.pop_front();
    for (std::size_t v : adj[u]) {
      if (hops[v] == n) {
        hops[v] = hops[u] + 1;
        frontier.push_back(v);
      }
    }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return hops[a] > hops[b];
  });
  std::vector<NodeId> exits;
  for (std::size_t k = 0; k < spec.exits; ++k) {
    exits.push_back(NodeId{static_cast<std::uint32_t>(order[k])});
  }
  return EnvironmentGraph(std::move(nodes), std::move(arcs),
                          NodeId{static_cast<std::uint32_t>(start)},
                          std::move(exits));
}

}  // namespace hazard
