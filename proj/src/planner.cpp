#include "hazard/planner.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "hazard/error.hpp"

namespace hazard {
namespace {

double ArcWeight(double survival) {
  return -std::log(std::max(survival, kSurvivalFloor));
}

struct Label {
  double weight = 0.0;
  std::vector<std::size_t> seq;  // dense indices; index order is id order
};

// Strict preference: lighter, then fewer hops, then lexicographic.
bool Better(const Label& a, const Label& b) {
  if (std::abs(a.weight - b.weight) > kWeightTieTolerance) {
    return a.weight < b.weight;
  }
  if (a.seq.size() != b.seq.size()) return a.seq.size() < b.seq.size();
  return a.seq < b.seq;
}

std::vector<bool> GoalMask(const EnvironmentGraph& graph,
                           std::span<const NodeId> exits) {
  std::vector<bool> mask(graph.size(), false);
  for (NodeId e : exits) mask[graph.IndexOf(e)] = true;
  return mask;
}

PlannedPath ToPlannedPath(const EnvironmentGraph& graph,
                          const BeliefMap& beliefs, DangerLevel tau,
                          const std::vector<std::size_t>& route) {
  PlannedPath out;
  out.nodes.reserve(route.size());
  for (std::size_t v : route) out.nodes.push_back(graph.IdAt(v));
  out.survival_estimate = PathSurvival(graph, beliefs, out.nodes, tau);
  return out;
}

[[noreturn]] void NoRoute(const EnvironmentGraph& graph, std::size_t from) {
  throw Error(ErrorKind::kPlanning, "E_NO_ROUTE",
              "no exit reachable from node " +
                  std::to_string(graph.IdAt(from).value));
}

}  // namespace

BeliefMap BeliefMap::Uniform(const EnvironmentGraph& graph) {
  return BeliefMap(std::vector<DangerPosterior>(graph.size()));
}

BeliefMap BeliefMap::FromTruth(const EnvironmentGraph& graph) {
  std::vector<DangerPosterior> p;
  p.reserve(graph.size());
  for (const auto& n : graph.nodes()) p.push_back({n.truth, 0});
  return BeliefMap(std::move(p));
}

void BeliefMap::RequireCovers(const EnvironmentGraph& graph) const {
  if (posteriors_.size() != graph.size()) {
    ThrowContract("belief map covers " + std::to_string(posteriors_.size()) +
                  " nodes, graph has " + std::to_string(graph.size()));
  }
}

double EdgeSurvival(const EnvironmentGraph& graph, const BeliefMap& beliefs,
                    NodeId dest, DangerLevel tau) {
  beliefs.RequireCovers(graph);
  if (!graph.Contains(dest)) {
    ThrowContract("edge survival for unknown node " +
                  std::to_string(dest.value));
  }
  return CdfAt(beliefs.at(graph.IndexOf(dest)).pmf, tau);
}

double PathSurvival(const EnvironmentGraph& graph, const BeliefMap& beliefs,
                    std::span<const NodeId> path, DangerLevel tau) {
  if (path.empty()) ThrowContract("empty path");
  if (!graph.Contains(path.front())) ThrowContract("path starts off-graph");
  double s = 1.0;
  for (std::size_t k = 1; k < path.size(); ++k) {
    if (!graph.HasArc(path[k - 1], path[k])) {
      ThrowContract("path uses missing arc " +
                    std::to_string(path[k - 1].value) + "->" +
                    std::to_string(path[k].value));
    }
    s *= EdgeSurvival(graph, beliefs, path[k], tau);
  }
  return s;
}

PlannedPath SafestPath(const EnvironmentGraph& graph, const BeliefMap& beliefs,
                       DangerLevel tau, NodeId from,
                       std::span<const NodeId> exits) {
  beliefs.RequireCovers(graph);
  const std::vector<double> survival = detail::SurvivalByIndex(beliefs, tau);
  const auto route = detail::SafestRoute(graph, survival, graph.IndexOf(from),
                                         GoalMask(graph, exits));
  return ToPlannedPath(graph, beliefs, tau, route);
}

PlannedPath BruteForceSafestPath(const EnvironmentGraph& graph,
                                 const BeliefMap& beliefs, DangerLevel tau,
                                 NodeId from, std::span<const NodeId> exits,
                                 std::size_t max_nodes) {
  beliefs.RequireCovers(graph);
  max_nodes = std::min(max_nodes, kBruteForceMaxNodes);
  if (graph.size() > max_nodes) {
    ThrowInput("E_TOO_LARGE", "brute-force search refuses graphs over " +
                                  std::to_string(max_nodes) + " nodes");
  }
  const std::vector<double> survival = detail::SurvivalByIndex(beliefs, tau);
  const std::vector<bool> goal = GoalMask(graph, exits);
  const std::size_t source = graph.IndexOf(from);

  std::optional<Label> best;
  std::vector<bool> on_path(graph.size(), false);
  Label current{0.0, {source}};
  on_path[source] = true;

  auto dfs = [&](auto&& self, std::size_t u) -> void {
    if (goal[u]) {
      if (!best || Better(current, *best)) best = current;
      return;
    }
    for (std::size_t v : graph.Successors(u)) {
      if (on_path[v]) continue;
      on_path[v] = true;
      const double saved = current.weight;
      current.weight += ArcWeight(survival[v]);
      current.seq.push_back(v);
      self(self, v);
      current.seq.pop_back();
      current.weight = saved;
      on_path[v] = false;
    }
  };
  dfs(dfs, source);
  if (!best) NoRoute(graph, source);
  return ToPlannedPath(graph, beliefs, tau, best->seq);
}

namespace detail {

std::vector<double> SurvivalByIndex(const BeliefMap& beliefs, DangerLevel tau) {
  std::vector<double> s(beliefs.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = CdfAt(beliefs.at(i).pmf, tau);
  return s;
}

std::vector<std::size_t> SafestRoute(const EnvironmentGraph& graph,
                                     std::span<const double> survival,
                                     std::size_t from,
                                     const std::vector<bool>& is_goal) {
  const std::size_t n = graph.size();
  // Dense O(n^2) label-setting search. The graphs are small, and a linear
  // scan keeps the composite tie-breaking order out of any heap invariant.
  std::vector<std::optional<Label>> label(n);
  std::vector<bool> settled(n, false);
  label[from] = Label{0.0, {from}};
  while (true) {
    std::size_t u = n;
    for (std::size_t v = 0; v < n; ++v) {
      if (settled[v] || !label[v]) continue;
      if (u == n || Better(*label[v], *label[u])) u = v;
    }
    if (u == n) NoRoute(graph, from);
    settled[u] = true;
    if (is_goal[u]) return std::move(label[u]->seq);
    for (std::size_t v : graph.Successors(u)) {
      if (settled[v]) continue;
      Label cand{label[u]->weight + ArcWeight(survival[v]), label[u]->seq};
      cand.seq.push_back(v);
      if (!label[v] || Better(cand, *label[v])) label[v] = std::move(cand);
    }
  }
}

}  // namespace detail
}  // namespace hazard
