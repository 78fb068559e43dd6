#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hazard/danger.hpp"
#include "hazard/environment.hpp"
#include "hazard/fusion.hpp"

namespace hazard {

// Survival values are clamped to this floor before taking -log, so arcs
// into almost-certainly-lethal nodes stay usable as a last resort.
inline constexpr double kSurvivalFloor = 1e-9;
// Path weights closer than this are compared by hop count instead.
inline constexpr double kWeightTieTolerance = 1e-12;
inline constexpr std::size_t kBruteForceMaxNodes = 12;

/// Danger posterior for every node of one graph, addressed by the graph's
/// dense node index.
class BeliefMap {
 public:
  explicit BeliefMap(std::vector<DangerPosterior> posteriors)
      : posteriors_(std::move(posteriors)) {}

  // Every node starts from the uniform prior.
  static BeliefMap Uniform(const EnvironmentGraph& graph);
  // Every node holds its ground-truth PMF.
  static BeliefMap FromTruth(const EnvironmentGraph& graph);

  std::size_t size() const noexcept { return posteriors_.size(); }
  const DangerPosterior& at(std::size_t index) const {
    return posteriors_.at(index);
  }
  void Set(std::size_t index, DangerPosterior posterior) {
    posteriors_.at(index) = std::move(posterior);
  }
  // Throws E_CONTRACT unless the map covers exactly `graph`'s nodes.
  void RequireCovers(const EnvironmentGraph& graph) const;

 private:
  std::vector<DangerPosterior> posteriors_;
};

struct PlannedPath {
  std::vector<NodeId> nodes;  // from the query node to an exit, inclusive
  double survival_estimate = 1.0;
};

// Survival of any arc into `dest`: P(danger at dest <= tau) under beliefs.
double EdgeSurvival(const EnvironmentGraph& graph, const BeliefMap& beliefs,
                    NodeId dest, DangerLevel tau);

// Product of EdgeSurvival over the path's arcs; a single-node path is 1.
double PathSurvival(const EnvironmentGraph& graph, const BeliefMap& beliefs,
                    std::span<const NodeId> path, DangerLevel tau);

/// Maximum-survival route from `from` to the nearest member of `exits`,
/// found as a shortest path under arc weights -ln(max(s, kSurvivalFloor)).
/// Ties (within kWeightTieTolerance) prefer fewer hops, then the
/// lexicographically smallest id sequence. Throws E_NO_ROUTE
/// (ErrorKind::kPlanning) when no exit is reachable.
PlannedPath SafestPath(const EnvironmentGraph& graph, const BeliefMap& beliefs,
                       DangerLevel tau, NodeId from,
                       std::span<const NodeId> exits);

// Test oracle: enumerates every simple path. Refuses graphs larger than
// `max_nodes` (itself capped at kBruteForceMaxNodes).
PlannedPath BruteForceSafestPath(const EnvironmentGraph& graph,
                                 const BeliefMap& beliefs, DangerLevel tau,
                                 NodeId from, std::span<const NodeId> exits,
                                 std::size_t max_nodes = kBruteForceMaxNodes);

namespace detail {

// Index-space core shared by SafestPath and the mission loop.
// `survival[v]` is the survival of entering node v. Returns dense indices.
std::vector<std::size_t> SafestRoute(const EnvironmentGraph& graph,
                                     std::span<const double> survival,
                                     std::size_t from,
                                     const std::vector<bool>& is_goal);

std::vector<double> SurvivalByIndex(const BeliefMap& beliefs, DangerLevel tau);

}  // namespace detail
}  // namespace hazard
