#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hazard/danger.hpp"
#include "json.hpp"

namespace hazard {

struct NodeId {
  std::uint32_t value = 0;
  auto operator<=>(const NodeId&) const = default;
};

struct Arc {
  NodeId from;
  NodeId to;
  auto operator<=>(const Arc&) const = default;
};

/// Directed location graph with a ground-truth danger PMF per node.
///
/// Immutable after construction. Nodes are stored sorted by id and
/// addressed internally by a dense index in [0, size()); successor lists
/// are sorted by id. The constructor enforces every structural invariant:
/// unique ids, arcs between existing nodes, no self-loops, start and exits
/// present, at least one exit, and some exit reachable from the start.
/// Violations throw E_VALIDATION naming the offending node or arc.
class EnvironmentGraph {
 public:
  struct Node {
    NodeId id;
    DangerPmf truth;
    std::optional<std::string> label;
    bool operator==(const Node&) const = default;
  };

  EnvironmentGraph(std::vector<Node> nodes, std::vector<Arc> arcs,
                   NodeId start, std::vector<NodeId> exits);

  std::size_t size() const noexcept { return nodes_.size(); }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  // Sorted and de-duplicated.
  const std::vector<Arc>& arcs() const noexcept { return arcs_; }
  NodeId start() const noexcept { return start_; }
  // Sorted and de-duplicated.
  const std::vector<NodeId>& exits() const noexcept { return exits_; }

  bool Contains(NodeId id) const;
  // Dense index of `id`; throws E_UNKNOWN_NODE.
  std::size_t IndexOf(NodeId id) const;
  NodeId IdAt(std::size_t index) const { return nodes_.at(index).id; }
  const Node& NodeAt(std::size_t index) const { return nodes_.at(index); }
  std::span<const std::size_t> Successors(std::size_t index) const {
    return succ_.at(index);
  }
  bool IsExitIndex(std::size_t index) const { return is_exit_.at(index); }
  bool HasArc(NodeId from, NodeId to) const;

  // Out-neighbors of `node`, ascending; throws E_UNKNOWN_NODE.
  std::vector<NodeId> Neighbors(NodeId node) const;

  bool operator==(const EnvironmentGraph& other) const {
    return nodes_ == other.nodes_ && arcs_ == other.arcs_ &&
           start_ == other.start_ && exits_ == other.exits_;
  }

 private:
  std::vector<Node> nodes_;
  std::vector<Arc> arcs_;
  NodeId start_;
  std::vector<NodeId> exits_;
  std::vector<std::vector<std::size_t>> succ_;
  std::vector<bool> is_exit_;
};

// Environment file: {"undirected": bool, "nodes": [{"id", "truth", "label"?}],
// "arcs": [[from, to]], "start": id, "exits": [ids]}. With "undirected" set,
// every listed arc is added in both directions.
EnvironmentGraph EnvironmentFromJson(const nlohmann::json& j);
// Always emits the directed form so that a load restores the same arc set.
nlohmann::json ToJson(const EnvironmentGraph& g);
EnvironmentGraph LoadEnvironment(const std::filesystem::path& path);
void SaveEnvironment(const EnvironmentGraph& g,
                     const std::filesystem::path& path);

struct DangerRegion {
  double fraction = 0.0;
  DangerPmf truth = DangerPmf::Uniform();
  std::string label;
};

struct SyntheticEnvSpec {
  std::size_t nodes = 54;
  double connectivity = 3.0;  // average out-degree
  std::vector<DangerRegion> regions;
  std::size_t exits = 2;
  std::uint64_t seed = 0;
};

/// Random geometric world. Nodes are scattered in the unit square and
/// joined by a Euclidean spanning tree plus the shortest remaining
/// segments until the requested average out-degree is met; every link is
/// an arc pair. Regions are contiguous bands along the x axis, the start
/// sits in the lowest-expected-danger region and exits are the nodes
/// farthest (in hops) from the start. Deterministic in `seed`.
EnvironmentGraph GenerateSynthetic(const SyntheticEnvSpec& spec);

}  // namespace hazard

template <>
struct std::hash<hazard::NodeId> {
  std::size_t operator()(const hazard::NodeId& n) const noexcept {
    return std::hash<std::uint32_t>{}(n.value);
  }
};
