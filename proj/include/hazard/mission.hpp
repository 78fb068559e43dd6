#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "hazard/danger.hpp"
#include "hazard/environment.hpp"
#include "hazard/fusion.hpp"
#include "hazard/planner.hpp"
#include "hazard/sensing.hpp"

namespace hazard {

enum class Termination {
  kFailFast,        // the first intolerable node ends the mission
  kCountExposures,  // exposures are tallied and the team keeps going
};

std::string_view ToString(Termination t);
Termination ParseTermination(std::string_view name);

struct MissionConfig {
  DangerLevel tau{3};
  SensingModality modality = SensingModality::NoSensor();
  GroundTruthMode gt_mode = GroundTruthMode::kResamplePerEvent;
  Termination termination = Termination::kFailFast;
  // Defaults to 10 * node count.
  std::optional<std::size_t> step_cap;
  // Seeds the sensor stream, and the world stream unless world_seed is set.
  std::uint64_t seed = 0;
  // Seeds latent draws and arrival danger draws. Sharing it across
  // modalities gives common random numbers for paired comparisons.
  std::optional<std::uint64_t> world_seed;
  // Freeze a node's posterior after its first non-empty observation.
  bool refuse_duplicate_observations = false;
  bool record_trace = false;
};

struct MissionOutcome {
  bool success = false;
  std::vector<NodeId> path;  // traversed, starting at the start node
  std::size_t exposures = 0;
  std::size_t steps = 0;
  bool planning_failed = false;
  bool step_cap_hit = false;
  std::size_t degenerate_updates = 0;
};

struct TraceStep {
  NodeId position;
  std::vector<ObservationEvent> observations;
  std::vector<std::pair<NodeId, DangerPmf>> beliefs;  // observed nodes only
  PlannedPath plan;
  NodeId destination;
  DangerLevel sampled_danger{1};
  bool exposure = false;
};

struct MissionTrace {
  std::vector<TraceStep> steps;
};

struct MissionResult {
  MissionOutcome outcome;
  MissionTrace trace;
};

/// Receding-horizon escape. Each iteration observes the current node and
/// its out-neighbors, fuses the labels into the belief map, plans the
/// safest route on the updated beliefs and advances one arc. The danger at
/// the arrival node is then drawn from the ground truth (or read from the
/// mission's latent map); a level above tau is an intolerable exposure.
/// FullKnowledge plans once on the true PMFs and follows that route.
/// Reaching an exit is success; running out of steps or, under FailFast,
/// any exposure is failure. Deterministic in the config seeds.
MissionResult RunMission(const EnvironmentGraph& env,
                         const MissionConfig& config,
                         const SensorModels& models);

// Single plan on ground-truth survival values from the start node.
PlannedPath FullKnowledgeReference(const EnvironmentGraph& env,
                                   DangerLevel tau);

std::size_t DefaultStepCap(const EnvironmentGraph& env);

// One JSON object per step, newline-delimited.
void WriteTraceJsonl(std::ostream& out, const MissionTrace& trace);
nlohmann::json ToJson(const PlannedPath& path);

}  // namespace hazard
