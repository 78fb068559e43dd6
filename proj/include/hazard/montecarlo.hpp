#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "hazard/mission.hpp"

namespace hazard {

inline constexpr std::uint64_t kDefaultMasterSeed = 20230517;

struct MissionTemplate {
  GroundTruthMode gt_mode = GroundTruthMode::kResamplePerEvent;
  Termination termination = Termination::kFailFast;
  std::optional<std::size_t> step_cap;
  bool refuse_duplicate_observations = false;
};

struct ExperimentConfig {
  std::size_t runs = 1000;
  std::vector<DangerLevel> taus{DangerLevel(1), DangerLevel(2), DangerLevel(3),
                                DangerLevel(4)};
  std::vector<SensingModality> modalities;
  MissionTemplate mission;
  std::uint64_t master_seed = kDefaultMasterSeed;
};

// The grid reported for the school world: no sensor, vision, one word,
// VL-1/5/10 and full knowledge.
std::vector<SensingModality> DefaultModalities();

struct CellStats {
  std::size_t runs = 0;
  double success_rate = 0.0;  // percent
  double success_ci95 = 0.0;  // percent half-width, normal approximation
  double avg_exposures = 0.0;
  double avg_path_length = 0.0;  // steps
};

struct CellResult {
  SensingModality modality;
  DangerLevel tau;
  CellStats stats;
  // Tolerating extreme danger makes every mission trivially survivable.
  bool tau_flagged = false;
};

struct ExperimentResults {
  std::vector<CellResult> cells;  // modality order, then tau ascending

  const CellResult& At(const SensingModality& m, DangerLevel tau) const;
};

CellStats Aggregate(std::span<const MissionOutcome> outcomes);

/// Seed of one run. Keyed on the modality's name rather than its list
/// position, so adding or removing cells never shifts another cell.
std::uint64_t RunSeed(std::uint64_t master, const SensingModality& modality,
                      DangerLevel tau, std::size_t run);
// World stream shared by all modalities for the same (tau, run).
std::uint64_t WorldSeed(std::uint64_t master, DangerLevel tau, std::size_t run);

struct ExperimentOptions {
  unsigned workers = 1;
  // Filled with every outcome, cell-major, when non-null.
  std::vector<MissionOutcome>* outcomes = nullptr;
};

/// Runs `config.runs` missions per (modality, tau) cell. Results do not
/// depend on `options.workers`.
ExperimentResults RunExperiment(const EnvironmentGraph& env,
                                const ExperimentConfig& config,
                                const SensorModels& models,
                                const ExperimentOptions& options = {});

// Header `modality,tau,runs,success_rate,success_ci95,avg_exposures,
// avg_path_length`; values to 2 decimals.
void WriteResultsCsv(std::ostream& out, const ExperimentResults& results);
void WriteOutcomesCsv(std::ostream& out, const ExperimentResults& results,
                      std::span<const MissionOutcome> outcomes);

}  // namespace hazard
