#include "hazard/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

#include "hazard/error.hpp"
#include "hazard/rng.hpp"

namespace hazard {
namespace {

std::string Fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::vector<SensingModality> DefaultModalities() {
  return {SensingModality::NoSensor(),         SensingModality::VisionOnly(),
          SensingModality::LanguageOnly(1),    SensingModality::VisionLanguage(1),
          SensingModality::VisionLanguage(5),  SensingModality::VisionLanguage(10),
          SensingModality::FullKnowledge()};
}

const CellResult& ExperimentResults::At(const SensingModality& m,
                                        DangerLevel tau) const {
  for (const auto& c : cells) {
    if (c.modality == m && c.tau == tau) return c;
  }
  ThrowInput("E_NO_CELL", "no cell for " + m.Name() + " tau " +
                              std::to_string(tau.value()));
}

CellStats Aggregate(std::span<const MissionOutcome> outcomes) {
  if (outcomes.empty()) ThrowInput("E_EMPTY", "no mission outcomes");
  double successes = 0.0, exposures = 0.0, steps = 0.0;
  for (const auto& o : outcomes) {
    successes += o.success ? 1.0 : 0.0;
    exposures += static_cast<double>(o.exposures);
    steps += static_cast<double>(o.steps);
  }
  const double n = static_cast<double>(outcomes.size());
  const double p = successes / n;
  CellStats s;
  s.runs = outcomes.size();
  s.success_rate = 100.0 * p;
  s.success_ci95 = 100.0 * 1.96 * std::sqrt(p * (1.0 - p) / n);
  s.avg_exposures = exposures / n;
  s.avg_path_length = steps / n;
  return s;
}

std::uint64_t RunSeed(std::uint64_t master, const SensingModality& modality,
                      DangerLevel tau, std::size_t run) {
  return DeriveSeed({master, HashName(modality.Name()),
                     static_cast<std::uint64_t>(tau.value()),
                     static_cast<std::uint64_t>(run)});
}

std::uint64_t WorldSeed(std::uint64_t master, DangerLevel tau,
                        std::size_t run) {
  return DeriveSeed({master, HashName("world"),
                     static_cast<std::uint64_t>(tau.value()),
                     static_cast<std::uint64_t>(run)});
}

ExperimentResults RunExperiment(const EnvironmentGraph& env,
                                const ExperimentConfig& config,
                                const SensorModels& models,
                                const ExperimentOptions& options) {
  if (config.runs < 1) ThrowInput("E_CONFIG", "runs must be >= 1");
  if (config.taus.empty()) ThrowInput("E_CONFIG", "no tolerance levels given");
  if (config.modalities.empty()) ThrowInput("E_CONFIG", "no modalities given");
  for (const auto& m : config.modalities) models.RequireFor(m);

  struct Cell {
    SensingModality modality;
    DangerLevel tau;
  };
  std::vector<Cell> cells;
  for (const auto& m : config.modalities) {
    std::vector<DangerLevel> taus = config.taus;
    std::sort(taus.begin(), taus.end());
    taus.erase(std::unique(taus.begin(), taus.end()), taus.end());
    for (DangerLevel t : taus) cells.push_back({m, t});
  }

  const std::size_t total = cells.size() * config.runs;
  std::vector<MissionOutcome> outcomes(total);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    while (true) {
      const std::size_t job = next.fetch_add(1);
      if (job >= total) return;
      const Cell& cell = cells[job / config.runs];
      const std::size_t run = job % config.runs;
      MissionConfig mc;
      mc.tau = cell.tau;
      mc.modality = cell.modality;
      mc.gt_mode = config.mission.gt_mode;
      mc.termination = config.mission.termination;
      mc.step_cap = config.mission.step_cap;
      mc.refuse_duplicate_observations =
          config.mission.refuse_duplicate_observations;
      mc.seed = RunSeed(config.master_seed, cell.modality, cell.tau, run);
      mc.world_seed = WorldSeed(config.master_seed, cell.tau, run);
      try {
        outcomes[job] = RunMission(env, mc, models).outcome;
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(total);
        return;
      }
    }
  };

  const unsigned workers = std::max(1u, options.workers);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  ExperimentResults results;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const std::span<const MissionOutcome> slice(
        outcomes.data() + c * config.runs, config.runs);
    results.cells.push_back({cells[c].modality, cells[c].tau, Aggregate(slice),
                             cells[c].tau.value() == kNumLevels});
  }
  if (options.outcomes) *options.outcomes = std::move(outcomes);
  return results;
}

void WriteResultsCsv(std::ostream& out, const ExperimentResults& results) {
  out << "modality,tau,runs,success_rate,success_ci95,avg_exposures,"
         "avg_path_length\n";
  for (const auto& c : results.cells) {
    out << c.modality.Name() << ',' << c.tau.value() << ',' << c.stats.runs
        << ',' << Fixed2(c.stats.success_rate) << ','
        << Fixed2(c.stats.success_ci95) << ',' << Fixed2(c.stats.avg_exposures)
        << ',' << Fixed2(c.stats.avg_path_length) << '\n';
  }
}

void WriteOutcomesCsv(std::ostream& out, const ExperimentResults& results,
                      std::span<const MissionOutcome> outcomes) {
  out << "modality,tau,run,success,exposures,steps\n";
  std::size_t k = 0;
  for (const auto& c : results.cells) {
    for (std::size_t r = 0; r < c.stats.runs; ++r, ++k) {
      const MissionOutcome& o = outcomes[k];
      out << c.modality.Name() << ',' << c.tau.value() << ',' << r << ','
          << (o.success ? 1 : 0) << ',' << o.exposures << ',' << o.steps
          << '\n';
    }
  }
}

}  // namespace hazard
