#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "hazard/danger.hpp"
#include "hazard/environment.hpp"
#include "hazard/error.hpp"
#include "hazard/mission.hpp"
#include "hazard/montecarlo.hpp"
#include "hazard/rng.hpp"
#include "json.hpp"

#ifndef HAZARD_ASSET_DIR
#define HAZARD_ASSET_DIR "assets"
#endif

namespace hazard::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::filesystem::path BundledSchool() {
  if (const char* dir = std::getenv("HAZARD_ASSET_DIR")) {
    return fs::path(dir) / "school54.json";
  }
  return fs::path(HAZARD_ASSET_DIR) / "school54.json";
}

std::string Format(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

std::vector<std::string> SplitList(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<DangerLevel> ParseTaus(const std::string& s) {
  std::vector<DangerLevel> taus;
  for (const auto& t : SplitList(s, ',')) {
    int v = 0;
    try {
      v = std::stoi(t);
    } catch (const std::exception&) {
      ThrowInput("E_CONFIG", "bad tau '" + t + "'");
    }
    taus.emplace_back(v);
  }
  if (taus.empty()) ThrowInput("E_CONFIG", "empty tau list");
  return taus;
}

std::vector<SensingModality> ParseModalities(const std::string& s) {
  std::vector<SensingModality> mods;
  for (const auto& m : SplitList(s, ',')) mods.push_back(SensingModality::Parse(m));
  if (mods.empty()) ThrowInput("E_CONFIG", "empty modality list");
  return mods;
}

std::string JoinModalities(const std::vector<SensingModality>& mods) {
  std::string out;
  for (const auto& m : mods) out += (out.empty() ? "" : ",") + m.Name();
  return out;
}

SensorModels LoadModels(const std::string& vision, const std::string& language) {
  SensorModels models;
  if (!vision.empty()) models.vision = LoadLikelihood(vision);
  if (!language.empty()) models.language = LoadLikelihood(language);
  return models;
}

struct Globals {
  std::uint64_t seed = kDefaultMasterSeed;
  unsigned workers = 1;
  bool quiet = false;
};

// ---- simulate ----

struct SimulateArgs {
  std::string env;
  std::string config;
  std::string vision;
  std::string language;
  std::string out = "results.csv";
  std::string outcomes;
  std::size_t runs = 1000;
  std::string taus = "1,2,3,4";
  std::string modalities = JoinModalities(DefaultModalities());
  std::string gt_mode = "resample-per-event";
  std::string termination = "fail-fast";
  std::size_t step_cap = 0;
  bool refuse_duplicates = false;
};

// Fills every field whose flag was not given from the JSON config file.
void OverlayConfig(CLI::App& cmd, SimulateArgs& a, Globals& g,
                   const CLI::App& root) {
  if (a.config.empty()) return;
  std::ifstream in(a.config);
  if (!in) ThrowInput("E_CONFIG", "cannot open config " + a.config);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    ThrowInput("E_CONFIG", a.config + ": " + e.what());
  }
  if (!j.is_object()) ThrowInput("E_CONFIG", "config must be a JSON object");
  auto unset = [&](const std::string& flag) {
    return cmd.count(flag) == 0;
  };
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "env") {
        if (unset("--env")) a.env = value.get<std::string>();
      } else if (key == "vision") {
        if (unset("--vision")) a.vision = value.get<std::string>();
      } else if (key == "language") {
        if (unset("--language")) a.language = value.get<std::string>();
      } else if (key == "out") {
        if (unset("--out")) a.out = value.get<std::string>();
      } else if (key == "outcomes") {
        if (unset("--outcomes")) a.outcomes = value.get<std::string>();
      } else if (key == "runs") {
        if (unset("--runs")) a.runs = value.get<std::size_t>();
      } else if (key == "taus") {
        if (unset("--taus")) {
          std::string s;
          for (const auto& t : value) {
            s += (s.empty() ? "" : ",") + std::to_string(t.get<int>());
          }
          a.taus = s;
        }
      } else if (key == "modalities") {
        if (unset("--modalities")) {
          std::string s;
          for (const auto& m : value) {
            s += (s.empty() ? "" : ",") + m.get<std::string>();
          }
          a.modalities = s;
        }
      } else if (key == "gt_mode") {
        if (unset("--gt-mode")) a.gt_mode = value.get<std::string>();
      } else if (key == "termination") {
        if (unset("--termination")) a.termination = value.get<std::string>();
      } else if (key == "step_cap") {
        if (unset("--step-cap")) a.step_cap = value.get<std::size_t>();
      } else if (key == "refuse_duplicate_observations") {
        if (unset("--refuse-duplicates")) a.refuse_duplicates = value.get<bool>();
      } else if (key == "master_seed") {
        if (root.count("--seed") == 0) {
          g.seed = value.get<std::uint64_t>();
        }
      } else if (key == "workers") {
        if (root.count("--workers") == 0) {
          g.workers = value.get<unsigned>();
        }
      } else {
        ThrowInput("E_CONFIG", "unknown config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    ThrowInput("E_CONFIG", a.config + ": " + e.what());
  }
}

void PrintResultsTable(std::ostream& out, const ExperimentResults& r) {
  out << std::left << std::setw(16) << "modality" << std::right
      << std::setw(4) << "tau" << std::setw(7) << "runs" << std::setw(10)
      << "success%" << std::setw(8) << "ci95" << std::setw(11) << "exposures"
      << std::setw(10) << "length" << '\n';
  bool flagged = false;
  for (const auto& c : r.cells) {
    out << std::left << std::setw(16) << c.modality.Name() << std::right
        << std::setw(3) << c.tau.value() << (c.tau_flagged ? '*' : ' ')
        << std::setw(7) << c.stats.runs << std::setw(10)
        << Format("%.2f", c.stats.success_rate) << std::setw(8)
        << Format("%.2f", c.stats.success_ci95) << std::setw(11)
        << Format("%.2f", c.stats.avg_exposures) << std::setw(10)
        << Format("%.2f", c.stats.avg_path_length) << '\n';
    flagged = flagged || c.tau_flagged;
  }
  if (flagged) {
    out << "* tau=5 tolerates extreme danger; every mission is survivable\n";
  }
}

int Simulate(CLI::App& cmd, const CLI::App& root, SimulateArgs a, Globals g,
             std::ostream& out) {
  OverlayConfig(cmd, a, g, root);
  const EnvironmentGraph env =
      LoadEnvironment(a.env.empty() ? BundledSchool() : fs::path(a.env));
  ExperimentConfig config;
  config.runs = a.runs;
  if (config.runs < 1) ThrowInput("E_CONFIG", "runs must be >= 1");
  config.taus = ParseTaus(a.taus);
  config.modalities = ParseModalities(a.modalities);
  config.mission.gt_mode = ParseGroundTruthMode(a.gt_mode);
  config.mission.termination = ParseTermination(a.termination);
  if (a.step_cap > 0) config.mission.step_cap = a.step_cap;
  config.mission.refuse_duplicate_observations = a.refuse_duplicates;
  config.master_seed = g.seed;

  bool needs_vision = false, needs_language = false;
  for (const auto& m : config.modalities) {
    needs_vision = needs_vision || m.UsesVision();
    needs_language = needs_language || m.UsesLanguage();
  }
  if (needs_vision && a.vision.empty()) {
    ThrowInput("E_MATRIX_MISSING",
               "a vision modality is requested but --vision was not given");
  }
  if (needs_language && a.language.empty()) {
    ThrowInput("E_MATRIX_MISSING",
               "a language modality is requested but --language was not given");
  }
  const SensorModels models = LoadModels(a.vision, a.language);

  std::vector<MissionOutcome> outcomes;
  ExperimentOptions options{g.workers, a.outcomes.empty() ? nullptr : &outcomes};
  const ExperimentResults results = RunExperiment(env, config, models, options);

  std::ofstream csv(a.out);
  if (!csv) ThrowInput("E_IO", "cannot write " + a.out);
  WriteResultsCsv(csv, results);
  if (!a.outcomes.empty()) {
    std::ofstream oc(a.outcomes);
    if (!oc) ThrowInput("E_IO", "cannot write " + a.outcomes);
    WriteOutcomesCsv(oc, results, outcomes);
  }
  if (!g.quiet) {
    out << "# simulate master_seed=" << config.master_seed
        << " runs=" << config.runs << " gt_mode=" << ToString(config.mission.gt_mode)
        << " termination=" << ToString(config.mission.termination) << '\n';
    PrintResultsTable(out, results);
    out << "wrote " << a.out << '\n';
  }
  return 0;
}

// ---- plan ----

struct PlanArgs {
  std::string env;
  int tau = 3;
  std::string modality = "full-knowledge";
  std::string vision;
  std::string language;
  std::string gt_mode = "resample-per-event";
  std::string termination = "fail-fast";
  std::size_t step_cap = 0;
  bool refuse_duplicates = false;
  std::string trace;
  std::string plan_out;
};

int Plan(const PlanArgs& a, const Globals& g, std::ostream& out) {
  const EnvironmentGraph env =
      LoadEnvironment(a.env.empty() ? BundledSchool() : fs::path(a.env));
  MissionConfig config;
  config.tau = DangerLevel(a.tau);
  config.modality = SensingModality::Parse(a.modality);
  config.gt_mode = ParseGroundTruthMode(a.gt_mode);
  config.termination = ParseTermination(a.termination);
  if (a.step_cap > 0) config.step_cap = a.step_cap;
  config.refuse_duplicate_observations = a.refuse_duplicates;
  config.seed = g.seed;
  config.record_trace = true;
  const SensorModels models = LoadModels(a.vision, a.language);
  const MissionResult result = RunMission(env, config, models);

  if (!a.trace.empty()) {
    std::ofstream tf(a.trace);
    if (!tf) ThrowInput("E_IO", "cannot write " + a.trace);
    WriteTraceJsonl(tf, result.trace);
  }
  if (!a.plan_out.empty()) {
    std::ofstream pf(a.plan_out);
    if (!pf) ThrowInput("E_IO", "cannot write " + a.plan_out);
    const PlannedPath first =
        result.trace.steps.empty()
            ? PlannedPath{{env.start()}, 1.0}
            : result.trace.steps.front().plan;
    pf << ToJson(first).dump() << '\n';
  }
  if (g.quiet) return 0;

  const MissionOutcome& o = result.outcome;
  out << "# plan seed=" << config.seed << " tau=" << config.tau.value()
      << " modality=" << config.modality.Name()
      << " gt_mode=" << ToString(config.gt_mode)
      << " termination=" << ToString(config.termination) << '\n';
  out << std::setw(5) << "step" << std::setw(6) << "from" << std::setw(6)
      << "to" << std::setw(11) << "plan_surv" << std::setw(8) << "danger"
      << "  plan\n";
  std::size_t k = 0;
  for (const TraceStep& s : result.trace.steps) {
    std::string route;
    for (NodeId n : s.plan.nodes) {
      route += (route.empty() ? "" : " ") + std::to_string(n.value);
    }
    out << std::setw(5) << k++ << std::setw(6) << s.position.value
        << std::setw(6) << s.destination.value << std::setw(11)
        << Format("%.4f", s.plan.survival_estimate) << std::setw(7)
        << s.sampled_danger.value() << (s.exposure ? '!' : ' ') << "  "
        << route << '\n';
  }
  std::string path;
  for (NodeId n : o.path) path += (path.empty() ? "" : " ") + std::to_string(n.value);
  out << "path: " << path << '\n';
  out << "outcome: " << (o.success ? "success" : "failure")
      << " steps=" << o.steps << " exposures=" << o.exposures;
  if (o.planning_failed) out << " (no route to an exit)";
  if (o.step_cap_hit) out << " (step cap reached)";
  out << '\n';
  return 0;
}

// ---- estimate-likelihood ----

struct EstimateArgs {
  std::string records;
  std::size_t folds = 9;
  double smoothing = 1.0;
  std::string modality = "vision";
  std::string out = "likelihood.json";
};

int Estimate(const EstimateArgs& a, const Globals& g, std::ostream& out) {
  const std::vector<PredictionRecord> records = LoadPredictionCsv(a.records);
  const std::size_t n = records.size();
  const LikelihoodMatrix mean = EstimateLikelihoodKFold(
      records, a.folds, a.smoothing, ParseModalityTag(a.modality), g.seed);
  SaveLikelihood(mean, a.out);
  if (!g.quiet) {
    out << "# estimate-likelihood seed=" << g.seed << " folds=" << a.folds
        << " smoothing=" << a.smoothing << " records=" << n << '\n';
    out << "pred\\true";
    for (int j = 1; j <= kNumLevels; ++j) out << std::setw(8) << j;
    out << '\n';
    for (int i = 0; i < kNumLevels; ++i) {
      out << std::setw(9) << (i + 1);
      for (int j = 0; j < kNumLevels; ++j) {
        out << std::setw(8) << Format("%.4f", mean.table()[i][j]);
      }
      out << '\n';
    }
    out << "wrote " << a.out << '\n';
  }
  return 0;
}

// ---- eval-metrics ----

int EvalMetrics(const std::string& path, std::ostream& out) {
  const auto records = LoadPredictionCsv(path);
  if (records.empty()) ThrowInput("E_EMPTY", path + " has no records");
  const ClassifierMetrics m = ComputeMetrics(records);
  out << Format("%.1f", m.top1) << ' ' << Format("%.2f", m.rmse) << ' '
      << Format("%.1f", m.off_by_1) << '\n';
  return 0;
}

// ---- gen-env ----

struct GenArgs {
  std::size_t nodes = 54;
  double connectivity = 3.0;
  std::string regions = "0.4:safe;0.2:smoke;0.2:flood;0.2:fire";
  std::size_t exits = 2;
  std::string out;
};

const std::map<std::string, LevelArray>& RegionPresets() {
  static const std::map<std::string, LevelArray> presets = {
      {"safe", {0.92, 0.08, 0.0, 0.0, 0.0}},
      {"hall", {0.6, 0.3, 0.1, 0.0, 0.0}},
      {"smoke", {0.05, 0.25, 0.45, 0.2, 0.05}},
      {"debris", {0.1, 0.3, 0.35, 0.2, 0.05}},
      {"flood", {0.0, 0.05, 0.25, 0.45, 0.25}},
      {"fire", {0.0, 0.0, 0.05, 0.3, 0.65}},
  };
  return presets;
}

std::vector<DangerRegion> ParseRegions(const std::string& spec) {
  std::vector<DangerRegion> regions;
  for (const auto& entry : SplitList(spec, ';')) {
    const auto colon = entry.find(':');
    if (colon == std::string::npos) {
      ThrowInput("E_CONFIG", "region '" + entry + "' must be FRACTION:PMF");
    }
    DangerRegion r;
    try {
      r.fraction = std::stod(entry.substr(0, colon));
    } catch (const std::exception&) {
      ThrowInput("E_CONFIG", "bad region fraction in '" + entry + "'");
    }
    const std::string body = entry.substr(colon + 1);
    if (auto it = RegionPresets().find(body); it != RegionPresets().end()) {
      r.truth = DangerPmf(it->second);
      r.label = body;
    } else {
      const auto parts = SplitList(body, ',');
      if (parts.size() != kNumLevels) {
        ThrowInput("E_CONFIG", "region '" + entry +
                                   "' needs a preset name or 5 probabilities");
      }
      LevelArray p;
      try {
        for (int i = 0; i < kNumLevels; ++i) p[i] = std::stod(parts[i]);
      } catch (const std::exception&) {
        ThrowInput("E_CONFIG", "bad probability in region '" + entry + "'");
      }
      r.truth = DangerPmf(p);
    }
    regions.push_back(std::move(r));
  }
  return regions;
}

int GenEnv(const GenArgs& a, const Globals& g, std::ostream& out) {
  SyntheticEnvSpec spec;
  spec.nodes = a.nodes;
  spec.connectivity = a.connectivity;
  spec.regions = ParseRegions(a.regions);
  spec.exits = a.exits;
  spec.seed = g.seed;
  const EnvironmentGraph env = GenerateSynthetic(spec);
  SaveEnvironment(env, a.out);
  if (!g.quiet) {
    out << "# gen-env seed=" << g.seed << '\n'
        << "nodes=" << env.size() << " arcs=" << env.arcs().size()
        << " start=" << env.start().value << " exits=";
    for (std::size_t i = 0; i < env.exits().size(); ++i) {
      out << (i ? "," : "") << env.exits()[i].value;
    }
    out << "\nwrote " << a.out << '\n';
  }
  return 0;
}

void AddGlobals(CLI::App& app, Globals& g) {
  app.add_option("--seed", g.seed, "Seed for every random choice")
      ->capture_default_str();
  app.add_option("--workers", g.workers,
                 "Worker threads for simulate (results do not depend on it)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_flag("--quiet", g.quiet, "Suppress stdout reports");
}

}  // namespace

int ExitCodeFor(const std::exception& e) {
  if (const auto* he = dynamic_cast<const Error*>(&e)) {
    switch (he->kind()) {
      case ErrorKind::kInput:
      case ErrorKind::kPlanning:
      case ErrorKind::kDegenerateEvidence:
        return 1;
      case ErrorKind::kContract:
      case ErrorKind::kInternal:
        return 2;
    }
  }
  return 2;
}

int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Risk-aware escape planning and Monte Carlo mission simulation",
               "hazard-escape"};
  app.require_subcommand(1);
  Globals g;
  AddGlobals(app, g);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand(
      "simulate", "Run the Monte Carlo grid and write the results CSV");
  simulate->add_option("--env", sim.env,
                       "Environment JSON (default: bundled school54 asset)");
  simulate->add_option("--config", sim.config,
                       "JSON config file; flags override its values");
  simulate->add_option("--vision", sim.vision, "Vision likelihood matrix JSON");
  simulate->add_option("--language", sim.language,
                       "Language likelihood matrix JSON");
  simulate->add_option("--out", sim.out, "Results CSV path")->capture_default_str();
  simulate->add_option("--outcomes", sim.outcomes,
                       "Also write per-run outcomes to this CSV");
  simulate->add_option("--runs", sim.runs, "Missions per cell")->capture_default_str();
  simulate->add_option("--taus", sim.taus, "Comma-separated tolerance levels")
      ->capture_default_str();
  simulate->add_option("--modalities", sim.modalities,
                       "Comma-separated modalities (no-sensor, vision, "
                       "language-<m>, vl-<m>, full-knowledge)")
      ->capture_default_str();
  simulate->add_option("--gt-mode", sim.gt_mode,
                       "resample-per-event or fixed-latent")
      ->capture_default_str();
  simulate->add_option("--termination", sim.termination,
                       "fail-fast or count-exposures")
      ->capture_default_str();
  simulate->add_option("--step-cap", sim.step_cap,
                       "Steps before a mission fails (0: 10 x node count)")
      ->capture_default_str();
  simulate->add_flag("--refuse-duplicates", sim.refuse_duplicates,
                     "Freeze each node's belief after its first observation");

  PlanArgs plan;
  auto* plan_cmd = app.add_subcommand(
      "plan", "Run one traced mission and print it step by step");
  plan_cmd->add_option("--env", plan.env,
                       "Environment JSON (default: bundled school54 asset)");
  plan_cmd->add_option("--tau", plan.tau, "Tolerable danger level (1-5)")
      ->capture_default_str()
      ->check(CLI::Range(1, 5));
  plan_cmd->add_option("--modality", plan.modality, "Sensing modality")
      ->capture_default_str();
  plan_cmd->add_option("--vision", plan.vision, "Vision likelihood matrix JSON");
  plan_cmd->add_option("--language", plan.language,
                       "Language likelihood matrix JSON");
  plan_cmd->add_option("--gt-mode", plan.gt_mode,
                       "resample-per-event or fixed-latent")
      ->capture_default_str();
  plan_cmd->add_option("--termination", plan.termination,
                       "fail-fast or count-exposures")
      ->capture_default_str();
  plan_cmd->add_option("--step-cap", plan.step_cap,
                       "Steps before the mission fails (0: 10 x node count)")
      ->capture_default_str();
  plan_cmd->add_flag("--refuse-duplicates", plan.refuse_duplicates,
                     "Freeze each node's belief after its first observation");
  plan_cmd->add_option("--trace", plan.trace,
                       "Write the step trace as JSON lines");
  plan_cmd->add_option("--plan-out", plan.plan_out,
                       "Write the first planned path as JSON");

  EstimateArgs est;
  auto* estimate = app.add_subcommand(
      "estimate-likelihood",
      "Estimate a likelihood matrix as the mean over K folds");
  estimate->add_option("--records", est.records, "Prediction CSV (true,predicted)")
      ->required();
  estimate->add_option("--folds", est.folds, "Number of folds K")
      ->capture_default_str();
  estimate->add_option("--smoothing", est.smoothing, "Additive smoothing")
      ->capture_default_str();
  estimate->add_option("--modality", est.modality, "vision or language")
      ->capture_default_str();
  estimate->add_option("--out", est.out, "Output matrix JSON")
      ->capture_default_str();

  std::string metrics_records;
  auto* eval = app.add_subcommand(
      "eval-metrics", "Print top-1 (%), RMSE and off-by-1 (%) of predictions");
  eval->add_option("--records", metrics_records,
                   "Prediction CSV (true,predicted)")
      ->required();

  GenArgs gen;
  auto* gen_env = app.add_subcommand("gen-env",
                                     "Generate a synthetic environment JSON");
  gen_env->add_option("--nodes", gen.nodes, "Node count")->capture_default_str();
  gen_env->add_option("--connectivity", gen.connectivity, "Average out-degree")
      ->capture_default_str();
  gen_env->add_option("--regions", gen.regions,
                      "Semicolon-separated FRACTION:PMF regions; PMF is a "
                      "preset (safe, hall, smoke, debris, flood, fire) or 5 "
                      "comma-separated probabilities")
      ->capture_default_str();
  gen_env->add_option("--exits", gen.exits, "Exit count")->capture_default_str();
  gen_env->add_option("--out", gen.out, "Output environment JSON")->required();

  for (CLI::App* sub : {simulate, plan_cmd, estimate, eval, gen_env}) {
    sub->fallthrough();
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "E_USAGE: " << e.what() << '\n';
    return 1;
  }

  try {
    if (simulate->parsed()) return Simulate(*simulate, app, sim, g, out);
    if (plan_cmd->parsed()) return Plan(plan, g, out);
    if (estimate->parsed()) return Estimate(est, g, out);
    if (eval->parsed()) return EvalMetrics(metrics_records, out);
    if (gen_env->parsed()) return GenEnv(gen, g, out);
  } catch (const Error& e) {
    err << e.code() << ": " << e.what() << '\n';
    return ExitCodeFor(e);
  } catch (const std::exception& e) {
    err << "E_INTERNAL: " << e.what() << '\n';
    return ExitCodeFor(e);
  }
  err << "E_USAGE: no command given\n";
  return 1;
}

}  // namespace hazard::cli
