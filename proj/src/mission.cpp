#include "hazard/mission.hpp"

#include <ostream>

#include "hazard/error.hpp"
#include "hazard/rng.hpp"

namespace hazard {
namespace {

const LikelihoodMatrix& UniformVision() {
  static const LikelihoodMatrix m = LikelihoodMatrix::Uniform(ModalityTag::kVision);
  return m;
}

const LikelihoodMatrix& UniformLanguage() {
  static const LikelihoodMatrix m =
      LikelihoodMatrix::Uniform(ModalityTag::kLanguage);
  return m;
}

nlohmann::json ToJson(const ObservationEvent& e) {
  nlohmann::json words = nlohmann::json::array();
  for (const auto& w : e.words) words.push_back(w.value());
  return {{"node", e.node.value},
          {"vision", e.vision ? nlohmann::json(e.vision->value())
                              : nlohmann::json(nullptr)},
          {"words", std::move(words)}};
}

}  // namespace

std::string_view ToString(Termination t) {
  return t == Termination::kFailFast ? "fail-fast" : "count-exposures";
}

Termination ParseTermination(std::string_view name) {
  if (name == "fail-fast") return Termination::kFailFast;
  if (name == "count-exposures") return Termination::kCountExposures;
  ThrowInput("E_CONFIG", "unknown termination '" + std::string(name) +
                             "' (expected fail-fast|count-exposures)");
}

std::size_t DefaultStepCap(const EnvironmentGraph& env) {
  return 10 * env.size();
}

PlannedPath FullKnowledgeReference(const EnvironmentGraph& env,
                                   DangerLevel tau) {
  return SafestPath(env, BeliefMap::FromTruth(env), tau, env.start(),
                    env.exits());
}

MissionResult RunMission(const EnvironmentGraph& env,
                         const MissionConfig& config,
                         const SensorModels& models) {
  const SensingModality& modality = config.modality;
  models.RequireFor(modality);
  const std::size_t step_cap = config.step_cap.value_or(DefaultStepCap(env));
  if (step_cap < 1) ThrowInput("E_CONFIG", "step_cap must be >= 1");
  const bool full_knowledge =
      modality.kind() == SensingModality::Kind::kFullKnowledge;

  Rng sensor_rng(DeriveSeed({config.seed, 1}));
  Rng world_rng(DeriveSeed({config.world_seed.value_or(config.seed), 2}));
  const LikelihoodMatrix& vision =
      models.vision && modality.UsesVision() ? *models.vision : UniformVision();
  const LikelihoodMatrix& language = models.language && modality.UsesLanguage()
                                         ? *models.language
                                         : UniformLanguage();

  std::vector<DangerLevel> latent;
  if (config.gt_mode == GroundTruthMode::kFixedLatent) {
    latent.reserve(env.size());
    for (const auto& node : env.nodes()) {
      latent.push_back(SampleLevel(node.truth, world_rng));
    }
  }
  auto latent_at = [&](std::size_t i) -> std::optional<DangerLevel> {
    if (latent.empty()) return std::nullopt;
    return latent[i];
  };

  BeliefMap beliefs =
      full_knowledge ? BeliefMap::FromTruth(env) : BeliefMap::Uniform(env);
  std::vector<bool> goal(env.size(), false);
  for (NodeId e : env.exits()) goal[env.IndexOf(e)] = true;

  MissionResult result;
  MissionOutcome& out = result.outcome;
  std::size_t pos = env.IndexOf(env.start());
  out.path.push_back(env.start());

  std::vector<std::size_t> reference;
  if (full_knowledge) {
    try {
      reference = detail::SafestRoute(
          env, detail::SurvivalByIndex(beliefs, config.tau), pos, goal);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kPlanning) throw;
      out.planning_failed = true;
      return result;
    }
  }

  while (true) {
    if (goal[pos]) {
      out.success = true;
      break;
    }
    if (out.steps >= step_cap) {
      out.step_cap_hit = true;
      break;
    }

    TraceStep step{env.IdAt(pos), {}, {}, {}, env.IdAt(pos), DangerLevel(1), false};
    std::vector<std::size_t> route;
    if (full_knowledge) {
      route.assign(reference.begin() + static_cast<std::ptrdiff_t>(out.steps),
                   reference.end());
    } else {
      if (modality.Senses()) {
        auto observe = [&](std::size_t i) {
          const DangerPosterior& prior = beliefs.at(i);
          if (config.refuse_duplicate_observations && prior.update_count > 0) {
            return;
          }
          const auto& node = env.NodeAt(i);
          ObservationEvent event =
              ObserveNode(node.id, node.truth, modality, models, config.gt_mode,
                          latent_at(i), sensor_rng);
          try {
            beliefs.Set(i, Update(prior, event, vision, language));
          } catch (const Error& e) {
            if (e.kind() != ErrorKind::kDegenerateEvidence) throw;
            ++out.degenerate_updates;
          }
          if (config.record_trace) {
            step.observations.push_back(std::move(event));
            step.beliefs.emplace_back(node.id, beliefs.at(i).pmf);
          }
        };
        observe(pos);
        for (std::size_t v : env.Successors(pos)) observe(v);
      }
      try {
        route = detail::SafestRoute(
            env, detail::SurvivalByIndex(beliefs, config.tau), pos, goal);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::kPlanning) throw;
        out.planning_failed = true;
        break;
      }
    }

    const std::size_t next = route.at(1);
    if (config.record_trace) {
      for (std::size_t v : route) step.plan.nodes.push_back(env.IdAt(v));
      step.plan.survival_estimate =
          PathSurvival(env, beliefs, step.plan.nodes, config.tau);
    }
    pos = next;
    ++out.steps;
    out.path.push_back(env.IdAt(pos));

    const DangerLevel arrived = latent.empty()
                                    ? SampleLevel(env.NodeAt(pos).truth, world_rng)
                                    : latent[pos];
    const bool exposure = arrived > config.tau;
    if (config.record_trace) {
      step.destination = env.IdAt(pos);
      step.sampled_danger = arrived;
      step.exposure = exposure;
      result.trace.steps.push_back(std::move(step));
    }
    if (exposure) {
      ++out.exposures;
      if (config.termination == Termination::kFailFast) break;
    }
  }
  return result;
}

nlohmann::json ToJson(const PlannedPath& path) {
  nlohmann::json nodes = nlohmann::json::array();
  for (NodeId n : path.nodes) nodes.push_back(n.value);
  return {{"nodes", std::move(nodes)}, {"survival", path.survival_estimate}};
}

void WriteTraceJsonl(std::ostream& out, const MissionTrace& trace) {
  std::size_t index = 0;
  for (const TraceStep& s : trace.steps) {
    nlohmann::json obs = nlohmann::json::array();
    for (const auto& e : s.observations) obs.push_back(ToJson(e));
    nlohmann::json beliefs = nlohmann::json::array();
    for (const auto& [id, pmf] : s.beliefs) {
      beliefs.push_back({{"node", id.value}, {"pmf", pmf.probs()}});
    }
    const nlohmann::json line = {{"step", index++},
                                 {"position", s.position.value},
                                 {"observations", std::move(obs)},
                                 {"beliefs", std::move(beliefs)},
                                 {"plan", ToJson(s.plan)},
                                 {"destination", s.destination.value},
                                 {"sampled_danger", s.sampled_danger.value()},
                                 {"exposure", s.exposure}};
    out << line.dump() << '\n';
  }
}

}  // namespace hazard
