#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <string>
#include <vector>

#include "hazard/danger.hpp"
#include "hazard/environment.hpp"
#include "hazard/error.hpp"
#include "hazard/fusion.hpp"
#include "hazard/mission.hpp"
#include "hazard/montecarlo.hpp"
#include "hazard/planner.hpp"
#include "hazard/sensing.hpp"

namespace py = pybind11;
using namespace hazard;

namespace {

using Levels = std::vector<int>;

DangerPmf ToPmf(const std::vector<double>& p) {
  if (p.size() != kNumLevels) {
    throw Error(ErrorKind::kInput, "E_PMF", "a PMF needs exactly 5 entries");
  }
  LevelArray a;
  std::copy(p.begin(), p.end(), a.begin());
  return DangerPmf(a);
}

std::vector<double> FromPmf(const DangerPmf& p) {
  return {p.probs().begin(), p.probs().end()};
}

std::vector<DangerLevel> ToLevels(const Levels& v) {
  std::vector<DangerLevel> out;
  out.reserve(v.size());
  for (int x : v) out.emplace_back(x);
  return out;
}

std::vector<NodeId> ToIds(const std::vector<std::uint32_t>& v) {
  std::vector<NodeId> out;
  for (auto x : v) out.push_back(NodeId{x});
  return out;
}

std::vector<std::uint32_t> FromIds(const std::vector<NodeId>& v) {
  std::vector<std::uint32_t> out;
  for (NodeId x : v) out.push_back(x.value);
  return out;
}

py::dict PathDict(const PlannedPath& p) {
  py::dict d;
  d["nodes"] = FromIds(p.nodes);
  d["survival"] = p.survival_estimate;
  return d;
}

SensorModels Models(const std::optional<LikelihoodMatrix>& vision,
                    const std::optional<LikelihoodMatrix>& language) {
  return SensorModels{vision, language};
}

BeliefMap ToBeliefs(const EnvironmentGraph& env, const std::vector<std::vector<double>>& pmfs) {
  if (pmfs.empty()) return BeliefMap::Uniform(env);
  std::vector<DangerPosterior> post;
  for (const auto& p : pmfs) post.push_back({ToPmf(p), 0});
  return BeliefMap(std::move(post));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Danger fusion, survival planning and escape mission simulation";

  static py::exception<Error> hazard_error(m, "HazardError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(hazard_error, (e.code() + ": " + e.what()).c_str());
    }
  });

  m.attr("DEFAULT_MASTER_SEED") = kDefaultMasterSeed;

  // ---- danger model ----
  m.def("pmf_from_ratings", [](const Levels& r) { return FromPmf(PmfFromRatings(ToLevels(r))); },
        py::arg("ratings"), "Normalized rating histogram over levels 1..5.");
  m.def("mode_danger", [](const Levels& r) { return ModeDanger(ToLevels(r)).value(); },
        py::arg("ratings"));
  m.def("cdf_at", [](const std::vector<double>& p, int tau) {
    return CdfAt(ToPmf(p), DangerLevel(tau));
  }, py::arg("pmf"), py::arg("tau"));
  m.def("compute_metrics", [](const Levels& truth, const Levels& predicted) {
    if (truth.size() != predicted.size()) {
      throw Error(ErrorKind::kInput, "E_SHAPE", "truth and predicted differ in length");
    }
    std::vector<PredictionRecord> r;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      r.push_back({DangerLevel(truth[i]), DangerLevel(predicted[i])});
    }
    const auto mt = ComputeMetrics(r);
    return py::make_tuple(mt.top1, mt.rmse, mt.off_by_1);
  }, py::arg("truth"), py::arg("predicted"),
        "Returns (top-1 %, RMSE, off-by-1 %).");

  py::class_<LikelihoodMatrix>(m, "LikelihoodMatrix")
      .def(py::init([](const std::vector<std::vector<double>>& t, const std::string& modality) {
             if (t.size() != kNumLevels) {
               throw Error(ErrorKind::kInput, "E_MATRIX", "need 5 rows");
             }
             LikelihoodMatrix::Table table;
             for (int i = 0; i < kNumLevels; ++i) {
               if (t[i].size() != kNumLevels) {
                 throw Error(ErrorKind::kInput, "E_MATRIX", "need 5 columns");
               }
               std::copy(t[i].begin(), t[i].end(), table[i].begin());
             }
             return LikelihoodMatrix(ParseModalityTag(modality), table);
           }),
           py::arg("table"), py::arg("modality") = "vision",
           "table[pred-1][truth-1] = p(pred | truth); columns sum to 1.")
      .def_static("identity", [](const std::string& mod) {
        return LikelihoodMatrix::Identity(ParseModalityTag(mod));
      }, py::arg("modality") = "vision")
      .def_static("uniform", [](const std::string& mod) {
        return LikelihoodMatrix::Uniform(ParseModalityTag(mod));
      }, py::arg("modality") = "vision")
      .def_static("synthetic", [](const std::vector<double>& diag, const std::string& mod) {
        if (diag.size() != kNumLevels) {
          throw Error(ErrorKind::kInput, "E_SYNTH", "need 5 diagonal values");
        }
        LevelArray d;
        std::copy(diag.begin(), diag.end(), d.begin());
        return SynthLikelihood(d, ParseModalityTag(mod));
      }, py::arg("diagonal"), py::arg("modality") = "vision")
      .def_static("load", &LoadLikelihood, py::arg("path"))
      .def("save", [](const LikelihoodMatrix& lm, const std::filesystem::path& p) {
        SaveLikelihood(lm, p);
      }, py::arg("path"))
      .def_property_readonly("modality", [](const LikelihoodMatrix& lm) {
        return std::string(ToString(lm.tag()));
      })
      .def_property_readonly("table", [](const LikelihoodMatrix& lm) {
        std::vector<std::vector<double>> t;
        for (const auto& row : lm.table()) t.emplace_back(row.begin(), row.end());
        return t;
      })
      .def("__eq__", [](const LikelihoodMatrix& a, const LikelihoodMatrix& b) { return a == b; });

  m.def("estimate_likelihood", [](const Levels& truth, const Levels& predicted,
                                  std::size_t folds, double smoothing,
                                  const std::string& modality, std::uint64_t seed) {
    if (truth.size() != predicted.size()) {
      throw Error(ErrorKind::kInput, "E_SHAPE", "truth and predicted differ in length");
    }
    std::vector<PredictionRecord> r;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      r.push_back({DangerLevel(truth[i]), DangerLevel(predicted[i])});
    }
    return EstimateLikelihoodKFold(std::move(r), folds, smoothing,
                                   ParseModalityTag(modality), seed);
  }, py::arg("truth"), py::arg("predicted"), py::arg("folds") = 9,
        py::arg("smoothing") = 1.0, py::arg("modality") = "vision",
        py::arg("seed") = kDefaultMasterSeed,
        "Mean of per-fold confusion estimates after a seeded shuffle.");

  // ---- fusion ----
  m.def("fuse", [](const std::vector<double>& prior, std::optional<int> vision,
                   const Levels& words, const LikelihoodMatrix& lv,
                   const LikelihoodMatrix& ll) {
    ObservationEvent e{NodeId{0}, std::nullopt, ToLevels(words)};
    if (vision) e.vision = DangerLevel(*vision);
    return FromPmf(Fuse(ToPmf(prior), e, lv, ll));
  }, py::arg("prior"), py::arg("vision"), py::arg("words"), py::arg("vision_model"),
        py::arg("language_model"));
  m.def("map_estimate", [](const std::vector<double>& p) {
    return MapEstimate(ToPmf(p)).value();
  }, py::arg("posterior"));

  // ---- environment ----
  py::class_<EnvironmentGraph>(m, "EnvironmentGraph")
      .def_static("load", &LoadEnvironment, py::arg("path"))
      .def_static("from_json", [](const std::string& text) {
        try {
          return EnvironmentFromJson(nlohmann::json::parse(text));
        } catch (const nlohmann::json::exception& e) {
          throw Error(ErrorKind::kInput, "E_PARSE", e.what());
        }
      }, py::arg("text"))
      .def("to_json", [](const EnvironmentGraph& g) { return ToJson(g).dump(); })
      .def("save", [](const EnvironmentGraph& g, const std::filesystem::path& p) {
        SaveEnvironment(g, p);
      }, py::arg("path"))
      .def("__len__", &EnvironmentGraph::size)
      .def_property_readonly("nodes", [](const EnvironmentGraph& g) {
        std::vector<std::uint32_t> ids;
        for (const auto& n : g.nodes()) ids.push_back(n.id.value);
        return ids;
      })
      .def_property_readonly("arcs", [](const EnvironmentGraph& g) {
        std::vector<std::pair<std::uint32_t, std::uint32_t>> a;
        for (const Arc& arc : g.arcs()) a.emplace_back(arc.from.value, arc.to.value);
        return a;
      })
      .def_property_readonly("start", [](const EnvironmentGraph& g) { return g.start().value; })
      .def_property_readonly("exits", [](const EnvironmentGraph& g) { return FromIds(g.exits()); })
      .def("truth", [](const EnvironmentGraph& g, std::uint32_t id) {
        return FromPmf(g.NodeAt(g.IndexOf(NodeId{id})).truth);
      }, py::arg("node"))
      .def("label", [](const EnvironmentGraph& g, std::uint32_t id) {
        return g.NodeAt(g.IndexOf(NodeId{id})).label;
      }, py::arg("node"))
      .def("neighbors", [](const EnvironmentGraph& g, std::uint32_t id) {
        return FromIds(g.Neighbors(NodeId{id}));
      }, py::arg("node"))
      .def("__eq__", [](const EnvironmentGraph& a, const EnvironmentGraph& b) { return a == b; });

  m.def("generate_synthetic",
        [](std::size_t nodes, double connectivity,
           const std::vector<std::tuple<double, std::vector<double>, std::string>>& regions,
           std::size_t exits, std::uint64_t seed) {
          SyntheticEnvSpec s;
          s.nodes = nodes;
          s.connectivity = connectivity;
          s.exits = exits;
          s.seed = seed;
          for (const auto& [f, pmf, label] : regions) s.regions.push_back({f, ToPmf(pmf), label});
          return GenerateSynthetic(s);
        },
        py::arg("nodes"), py::arg("connectivity"), py::arg("regions"), py::arg("exits") = 2,
        py::arg("seed") = 0, "regions: list of (fraction, pmf, label).");

  // ---- planner ----
  m.def("safest_path",
        [](const EnvironmentGraph& g, const std::vector<std::vector<double>>& beliefs, int tau,
           std::optional<std::uint32_t> from, std::optional<std::vector<std::uint32_t>> exits) {
          const BeliefMap b = ToBeliefs(g, beliefs);
          const auto goal = exits ? ToIds(*exits) : g.exits();
          return PathDict(SafestPath(g, b, DangerLevel(tau), from ? NodeId{*from} : g.start(), goal));
        },
        py::arg("env"), py::arg("beliefs") = std::vector<std::vector<double>>{},
        py::arg("tau") = 3, py::arg("start") = py::none(), py::arg("exits") = py::none(),
        "Beliefs are PMFs in ascending node-id order; empty means uniform.");
  m.def("path_survival",
        [](const EnvironmentGraph& g, const std::vector<std::vector<double>>& beliefs,
           const std::vector<std::uint32_t>& path, int tau) {
          return PathSurvival(g, ToBeliefs(g, beliefs), ToIds(path), DangerLevel(tau));
        },
        py::arg("env"), py::arg("beliefs"), py::arg("path"), py::arg("tau"));
  m.def("full_knowledge_reference", [](const EnvironmentGraph& g, int tau) {
    return PathDict(FullKnowledgeReference(g, DangerLevel(tau)));
  }, py::arg("env"), py::arg("tau"));

  // ---- mission ----
  m.def("run_mission",
        [](const EnvironmentGraph& g, int tau, const std::string& modality, std::uint64_t seed,
           const std::string& gt_mode, const std::string& termination,
           std::optional<LikelihoodMatrix> vision, std::optional<LikelihoodMatrix> language,
           std::optional<std::size_t> step_cap) {
          MissionConfig c;
          c.tau = DangerLevel(tau);
          c.modality = SensingModality::Parse(modality);
          c.gt_mode = ParseGroundTruthMode(gt_mode);
          c.termination = ParseTermination(termination);
          c.step_cap = step_cap;
          c.seed = seed;
          const auto o = RunMission(g, c, Models(vision, language)).outcome;
          py::dict d;
          d["success"] = o.success;
          d["path"] = FromIds(o.path);
          d["steps"] = o.steps;
          d["exposures"] = o.exposures;
          d["planning_failed"] = o.planning_failed;
          d["step_cap_hit"] = o.step_cap_hit;
          return d;
        },
        py::arg("env"), py::arg("tau") = 3, py::arg("modality") = "no-sensor",
        py::arg("seed") = 0, py::arg("gt_mode") = "resample-per-event",
        py::arg("termination") = "fail-fast", py::arg("vision") = py::none(),
        py::arg("language") = py::none(), py::arg("step_cap") = py::none());

  // ---- monte carlo ----
  m.def("run_experiment",
        [](const EnvironmentGraph& g, std::size_t runs, const Levels& taus,
           std::optional<std::vector<std::string>> modalities,
           std::optional<LikelihoodMatrix> vision, std::optional<LikelihoodMatrix> language,
           std::uint64_t master_seed, const std::string& gt_mode, const std::string& termination,
           unsigned workers) {
          ExperimentConfig c;
          c.runs = runs;
          c.taus = ToLevels(taus);
          if (modalities) {
            for (const auto& name : *modalities) c.modalities.push_back(SensingModality::Parse(name));
          } else {
            c.modalities = DefaultModalities();
          }
          c.mission.gt_mode = ParseGroundTruthMode(gt_mode);
          c.mission.termination = ParseTermination(termination);
          c.master_seed = master_seed;
          ExperimentOptions opt;
          opt.workers = workers;
          const auto models = Models(vision, language);
          ExperimentResults r;
          {
            py::gil_scoped_release release;
            r = RunExperiment(g, c, models, opt);
          }
          py::list rows;
          for (const auto& cell : r.cells) {
            py::dict d;
            d["modality"] = cell.modality.Name();
            d["tau"] = cell.tau.value();
            d["runs"] = cell.stats.runs;
            d["success_rate"] = cell.stats.success_rate;
            d["success_ci95"] = cell.stats.success_ci95;
            d["avg_exposures"] = cell.stats.avg_exposures;
            d["avg_path_length"] = cell.stats.avg_path_length;
            d["tau_flagged"] = cell.tau_flagged;
            rows.append(d);
          }
          return rows;
        },
        py::arg("env"), py::arg("runs") = 1000, py::arg("taus") = Levels{1, 2, 3, 4},
        py::arg("modalities") = py::none(), py::arg("vision") = py::none(),
        py::arg("language") = py::none(), py::arg("master_seed") = kDefaultMasterSeed,
        py::arg("gt_mode") = "resample-per-event", py::arg("termination") = "fail-fast",
        py::arg("workers") = 1,
        "One dict per (modality, tau) cell, modality order then tau ascending.");
}
