#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hazard/danger.hpp"
#include "hazard/environment.hpp"

namespace hazard {

/// Classifier outputs gathered at one node: at most one vision label and
/// any number of language labels.
struct ObservationEvent {
  NodeId node;
  std::optional<DangerLevel> vision;
  std::vector<DangerLevel> words;

  bool empty() const noexcept { return !vision && words.empty(); }
};

struct DangerPosterior {
  DangerPmf pmf = DangerPmf::Uniform();
  std::size_t update_count = 0;
};

/// Bayes update under conditional independence of the labels given the
/// true danger:
///   posterior[d] ∝ l_V[y_V][d] · Π_k l_L[y_k][d] · prior[d].
/// An empty event returns the prior unchanged. Throws
/// E_DEGENERATE_EVIDENCE (ErrorKind::kDegenerateEvidence) when the
/// unnormalized posterior has no mass.
DangerPmf Fuse(const DangerPmf& prior, const ObservationEvent& event,
               const LikelihoodMatrix& vision,
               const LikelihoodMatrix& language);

// Fuse against the stored posterior; counts one update per non-empty event.
DangerPosterior Update(const DangerPosterior& prior,
                       const ObservationEvent& event,
                       const LikelihoodMatrix& vision,
                       const LikelihoodMatrix& language);

// Argmax with ties resolved toward the higher danger level.
DangerLevel MapEstimate(const DangerPmf& posterior);

/// Scores MAP decisions on simulated items. Each item draws a vision label
/// from column `truth` of `vision` and `words_per_item` labels from column
/// `truth` of `language`, fuses them against a uniform prior and compares
/// the MAP level to the truth.
ClassifierMetrics SimulateFusedMetrics(std::span<const DangerLevel> truths,
                                       const LikelihoodMatrix& vision,
                                       const LikelihoodMatrix& language,
                                       std::size_t words_per_item,
                                       std::uint64_t seed);

}  // namespace hazard
