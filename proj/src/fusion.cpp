#include "hazard/fusion.hpp"

#include "hazard/error.hpp"
#include "hazard/rng.hpp"
#include "hazard/sensing.hpp"

namespace hazard {

DangerPmf Fuse(const DangerPmf& prior, const ObservationEvent& event,
               const LikelihoodMatrix& vision,
               const LikelihoodMatrix& language) {
  if (vision.tag() != ModalityTag::kVision ||
      language.tag() != ModalityTag::kLanguage) {
    ThrowContract("fuse expects a vision model and a language model");
  }
  if (event.empty()) return prior;

  LevelArray w = prior.probs();
  if (event.vision) {
    const LevelArray& row = vision.Row(*event.vision);
    for (int d = 0; d < kNumLevels; ++d) w[d] *= row[d];
  }
  for (const DangerLevel& y : event.words) {
    const LevelArray& row = language.Row(y);
    for (int d = 0; d < kNumLevels; ++d) w[d] *= row[d];
  }
  double total = 0.0;
  for (double v : w) total += v;
  if (!(total > 0.0)) {
    throw Error(ErrorKind::kDegenerateEvidence, "E_DEGENERATE_EVIDENCE",
                "observation at node " + std::to_string(event.node.value) +
                    " has zero likelihood under every danger level");
  }
  return DangerPmf::Normalized(w);
}

DangerPosterior Update(const DangerPosterior& prior,
                       const ObservationEvent& event,
                       const LikelihoodMatrix& vision,
                       const LikelihoodMatrix& language) {
  if (event.empty()) return prior;
  return {Fuse(prior.pmf, event, vision, language), prior.update_count + 1};
}

DangerLevel MapEstimate(const DangerPmf& posterior) {
  const LevelArray& p = posterior.probs();
  std::size_t best = 0;
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (p[i] >= p[best]) best = i;
  }
  return DangerLevel::FromIndex(best);
}

ClassifierMetrics SimulateFusedMetrics(std::span<const DangerLevel> truths,
                                       const LikelihoodMatrix& vision,
                                       const LikelihoodMatrix& language,
                                       std::size_t words_per_item,
                                       std::uint64_t seed) {
  if (truths.empty()) ThrowInput("E_EMPTY", "no items to score");
  Rng rng(seed);
  std::vector<PredictionRecord> records;
  records.reserve(truths.size());
  for (const DangerLevel& truth : truths) {
    ObservationEvent event;
    event.vision = SampleLevel(DangerPmf::Normalized(vision.Column(truth)), rng);
    const DangerPmf word_pmf = DangerPmf::Normalized(language.Column(truth));
    for (std::size_t k = 0; k < words_per_item; ++k) {
      event.words.push_back(SampleLevel(word_pmf, rng));
    }
    const DangerPmf posterior =
        Fuse(DangerPmf::Uniform(), event, vision, language);
    records.push_back({truth, MapEstimate(posterior)});
  }
  return ComputeMetrics(records);
}

}  // namespace hazard
