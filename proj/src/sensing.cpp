#include "hazard/sensing.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "hazard/error.hpp"

namespace hazard {
namespace {

int ParseWordCount(std::string_view digits, std::string_view whole) {
  int m = 0;
  const auto [ptr, ec] =
      std::from_chars(digits.data(), digits.data() + digits.size(), m);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || m < 1) {
    ThrowInput("E_MODALITY",
               "bad word count in modality '" + std::string(whole) + "'");
  }
  return m;
}

}  // namespace

SensingModality SensingModality::LanguageOnly(int words) {
  if (words < 1) ThrowInput("E_MODALITY", "word count must be >= 1");
  return SensingModality(Kind::kLanguageOnly, words);
}

SensingModality SensingModality::VisionLanguage(int words) {
  if (words < 1) ThrowInput("E_MODALITY", "word count must be >= 1");
  return SensingModality(Kind::kVisionLanguage, words);
}

SensingModality SensingModality::Parse(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (s == "no-sensor" || s == "none") return NoSensor();
  if (s == "vision") return VisionOnly();
  if (s == "full-knowledge" || s == "full") return FullKnowledge();
  const std::string_view sv(s);
  if (sv.starts_with("language-")) {
    return LanguageOnly(ParseWordCount(sv.substr(9), name));
  }
  if (sv.starts_with("vl-")) {
    return VisionLanguage(ParseWordCount(sv.substr(3), name));
  }
  ThrowInput("E_MODALITY",
             "unknown modality '" + std::string(name) +
                 "' (expected no-sensor, vision, language-<m>, vl-<m>, "
                 "full-knowledge)");
}

std::string SensingModality::Name() const {
  switch (kind_) {
    case Kind::kNoSensor:
      return "no-sensor";
    case Kind::kVisionOnly:
      return "vision";
    case Kind::kLanguageOnly:
      return "language-" + std::to_string(words_);
    case Kind::kVisionLanguage:
      return "vl-" + std::to_string(words_);
    case Kind::kFullKnowledge:
      return "full-knowledge";
  }
  return "?";
}

std::string_view ToString(GroundTruthMode mode) {
  return mode == GroundTruthMode::kFixedLatent ? "fixed-latent"
                                               : "resample-per-event";
}

GroundTruthMode ParseGroundTruthMode(std::string_view name) {
  if (name == "fixed-latent") return GroundTruthMode::kFixedLatent;
  if (name == "resample-per-event") return GroundTruthMode::kResamplePerEvent;
  ThrowInput("E_CONFIG", "unknown ground-truth mode '" + std::string(name) +
                             "' (expected fixed-latent|resample-per-event)");
}

void SensorModels::RequireFor(const SensingModality& modality) const {
  if (modality.UsesVision()) {
    if (!vision) {
      ThrowInput("E_MATRIX_MISSING",
                 "modality " + modality.Name() + " needs a vision likelihood");
    }
    if (vision->tag() != ModalityTag::kVision) {
      ThrowInput("E_MODALITY", "vision model is tagged 'language'");
    }
  }
  if (modality.UsesLanguage()) {
    if (!language) {
      ThrowInput("E_MATRIX_MISSING", "modality " + modality.Name() +
                                         " needs a language likelihood");
    }
    if (language->tag() != ModalityTag::kLanguage) {
      ThrowInput("E_MODALITY", "language model is tagged 'vision'");
    }
  }
}

DangerLevel SampleLevel(const DangerPmf& pmf, Rng& rng) {
  const double u = rng.Uniform();
  double acc = 0.0;
  const LevelArray& p = pmf.probs();
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    last_positive = i;
    acc += p[i];
    if (u < acc) return DangerLevel::FromIndex(i);
  }
  // Rounding left u above the accumulated mass.
  return DangerLevel::FromIndex(last_positive);
}

ObservationEvent ObserveNode(NodeId node, const DangerPmf& truth,
                             const SensingModality& modality,
                             const SensorModels& models, GroundTruthMode mode,
                             std::optional<DangerLevel> latent, Rng& rng) {
  if (mode == GroundTruthMode::kFixedLatent && !latent) {
    ThrowContract("fixed-latent observation requires the node's latent level");
  }
  ObservationEvent event{node, std::nullopt, {}};
  if (!modality.Senses()) return event;
  models.RequireFor(modality);

  const DangerLevel level =
      mode == GroundTruthMode::kFixedLatent ? *latent : SampleLevel(truth, rng);
  if (modality.UsesVision()) {
    event.vision =
        SampleLevel(DangerPmf::Normalized(models.vision->Column(level)), rng);
  }
  if (modality.UsesLanguage()) {
    const DangerPmf column = DangerPmf::Normalized(models.language->Column(level));
    event.words.reserve(static_cast<std::size_t>(modality.words()));
    for (int k = 0; k < modality.words(); ++k) {
      event.words.push_back(SampleLevel(column, rng));
    }
  }
  return event;
}

}  // namespace hazard
