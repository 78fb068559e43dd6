#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "hazard/danger.hpp"
#include "hazard/fusion.hpp"
#include "hazard/rng.hpp"

namespace hazard {

/// Sensing configuration of the team. `words` is the number of language
/// labels per observation and is only meaningful for the language kinds.
class SensingModality {
 public:
  enum class Kind { kNoSensor, kVisionOnly, kLanguageOnly, kVisionLanguage, kFullKnowledge };

  static SensingModality NoSensor() { return SensingModality(Kind::kNoSensor, 0); }
  static SensingModality VisionOnly() { return SensingModality(Kind::kVisionOnly, 0); }
  static SensingModality LanguageOnly(int words);
  static SensingModality VisionLanguage(int words);
  static SensingModality FullKnowledge() { return SensingModality(Kind::kFullKnowledge, 0); }

  // Accepts the canonical names produced by Name(): no-sensor, vision,
  // language-<m>, vl-<m>, full-knowledge (case-insensitive).
  static SensingModality Parse(std::string_view name);

  Kind kind() const noexcept { return kind_; }
  int words() const noexcept { return words_; }
  bool UsesVision() const noexcept {
    return kind_ == Kind::kVisionOnly || kind_ == Kind::kVisionLanguage;
  }
  bool UsesLanguage() const noexcept {
    return kind_ == Kind::kLanguageOnly || kind_ == Kind::kVisionLanguage;
  }
  bool Senses() const noexcept { return UsesVision() || UsesLanguage(); }

  std::string Name() const;

  bool operator==(const SensingModality&) const = default;

 private:
  SensingModality(Kind kind, int words) : kind_(kind), words_(words) {}

  Kind kind_;
  int words_;
};

enum class GroundTruthMode {
  kResamplePerEvent,  // every observation and traversal draws afresh
  kFixedLatent,       // one level per node per mission
};

std::string_view ToString(GroundTruthMode mode);
GroundTruthMode ParseGroundTruthMode(std::string_view name);

/// Sensor models available to a mission. A model may be absent when the
/// modality does not use it.
struct SensorModels {
  std::optional<LikelihoodMatrix> vision;
  std::optional<LikelihoodMatrix> language;

  // Throws E_MATRIX_MISSING if `modality` needs a model that is absent,
  // E_MODALITY if a model carries the wrong tag.
  void RequireFor(const SensingModality& modality) const;
};

// Inverse-CDF draw over levels 1..5.
DangerLevel SampleLevel(const DangerPmf& pmf, Rng& rng);

/// Emits the labels the team would receive at one node. The labels are
/// conditioned on one level d*: `latent` under FixedLatent, otherwise a
/// fresh draw from `truth`. Vision labels come from column d* of the vision
/// model, words are i.i.d. from column d* of the language model. NoSensor
/// and FullKnowledge yield an empty event without consuming randomness.
ObservationEvent ObserveNode(NodeId node, const DangerPmf& truth,
                             const SensingModality& modality,
                             const SensorModels& models, GroundTruthMode mode,
                             std::optional<DangerLevel> latent, Rng& rng);

}  // namespace hazard
