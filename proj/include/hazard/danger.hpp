#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace hazard {

inline constexpr int kNumLevels = 5;

/// Ordinal danger scale: 1 low, 2 moderate, 3 high, 4 very high, 5 extreme.
/// Also used for the tolerance level tau and for classifier predictions.
class DangerLevel {
 public:
  // Throws E_LEVEL_RANGE unless 1 <= value <= 5.
  explicit DangerLevel(int value);

  static DangerLevel FromIndex(std::size_t index) {
    return DangerLevel(static_cast<int>(index) + 1);
  }

  int value() const noexcept { return value_; }
  std::size_t index() const noexcept {
    return static_cast<std::size_t>(value_ - 1);
  }

  auto operator<=>(const DangerLevel&) const = default;

 private:
  int value_;
};

using LevelArray = std::array<double, kNumLevels>;

/// Probability mass over the five danger levels.
class DangerPmf {
 public:
  // Validates non-negativity and unit sum (1e-9); throws E_PMF otherwise.
  explicit DangerPmf(const LevelArray& p);

  static DangerPmf Uniform();
  static DangerPmf Delta(DangerLevel level);
  // Rescales a non-negative vector with positive sum to unit mass.
  static DangerPmf Normalized(const LevelArray& weights);

  double operator[](DangerLevel level) const noexcept {
    return p_[level.index()];
  }
  const LevelArray& probs() const noexcept { return p_; }
  double ExpectedLevel() const noexcept;

  bool operator==(const DangerPmf&) const = default;

 private:
  struct Unchecked {};
  DangerPmf(const LevelArray& p, Unchecked) : p_(p) {}

  LevelArray p_;
};

enum class ModalityTag { kVision, kLanguage };

std::string_view ToString(ModalityTag tag);
ModalityTag ParseModalityTag(std::string_view name);

/// Column-stochastic table: at(pred, truth) = p(prediction = pred | truth).
class LikelihoodMatrix {
 public:
  using Table = std::array<LevelArray, kNumLevels>;  // [pred][truth]

  // Validates non-negative entries and unit column sums (1e-9).
  LikelihoodMatrix(ModalityTag tag, const Table& table);

  static LikelihoodMatrix Identity(ModalityTag tag);
  static LikelihoodMatrix Uniform(ModalityTag tag);

  ModalityTag tag() const noexcept { return tag_; }
  double at(DangerLevel pred, DangerLevel truth) const noexcept {
    return l_[pred.index()][truth.index()];
  }
  const Table& table() const noexcept { return l_; }
  // p(. | truth) as a distribution over predictions.
  LevelArray Column(DangerLevel truth) const noexcept;
  // p(pred | .) as a function of the true level.
  const LevelArray& Row(DangerLevel pred) const noexcept {
    return l_[pred.index()];
  }

  bool operator==(const LikelihoodMatrix&) const = default;

 private:
  ModalityTag tag_;
  Table l_;
};

struct PredictionRecord {
  DangerLevel truth;
  DangerLevel predicted;
};

struct AnnotationRecord {
  std::string item_id;
  std::vector<DangerLevel> ratings;
  std::vector<std::string> keywords;
};

/// top1 and off_by_1 are percentages; rmse is in danger units.
struct ClassifierMetrics {
  double top1 = 0.0;
  double rmse = 0.0;
  double off_by_1 = 0.0;
};

DangerPmf PmfFromRatings(std::span<const DangerLevel> ratings);

// Most frequent rating; ties go to the higher (more dangerous) level.
DangerLevel ModeDanger(std::span<const DangerLevel> ratings);

// Inclusive lower CDF: sum of p[d] for d <= tau.
double CdfAt(const DangerPmf& pmf, DangerLevel tau);

ClassifierMetrics ComputeMetrics(std::span<const PredictionRecord> records);

/// Confusion-count estimate of p(pred | truth) with additive smoothing.
/// With smoothing == 0 a column with no records becomes uniform.
LikelihoodMatrix EstimateLikelihoodFold(std::span<const PredictionRecord> records,
                                        double smoothing,
                                        ModalityTag tag = ModalityTag::kVision);

// Entrywise mean over folds; all folds must share one modality tag.
LikelihoodMatrix MeanLikelihood(std::span<const LikelihoodMatrix> folds);

/// Shuffles the records with `seed`, cuts them into `folds` contiguous
/// folds, estimates one matrix per fold and returns their mean. Throws
/// E_TOO_FEW_RECORDS when there are fewer records than folds.
LikelihoodMatrix EstimateLikelihoodKFold(std::vector<PredictionRecord> records,
                                         std::size_t folds, double smoothing,
                                         ModalityTag tag, std::uint64_t seed);

/// Builds a sensor model with the given per-level accuracy on the diagonal.
/// The remaining mass in each column decays geometrically (ratio 1/e) with
/// distance from the true level. Rejects any diagonal value that is not
/// above 0.2 or that would not be the strict maximum of its column.
LikelihoodMatrix SynthLikelihood(const LevelArray& diag_accuracy,
                                 ModalityTag tag = ModalityTag::kVision);

// Smallest diagonal value in column `truth` that SynthLikelihood accepts
// (exclusive bound).
double SynthDiagonalFloor(DangerLevel truth);

// ---- file formats ----

nlohmann::json ToJson(const LikelihoodMatrix& m);
LikelihoodMatrix LikelihoodFromJson(const nlohmann::json& j);
LikelihoodMatrix LoadLikelihood(const std::filesystem::path& path);
void SaveLikelihood(const LikelihoodMatrix& m,
                    const std::filesystem::path& path);

// CSV with header `true,predicted`.
std::vector<PredictionRecord> ReadPredictionCsv(std::istream& in);
std::vector<PredictionRecord> LoadPredictionCsv(
    const std::filesystem::path& path);
void WritePredictionCsv(std::ostream& out,
                        std::span<const PredictionRecord> records);

// CSV with header `item_id,ratings,keywords`; ratings and keywords are
// `;`-separated.
std::vector<AnnotationRecord> ReadAnnotationCsv(std::istream& in);

}  // namespace hazard
