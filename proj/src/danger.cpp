#include "hazard/danger.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "hazard/error.hpp"
#include "hazard/rng.hpp"

namespace hazard {
namespace {

constexpr double kMassTolerance = 1e-9;

std::string Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> Split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t begin = 0;
  while (true) {
    const auto pos = s.find(sep, begin);
    out.push_back(Trim(s.substr(begin, pos - begin)));
    if (pos == std::string_view::npos) break;
    begin = pos + 1;
  }
  return out;
}

int ParseInt(const std::string& field, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(field, &used);
    if (used != field.size()) throw std::invalid_argument(field);
    return v;
  } catch (const std::exception&) {
    ThrowInput("E_CSV", "line " + std::to_string(line_no) +
                            ": not an integer: '" + field + "'");
  }
}

DangerLevel ParseLevel(const std::string& field, std::size_t line_no) {
  const int v = ParseInt(field, line_no);
  if (v < 1 || v > kNumLevels) {
    ThrowInput("E_CSV", "line " + std::to_string(line_no) +
                            ": danger level out of range: " + field);
  }
  return DangerLevel(v);
}

std::array<std::size_t, kNumLevels> CountLevels(
    std::span<const DangerLevel> ratings) {
  std::array<std::size_t, kNumLevels> counts{};
  for (const DangerLevel& r : ratings) ++counts[r.index()];
  return counts;
}

}  // namespace

DangerLevel::DangerLevel(int value) : value_(value) {
  if (value < 1 || value > kNumLevels) {
    ThrowInput("E_LEVEL_RANGE",
               "danger level must be in 1..5, got " + std::to_string(value));
  }
}

DangerPmf::DangerPmf(const LevelArray& p) : p_(p) {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      ThrowInput("E_PMF", "probability entries must be finite and >= 0");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kMassTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "probabilities must sum to 1, got " << sum;
    ThrowInput("E_PMF", msg.str());
  }
}

DangerPmf DangerPmf::Uniform() {
  LevelArray p;
  p.fill(1.0 / kNumLevels);
  return DangerPmf(p, Unchecked{});
}

DangerPmf DangerPmf::Delta(DangerLevel level) {
  LevelArray p{};
  p[level.index()] = 1.0;
  return DangerPmf(p, Unchecked{});
}

DangerPmf DangerPmf::Normalized(const LevelArray& weights) {
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      ThrowInput("E_PMF", "weights must be finite and >= 0");
    }
    sum += w;
  }
  if (!(sum > 0.0)) ThrowInput("E_PMF", "weights have zero total mass");
  LevelArray p;
  for (int i = 0; i < kNumLevels; ++i) p[i] = weights[i] / sum;
  return DangerPmf(p, Unchecked{});
}

double DangerPmf::ExpectedLevel() const noexcept {
  double e = 0.0;
  for (int i = 0; i < kNumLevels; ++i) e += (i + 1) * p_[i];
  return e;
}

std::string_view ToString(ModalityTag tag) {
  return tag == ModalityTag::kVision ? "vision" : "language";
}

ModalityTag ParseModalityTag(std::string_view name) {
  if (name == "vision") return ModalityTag::kVision;
  if (name == "language") return ModalityTag::kLanguage;
  ThrowInput("E_MODALITY", "unknown modality tag '" + std::string(name) +
                               "' (expected vision|language)");
}

LikelihoodMatrix::LikelihoodMatrix(ModalityTag tag, const Table& table)
    : tag_(tag), l_(table) {
  for (int j = 0; j < kNumLevels; ++j) {
    double sum = 0.0;
    for (int i = 0; i < kNumLevels; ++i) {
      const double v = l_[i][j];
      if (!(v >= 0.0) || !std::isfinite(v)) {
        ThrowInput("E_MATRIX", "likelihood entries must be finite and >= 0");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > kMassTolerance) {
      ThrowInput("E_MATRIX", "likelihood column " + std::to_string(j + 1) +
                                 " does not sum to 1");
    }
  }
}

LikelihoodMatrix LikelihoodMatrix::Identity(ModalityTag tag) {
  Table t{};
  for (int i = 0; i < kNumLevels; ++i) t[i][i] = 1.0;
  return LikelihoodMatrix(tag, t);
}

LikelihoodMatrix LikelihoodMatrix::Uniform(ModalityTag tag) {
  Table t;
  for (auto& row : t) row.fill(1.0 / kNumLevels);
  return LikelihoodMatrix(tag, t);
}

LevelArray LikelihoodMatrix::Column(DangerLevel truth) const noexcept {
  LevelArray c;
  for (int i = 0; i < kNumLevels; ++i) c[i] = l_[i][truth.index()];
  return c;
}

DangerPmf PmfFromRatings(std::span<const DangerLevel> ratings) {
  if (ratings.empty()) ThrowInput("E_EMPTY", "ratings list is empty");
  const auto counts = CountLevels(ratings);
  LevelArray p;
  const double n = static_cast<double>(ratings.size());
  for (int i = 0; i < kNumLevels; ++i) p[i] = counts[i] / n;
  return DangerPmf(p);
}

DangerLevel ModeDanger(std::span<const DangerLevel> ratings) {
  if (ratings.empty()) ThrowInput("E_EMPTY", "ratings list is empty");
  const auto counts = CountLevels(ratings);
  std::size_t best = 0;
  for (std::size_t i = 1; i < counts.size(); ++i) {
    if (counts[i] >= counts[best]) best = i;
  }
  return DangerLevel::FromIndex(best);
}

double CdfAt(const DangerPmf& pmf, DangerLevel tau) {
  if (tau.value() == kNumLevels) return 1.0;
  double acc = 0.0;
  for (std::size_t i = 0; i <= tau.index(); ++i) acc += pmf.probs()[i];
  return std::min(acc, 1.0);
}

ClassifierMetrics ComputeMetrics(std::span<const PredictionRecord> records) {
  if (records.empty()) ThrowInput("E_EMPTY", "no prediction records");
  std::size_t hits = 0;
  std::size_t near = 0;
  double sq = 0.0;
  for (const auto& r : records) {
    const int diff = r.predicted.value() - r.truth.value();
    hits += diff == 0;
    near += std::abs(diff) <= 1;
    sq += static_cast<double>(diff * diff);
  }
  const double n = static_cast<double>(records.size());
  return {100.0 * hits / n, std::sqrt(sq / n), 100.0 * near / n};
}

LikelihoodMatrix EstimateLikelihoodFold(std::span<const PredictionRecord> records,
                                        double smoothing, ModalityTag tag) {
  if (records.empty()) ThrowInput("E_EMPTY", "no prediction records");
  if (!(smoothing >= 0.0) || !std::isfinite(smoothing)) {
    ThrowInput("E_SMOOTHING", "smoothing must be a finite value >= 0");
  }
  std::array<std::array<double, kNumLevels>, kNumLevels> counts{};
  std::array<double, kNumLevels> totals{};
  for (const auto& r : records) {
    counts[r.predicted.index()][r.truth.index()] += 1.0;
    totals[r.truth.index()] += 1.0;
  }
  LikelihoodMatrix::Table t;
  for (int j = 0; j < kNumLevels; ++j) {
    const double denom = totals[j] + kNumLevels * smoothing;
    for (int i = 0; i < kNumLevels; ++i) {
      t[i][j] = denom > 0.0 ? (counts[i][j] + smoothing) / denom
                            : 1.0 / kNumLevels;
    }
  }
  return LikelihoodMatrix(tag, t);
}

LikelihoodMatrix MeanLikelihood(std::span<const LikelihoodMatrix> folds) {
  if (folds.empty()) ThrowInput("E_EMPTY", "no likelihood folds to average");
  const ModalityTag tag = folds.front().tag();
  LikelihoodMatrix::Table sum{};
  for (const auto& f : folds) {
    if (f.tag() != tag) {
      ThrowInput("E_MODALITY", "cannot average folds of different modalities");
    }
    for (int i = 0; i < kNumLevels; ++i) {
      for (int j = 0; j < kNumLevels; ++j) sum[i][j] += f.table()[i][j];
    }
  }
  const double k = static_cast<double>(folds.size());
  for (auto& row : sum) {
    for (double& v : row) v /= k;
  }
  return LikelihoodMatrix(tag, sum);
}

LikelihoodMatrix EstimateLikelihoodKFold(std::vector<PredictionRecord> records,
                                         std::size_t folds, double smoothing,
                                         ModalityTag tag, std::uint64_t seed) {
  if (folds < 1) ThrowInput("E_CONFIG", "folds must be >= 1");
  if (records.size() < folds) {
    ThrowInput("E_TOO_FEW_RECORDS",
               std::to_string(records.size()) + " records cannot fill " +
                   std::to_string(folds) + " folds");
  }
  Rng rng(seed);
  for (std::size_t i = records.size(); i > 1; --i) {
    std::swap(records[i - 1], records[rng.Below(i)]);
  }
  const std::size_t n = records.size();
  const std::span<const PredictionRecord> all(records);
  std::vector<LikelihoodMatrix> estimates;
  estimates.reserve(folds);
  for (std::size_t k = 0; k < folds; ++k) {
    const std::size_t begin = k * n / folds;
    const std::size_t end = (k + 1) * n / folds;
    estimates.push_back(
        EstimateLikelihoodFold(all.subspan(begin, end - begin), smoothing, tag));
  }
  return MeanLikelihood(estimates);
}

namespace {

// Off-diagonal weights for column j, not yet scaled by (1 - diag).
LevelArray DecayWeights(int j) {
  LevelArray w{};
  double z = 0.0;
  for (int i = 0; i < kNumLevels; ++i) {
    if (i == j) continue;
    w[i] = std::exp(-std::abs(i - j));
    z += w[i];
  }
  for (double& v : w) v /= z;
  return w;
}

}  // namespace

double SynthDiagonalFloor(DangerLevel truth) {
  const LevelArray w = DecayWeights(static_cast<int>(truth.index()));
  const double r = *std::max_element(w.begin(), w.end());
  // diag > (1 - diag) * r  <=>  diag > r / (1 + r)
  return std::max(0.2, r / (1.0 + r));
}

LikelihoodMatrix SynthLikelihood(const LevelArray& diag_accuracy,
                                 ModalityTag tag) {
  LikelihoodMatrix::Table t{};
  for (int j = 0; j < kNumLevels; ++j) {
    const double d = diag_accuracy[j];
    const double floor = SynthDiagonalFloor(DangerLevel::FromIndex(j));
    if (!(d > floor) || d > 1.0) {
      std::ostringstream msg;
      msg << "diagonal accuracy for level " << (j + 1) << " must lie in ("
          << floor << ", 1], got " << d;
      ThrowInput("E_DIAG", msg.str());
    }
    const LevelArray w = DecayWeights(j);
    for (int i = 0; i < kNumLevels; ++i) {
      t[i][j] = i == j ? d : (1.0 - d) * w[i];
    }
  }
  return LikelihoodMatrix(tag, t);
}

nlohmann::json ToJson(const LikelihoodMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : m.table()) rows.push_back(row);
  return {{"modality", std::string(ToString(m.tag()))}, {"l", rows}};
}

LikelihoodMatrix LikelihoodFromJson(const nlohmann::json& j) {
  try {
    const ModalityTag tag =
        ParseModalityTag(j.at("modality").get<std::string>());
    const auto& rows = j.at("l");
    if (!rows.is_array() || rows.size() != kNumLevels) {
      ThrowInput("E_MATRIX", "'l' must hold 5 rows");
    }
    LikelihoodMatrix::Table t;
    for (int i = 0; i < kNumLevels; ++i) {
      if (!rows[i].is_array() || rows[i].size() != kNumLevels) {
        ThrowInput("E_MATRIX", "row " + std::to_string(i + 1) +
                                   " must hold 5 entries");
      }
      for (int k = 0; k < kNumLevels; ++k) t[i][k] = rows[i][k].get<double>();
    }
    return LikelihoodMatrix(tag, t);
  } catch (const nlohmann::json::exception& e) {
    ThrowInput("E_PARSE", std::string("likelihood matrix: ") + e.what());
  }
}

LikelihoodMatrix LoadLikelihood(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) ThrowInput("E_MATRIX_MISSING", "cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    ThrowInput("E_PARSE", path.string() + ": " + e.what());
  }
  return LikelihoodFromJson(j);
}

void SaveLikelihood(const LikelihoodMatrix& m,
                    const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) ThrowInput("E_IO", "cannot write " + path.string());
  out << ToJson(m).dump(2) << '\n';
}

std::vector<PredictionRecord> ReadPredictionCsv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<PredictionRecord> out;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string trimmed = Trim(line);
    if (trimmed.empty()) continue;
    if (!header_seen) {
      if (trimmed != "true,predicted") {
        ThrowInput("E_CSV", "expected header 'true,predicted', got '" +
                                trimmed + "'");
      }
      header_seen = true;
      continue;
    }
    const auto fields = Split(trimmed, ',');
    if (fields.size() != 2) {
      ThrowInput("E_CSV", "line " + std::to_string(line_no) +
                              ": expected 2 fields");
    }
    out.push_back({ParseLevel(fields[0], line_no), ParseLevel(fields[1], line_no)});
  }
  if (!header_seen) ThrowInput("E_CSV", "missing header 'true,predicted'");
  return out;
}

std::vector<PredictionRecord> LoadPredictionCsv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) ThrowInput("E_IO", "cannot open " + path.string());
  return ReadPredictionCsv(in);
}

void WritePredictionCsv(std::ostream& out,
                        std::span<const PredictionRecord> records) {
  out << "true,predicted\n";
  for (const auto& r : records) {
    out << r.truth.value() << ',' << r.predicted.value() << '\n';
  }
}

std::vector<AnnotationRecord> ReadAnnotationCsv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<AnnotationRecord> out;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string trimmed = Trim(line);
    if (trimmed.empty()) continue;
    if (!header_seen) {
      if (trimmed != "item_id,ratings,keywords") {
        ThrowInput("E_CSV", "expected header 'item_id,ratings,keywords'");
      }
      header_seen = true;
      continue;
    }
    const auto fields = Split(trimmed, ',');
    if (fields.size() != 3) {
      ThrowInput("E_CSV", "line " + std::to_string(line_no) +
                              ": expected 3 fields");
    }
    AnnotationRecord rec;
    rec.item_id = fields[0];
    for (const auto& r : Split(fields[1], ';')) {
      rec.ratings.push_back(ParseLevel(r, line_no));
    }
    if (!fields[2].empty()) {
      for (auto& k : Split(fields[2], ';')) {
        if (!k.empty()) rec.keywords.push_back(std::move(k));
      }
    }
    out.push_back(std::move(rec));
  }
  if (!header_seen) ThrowInput("E_CSV", "missing header");
  return out;
}

}  // namespace hazard
