#include "hazard/sensing.hpp"

#include "gtest/gtest.h"
#include "hazard/error.hpp"
#include "test_util.hpp"

namespace hazard {
namespace {

using testing::L1;
using testing::RandomMatrix;
using testing::RandomPmf;

SensorModels Models(const LikelihoodMatrix& v, const LikelihoodMatrix& l) {
  return SensorModels{v, l};
}

TEST(SampleLevel, DeltaAlwaysReturnsItsLevel) {
  Rng rng(1);
  for (int k = 0; k < 1000; ++k) {
    EXPECT_EQ(SampleLevel(DangerPmf::Delta(DangerLevel(3)), rng).value(), 3);
  }
}

TEST(SampleLevel, UniformFrequencies) {
  Rng rng(2);
  std::array<int, kNumLevels> hits{};
  const int n = 100000;
  for (int k = 0; k < n; ++k) ++hits[SampleLevel(DangerPmf::Uniform(), rng).index()];
  for (int h : hits) EXPECT_NEAR(static_cast<double>(h) / n, 0.2, 0.01);
}

TEST(SampleLevel, ZeroMassNeverDrawn) {
  Rng rng(3);
  const DangerPmf p({0.5, 0.5, 0, 0, 0});
  for (int k = 0; k < 100000; ++k) EXPECT_LE(SampleLevel(p, rng).value(), 2);
  const DangerPmf tail({0, 0, 0, 0.5, 0.5});
  for (int k = 0; k < 10000; ++k) EXPECT_GE(SampleLevel(tail, rng).value(), 4);
}

TEST(SampleLevel, MatchesArbitraryPmf) {
  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const DangerPmf p = RandomPmf(rng, true);
    LevelArray freq{};
    const int n = 50000;
    for (int k = 0; k < n; ++k) freq[SampleLevel(p, rng).index()] += 1.0 / n;
    EXPECT_LT(L1(freq, p.probs()), 0.03);
  }
}

TEST(ObserveNode, IdentityVisionReportsLatent) {
  Rng rng(5);
  const auto models = Models(LikelihoodMatrix::Identity(ModalityTag::kVision),
                             LikelihoodMatrix::Uniform(ModalityTag::kLanguage));
  const auto e = ObserveNode(NodeId{7}, DangerPmf::Uniform(),
                             SensingModality::VisionOnly(), models,
                             GroundTruthMode::kFixedLatent, DangerLevel(4), rng);
  EXPECT_EQ(e.node, NodeId{7});
  ASSERT_TRUE(e.vision);
  EXPECT_EQ(e.vision->value(), 4);
  EXPECT_TRUE(e.words.empty());
}

TEST(ObserveNode, Arity) {
  Rng rng(6);
  const auto models = Models(RandomMatrix(rng, ModalityTag::kVision),
                             RandomMatrix(rng, ModalityTag::kLanguage));
  for (auto mode : {GroundTruthMode::kResamplePerEvent, GroundTruthMode::kFixedLatent}) {
    const auto vl = ObserveNode(NodeId{0}, RandomPmf(rng), SensingModality::VisionLanguage(3),
                                models, mode, DangerLevel(2), rng);
    EXPECT_TRUE(vl.vision);
    EXPECT_EQ(vl.words.size(), 3u);
    const auto lang = ObserveNode(NodeId{0}, RandomPmf(rng), SensingModality::LanguageOnly(5),
                                  models, mode, DangerLevel(2), rng);
    EXPECT_FALSE(lang.vision);
    EXPECT_EQ(lang.words.size(), 5u);
  }
}

TEST(ObserveNode, SilentModalitiesConsumeNoRandomness) {
  for (auto m : {SensingModality::NoSensor(), SensingModality::FullKnowledge()}) {
    Rng rng(7);
    const auto e = ObserveNode(NodeId{0}, DangerPmf::Uniform(), m, SensorModels{},
                               GroundTruthMode::kResamplePerEvent, std::nullopt, rng);
    EXPECT_TRUE(e.empty());
    EXPECT_EQ(rng.NextU64(), Rng(7).NextU64());
  }
}

TEST(ObserveNode, FixedLatentNeedsLatent) {
  Rng rng(8);
  const auto models = Models(LikelihoodMatrix::Uniform(ModalityTag::kVision),
                             LikelihoodMatrix::Uniform(ModalityTag::kLanguage));
  try {
    ObserveNode(NodeId{0}, DangerPmf::Uniform(), SensingModality::VisionOnly(), models,
                GroundTruthMode::kFixedLatent, std::nullopt, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kContract);
  }
}

TEST(ObserveNode, VisionLabelsFollowColumn) {
  Rng rng(9);
  const auto m = RandomMatrix(rng, ModalityTag::kVision);
  const auto models = Models(m, LikelihoodMatrix::Uniform(ModalityTag::kLanguage));
  for (int d = 1; d <= kNumLevels; ++d) {
    LevelArray freq{};
    const int n = 50000;
    for (int k = 0; k < n; ++k) {
      const auto e = ObserveNode(NodeId{0}, DangerPmf::Uniform(), SensingModality::VisionOnly(),
                                 models, GroundTruthMode::kFixedLatent, DangerLevel(d), rng);
      freq[e.vision->index()] += 1.0 / n;
    }
    EXPECT_LT(L1(freq, m.Column(DangerLevel(d))), 0.02) << "d*=" << d;
  }
}

TEST(ObserveNode, ResampleMarginalIsMixture) {
  // Under ResamplePerEvent the vision label's marginal is M · truth.
  Rng rng(10);
  const auto m = RandomMatrix(rng, ModalityTag::kVision);
  const auto models = Models(m, LikelihoodMatrix::Uniform(ModalityTag::kLanguage));
  const DangerPmf truth = RandomPmf(rng);
  LevelArray want{};
  for (int i = 0; i < kNumLevels; ++i) {
    for (int j = 0; j < kNumLevels; ++j) want[i] += m.table()[i][j] * truth.probs()[j];
  }
  LevelArray freq{};
  const int n = 50000;
  for (int k = 0; k < n; ++k) {
    const auto e = ObserveNode(NodeId{0}, truth, SensingModality::VisionOnly(), models,
                               GroundTruthMode::kResamplePerEvent, std::nullopt, rng);
    freq[e.vision->index()] += 1.0 / n;
  }
  EXPECT_LT(L1(freq, want), 0.02);
}

TEST(ObserveNode, WordPositionsAreExchangeable) {
  Rng rng(11);
  const auto l = RandomMatrix(rng, ModalityTag::kLanguage);
  const auto models = Models(LikelihoodMatrix::Uniform(ModalityTag::kVision), l);
  const int m = 4;
  const int n = 40000;
  std::array<LevelArray, m> freq{};
  const DangerPmf truth = RandomPmf(rng);
  for (int k = 0; k < n; ++k) {
    const auto e = ObserveNode(NodeId{0}, truth, SensingModality::LanguageOnly(m), models,
                               GroundTruthMode::kResamplePerEvent, std::nullopt, rng);
    for (int pos = 0; pos < m; ++pos) freq[pos][e.words[pos].index()] += 1.0 / n;
  }
  for (int pos = 1; pos < m; ++pos) EXPECT_LT(L1(freq[0], freq[pos]), 0.03);
}

TEST(ObserveNode, Reproducible) {
  Rng gen(12);
  const auto models = Models(RandomMatrix(gen, ModalityTag::kVision),
                             RandomMatrix(gen, ModalityTag::kLanguage));
  const DangerPmf truth = RandomPmf(gen);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng a(seed), b(seed);
    const auto ea = ObserveNode(NodeId{1}, truth, SensingModality::VisionLanguage(5), models,
                                GroundTruthMode::kResamplePerEvent, std::nullopt, a);
    const auto eb = ObserveNode(NodeId{1}, truth, SensingModality::VisionLanguage(5), models,
                                GroundTruthMode::kResamplePerEvent, std::nullopt, b);
    EXPECT_EQ(ea.vision, eb.vision);
    EXPECT_EQ(ea.words, eb.words);
  }
}

TEST(SensingModality, NamesRoundTrip) {
  for (const auto& m : {SensingModality::NoSensor(), SensingModality::VisionOnly(),
                        SensingModality::LanguageOnly(1), SensingModality::VisionLanguage(10),
                        SensingModality::FullKnowledge()}) {
    EXPECT_EQ(SensingModality::Parse(m.Name()), m);
  }
  EXPECT_EQ(SensingModality::Parse("VL-5"), SensingModality::VisionLanguage(5));
  EXPECT_THROW(SensingModality::Parse("vl-0"), Error);
  EXPECT_THROW(SensingModality::Parse("sonar"), Error);
  EXPECT_THROW(SensingModality::LanguageOnly(0), Error);
}

TEST(GroundTruthMode, Names) {
  for (auto m : {GroundTruthMode::kResamplePerEvent, GroundTruthMode::kFixedLatent}) {
    EXPECT_EQ(ParseGroundTruthMode(ToString(m)), m);
  }
  EXPECT_THROW(ParseGroundTruthMode("sometimes"), Error);
}

TEST(SensorModels, RequireFor) {
  SensorModels none;
  EXPECT_NO_THROW(none.RequireFor(SensingModality::NoSensor()));
  EXPECT_NO_THROW(none.RequireFor(SensingModality::FullKnowledge()));
  try {
    none.RequireFor(SensingModality::VisionOnly());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "E_MATRIX_MISSING");
  }
  SensorModels swapped{LikelihoodMatrix::Uniform(ModalityTag::kLanguage), std::nullopt};
  EXPECT_THROW(swapped.RequireFor(SensingModality::VisionOnly()), Error);
}

}  // namespace
}  // namespace hazard
