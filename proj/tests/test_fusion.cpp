#include <gtest/gtest.h>

#include <random>

#include "mmvad/fusion.hpp"
#include "oracles.hpp"

using namespace mmvad;
using namespace mmvad::fusion;
using hyperbolic::PoincarePoint;

namespace {

const FusionWeights kEqual{0.5, 0.5};

Dataset make_dataset(std::mt19937_64& rng, std::size_t n, std::size_t dim, bool audio,
                     const std::vector<bool>& audio_mask = {}) {
  std::vector<SegmentRecord> segs;
  for (std::size_t i = 0; i < n; ++i) {
    SegmentRecord s{i, std::int64_t(i) * 2, std::int64_t(i) * 2 + 1, "v" + std::to_string(i), std::nullopt};
    if (audio && (audio_mask.empty() || audio_mask[i])) s.audio_caption = "a" + std::to_string(i);
    segs.push_back(s);
  }
  std::map<Modality, EmbeddingMatrix> m;
  m[Modality::kVisual] = oracle::random_matrix(rng, Modality::kVisual, n, dim);
  m[Modality::kText] = oracle::random_matrix(rng, Modality::kText, n, dim);
  if (audio) m[Modality::kAudio] = oracle::random_matrix(rng, Modality::kAudio, n, dim);
  auto r = validate_dataset(std::move(segs), std::move(m));
  EXPECT_TRUE(r.ok()) << r.summary();
  return *r.dataset;
}

std::vector<std::size_t> iota(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

}  // namespace

TEST(ToTangent, NormalizesAndScales) {
  const auto v = to_tangent(std::vector<double>{3.0, 4.0}, 0.5);
  EXPECT_DOUBLE_EQ(v[0], 0.3);
  EXPECT_DOUBLE_EQ(v[1], 0.4);
  EXPECT_EQ(to_tangent(std::vector<double>{0.0, 0.0}, 0.5), (std::vector<double>{0.0, 0.0}));
}

TEST(FuseSegment, AudioAbsentIsExactlyExpMap) {
  const std::vector<double> e = {0.2, -0.1, 0.3};
  const auto z = fuse_segment(e, std::nullopt, kEqual, 1.0);
  EXPECT_EQ(z.point, hyperbolic::exp_map_origin(e, 1.0));
  EXPECT_TRUE(z.converged);
  EXPECT_EQ(z.iterations, 0);
}

TEST(FuseSegment, IdenticalInputsGiveTheirImage) {
  const std::vector<double> e = {0.2, -0.1, 0.3};
  const auto z = fuse_segment(e, std::span<const double>(e), kEqual, 1.0);
  const auto expected = hyperbolic::exp_map_origin(e, 1.0);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(z.point.coords()[k], expected.coords()[k], 1e-12);
}

TEST(FuseSegment, SymmetricPairFusesToOrigin) {
  const std::vector<double> a = {0.4, 0.0}, b = {-0.4, 0.0};
  const auto z = fuse_segment(a, std::span<const double>(b), kEqual, 1.0);
  EXPECT_NEAR(z.point.coords()[0], 0.0, 1e-9);
  EXPECT_NEAR(z.point.coords()[1], 0.0, 1e-9);
}

TEST(FuseSegment, OrderIndependent) {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 100; ++i) {
    const auto a = oracle::random_vector(rng, 8, 0.3), b = oracle::random_vector(rng, 8, 0.3);
    const double wa = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const auto z1 = fuse_segment(a, std::span<const double>(b), {wa, 1.0 - wa}, 1.0);
    const auto z2 = fuse_segment(b, std::span<const double>(a), {1.0 - wa, wa}, 1.0);
    for (int k = 0; k < 8; ++k) EXPECT_NEAR(z1.point.coords()[k], z2.point.coords()[k], 1e-10);
  }
}

TEST(FuseSegment, DegenerateWeightSelectsVisual) {
  std::mt19937_64 rng(32);
  for (int i = 0; i < 50; ++i) {
    const auto a = oracle::random_vector(rng, 5, 0.3), b = oracle::random_vector(rng, 5, 0.3);
    const auto z = fuse_segment(a, std::span<const double>(b), {1.0, 0.0}, 1.0);
    const auto expected = hyperbolic::exp_map_origin(a, 1.0);
    for (int k = 0; k < 5; ++k) EXPECT_NEAR(z.point.coords()[k], expected.coords()[k], 1e-10);
  }
}

TEST(FuseSegment, FlatLimitIsArithmeticMean) {
  std::mt19937_64 rng(33);
  for (int i = 0; i < 50; ++i) {
    const auto a = oracle::random_vector(rng, 6, 0.3), b = oracle::random_vector(rng, 6, 0.3);
    const auto z = fuse_segment(a, std::span<const double>(b), kEqual, 1e-8);
    for (int k = 0; k < 6; ++k) EXPECT_NEAR(z.point.coords()[k], 0.5 * (a[k] + b[k]), 1e-5);
  }
}

TEST(FuseSegment, RejectsBadInputs) {
  const std::vector<double> a = {0.1, 0.2}, b = {0.1}, nan = {0.1, std::nan("")};
  EXPECT_THROW(fuse_segment(a, std::span<const double>(b), kEqual, 1.0), DimensionError);
  EXPECT_THROW(fuse_segment(nan, std::nullopt, kEqual, 1.0), DomainError);
  EXPECT_THROW(fuse_segment(a, std::span<const double>(a), {0.7, 0.7}, 1.0), DomainError);
  EXPECT_THROW(fuse_segment(a, std::span<const double>(a), {1.2, -0.2}, 1.0), DomainError);
}

TEST(FuseSegmentEuclidean, WeightedAverage) {
  const std::vector<double> a = {1.0, 2.0}, b = {3.0, -2.0};
  EXPECT_EQ(fuse_segment_euclidean(a, std::span<const double>(b), {0.25, 0.75}), (std::vector<double>{2.5, -1.0}));
  EXPECT_EQ(fuse_segment_euclidean(a, std::nullopt, kEqual), a);
}

TEST(FuseSequence, AllVisualIsPointwiseExpMap) {
  std::mt19937_64 rng(34);
  const auto ds = make_dataset(rng, 12, 7, false);
  FusionOptions opts;
  const auto fused = fuse_sequence(ds, iota(12), opts);
  ASSERT_EQ(fused.size(), 12u);
  for (std::size_t t = 0; t < 12; ++t) {
    EXPECT_EQ(fused.modality_mask[t], kMaskVisual);
    EXPECT_EQ(fused.points[t], hyperbolic::exp_map_origin(to_tangent(ds.at(Modality::kText).row(t), 0.5), 1.0));
    EXPECT_LT(fused.points[t].scaled_norm(), 1.0);
  }
}

TEST(FuseSequence, MixedAudioPerSegment) {
  std::mt19937_64 rng(35);
  const auto ds = make_dataset(rng, 5, 4, true, {true, true, false, true, true});
  const auto fused = fuse_sequence(ds, iota(5), FusionOptions{});
  for (std::size_t t = 0; t < 5; ++t)
    EXPECT_EQ(fused.modality_mask[t], t == 2 ? kMaskVisual : (kMaskVisual | kMaskAudio));
  EXPECT_EQ(fused.points[2], hyperbolic::exp_map_origin(to_tangent(ds.at(Modality::kText).row(2), 0.5), 1.0));
  EXPECT_NE(fused.points[1], hyperbolic::exp_map_origin(to_tangent(ds.at(Modality::kText).row(1), 0.5), 1.0));
}

TEST(FuseSequence, DroppingAudioGivesUnimodalBitForBit) {
  std::mt19937_64 rng(36);
  const auto ds = make_dataset(rng, 9, 6, true);
  FusionOptions off;
  off.use_audio = false;
  auto stripped = ds;
  stripped.embeddings.erase(Modality::kAudio);
  for (auto& s : stripped.segments) s.audio_caption.reset();
  const auto a = fuse_sequence(ds, iota(9), off);
  const auto b = fuse_sequence(stripped, iota(9), FusionOptions{});
  for (std::size_t t = 0; t < 9; ++t) EXPECT_EQ(a.points[t], b.points[t]);
}

TEST(FuseSequence, UsesCleanedCaptionRows) {
  std::mt19937_64 rng(37);
  const auto ds = make_dataset(rng, 4, 3, false);
  const auto fused = fuse_sequence(ds, {3, 3, 0, 1}, FusionOptions{});
  EXPECT_EQ(fused.points[0], fused.points[1]);
  EXPECT_EQ(fused.points[0], hyperbolic::exp_map_origin(to_tangent(ds.at(Modality::kText).row(3), 0.5), 1.0));
}

TEST(FuseSequence, FlatLimitHyperbolicMatchesEuclidean) {
  std::mt19937_64 rng(38);
  const auto ds = make_dataset(rng, 20, 5, true);
  FusionOptions hyp, euc;
  hyp.curvature = euc.curvature = 1e-8;
  euc.geometry = Geometry::kEuclidean;
  const auto a = fuse_sequence(ds, iota(20), hyp);
  const auto b = fuse_sequence(ds, iota(20), euc);
  for (std::size_t t = 0; t < 20; ++t)
    for (int k = 0; k < 5; ++k) EXPECT_NEAR(a.points[t].coords()[k], b.points[t].coords()[k], 1e-5);
}

TEST(WindowFeatures, SingletonWindowsAreLogOfPoints) {
  std::mt19937_64 rng(39);
  const auto ds = make_dataset(rng, 6, 4, true);
  const auto fused = fuse_sequence(ds, iota(6), FusionOptions{});
  const auto summaries = captions::build_summaries(captions::CaptionSet::identity(std::vector<std::string>(6, "x")), {}, 1);
  const auto feats = window_features(fused, summaries, FusionOptions{});
  for (std::size_t t = 0; t < 6; ++t) {
    const auto expected = hyperbolic::log_map_origin(fused.points[t]);
    for (int k = 0; k < 4; ++k) EXPECT_EQ(feats.row(t)[k], expected[k]);
  }
}

TEST(WindowFeatures, FlatLimitMatchesEuclideanMean) {
  std::mt19937_64 rng(40);
  const auto ds = make_dataset(rng, 7, 3, true);
  FusionOptions hyp, euc;
  hyp.curvature = euc.curvature = 1e-8;
  euc.geometry = Geometry::kEuclidean;
  const auto summaries = captions::build_summaries(captions::CaptionSet::identity(std::vector<std::string>(7, "x")), {}, 3);
  const auto a = window_features(fuse_sequence(ds, iota(7), hyp), summaries, hyp);
  const auto b = window_features(fuse_sequence(ds, iota(7), euc), summaries, euc);
  ASSERT_EQ(a.count(), 3u);
  for (std::size_t k = 0; k < 3; ++k)
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(a.row(k)[j], b.row(k)[j], 1e-5);
}
