#include <cmath>

#include <gtest/gtest.h>

#include "promis/error.hpp"
#include "promis/geo.hpp"
#include "promis/perturb.hpp"

using namespace promis;

namespace {

FeatureMap sample_scene() {
  FeatureMap map{{49.878091, 8.654052}, {}};
  map.features.push_back({"road", {GeometryKind::Polyline, {LocalPoint(0, 0), LocalPoint(100, 0), LocalPoint(150, 40)}},
                          {{"highway", "primary"}}});
  map.features.push_back({"house",
                          {GeometryKind::Polygon,
                           {LocalPoint(10, 10), LocalPoint(30, 10), LocalPoint(30, 25), LocalPoint(10, 25),
                            LocalPoint(10, 10)}},
                          {{"building", "yes"}}});
  map.features.push_back({"tree", {GeometryKind::Point, {LocalPoint(-5, 7)}}, {{"natural", "tree"}}});
  return map;
}

double pairwise_sum(const Geometry& g) {
  double sum = 0.0;
  for (std::size_t i = 0; i < g.vertices.size(); ++i)
    for (std::size_t j = i + 1; j < g.vertices.size(); ++j) sum += (g.vertices[i] - g.vertices[j]).norm();
  return sum;
}

}  // namespace

TEST(Perturb, ZeroNoiseIsIdentity) {
  const FeatureMap map = sample_scene();
  const MapSample s = sample_map(map, {}, 17, 3);
  EXPECT_EQ(s.sample_index, 3u);
  ASSERT_EQ(s.variant.features.size(), map.features.size());
  for (std::size_t i = 0; i < map.features.size(); ++i)
    EXPECT_EQ(s.variant.features[i].geometry.vertices, map.features[i].geometry.vertices);
}

TEST(Perturb, SingleZeroNoiseSample) {
  const auto samples = sample_maps(sample_scene(), {}, 1, 1);
  ASSERT_EQ(samples.size(), 1u);
  EXPECT_EQ(feature_map_to_json(samples[0].variant), feature_map_to_json(sample_scene()));
}

TEST(Perturb, TranslationOnlyIsRigid) {
  PerturbationModel model;
  model.translation_std_east = 3.0;
  model.translation_std_north = 2.0;
  const FeatureMap map = sample_scene();
  const MapSample s = sample_map(map, model, 5, 0);
  for (std::size_t i = 0; i < map.features.size(); ++i) {
    const auto& a = map.features[i].geometry.vertices;
    const auto& b = s.variant.features[i].geometry.vertices;
    const Eigen::Vector2d shift = b[0] - a[0];
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_LT((b[k] - a[k] - shift).norm(), 1e-9);
  }
}

TEST(Perturb, RotationPreservesPairwiseDistances) {
  PerturbationModel model;
  model.rotation_std = 0.3;
  const FeatureMap map = sample_scene();
  for (std::size_t n = 0; n < 5; ++n) {
    const MapSample s = sample_map(map, model, 11, n);
    for (std::size_t i = 0; i < map.features.size(); ++i)
      EXPECT_NEAR(pairwise_sum(s.variant.features[i].geometry), pairwise_sum(map.features[i].geometry), 1e-9);
  }
}

TEST(Perturb, PolygonsStayClosed) {
  PerturbationModel model{2.0, 2.0, 0.1, 0.05};
  const MapSample s = sample_map(sample_scene(), model, 9, 4);
  const auto& v = s.variant.features[1].geometry.vertices;
  EXPECT_EQ(v.front(), v.back());
}

TEST(Perturb, ZeroSamplesIsInvalid) {
  try {
    sample_maps(sample_scene(), {}, 1, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidArgument);
  }
}

TEST(Perturb, NegativeStdIsInvalid) {
  PerturbationModel model;
  model.scale_std = -1.0;
  EXPECT_THROW(model.validate(), Error);
}

TEST(Perturb, Deterministic) {
  PerturbationModel model{2.0, 1.0, 0.05, 0.02};
  const auto a = sample_maps(sample_scene(), model, 42, 6);
  const auto b = sample_maps(sample_scene(), model, 42, 6);
  for (std::size_t n = 0; n < a.size(); ++n)
    EXPECT_EQ(feature_map_to_json(a[n].variant), feature_map_to_json(b[n].variant));
}

TEST(Perturb, SeedSensitive) {
  PerturbationModel model{2.0, 1.0, 0.05, 0.02};
  const auto a = sample_map(sample_scene(), model, 42, 0);
  const auto b = sample_map(sample_scene(), model, 43, 0);
  EXPECT_NE(feature_map_to_json(a.variant), feature_map_to_json(b.variant));
}

TEST(Perturb, TranslationMomentsMatchModel) {
  PerturbationModel model;
  model.translation_std_east = 10.0;
  model.translation_std_north = 4.0;
  const std::size_t n = 10'000;
  double sum_e = 0, sum_n = 0, sq_e = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const FeatureError e = draw_feature_error(model, 123, k, 0);
    EXPECT_TRUE(e.linear.isIdentity());
    sum_e += e.translation.x();
    sum_n += e.translation.y();
    sq_e += e.translation.x() * e.translation.x();
  }
  EXPECT_LT(std::abs(sum_e / n), 3 * 10.0 / std::sqrt(double(n)));
  EXPECT_LT(std::abs(sum_n / n), 3 * 4.0 / std::sqrt(double(n)));
  EXPECT_NEAR(std::sqrt(sq_e / n), 10.0, 0.3);
}

TEST(Perturb, FeaturesDrawIndependently) {
  PerturbationModel model;
  model.translation_std_east = 1.0;
  EXPECT_NE(draw_feature_error(model, 1, 0, 0).translation.x(), draw_feature_error(model, 1, 0, 1).translation.x());
  EXPECT_NE(draw_feature_error(model, 1, 0, 0).translation.x(), draw_feature_error(model, 1, 1, 0).translation.x());
}
