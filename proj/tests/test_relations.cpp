#include <cmath>

#include <gtest/gtest.h>

#include "promis/error.hpp"
#include "promis/relations.hpp"

using namespace promis;

namespace {

const GeoPoint kOrigin{49.878091, 8.654052};

// Frozen from tests/oracles/compute_oracles.py: |20 + e|, e ~ N(0, 10^2), 10^6 samples.
constexpr double kFoldedMean = 20.168183;
constexpr double kFoldedStd = 9.660963;

FeatureMap segment_map() {
  FeatureMap map{kOrigin, {}};
  map.features.push_back({"seg", {GeometryKind::Polyline, {LocalPoint(0, 0), LocalPoint(10, 0)}}, {{"highway", "primary"}}});
  map.features.push_back({"box",
                          {GeometryKind::Polygon,
                           {LocalPoint(0, 0), LocalPoint(10, 0), LocalPoint(10, 10), LocalPoint(0, 10), LocalPoint(0, 0)}},
                          {{"building", "yes"}}});
  return map;
}

std::string pgm(std::size_t w, std::size_t h, const std::vector<unsigned>& px) {
  std::string s = "P2\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  for (unsigned v : px) s += std::to_string(v) + " ";
  return s + "\n";
}

double bernoulli(const RelationParams& p) { return std::get<Bernoulli>(p).p; }

}  // namespace

TEST(Distance, PerpendicularDrop) {
  EXPECT_DOUBLE_EQ(distance_to_nearest(segment_map(), LocalPoint(0, 5), "primary"), 5.0);
}

TEST(Distance, NearestEndpoint) {
  EXPECT_DOUBLE_EQ(distance_to_nearest(segment_map(), LocalPoint(-3, 4), "primary"), 5.0);
}

TEST(Distance, InsidePolygonIsZero) {
  EXPECT_EQ(distance_to_nearest(segment_map(), LocalPoint(4, 6), "building"), 0.0);
}

TEST(Distance, MissingTypeIsUndefined) {
  try {
    distance_to_nearest(segment_map(), LocalPoint(0, 0), "park");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::RelationUndefined);
    EXPECT_NE(std::string(e.what()).find("park"), std::string::npos);
  }
}

TEST(Over, Containment) {
  EXPECT_TRUE(is_over(segment_map(), LocalPoint(1, 1), "building"));
  EXPECT_FALSE(is_over(segment_map(), LocalPoint(100, 100), "building"));
  EXPECT_TRUE(is_over(segment_map(), LocalPoint(10, 5), "building"));
  EXPECT_TRUE(is_over(segment_map(), LocalPoint(0, 0), "building"));
}

TEST(Over, BufferWidensLines) {
  EXPECT_FALSE(is_over(segment_map(), LocalPoint(5, -3), "primary"));
  EXPECT_TRUE(is_over(segment_map(), LocalPoint(5, -3), "primary", 4.0));
}

TEST(Estimate, ZeroNoiseIsDegenerate) {
  const GridSpec grid{kOrigin, 40.0, 40.0, 5, 5};
  const std::vector<Relation> decls{{RelationKind::Distance, "primary"}, {RelationKind::Over, "building"}};
  const RelationTable t = estimate_relations(segment_map(), {}, grid, decls, {.samples = 7, .seed = 3});
  for (std::size_t loc = 0; loc < grid.size(); ++loc) {
    const auto d = std::get<Normal>(t.at(loc, 0));
    EXPECT_EQ(d.stddev, 0.0);
    EXPECT_NEAR(d.mean, distance_to_nearest(segment_map(), grid.point(loc), "primary"), 1e-12);
    const double p = bernoulli(t.at(loc, 1));
    EXPECT_EQ(p, is_over(segment_map(), grid.point(loc), "building") ? 1.0 : 0.0);
  }
}

TEST(Estimate, DistanceNeedsTwoSamples) {
  const GridSpec grid{kOrigin, 40.0, 40.0, 2, 2};
  try {
    estimate_relations(segment_map(), {}, grid, {{RelationKind::Distance, "primary"}}, {.samples = 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidArgument);
    EXPECT_NE(std::string(e.what()).find("N must be >= 2"), std::string::npos);
  }
}

TEST(Estimate, UndefinedDistanceFailsFast) {
  const GridSpec grid{kOrigin, 40.0, 40.0, 2, 2};
  EXPECT_THROW(estimate_relations(segment_map(), {}, grid, {{RelationKind::Distance, "park"}}, {}), Error);
}

TEST(Estimate, FoldedNormalMatchesOracle) {
  FeatureMap map{kOrigin, {}};
  map.features.push_back({"wall", {GeometryKind::Polyline, {LocalPoint(20, -1e6), LocalPoint(20, 1e6)}}, {{"highway", "primary"}}});
  PerturbationModel model;
  model.translation_std_east = 10.0;
  const GridSpec grid{kOrigin, 2.0, 2.0, 3, 3};
  const RelationTable t =
      estimate_relations(map, model, grid, {{RelationKind::Distance, "primary"}}, {.samples = 10'000, .seed = 1});
  const auto d = std::get<Normal>(t.at(grid.index(1, 1), 0));
  EXPECT_NEAR(d.mean, kFoldedMean, 3 * 10.0 / std::sqrt(10'000.0));
  EXPECT_NEAR(d.stddev, kFoldedStd, 0.05 * kFoldedStd);
}

TEST(Estimate, OverFrequencyConverges) {
  // Half-plane park edge at east = 0 shifted by N(0, 1): P(x inside) = Phi(x) for x = east.
  FeatureMap map{kOrigin, {}};
  map.features.push_back({"park",
                          {GeometryKind::Polygon,
                           {LocalPoint(0, -1e4), LocalPoint(1e4, -1e4), LocalPoint(1e4, 1e4), LocalPoint(0, 1e4),
                            LocalPoint(0, -1e4)}},
                          {{"leisure", "park"}}});
  PerturbationModel model;
  model.translation_std_east = 1.0;
  const GridSpec grid{kOrigin, 2.0, 2.0, 3, 3};
  const RelationTable t =
      estimate_relations(map, model, grid, {{RelationKind::Over, "park"}}, {.samples = 10'000, .seed = 2});
  // x = (1, 0): inside when 1 - e >= 0, so p = Phi(1) = 0.841345.
  const double p = bernoulli(t.at(grid.index(1, 2), 0));
  EXPECT_NEAR(p, 0.841345, 3 * std::sqrt(0.841345 * 0.158655 / 10'000));
}

TEST(Estimate, DistanceMeanIsLipschitz) {
  const PerturbationModel model{2.0, 2.0, 0.05, 0.02};
  const GridSpec grid{kOrigin, 60.0, 60.0, 7, 7};
  const RelationTable t =
      estimate_relations(segment_map(), model, grid, {{RelationKind::Distance, "primary"}}, {.samples = 40, .seed = 9});
  for (std::size_t r = 0; r < grid.res_y; ++r)
    for (std::size_t c = 0; c + 1 < grid.res_x; ++c) {
      const double a = std::get<Normal>(t.at(grid.index(r, c), 0)).mean;
      const double b = std::get<Normal>(t.at(grid.index(r, c + 1), 0)).mean;
      EXPECT_LE(std::abs(a - b), (grid.point(r, c) - grid.point(r, c + 1)).norm() + 1e-9);
    }
}

TEST(Estimate, WorkerCountDoesNotMatter) {
  const PerturbationModel model{2.0, 2.0, 0.05, 0.02};
  const GridSpec grid{kOrigin, 60.0, 60.0, 9, 9};
  const std::vector<Relation> decls{{RelationKind::Distance, "primary"}, {RelationKind::Over, "building"}};
  const auto a = estimate_relations(segment_map(), model, grid, decls, {.samples = 20, .seed = 5, .workers = 1});
  const auto b = estimate_relations(segment_map(), model, grid, decls, {.samples = 20, .seed = 5, .workers = 4});
  EXPECT_EQ(relation_table_to_csv(a), relation_table_to_csv(b));
}

TEST(Raster, AllZero) {
  const GridSpec grid{kOrigin, 10.0, 10.0, 2, 2};
  const RasterGeoref g{unproject(kOrigin, LocalPoint(-10, 10)), 10.0, 255.0};
  for (const auto& p : ingest_probability_raster(parse_pgm(pgm(2, 2, {0, 0, 0, 0})), g, grid)) EXPECT_EQ(bernoulli(p), 0.0);
}

TEST(Raster, AllMax) {
  const GridSpec grid{kOrigin, 10.0, 10.0, 2, 2};
  const RasterGeoref g{unproject(kOrigin, LocalPoint(-10, 10)), 10.0, 255.0};
  for (const auto& p : ingest_probability_raster(parse_pgm(pgm(2, 2, {255, 255, 255, 255})), g, grid))
    EXPECT_EQ(bernoulli(p), 1.0);
}

TEST(Raster, NearestPixel) {
  const GridSpec grid{kOrigin, 10.0, 10.0, 2, 2};
  const RasterGeoref g{unproject(kOrigin, LocalPoint(-10, 10)), 10.0, 255.0};
  const auto ps = ingest_probability_raster(parse_pgm(pgm(2, 2, {255, 0, 0, 0})), g, grid);
  // Pixel (0, 0) is the north-west one; the north-west grid point is row 1, col 0.
  for (std::size_t loc = 0; loc < grid.size(); ++loc)
    EXPECT_EQ(bernoulli(ps[loc]), loc == grid.index(1, 0) ? 1.0 : 0.0) << loc;
}

TEST(Raster, OutsideIsZero) {
  const GridSpec grid{kOrigin, 100.0, 100.0, 2, 2};
  const RasterGeoref g{unproject(kOrigin, LocalPoint(-10, 10)), 10.0, 255.0};
  for (const auto& p : ingest_probability_raster(parse_pgm(pgm(2, 2, {255, 255, 255, 255})), g, grid))
    EXPECT_EQ(bernoulli(p), 0.0);
}

TEST(Raster, BinaryPgm) {
  std::string bytes = "P5\n# comment\n2 1\n255\n";
  bytes.push_back(static_cast<char>(7));
  bytes.push_back(static_cast<char>(200));
  const GrayImage img = parse_pgm(bytes);
  EXPECT_EQ(img.width, 2u);
  EXPECT_EQ(img.at(0, 1), 200u);
}

TEST(Raster, MalformedHeader) {
  EXPECT_THROW(parse_pgm("P7\n2 2\n255\n"), ParseError);
  EXPECT_THROW(parse_pgm("P2\n2 2\n255\n1 2 3"), ParseError);
}

TEST(Raster, GeorefMissingField) {
  try {
    parse_georef(R"({"origin_lat": 49.0, "origin_lon": 8.0, "max_value": 255})");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Configuration);
    EXPECT_NE(std::string(e.what()).find("pixel_size_m"), std::string::npos);
  }
}

TEST(Table, CsvRoundtripAndDeterminism) {
  const PerturbationModel model{2.0, 2.0, 0.05, 0.02};
  const GridSpec grid{kOrigin, 60.0, 60.0, 4, 3};
  RelationTable t = estimate_relations(segment_map(), model, grid,
                                       {{RelationKind::Distance, "primary"}, {RelationKind::Over, "building", 1.5}},
                                       {.samples = 10, .seed = 5});
  t.add({RelationKind::Unary, "change"}, std::vector<RelationParams>(grid.size(), Bernoulli{0.7}));
  const std::string csv = relation_table_to_csv(t);
  EXPECT_EQ(csv.rfind("location_index,relation,type,kind,param1,param2\n", 0), 0u);
  const RelationTable back = relation_table_from_csv(csv, grid);
  // The buffer is an estimation input and is not part of the table schema.
  ASSERT_EQ(back.relations().size(), t.relations().size());
  for (std::size_t r = 0; r < t.relations().size(); ++r) {
    EXPECT_EQ(back.relations()[r].kind, t.relations()[r].kind);
    EXPECT_EQ(back.relations()[r].type, t.relations()[r].type);
  }
  EXPECT_EQ(relation_table_to_csv(back), csv);
}

TEST(Table, RejectsInvalidColumns) {
  const GridSpec grid{kOrigin, 60.0, 60.0, 2, 2};
  RelationTable t(grid);
  EXPECT_THROW(t.add({RelationKind::Over, "park"}, std::vector<RelationParams>(3, Bernoulli{0.5})), Error);
  EXPECT_THROW(t.add({RelationKind::Over, "park"}, std::vector<RelationParams>(4, Bernoulli{1.5})), Error);
  EXPECT_THROW(t.add({RelationKind::Distance, "park"}, std::vector<RelationParams>(4, Normal{1, -1})), Error);
}
