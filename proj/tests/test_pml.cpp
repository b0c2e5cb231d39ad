#include <algorithm>
#include <set>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "promis/error.hpp"
#include "promis/hplp/parser.hpp"
#include "promis/pml.hpp"

using namespace promis;

namespace {

const GeoPoint kOrigin{49.878091, 8.654052};

RelationTable park_table(const GridSpec& grid, const std::vector<double>& p) {
  RelationTable t(grid);
  std::vector<RelationParams> column;
  for (double v : p) column.push_back(Bernoulli{v});
  t.add({RelationKind::Over, "park"}, column);
  return t;
}

PMLRaster raster(std::size_t w, std::size_t h, std::vector<double> values) {
  return {{kOrigin, 100.0, 100.0, w, h}, std::move(values)};
}

const hplp::Program kParkRule = hplp::parse("landscape(X) :- over(X, park).");

}  // namespace

TEST(Tile, Identity) {
  const GridSpec grid{kOrigin, 100, 100, 100, 100};
  const TilePlan plan = tile(grid, 0);
  ASSERT_EQ(plan.tiles.size(), 1u);
  EXPECT_EQ(plan.tiles[0], (Tile{0, 100, 0, 100}));
}

TEST(Tile, OneSplit) {
  const TilePlan plan = tile({kOrigin, 100, 100, 100, 100}, 1);
  ASSERT_EQ(plan.tiles.size(), 4u);
  for (const Tile& t : plan.tiles) {
    EXPECT_EQ(t.rows(), 50u);
    EXPECT_EQ(t.cols(), 50u);
  }
}

TEST(Tile, RemainderToLastCoversGrid) {
  const GridSpec grid{kOrigin, 100, 100, 10, 10};
  const TilePlan plan = tile(grid, 2);
  ASSERT_EQ(plan.tiles.size(), 16u);
  std::multiset<std::size_t> row_sizes;
  std::vector<int> hits(grid.size(), 0);
  for (const Tile& t : plan.tiles) {
    if (t.col_begin == 0) row_sizes.insert(t.rows());
    for (std::size_t r = t.row_begin; r < t.row_end; ++r)
      for (std::size_t c = t.col_begin; c < t.col_end; ++c) ++hits[grid.index(r, c)];
  }
  EXPECT_EQ(row_sizes, (std::multiset<std::size_t>{2, 2, 3, 3}));
  EXPECT_TRUE(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
}

TEST(Tile, OverSplitting) {
  try {
    tile({kOrigin, 100, 100, 4, 4}, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidArgument);
  }
}

TEST(ComputePml, TautologyAndContradiction) {
  const GridSpec grid{kOrigin, 100, 100, 3, 3};
  for (double p : {0.0, 1.0}) {
    const PMLRaster r = compute_pml(kParkRule, park_table(grid, std::vector<double>(9, p)), tile(grid, 0), {});
    for (double v : r.values) EXPECT_EQ(v, p);
  }
}

TEST(ComputePml, SingleFactPassthrough) {
  const GridSpec grid{kOrigin, 100, 100, 2, 2};
  const std::vector<double> p{0.25, 0.5, 0.75, 1.0};
  const PMLRaster r = compute_pml(kParkRule, park_table(grid, p), tile(grid, 1), {.workers = 2});
  EXPECT_EQ(r.values, p);
}

TEST(ComputePml, GridMismatch) {
  const GridSpec grid{kOrigin, 100, 100, 2, 2};
  const GridSpec other{kOrigin, 100, 100, 3, 3};
  try {
    compute_pml(kParkRule, park_table(grid, {0, 0, 0, 0}), tile(other, 0), {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Configuration);
  }
}

TEST(ComputePml, FailingLocationIsNamed) {
  const GridSpec grid{kOrigin, 100, 100, 2, 2};
  const hplp::Program rules = hplp::parse("landscape(X) :- over(X, park), distance(X, road) < 3.");
  try {
    compute_pml(rules, park_table(grid, {0.5, 0.5, 0.5, 0.5}), tile(grid, 0), {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("location 0"), std::string::npos) << e.what();
  }
}

TEST(ComputePml, TilingAndWorkersInvariant) {
  const GridSpec grid{kOrigin, 400, 400, 12, 9};
  RelationTable t(grid);
  std::vector<RelationParams> d, o;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    d.push_back(Normal{grid.point(i).norm(), 5.0 + i % 7});
    o.push_back(Bernoulli{(i % 5) / 4.0});
  }
  t.add({RelationKind::Distance, "operator"}, d);
  t.add({RelationKind::Over, "park"}, o);
  const hplp::Program rules = hplp::parse(
      "w ~ normal(1, 0.5). landscape(X) :- over(X, park), distance(X, operator) * w < 150; distance(X, operator) < 60.");
  const PmlOptions opts{.mode = inference::Mode::automatic(500, 4)};
  const PMLRaster base = compute_pml(rules, t, tile(grid, 0), opts);
  for (std::size_t s : {1u, 2u})
    for (std::size_t w : {1u, 3u}) {
      PmlOptions o2 = opts;
      o2.workers = w;
      EXPECT_EQ(pml_to_csv(compute_pml(rules, t, tile(grid, s), o2)), pml_to_csv(base));
    }
  for (double v : base.values) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Interpolate, Constant) {
  const PMLRaster r = interpolate(raster(2, 3, std::vector<double>(6, 0.3)), 7, 5);
  EXPECT_EQ(r.values.size(), 35u);
  for (double v : r.values) EXPECT_NEAR(v, 0.3, 1e-15);
}

TEST(Interpolate, LinearRampMidpoint) {
  const PMLRaster r = interpolate(raster(2, 2, {0, 0, 1, 1}), 3, 3);
  for (std::size_t c = 0; c < 3; ++c) {
    EXPECT_EQ(r.at(0, c), 0.0);
    EXPECT_DOUBLE_EQ(r.at(1, c), 0.5);
    EXPECT_EQ(r.at(2, c), 1.0);
  }
}

TEST(Interpolate, IdentityAndDownscale) {
  const PMLRaster a = raster(2, 2, {0.1, 0.2, 0.3, 0.4});
  EXPECT_EQ(interpolate(a, 2, 2).values, a.values);
  EXPECT_THROW(interpolate(a, 1, 2), Error);
}

TEST(Interpolate, StaysInUnitInterval) {
  const PMLRaster r = interpolate(raster(3, 2, {0, 1, 0, 1, 0, 1}), 11, 13);
  for (double v : r.values) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Mse, Examples) {
  const PMLRaster a = raster(2, 2, {0.1, 0.2, 0.3, 0.4});
  EXPECT_EQ(mse(a, a), 0.0);
  EXPECT_DOUBLE_EQ(mse(raster(2, 2, {0, 0, 0, 0}), raster(2, 2, {1, 1, 1, 1})), 1.0);
  EXPECT_DOUBLE_EQ(mse(raster(2, 2, {0, 1, 0, 1}), raster(2, 2, {1, 0, 1, 0})), 1.0);
  EXPECT_DOUBLE_EQ(mse(a, raster(2, 2, {0, 0, 0, 0})), mse(raster(2, 2, {0, 0, 0, 0}), a));
  EXPECT_THROW(mse(a, raster(3, 2, std::vector<double>(6, 0))), Error);
}

TEST(Output, CsvRoundtripIsByteIdentical) {
  const PMLRaster a{{kOrigin, 300, 200, 4, 3}, {0, 0.1, 0.25, 1, 0.5, 0.123456789, 0.9, 0.3, 0.7, 0.2, 0.4, 0.6}};
  const std::string csv = pml_to_csv(a);
  EXPECT_EQ(csv.rfind("row,col,lat,lon,probability\n", 0), 0u);
  EXPECT_NE(csv.find(",0.123457\n"), std::string::npos);
  const PmlCsv back = pml_from_csv(csv);
  EXPECT_EQ(back.raster.grid.res_x, 4u);
  EXPECT_EQ(back.raster.grid.res_y, 3u);
  EXPECT_EQ(pml_to_csv(interpolate(back.raster, 4, 3), back.coordinates), csv);
}

TEST(Output, PgmNorthUpWithThreshold) {
  const PMLRaster a = raster(2, 2, {0.0, 0.2, 0.6, 1.0});
  EXPECT_EQ(pml_to_pgm(a), "P2\n2 2\n255\n153 255\n0 51\n");
  EXPECT_EQ(pml_to_pgm(a, 0.5), "P2\n2 2\n255\n153 255\n0 0\n");
}

TEST(Output, GeoJson) {
  const auto doc = nlohmann::json::parse(pml_to_geojson(raster(2, 2, {0.0, 0.2, 0.6, 1.0})));
  EXPECT_EQ(doc["type"], "FeatureCollection");
  EXPECT_EQ(doc["features"].size(), 4u);
}

TEST(Timings, Schema) {
  const GridSpec grid{kOrigin, 100, 100, 4, 4};
  StageTimings t;
  compute_pml(kParkRule, park_table(grid, std::vector<double>(16, 0.5)), tile(grid, 1), {.workers = 2}, &t);
  EXPECT_EQ(t.locations, 16u);
  EXPECT_EQ(t.workers, 2u);
  for (double v : {t.codegen, t.solve, t.infer, t.total}) EXPECT_GE(v, 0.0);
  EXPECT_LE(t.codegen + t.solve + t.infer, t.total * 1.05 + 1e-3);
  const auto doc = nlohmann::json::parse(t.to_json());
  for (const char* key : {"estimate", "codegen", "solve", "infer"}) EXPECT_TRUE(doc["stages"].contains(key)) << key;
  for (const char* key : {"total", "locations", "workers"}) EXPECT_TRUE(doc.contains(key)) << key;
}
