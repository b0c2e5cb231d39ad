#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "promis/grid.hpp"
#include "promis/hplp/ast.hpp"
#include "promis/inference.hpp"
#include "promis/relations.hpp"

namespace promis {

/// Row-major probabilities over a grid.
struct PMLRaster {
  GridSpec grid;
  std::vector<double> values;

  Eigen::Map<const Eigen::ArrayXd> array() const {
    return {values.data(), static_cast<Eigen::Index>(values.size())};
  }
  double at(std::size_t row, std::size_t col) const { return values[grid.index(row, col)]; }
};

/// Half-open index window [row_begin, row_end) x [col_begin, col_end) of the parent grid.
struct Tile {
  std::size_t row_begin = 0;
  std::size_t row_end = 0;
  std::size_t col_begin = 0;
  std::size_t col_end = 0;

  std::size_t rows() const { return row_end - row_begin; }
  std::size_t cols() const { return col_end - col_begin; }
  bool operator==(const Tile&) const = default;
};

struct TilePlan {
  GridSpec grid;
  std::size_t splits = 0;
  std::vector<Tile> tiles;  // 4^splits windows, disjoint, covering the grid
};

/// Splits the grid `splits` times into four parts; odd extents give the remainder to the
/// last part along each axis.
TilePlan tile(const GridSpec& grid, std::size_t splits);

/// Wall-clock seconds per pipeline stage.
struct StageTimings {
  double estimate = 0.0;
  double codegen = 0.0;
  double solve = 0.0;  // grounding
  double infer = 0.0;  // world enumeration and probability evaluation
  double total = 0.0;
  std::size_t locations = 0;
  std::size_t workers = 0;

  std::string to_json() const;
};

struct PmlOptions {
  inference::Mode mode;
  std::size_t workers = 1;
  std::size_t choice_limit = inference::kDefaultChoiceLimit;
};

/// Evaluates `landscape(x<i>)` at every location of `plan.grid` against the mission rules
/// plus the relation facts of that location. Deterministic for any plan and worker count.
PMLRaster compute_pml(const hplp::Program& rules, const RelationTable& table, const TilePlan& plan,
                      const PmlOptions& options, StageTimings* timings = nullptr);

/// Corner-aligned bilinear upsampling.
PMLRaster interpolate(const PMLRaster& raster, std::size_t res_x, std::size_t res_y);

double mse(const PMLRaster& a, const PMLRaster& b);

/// `row,col,lat,lon,probability` with six-decimal probabilities.
std::string pml_to_csv(const PMLRaster& raster);

struct PmlCsv {
  PMLRaster raster;
  std::vector<std::string> coordinates;  // "lat,lon" text per location
};

PmlCsv pml_from_csv(std::string_view text);
/// Writes with previously read lat/lon text instead of recomputing it from the grid.
std::string pml_to_csv(const PMLRaster& raster, const std::vector<std::string>& coordinates);

std::string pml_to_geojson(const PMLRaster& raster);

/// P2 grayscale, value = round(p * 255), north at the top. Values below `threshold` are written as 0.
std::string pml_to_pgm(const PMLRaster& raster, double threshold = 0.0);

}  // namespace promis
