#include "promis/pml.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "promis/error.hpp"
#include "promis/hplp/codegen.hpp"
#include "promis/parallel.hpp"

namespace promis {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Splits [begin, end) into 2^splits consecutive parts by repeated halving.
void split_range(std::size_t begin, std::size_t end, std::size_t splits, std::vector<std::pair<std::size_t, std::size_t>>& out) {
  if (splits == 0) {
    out.emplace_back(begin, end);
    return;
  }
  const std::size_t half = (end - begin) / 2;
  split_range(begin, begin + half, splits - 1, out);
  split_range(begin + half, end, splits - 1, out);
}

bool defines_landscape(const hplp::Program& rules) {
  for (const auto& c : rules.clauses) {
    const hplp::Atom* head = nullptr;
    if (const auto* r = std::get_if<hplp::Rule>(&c)) head = &r->head;
    else if (const auto* f = std::get_if<hplp::Fact>(&c)) head = &f->atom;
    else if (const auto* p = std::get_if<hplp::ProbFact>(&c)) head = &p->atom;
    if (head && head->predicate == "landscape" && head->arity() == 1) return true;
  }
  return false;
}

}  // namespace

TilePlan tile(const GridSpec& grid, std::size_t splits) {
  grid.validate();
  if (splits >= 32 || (std::size_t{1} << splits) > std::min(grid.res_x, grid.res_y))
    throw Error(ErrorKind::InvalidArgument, "cannot split a " + std::to_string(grid.res_x) + "x" +
                                                std::to_string(grid.res_y) + " grid " + std::to_string(splits) + " times");
  std::vector<std::pair<std::size_t, std::size_t>> rows, cols;
  split_range(0, grid.res_y, splits, rows);
  split_range(0, grid.res_x, splits, cols);
  TilePlan plan{grid, splits, {}};
  plan.tiles.reserve(rows.size() * cols.size());
  for (const auto& [r0, r1] : rows)
    for (const auto& [c0, c1] : cols) plan.tiles.push_back({r0, r1, c0, c1});
  return plan;
}

std::string StageTimings::to_json() const {
  nlohmann::json doc = {
      {"stages", {{"estimate", estimate}, {"codegen", codegen}, {"solve", solve}, {"infer", infer}}},
      {"total", total},
      {"locations", locations},
      {"workers", workers},
  };
  return doc.dump(2) + "\n";
}

PMLRaster compute_pml(const hplp::Program& rules, const RelationTable& table, const TilePlan& plan,
                      const PmlOptions& options, StageTimings* timings) {
  const GridSpec& grid = plan.grid;
  grid.validate();
  if (!(table.grid() == grid)) throw Error(ErrorKind::Configuration, "relation table grid does not match the PML grid");
  if (!defines_landscape(rules)) throw Error(ErrorKind::Configuration, "mission rules do not define landscape/1");

  struct StageCpu {
    double codegen = 0.0;
    double solve = 0.0;
    double infer = 0.0;
  };
  std::vector<StageCpu> cpu(plan.tiles.size());
  PMLRaster raster{grid, std::vector<double>(grid.size(), 0.0)};
  const auto start = Clock::now();

  parallel_for(plan.tiles.size(), options.workers, [&](std::size_t t) {
    const Tile& window = plan.tiles[t];
    StageCpu& acc = cpu[t];
    for (std::size_t row = window.row_begin; row < window.row_end; ++row) {
      for (std::size_t col = window.col_begin; col < window.col_end; ++col) {
        const std::size_t loc = grid.index(row, col);
        try {
          auto t0 = Clock::now();
          const auto facts = hplp::location_clauses(table, loc);
          const hplp::Atom goal{"landscape", {hplp::Term::constant(hplp::location_constant(loc))}};
          acc.codegen += seconds_since(t0);

          t0 = Clock::now();
          const auto ground = inference::ground(rules, goal, facts);
          acc.solve += seconds_since(t0);

          t0 = Clock::now();
          const auto result = inference::query(ground, {options.mode, loc, options.choice_limit});
          acc.infer += seconds_since(t0);
          raster.values[loc] = result.probability;
        } catch (const Error& e) {
          throw Error(e.kind(), "location " + std::to_string(loc) + ": " + e.what());
        }
      }
    }
  });

  if (timings) {
    const double wall = seconds_since(start);
    StageCpu sum;
    for (const auto& c : cpu) {
      sum.codegen += c.codegen;
      sum.solve += c.solve;
      sum.infer += c.infer;
    }
    // Busy time is summed over workers; scale it down to this call's wall-clock span.
    const double busy = sum.codegen + sum.solve + sum.infer;
    const double scale = busy > 0.0 ? wall / busy : 0.0;
    timings->codegen += sum.codegen * scale;
    timings->solve += sum.solve * scale;
    timings->infer += sum.infer * scale;
    timings->total += wall;
    timings->locations = grid.size();
    timings->workers = std::max<std::size_t>(1, std::min(options.workers, plan.tiles.size()));
  }
  return raster;
}

PMLRaster interpolate(const PMLRaster& raster, std::size_t res_x, std::size_t res_y) {
  const GridSpec& src = raster.grid;
  if (res_x < src.res_x || res_y < src.res_y)
    throw Error(ErrorKind::InvalidArgument, "interpolation only upsamples; target resolution is smaller than the source");
  GridSpec dst = src;
  dst.res_x = res_x;
  dst.res_y = res_y;
  dst.validate();

  PMLRaster out{dst, std::vector<double>(dst.size())};
  for (std::size_t r = 0; r < res_y; ++r) {
    const double y = static_cast<double>(r * (src.res_y - 1)) / static_cast<double>(res_y - 1);
    const std::size_t r0 = std::min(static_cast<std::size_t>(y), src.res_y - 2);
    const double fy = y - static_cast<double>(r0);
    for (std::size_t c = 0; c < res_x; ++c) {
      const double x = static_cast<double>(c * (src.res_x - 1)) / static_cast<double>(res_x - 1);
      const std::size_t c0 = std::min(static_cast<std::size_t>(x), src.res_x - 2);
      const double fx = x - static_cast<double>(c0);
      const double south = (1.0 - fx) * raster.at(r0, c0) + fx * raster.at(r0, c0 + 1);
      const double north = (1.0 - fx) * raster.at(r0 + 1, c0) + fx * raster.at(r0 + 1, c0 + 1);
      out.values[dst.index(r, c)] = std::clamp((1.0 - fy) * south + fy * north, 0.0, 1.0);
    }
  }
  return out;
}

double mse(const PMLRaster& a, const PMLRaster& b) {
  if (a.grid.res_x != b.grid.res_x || a.grid.res_y != b.grid.res_y || a.values.size() != b.values.size())
    throw Error(ErrorKind::InvalidArgument, "cannot compare rasters of different shape");
  if (a.values.empty()) return 0.0;
  return (a.array() - b.array()).square().mean();
}

namespace {

std::string coordinate_text(const GridSpec& grid, std::size_t loc) {
  const GeoPoint p = unproject(grid.origin, grid.point(loc));
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9f,%.9f", p.latitude, p.longitude);
  return buf;
}

double parse_cell(const std::string& s, std::size_t line) {
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size())
    throw ParseError("PML CSV: invalid number '" + s + "' on line " + std::to_string(line), line);
  return v;
}

}  // namespace

std::string pml_to_csv(const PMLRaster& raster) {
  std::vector<std::string> coordinates(raster.grid.size());
  for (std::size_t i = 0; i < coordinates.size(); ++i) coordinates[i] = coordinate_text(raster.grid, i);
  return pml_to_csv(raster, coordinates);
}

std::string pml_to_csv(const PMLRaster& raster, const std::vector<std::string>& coordinates) {
  std::string out = "row,col,lat,lon,probability\n";
  char buf[64];
  for (std::size_t i = 0; i < raster.values.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.6f", raster.values[i]);
    out += std::to_string(raster.grid.row_of(i)) + "," + std::to_string(raster.grid.col_of(i)) + "," + coordinates[i] +
           "," + buf + "\n";
  }
  return out;
}

PmlCsv pml_from_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != "row,col,lat,lon,probability")
    throw ParseError("PML CSV: missing or unexpected header", 1);

  struct Row {
    std::size_t row, col;
    double lat, lon, p;
    std::string coords;
  };
  std::vector<Row> rows;
  std::size_t line_no = 1, res_x = 0, res_y = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != 5) throw ParseError("PML CSV: expected 5 columns on line " + std::to_string(line_no), line_no);
    Row r{static_cast<std::size_t>(parse_cell(cells[0], line_no)), static_cast<std::size_t>(parse_cell(cells[1], line_no)),
          parse_cell(cells[2], line_no), parse_cell(cells[3], line_no), parse_cell(cells[4], line_no),
          cells[2] + "," + cells[3]};
    if (!(r.p >= 0.0 && r.p <= 1.0)) throw ParseError("PML CSV: probability outside [0, 1] on line " + std::to_string(line_no), line_no);
    res_x = std::max(res_x, r.col + 1);
    res_y = std::max(res_y, r.row + 1);
    rows.push_back(std::move(r));
  }
  if (res_x < 2 || res_y < 2 || rows.size() != res_x * res_y)
    throw ParseError("PML CSV: rows do not form a complete grid of at least 2x2");

  std::vector<const Row*> at(rows.size(), nullptr);
  for (const auto& r : rows) {
    auto& slot = at[r.row * res_x + r.col];
    if (slot) throw ParseError("PML CSV: duplicate cell " + std::to_string(r.row) + "," + std::to_string(r.col));
    slot = &r;
  }
  const Row& sw = *at.front();
  const Row& ne = *at.back();
  GridSpec grid;
  grid.origin = {(sw.lat + ne.lat) / 2.0, (sw.lon + ne.lon) / 2.0};
  grid.res_x = res_x;
  grid.res_y = res_y;
  const double meters_per_degree = std::numbers::pi / 180.0 * kEarthRadius;
  grid.height = (ne.lat - sw.lat) * meters_per_degree;
  grid.width = (ne.lon - sw.lon) * meters_per_degree * std::cos(grid.origin.latitude * std::numbers::pi / 180.0);
  grid.validate();

  PmlCsv out{{grid, std::vector<double>(rows.size())}, std::vector<std::string>(rows.size())};
  for (std::size_t i = 0; i < at.size(); ++i) {
    out.raster.values[i] = at[i]->p;
    out.coordinates[i] = at[i]->coords;
  }
  return out;
}

std::string pml_to_geojson(const PMLRaster& raster) {
  nlohmann::json features = nlohmann::json::array();
  for (std::size_t i = 0; i < raster.values.size(); ++i) {
    const GeoPoint p = unproject(raster.grid.origin, raster.grid.point(i));
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "Point"}, {"coordinates", {p.longitude, p.latitude}}}},
                        {"properties",
                         {{"probability", raster.values[i]}, {"row", raster.grid.row_of(i)}, {"col", raster.grid.col_of(i)}}}});
  }
  nlohmann::json doc = {{"type", "FeatureCollection"}, {"features", std::move(features)}};
  return doc.dump() + "\n";
}

std::string pml_to_pgm(const PMLRaster& raster, double threshold) {
  const GridSpec& g = raster.grid;
  std::string out = "P2\n" + std::to_string(g.res_x) + " " + std::to_string(g.res_y) + "\n255\n";
  for (std::size_t r = g.res_y; r-- > 0;) {
    for (std::size_t c = 0; c < g.res_x; ++c) {
      const double p = raster.at(r, c);
      const long v = p < threshold ? 0 : std::lround(p * 255.0);
      out += std::to_string(v);
      out += c + 1 == g.res_x ? '\n' : ' ';
    }
  }
  return out;
}

}  // namespace promis
