#include "promis/relations.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <cctype>
#include <sstream>

#include <nlohmann/json.hpp>

#include "promis/error.hpp"
#include "promis/geometry.hpp"
#include "promis/parallel.hpp"

namespace promis {

std::string Relation::predicate() const {
  switch (kind) {
    case RelationKind::Distance: return "distance";
    case RelationKind::Over: return "over";
    case RelationKind::Unary: return type;
  }
  return type;
}

void RelationTable::add(Relation relation, std::vector<RelationParams> params) {
  if (params.size() != grid_.size())
    throw Error(ErrorKind::InvalidArgument, "relation column size does not match the grid");
  for (const auto& p : params) {
    const bool bernoulli = std::holds_alternative<Bernoulli>(p);
    if (bernoulli == (relation.kind == RelationKind::Distance))
      throw Error(ErrorKind::InvalidArgument, "distance relations carry normal parameters, others bernoulli");
    if (bernoulli) {
      const double v = std::get<Bernoulli>(p).p;
      if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorKind::InvalidArgument, "probability outside [0, 1]");
    } else if (!(std::get<Normal>(p).stddev >= 0.0)) {
      throw Error(ErrorKind::InvalidArgument, "negative standard deviation");
    }
  }
  relations_.push_back(std::move(relation));
  columns_.push_back(std::move(params));
}

std::vector<RelationEntry> RelationTable::entries(std::size_t location) const {
  std::vector<RelationEntry> out;
  out.reserve(relations_.size());
  for (std::size_t r = 0; r < relations_.size(); ++r) out.push_back({location, relations_[r], columns_[r][location]});
  return out;
}

double distance_to_nearest(const FeatureMap& map, const LocalPoint& x, std::string_view type) {
  double best = std::numeric_limits<double>::infinity();
  bool found = false;
  for (const auto& f : map.features) {
    if (!f.has_type(type)) continue;
    found = true;
    best = std::min(best, geometry::distance(x, f.geometry));
  }
  if (!found)
    throw Error(ErrorKind::RelationUndefined, "no feature of type '" + std::string(type) + "' in the map");
  return best;
}

bool is_over(const FeatureMap& map, const LocalPoint& x, std::string_view type, double buffer) {
  for (const auto& f : map.features) {
    if (!f.has_type(type)) continue;
    const std::span<const LocalPoint> v(f.geometry.vertices);
    if (f.geometry.kind == GeometryKind::Polygon && geometry::ring_contains(x, v)) return true;
    if (buffer > 0.0 && geometry::point_chain_distance(x, v) <= buffer) return true;
  }
  return false;
}

namespace {

// Matching geometries of one sample with their bounds, for pruned nearest queries.
struct TypedLayer {
  std::vector<const Geometry*> geometries;
  std::vector<Eigen::AlignedBox2d> boxes;
};

double layer_distance(const TypedLayer& layer, const LocalPoint& x) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < layer.geometries.size(); ++i) {
    if (layer.boxes[i].exteriorDistance(x) >= best) continue;
    best = std::min(best, geometry::distance(x, *layer.geometries[i]));
  }
  return best;
}

bool layer_over(const TypedLayer& layer, const LocalPoint& x, double buffer) {
  for (std::size_t i = 0; i < layer.geometries.size(); ++i) {
    const Geometry& g = *layer.geometries[i];
    if (layer.boxes[i].exteriorDistance(x) > buffer) continue;
    const std::span<const LocalPoint> v(g.vertices);
    if (g.kind == GeometryKind::Polygon && geometry::ring_contains(x, v)) return true;
    if (buffer > 0.0 && geometry::point_chain_distance(x, v) <= buffer) return true;
  }
  return false;
}

Normal fit_normal(std::span<const double> values) {
  const double first = values.front();
  if (std::all_of(values.begin(), values.end(), [&](double v) { return v == first; })) return {first, 0.0};
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

}  // namespace

RelationTable estimate_relations(const FeatureMap& map, const PerturbationModel& model, const GridSpec& grid,
                                 const std::vector<Relation>& declarations, const EstimateOptions& options) {
  grid.validate();
  model.validate();
  const bool needs_variance = std::any_of(declarations.begin(), declarations.end(),
                                          [](const Relation& r) { return r.kind == RelationKind::Distance; });
  if (options.samples < 1 || (needs_variance && options.samples < 2))
    throw Error(ErrorKind::InvalidArgument,
                needs_variance ? "N must be >= 2 for distance relations" : "N must be >= 1");

  auto samples = sample_maps(map, model, options.seed, options.samples);
  for (auto& s : samples)
    for (const auto& f : options.fixed_features) s.variant.features.push_back(f);

  for (const auto& d : declarations) {
    if (d.kind == RelationKind::Unary)
      throw Error(ErrorKind::InvalidArgument, "unary relation '" + d.type + "' is ingested from a raster, not estimated");
    if (d.kind != RelationKind::Distance) continue;
    const auto& features = samples.front().variant.features;
    if (std::none_of(features.begin(), features.end(), [&](const Feature& f) { return f.has_type(d.type); }))
      throw Error(ErrorKind::RelationUndefined, "no feature of type '" + d.type + "' in the map");
  }

  // layers[r][n]: features of declaration r in sample n
  std::vector<std::vector<TypedLayer>> layers(declarations.size(), std::vector<TypedLayer>(samples.size()));
  for (std::size_t r = 0; r < declarations.size(); ++r)
    for (std::size_t n = 0; n < samples.size(); ++n)
      for (const auto& f : samples[n].variant.features)
        if (f.has_type(declarations[r].type)) {
          layers[r][n].geometries.push_back(&f.geometry);
          layers[r][n].boxes.push_back(geometry::bounds(f.geometry));
        }

  const bool same_origin = grid.origin == map.origin;
  std::vector<std::vector<RelationParams>> columns(declarations.size(),
                                                   std::vector<RelationParams>(grid.size()));
  parallel_for(grid.size(), options.workers, [&](std::size_t loc) {
    const LocalPoint x = same_origin ? grid.point(loc) : project(map.origin, unproject(grid.origin, grid.point(loc)));
    std::vector<double> values(samples.size());
    for (std::size_t r = 0; r < declarations.size(); ++r) {
      const Relation& decl = declarations[r];
      if (decl.kind == RelationKind::Distance) {
        for (std::size_t n = 0; n < samples.size(); ++n) values[n] = layer_distance(layers[r][n], x);
        columns[r][loc] = fit_normal(values);
      } else {
        std::size_t hits = 0;
        for (std::size_t n = 0; n < samples.size(); ++n) hits += layer_over(layers[r][n], x, decl.buffer) ? 1 : 0;
        columns[r][loc] = Bernoulli{static_cast<double>(hits) / static_cast<double>(samples.size())};
      }
    }
  });

  RelationTable table(grid);
  for (std::size_t r = 0; r < declarations.size(); ++r) table.add(declarations[r], std::move(columns[r]));
  return table;
}

GrayImage parse_pgm(std::string_view bytes) {
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_uint = [&](const char* what) {
    skip_space();
    unsigned long value = 0;
    const auto [end, ec] = std::from_chars(bytes.data() + pos, bytes.data() + bytes.size(), value);
    if (ec != std::errc() || end == bytes.data() + pos)
      throw ParseError(std::string("malformed PGM: expected ") + what, 0, 0, pos);
    pos = static_cast<std::size_t>(end - bytes.data());
    return value;
  };

  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5'))
    throw ParseError("malformed PGM: missing P2/P5 magic");
  const bool binary = bytes[1] == '5';
  pos = 2;
  GrayImage image;
  image.width = read_uint("width");
  image.height = read_uint("height");
  const unsigned long max_value = read_uint("max value");
  if (image.width == 0 || image.height == 0 || max_value == 0 || max_value > 65535)
    throw ParseError("malformed PGM: invalid dimensions or max value");
  image.max_value = static_cast<unsigned>(max_value);
  const std::size_t count = image.width * image.height;
  image.pixels.resize(count);

  if (!binary) {
    for (auto& p : image.pixels) p = static_cast<unsigned>(read_uint("pixel value"));
  } else {
    if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos])))
      throw ParseError("malformed PGM: missing header terminator", 0, 0, pos);
    ++pos;
    const std::size_t depth = max_value > 255 ? 2 : 1;
    if (bytes.size() - pos < count * depth) throw ParseError("malformed PGM: truncated pixel data", 0, 0, pos);
    for (std::size_t i = 0; i < count; ++i) {
      const auto* b = reinterpret_cast<const unsigned char*>(bytes.data() + pos + i * depth);
      image.pixels[i] = depth == 2 ? (static_cast<unsigned>(b[0]) << 8) | b[1] : b[0];
    }
  }
  for (auto p : image.pixels)
    if (p > image.max_value) throw ParseError("malformed PGM: pixel exceeds max value");
  return image;
}

RasterGeoref parse_georef(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed georef: ") + e.what(), 0, 0, e.byte);
  }
  auto field = [&](const char* name) {
    if (!doc.is_object() || !doc.contains(name) || !doc[name].is_number())
      throw Error(ErrorKind::Configuration, std::string("georef is missing numeric field '") + name + "'");
    return doc[name].get<double>();
  };
  RasterGeoref g{{field("origin_lat"), field("origin_lon")}, field("pixel_size_m"), field("max_value")};
  validate(g.origin);
  if (!(g.pixel_size > 0.0) || !(g.max_value > 0.0))
    throw Error(ErrorKind::Configuration, "georef pixel_size_m and max_value must be > 0");
  return g;
}

std::vector<RelationParams> ingest_probability_raster(const GrayImage& image, const RasterGeoref& georef,
                                                      const GridSpec& grid) {
  grid.validate();
  std::vector<RelationParams> out(grid.size(), Bernoulli{0.0});
  for (std::size_t loc = 0; loc < grid.size(); ++loc) {
    const LocalPoint x = project(georef.origin, unproject(grid.origin, grid.point(loc)));
    const double col = std::floor(x.x() / georef.pixel_size);
    const double row = std::floor(-x.y() / georef.pixel_size);
    if (col < 0 || row < 0 || col >= static_cast<double>(image.width) || row >= static_cast<double>(image.height))
      continue;
    const double value = image.at(static_cast<std::size_t>(row), static_cast<std::size_t>(col));
    out[loc] = Bernoulli{std::clamp(value / georef.max_value, 0.0, 1.0)};
  }
  return out;
}

namespace {

std::string format9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

const char* kind_name(RelationKind k) {
  switch (k) {
    case RelationKind::Distance: return "distance";
    case RelationKind::Over: return "over";
    case RelationKind::Unary: return "unary";
  }
  return "unary";
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, std::size_t line) {
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size())
    throw ParseError("relation table: invalid number '" + s + "' on line " + std::to_string(line), line);
  return v;
}

}  // namespace

std::string relation_table_to_csv(const RelationTable& table) {
  std::string out = "location_index,relation,type,kind,param1,param2\n";
  for (std::size_t loc = 0; loc < table.locations(); ++loc) {
    for (std::size_t r = 0; r < table.relations().size(); ++r) {
      const auto& rel = table.relations()[r];
      out += std::to_string(loc) + "," + kind_name(rel.kind) + "," + rel.type + ",";
      const auto& p = table.at(loc, r);
      if (const auto* b = std::get_if<Bernoulli>(&p))
        out += "bernoulli," + format9(b->p) + ",\n";
      else
        out += "normal," + format9(std::get<Normal>(p).mean) + "," + format9(std::get<Normal>(p).stddev) + "\n";
    }
  }
  return out;
}

RelationTable relation_table_from_csv(std::string_view text, const GridSpec& grid) {
  grid.validate();
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != "location_index,relation,type,kind,param1,param2")
    throw ParseError("relation table: missing or unexpected header", 1);

  std::vector<Relation> relations;
  std::map<std::pair<int, std::string>, std::size_t> column_of;
  std::vector<std::vector<std::optional<RelationParams>>> columns;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 6) throw ParseError("relation table: expected 6 columns on line " + std::to_string(line_no), line_no);
    const auto loc = static_cast<std::size_t>(parse_double(cells[0], line_no));
    if (loc >= grid.size())
      throw Error(ErrorKind::Configuration, "relation table location " + cells[0] + " is outside the grid");
    Relation rel;
    if (cells[1] == "distance") rel.kind = RelationKind::Distance;
    else if (cells[1] == "over") rel.kind = RelationKind::Over;
    else if (cells[1] == "unary") rel.kind = RelationKind::Unary;
    else throw ParseError("relation table: unknown relation '" + cells[1] + "'", line_no);
    rel.type = cells[2];
    const auto key = std::make_pair(static_cast<int>(rel.kind), rel.type);
    auto [it, inserted] = column_of.emplace(key, relations.size());
    if (inserted) {
      relations.push_back(rel);
      columns.emplace_back(grid.size());
    }
    RelationParams params;
    if (cells[3] == "bernoulli") params = Bernoulli{parse_double(cells[4], line_no)};
    else if (cells[3] == "normal") params = Normal{parse_double(cells[4], line_no), parse_double(cells[5], line_no)};
    else throw ParseError("relation table: unknown kind '" + cells[3] + "'", line_no);
    columns[it->second][loc] = params;
  }

  RelationTable table(grid);
  for (std::size_t r = 0; r < relations.size(); ++r) {
    std::vector<RelationParams> column;
    column.reserve(grid.size());
    for (std::size_t loc = 0; loc < grid.size(); ++loc) {
      if (!columns[r][loc])
        throw Error(ErrorKind::Configuration, "relation table has no entry for " + relations[r].predicate() + "/" +
                                                  relations[r].type + " at location " + std::to_string(loc));
      column.push_back(*columns[r][loc]);
    }
    try {
      table.add(relations[r], std::move(column));
    } catch (const Error& e) {
      throw ParseError(std::string("relation table: ") + e.what());
    }
  }
  return table;
}

}  // namespace promis
