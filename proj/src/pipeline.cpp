#include "promis/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "promis/error.hpp"

namespace promis {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Configuration, "cannot open '" + path.string() + "'");
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Configuration, "cannot write '" + path.string() + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorKind::Configuration, "failed writing '" + path.string() + "'");
}

Feature operator_feature(const FeatureMap& map, const GridSpec& grid) {
  return {"operator", {GeometryKind::Point, {project(map.origin, grid.origin)}}, {{"operator", "yes"}}};
}

RelationTable build_relation_table(const FeatureMap& map, const RunConfig& config, std::size_t workers) {
  const GridSpec grid = config.grid();
  EstimateOptions options{config.map_samples, config.seed, workers, {}};
  const bool wants_operator = std::any_of(config.relations.begin(), config.relations.end(),
                                          [](const Relation& r) { return r.type == "operator"; });
  const bool has_operator = std::any_of(map.features.begin(), map.features.end(),
                                        [](const Feature& f) { return f.has_type("operator"); });
  if (wants_operator && !has_operator) options.fixed_features.push_back(operator_feature(map, grid));

  RelationTable table(grid);
  if (!config.relations.empty()) table = estimate_relations(map, config.perturbation, grid, config.relations, options);
  for (const RasterIngest& r : config.rasters) {
    const GrayImage image = parse_pgm(read_file(r.pgm));
    const RasterGeoref georef = parse_georef(read_file(r.georef));
    table.add({RelationKind::Unary, r.name}, ingest_probability_raster(image, georef, grid));
  }
  return table;
}

RelationTable build_relation_table(const RunConfig& config, std::size_t workers) {
  if (config.relations.empty()) return build_relation_table(FeatureMap{config.origin, {}}, config, workers);
  if (config.map.empty()) throw Error(ErrorKind::Configuration, "relations are declared but no map is configured");
  return build_relation_table(feature_map_from_json(read_file(config.map)), config, workers);
}

}  // namespace promis
