#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "promis/geo.hpp"
#include "promis/grid.hpp"
#include "promis/inference.hpp"
#include "promis/perturb.hpp"
#include "promis/relations.hpp"

namespace promis {

struct RasterIngest {
  std::filesystem::path pgm;
  std::filesystem::path georef;
  std::string name;
};

struct OutputPaths {
  std::filesystem::path table;
  std::filesystem::path csv;
  std::filesystem::path geojson;
  std::filesystem::path pgm;
  std::filesystem::path timings;
  double threshold = 0.0;  // PGM display only
};

/// Serialized description of one end-to-end run. Relative paths are resolved against
/// the directory of the configuration file.
struct RunConfig {
  GeoPoint origin;
  double width_m = 0.0;
  double height_m = 0.0;
  std::size_t res_x = 0;
  std::size_t res_y = 0;
  std::size_t map_samples = 50;
  std::uint64_t seed = 0;
  PerturbationModel perturbation;
  std::filesystem::path map;  // canonical feature-map JSON (output of `ingest`)
  std::vector<Relation> relations;
  std::vector<RasterIngest> rasters;
  std::filesystem::path program;
  std::size_t tiling = 0;
  std::size_t workers = 1;
  inference::Mode mode;
  OutputPaths outputs;

  GridSpec grid() const { return {origin, width_m, height_m, res_x, res_y}; }
  void validate() const;
};

RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir = {});

}  // namespace promis
