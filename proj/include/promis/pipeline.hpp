#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "promis/config.hpp"
#include "promis/relations.hpp"

namespace promis {

/// Whole-file read; a missing or unreadable file is a configuration error.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

/// Noise-free operator point at the grid centre, in the frame of `map`.
Feature operator_feature(const FeatureMap& map, const GridSpec& grid);

/// Estimated relation columns plus ingested raster columns. The operator point is added
/// when a declaration refers to `operator` and the map has no such feature.
RelationTable build_relation_table(const FeatureMap& map, const RunConfig& config, std::size_t workers);
RelationTable build_relation_table(const RunConfig& config, std::size_t workers);

}  // namespace promis
