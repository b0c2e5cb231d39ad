#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "promis/geo.hpp"
#include "promis/grid.hpp"
#include "promis/perturb.hpp"

namespace promis {

enum class RelationKind { Distance, Over, Unary };

/// A declared spatial relation. `type` is the feature type for Distance/Over and the
/// predicate name for Unary relations.
struct Relation {
  RelationKind kind = RelationKind::Distance;
  std::string type;
  double buffer = 0.0;  // meters; widens `over` to features within this distance

  std::string predicate() const;
  bool operator==(const Relation&) const = default;
};

struct Bernoulli {
  double p = 0.0;
  bool operator==(const Bernoulli&) const = default;
};

/// stddev == 0 denotes a point mass.
struct Normal {
  double mean = 0.0;
  double stddev = 0.0;
  bool operator==(const Normal&) const = default;
};

using RelationParams = std::variant<Bernoulli, Normal>;

struct RelationEntry {
  std::size_t location_index = 0;
  Relation relation;
  RelationParams params;
};

/// Dense storage of one parameter slot per (location, relation).
class RelationTable {
 public:
  RelationTable() = default;
  explicit RelationTable(GridSpec grid) : grid_(grid) {}

  const GridSpec& grid() const { return grid_; }
  const std::vector<Relation>& relations() const { return relations_; }
  std::size_t locations() const { return grid_.size(); }

  /// Appends a relation column. `params` holds one value per grid location.
  void add(Relation relation, std::vector<RelationParams> params);

  const RelationParams& at(std::size_t location, std::size_t relation) const {
    return columns_[relation][location];
  }

  /// All entries of one location, in relation declaration order.
  std::vector<RelationEntry> entries(std::size_t location) const;

 private:
  GridSpec grid_;
  std::vector<Relation> relations_;
  std::vector<std::vector<RelationParams>> columns_;
};

/// Euclidean distance to the closest feature of `type`; throws RelationUndefined if none.
double distance_to_nearest(const FeatureMap& map, const LocalPoint& x, std::string_view type);

/// True if `x` lies inside or on any polygon of `type`, or within `buffer` of any feature
/// of that type when `buffer > 0`.
bool is_over(const FeatureMap& map, const LocalPoint& x, std::string_view type, double buffer = 0.0);

struct EstimateOptions {
  std::size_t samples = 50;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  /// Features inserted unperturbed into every map sample (e.g. the operator position).
  std::vector<Feature> fixed_features;
};

/// Method-of-moments fit of every declared relation at every grid location, using the
/// same N perturbed map variants at all locations.
RelationTable estimate_relations(const FeatureMap& map, const PerturbationModel& model, const GridSpec& grid,
                                 const std::vector<Relation>& declarations, const EstimateOptions& options);

/// 8/16-bit grayscale PGM (P2 or P5).
struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  unsigned max_value = 0;
  std::vector<unsigned> pixels;  // row-major, row 0 at the top

  unsigned at(std::size_t row, std::size_t col) const { return pixels[row * width + col]; }
};

GrayImage parse_pgm(std::string_view bytes);

/// North-up placement of a raster: `origin` is the north-west corner of pixel (0, 0).
struct RasterGeoref {
  GeoPoint origin;
  double pixel_size = 0.0;
  double max_value = 0.0;
};

RasterGeoref parse_georef(std::string_view json_text);

/// Nearest-pixel probabilities (value / max_value) per grid location; 0 outside the raster.
std::vector<RelationParams> ingest_probability_raster(const GrayImage& image, const RasterGeoref& georef,
                                                      const GridSpec& grid);

/// CSV `location_index,relation,type,kind,param1,param2`, 9 significant digits.
std::string relation_table_to_csv(const RelationTable& table);
RelationTable relation_table_from_csv(std::string_view text, const GridSpec& grid);

}  // namespace promis
