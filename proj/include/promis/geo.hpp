#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace promis {

/// WGS84 position in degrees.
struct GeoPoint {
  double latitude = 0.0;
  double longitude = 0.0;

  bool operator==(const GeoPoint&) const = default;
};

/// East/north offset in meters from a projection origin.
using LocalPoint = Eigen::Vector2d;

inline constexpr double kEarthRadius = 6'371'000.0;

enum class GeometryKind { Point, Polyline, Polygon };

/// Polygons store a closed ring: front() == back().
struct Geometry {
  GeometryKind kind = GeometryKind::Point;
  std::vector<LocalPoint> vertices;
};

using Tags = std::map<std::string, std::string>;

struct Feature {
  std::string id;
  Geometry geometry;
  Tags tags;

  /// A feature has type `t` if any tag key or tag value equals `t`.
  bool has_type(std::string_view type) const;
};

struct FeatureMap {
  GeoPoint origin;
  std::vector<Feature> features;
};

void validate(const GeoPoint& p);
void validate(const Feature& f);

/// Equirectangular local tangent projection around `origin`.
LocalPoint project(const GeoPoint& origin, const GeoPoint& p);
GeoPoint unproject(const GeoPoint& origin, const LocalPoint& p);

/// GeoJSON FeatureCollection (lon/lat axis order) projected against `origin`.
FeatureMap parse_geojson(std::string_view text, const GeoPoint& origin);

struct OverpassWarning {
  std::string element;
  std::string message;
};

/// Overpass API JSON (`[out:json]`). Relations are flattened to their member ways;
/// skipped members are reported through `warnings` when given.
FeatureMap parse_overpass(std::string_view text, const GeoPoint& origin,
                          std::vector<OverpassWarning>* warnings = nullptr);

/// Canonical feature-map file: local coordinates, tags and the origin.
std::string feature_map_to_json(const FeatureMap& map);
FeatureMap feature_map_from_json(std::string_view text);

}  // namespace promis
