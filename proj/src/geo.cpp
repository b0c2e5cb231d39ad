#include "promis/geo.hpp"

#include <cmath>
#include <numbers>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "promis/error.hpp"

namespace promis {

using nlohmann::json;

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

// Local tangent validity: the projection is only used for desk-scale regions.
constexpr double kMaxLatitudeSpan = 1.0;

bool is_closed(const std::vector<LocalPoint>& ring) {
  return ring.size() >= 2 && ring.front() == ring.back();
}

[[noreturn]] void rethrow_json(const json::parse_error& e, const char* what) {
  throw ParseError(std::string(what) + ": " + e.what() + " (byte " + std::to_string(e.byte) + ")",
                   0, 0, e.byte);
}

std::string tag_value(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

Tags read_tags(const json& object) {
  Tags tags;
  if (!object.is_object()) return tags;
  for (const auto& [key, value] : object.items()) {
    if (key.empty() || value.is_null() || value.is_object() || value.is_array()) continue;
    tags.emplace(key, tag_value(value));
  }
  return tags;
}

GeoPoint lonlat(const json& position) {
  if (!position.is_array() || position.size() < 2 || !position[0].is_number() ||
      !position[1].is_number())
    throw Error(ErrorKind::Parse, "GeoJSON position must be [lon, lat]");
  return GeoPoint{position[1].get<double>(), position[0].get<double>()};
}

std::vector<LocalPoint> project_all(const GeoPoint& origin, const json& positions) {
  if (!positions.is_array()) throw Error(ErrorKind::Parse, "GeoJSON coordinates must be an array");
  std::vector<LocalPoint> out;
  out.reserve(positions.size());
  for (const auto& p : positions) out.push_back(project(origin, lonlat(p)));
  return out;
}

// Tags that make a closed way an area rather than a ring-shaped line.
bool is_area(const Tags& tags) {
  static const std::unordered_set<std::string> area_keys = {
      "building", "landuse", "leisure", "natural", "amenity", "water", "place", "aeroway"};
  if (auto it = tags.find("area"); it != tags.end()) return it->second == "yes";
  if (auto it = tags.find("type"); it != tags.end() && it->second == "multipolygon") return true;
  for (const auto& [key, value] : tags) {
    if (area_keys.contains(key)) return true;
    if (key == "waterway" && value == "riverbank") return true;
  }
  return false;
}

}  // namespace

bool Feature::has_type(std::string_view type) const {
  for (const auto& [key, value] : tags)
    if (key == type || value == type) return true;
  return false;
}

void validate(const GeoPoint& p) {
  if (!std::isfinite(p.latitude) || !std::isfinite(p.longitude) || p.latitude < -90.0 ||
      p.latitude > 90.0 || p.longitude < -180.0 || p.longitude > 180.0)
    throw Error(ErrorKind::InvalidCoordinate, "invalid coordinate (" + std::to_string(p.latitude) +
                                                  ", " + std::to_string(p.longitude) + ")");
}

void validate(const Feature& f) {
  const auto& v = f.geometry.vertices;
  switch (f.geometry.kind) {
    case GeometryKind::Point:
      if (v.size() != 1) throw Error(ErrorKind::Parse, "point feature " + f.id + " needs one vertex");
      break;
    case GeometryKind::Polyline:
      if (v.size() < 2)
        throw Error(ErrorKind::Parse, "polyline feature " + f.id + " needs at least 2 vertices");
      break;
    case GeometryKind::Polygon:
      if (v.size() < 4 || !is_closed(v))
        throw Error(ErrorKind::Parse, "polygon feature " + f.id + " needs a closed ring of >= 4 vertices");
      break;
  }
  for (const auto& p : v)
    if (!p.allFinite()) throw Error(ErrorKind::InvalidCoordinate, "non-finite vertex in " + f.id);
  for (const auto& [key, value] : f.tags)
    if (key.empty()) throw Error(ErrorKind::Parse, "empty tag key in " + f.id);
}

LocalPoint project(const GeoPoint& origin, const GeoPoint& p) {
  validate(origin);
  validate(p);
  if (std::abs(p.latitude - origin.latitude) > kMaxLatitudeSpan)
    throw Error(ErrorKind::InvalidCoordinate, "point too far from projection origin for a local tangent plane");
  const double north = (p.latitude - origin.latitude) * kDegToRad * kEarthRadius;
  const double east =
      (p.longitude - origin.longitude) * kDegToRad * kEarthRadius * std::cos(origin.latitude * kDegToRad);
  return {east, north};
}

GeoPoint unproject(const GeoPoint& origin, const LocalPoint& p) {
  validate(origin);
  const double lat = origin.latitude + p.y() / (kDegToRad * kEarthRadius);
  const double lon =
      origin.longitude + p.x() / (kDegToRad * kEarthRadius * std::cos(origin.latitude * kDegToRad));
  return {lat, lon};
}

namespace {

FeatureMap parse_geojson_document(std::string_view text, const GeoPoint& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    rethrow_json(e, "malformed GeoJSON");
  }
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" || !doc.contains("features") ||
      !doc["features"].is_array())
    throw Error(ErrorKind::Parse, "GeoJSON input is not a FeatureCollection");

  validate(origin);
  FeatureMap map{origin, {}};
  std::size_t index = 0;
  for (const auto& item : doc["features"]) {
    Feature f;
    if (item.contains("id") && !item["id"].is_null())
      f.id = tag_value(item["id"]);
    else
      f.id = "feature/" + std::to_string(index);
    ++index;
    if (item.contains("properties")) f.tags = read_tags(item["properties"]);

    const json& geom = item.value("geometry", json());
    if (!geom.is_object()) throw Error(ErrorKind::Parse, "feature " + f.id + " has no geometry");
    const std::string type = geom.value("type", "");
    const json& coords = geom.value("coordinates", json());
    if (type == "Point") {
      f.geometry = {GeometryKind::Point, {project(origin, lonlat(coords))}};
    } else if (type == "LineString") {
      f.geometry = {GeometryKind::Polyline, project_all(origin, coords)};
    } else if (type == "Polygon") {
      if (!coords.is_array() || coords.empty())
        throw Error(ErrorKind::Parse, "polygon feature " + f.id + " has no rings");
      // Holes are dropped; only the outer ring carries area for `over`.
      f.geometry = {GeometryKind::Polygon, project_all(origin, coords[0])};
    } else {
      throw Error(ErrorKind::UnsupportedGeometry,
                  "unsupported geometry type '" + type + "' in feature " + f.id);
    }
    validate(f);
    map.features.push_back(std::move(f));
  }
  return map;
}

}  // namespace

FeatureMap parse_geojson(std::string_view text, const GeoPoint& origin) {
  try {
    return parse_geojson_document(text, origin);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("invalid GeoJSON: ") + e.what());
  }
}

namespace {

FeatureMap parse_overpass_document(std::string_view text, const GeoPoint& origin,
                                   std::vector<OverpassWarning>* warnings) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    rethrow_json(e, "malformed Overpass JSON");
  }
  if (!doc.is_object() || !doc.contains("elements") || !doc["elements"].is_array())
    throw Error(ErrorKind::Parse, "Overpass JSON has no 'elements' array");
  validate(origin);

  const json& elements = doc["elements"];
  std::unordered_map<long long, GeoPoint> nodes;
  std::unordered_map<long long, const json*> ways;
  for (const auto& e : elements) {
    const std::string type = e.value("type", "");
    if (type == "node") {
      if (!e.contains("lat") || !e.contains("lon"))
        throw Error(ErrorKind::Parse, "node " + e.value("id", json(0)).dump() + " has no lat/lon");
      nodes[e.at("id").get<long long>()] = GeoPoint{e["lat"].get<double>(), e["lon"].get<double>()};
    } else if (type == "way") {
      ways[e.at("id").get<long long>()] = &e;
    }
  }

  auto way_vertices = [&](const json& way) {
    const long long id = way.at("id").get<long long>();
    std::vector<LocalPoint> out;
    for (const auto& ref : way.value("nodes", json::array())) {
      const long long node = ref.get<long long>();
      auto it = nodes.find(node);
      if (it == nodes.end())
        throw Error(ErrorKind::Resolution,
                    "way " + std::to_string(id) + " references unknown node " + std::to_string(node));
      out.push_back(project(origin, it->second));
    }
    return out;
  };
  auto make_way_feature = [&](std::string id, std::vector<LocalPoint> vertices, Tags tags) {
    Feature f{std::move(id), {}, std::move(tags)};
    const bool closed = vertices.size() >= 4 && is_closed(vertices);
    f.geometry = {closed && is_area(f.tags) ? GeometryKind::Polygon : GeometryKind::Polyline,
                  std::move(vertices)};
    validate(f);
    return f;
  };
  auto warn = [&](std::string element, std::string message) {
    if (warnings) warnings->push_back({std::move(element), std::move(message)});
  };

  FeatureMap map{origin, {}};
  for (const auto& e : elements) {
    const std::string type = e.value("type", "");
    const Tags tags = read_tags(e.value("tags", json::object()));
    if (type == "node") {
      if (tags.empty()) continue;
      const std::string id = "node/" + std::to_string(e["id"].get<long long>());
      map.features.push_back(
          {id, {GeometryKind::Point, {project(origin, nodes.at(e["id"].get<long long>()))}}, tags});
    } else if (type == "way") {
      if (tags.empty()) continue;
      auto vertices = way_vertices(e);
      const std::string id = "way/" + std::to_string(e["id"].get<long long>());
      if (vertices.size() < 2) {
        warn(id, "way with fewer than 2 nodes skipped");
        continue;
      }
      map.features.push_back(make_way_feature(id, std::move(vertices), tags));
    } else if (type == "relation") {
      const std::string rel_id = "relation/" + std::to_string(e.at("id").get<long long>());
      for (const auto& member : e.value("members", json::array())) {
        const std::string member_type = member.value("type", "");
        const long long ref = member.value("ref", 0LL);
        const std::string member_id = rel_id + "/" + member_type + "/" + std::to_string(ref);
        if (member_type != "way") {
          warn(member_id, "non-way relation member skipped");
          continue;
        }
        auto it = ways.find(ref);
        if (it == ways.end()) {
          warn(member_id, "relation member way not present in export");
          continue;
        }
        Tags merged = tags;
        for (const auto& [k, v] : read_tags(it->second->value("tags", json::object()))) merged.emplace(k, v);
        auto vertices = way_vertices(*it->second);
        if (vertices.size() < 2) {
          warn(member_id, "member way with fewer than 2 nodes skipped");
          continue;
        }
        map.features.push_back(make_way_feature(member_id, std::move(vertices), std::move(merged)));
      }
    }
  }
  return map;
}

}  // namespace

FeatureMap parse_overpass(std::string_view text, const GeoPoint& origin,
                          std::vector<OverpassWarning>* warnings) {
  try {
    return parse_overpass_document(text, origin, warnings);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("invalid Overpass element: ") + e.what());
  }
}

namespace {

const char* kind_name(GeometryKind k) {
  switch (k) {
    case GeometryKind::Point: return "Point";
    case GeometryKind::Polyline: return "Polyline";
    case GeometryKind::Polygon: return "Polygon";
  }
  return "Point";
}

}  // namespace

std::string feature_map_to_json(const FeatureMap& map) {
  json doc;
  doc["origin"] = {{"lat", map.origin.latitude}, {"lon", map.origin.longitude}};
  doc["features"] = json::array();
  for (const auto& f : map.features) {
    json coords = json::array();
    for (const auto& v : f.geometry.vertices) coords.push_back({v.x(), v.y()});
    doc["features"].push_back({{"id", f.id},
                               {"geometry", {{"type", kind_name(f.geometry.kind)}, {"coordinates", coords}}},
                               {"tags", f.tags}});
  }
  return doc.dump(1) + "\n";
}

FeatureMap feature_map_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    rethrow_json(e, "malformed feature map");
  }
  try {
    FeatureMap map;
    map.origin = {doc.at("origin").at("lat").get<double>(), doc.at("origin").at("lon").get<double>()};
    validate(map.origin);
    for (const auto& item : doc.at("features")) {
      Feature f;
      f.id = item.at("id").get<std::string>();
      const std::string kind = item.at("geometry").at("type").get<std::string>();
      if (kind == "Point") f.geometry.kind = GeometryKind::Point;
      else if (kind == "Polyline") f.geometry.kind = GeometryKind::Polyline;
      else if (kind == "Polygon") f.geometry.kind = GeometryKind::Polygon;
      else throw Error(ErrorKind::UnsupportedGeometry, "unsupported geometry '" + kind + "' in " + f.id);
      for (const auto& c : item.at("geometry").at("coordinates"))
        f.geometry.vertices.emplace_back(c.at(0).get<double>(), c.at(1).get<double>());
      f.tags = item.value("tags", Tags{});
      validate(f);
      map.features.push_back(std::move(f));
    }
    return map;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("invalid feature map: ") + e.what());
  }
}

}  // namespace promis
