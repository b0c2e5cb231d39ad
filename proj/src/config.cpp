#include "promis/config.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "promis/error.hpp"

namespace promis {

using nlohmann::json;

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const json& value) {
  std::filesystem::path p = value.get<std::string>();
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

Relation read_relation(const json& r) {
  Relation out;
  const std::string kind = r.at("relation").get<std::string>();
  if (kind == "distance") out.kind = RelationKind::Distance;
  else if (kind == "over") out.kind = RelationKind::Over;
  else throw Error(ErrorKind::Configuration, "unknown relation '" + kind + "' (expected distance or over)");
  out.type = r.at("type").get<std::string>();
  out.buffer = r.value("buffer_m", 0.0);
  if (out.type.empty()) throw Error(ErrorKind::Configuration, "relation type must not be empty");
  if (!(out.buffer >= 0.0)) throw Error(ErrorKind::Configuration, "buffer_m must be >= 0");
  return out;
}

inference::Mode read_mode(const json& j) {
  inference::Mode mode;
  const std::string kind = j.value("mode", "auto");
  if (kind == "auto") mode.kind = inference::Mode::Kind::Auto;
  else if (kind == "exact") mode.kind = inference::Mode::Kind::Exact;
  else if (kind == "monte-carlo" || kind == "monte_carlo") mode.kind = inference::Mode::Kind::MonteCarlo;
  else throw Error(ErrorKind::Configuration, "unknown inference mode '" + kind + "'");
  mode.samples = j.value("samples", std::size_t{10'000});
  mode.seed = j.value("seed", std::uint64_t{0});
  return mode;
}

}  // namespace

void RunConfig::validate() const {
  grid().validate();
  perturbation.validate();
  const bool distance = std::any_of(relations.begin(), relations.end(),
                                    [](const Relation& r) { return r.kind == RelationKind::Distance; });
  if (distance && map_samples < 2) throw Error(ErrorKind::Configuration, "N must be >= 2 for distance relations");
  if (map_samples < 1) throw Error(ErrorKind::Configuration, "N must be >= 1");
  if (workers < 1) throw Error(ErrorKind::Configuration, "workers must be >= 1");
  if (mode.kind != inference::Mode::Kind::Exact && mode.samples == 0)
    throw Error(ErrorKind::Configuration, "inference samples must be > 0");
}

RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed run configuration: ") + e.what(), 0, 0, e.byte);
  }
  RunConfig c;
  try {
    const json& origin = doc.at("origin");
    c.origin = {origin.at("lat").get<double>(), origin.at("lon").get<double>()};
    c.width_m = doc.at("width_m").get<double>();
    c.height_m = doc.at("height_m").get<double>();
    c.res_x = doc.at("res_x").get<std::size_t>();
    c.res_y = doc.at("res_y").get<std::size_t>();
    c.map_samples = doc.value("map_samples", std::size_t{50});
    c.seed = doc.value("seed", std::uint64_t{0});
    if (doc.contains("perturbation")) {
      const json& p = doc["perturbation"];
      c.perturbation.translation_std_east = p.value("translation_std_east", 0.0);
      c.perturbation.translation_std_north = p.value("translation_std_north", 0.0);
      c.perturbation.rotation_std = p.value("rotation_std", 0.0);
      c.perturbation.scale_std = p.value("scale_std", 0.0);
    }
    if (doc.contains("map")) c.map = resolve(base_dir, doc["map"]);
    for (const auto& r : doc.value("relations", json::array())) c.relations.push_back(read_relation(r));
    for (const auto& r : doc.value("rasters", json::array()))
      c.rasters.push_back({resolve(base_dir, r.at("pgm")), resolve(base_dir, r.at("georef")), r.at("name").get<std::string>()});
    if (doc.contains("program")) c.program = resolve(base_dir, doc["program"]);
    c.tiling = doc.value("tiling", std::size_t{0});
    c.workers = doc.value("workers", std::size_t{1});
    c.mode = read_mode(doc.value("inference", json::object()));
    const json& out = doc.value("outputs", json::object());
    if (out.contains("table")) c.outputs.table = resolve(base_dir, out["table"]);
    if (out.contains("csv")) c.outputs.csv = resolve(base_dir, out["csv"]);
    if (out.contains("geojson")) c.outputs.geojson = resolve(base_dir, out["geojson"]);
    if (out.contains("pgm")) c.outputs.pgm = resolve(base_dir, out["pgm"]);
    if (out.contains("timings")) c.outputs.timings = resolve(base_dir, out["timings"]);
    c.outputs.threshold = out.value("threshold", 0.0);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Configuration, std::string("invalid run configuration: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace promis
