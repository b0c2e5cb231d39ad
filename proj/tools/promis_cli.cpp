#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "promis/config.hpp"
#include "promis/error.hpp"
#include "promis/hplp/codegen.hpp"
#include "promis/hplp/parser.hpp"
#include "promis/pipeline.hpp"
#include "promis/pml.hpp"

namespace fs = std::filesystem;
using namespace promis;

namespace {

struct Overrides {
  std::optional<std::size_t> map_samples;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::optional<std::size_t> tiling;
  std::optional<std::string> mode;
  std::optional<std::size_t> mc_samples;
  std::optional<std::uint64_t> mc_seed;
  std::optional<double> threshold;
  std::string table, csv, geojson, pgm, timings;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void emit(const fs::path& path, std::string_view content) {
  if (path.empty() || path == "-") std::cout << content;
  else write_file(path, content);
}

GeoPoint parse_origin(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw Error(ErrorKind::InvalidArgument, "--origin expects LAT,LON");
  try {
    std::size_t a = 0, b = 0;
    const GeoPoint p{std::stod(text.substr(0, comma), &a), std::stod(text.substr(comma + 1), &b)};
    if (a != comma || b != text.size() - comma - 1) throw std::invalid_argument("trailing characters");
    validate(p);
    return p;
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::InvalidArgument, "--origin expects LAT,LON, got '" + text + "'");
  }
}

RunConfig load_config(const std::string& path, const Overrides& o) {
  if (path.empty()) throw Error(ErrorKind::Configuration, "no run configuration given (--config or PROMIS_CONFIG)");
  RunConfig c = parse_run_config(read_file(path), fs::path(path).parent_path());
  if (o.map_samples) c.map_samples = *o.map_samples;
  if (o.seed) c.seed = *o.seed;
  if (o.workers) c.workers = *o.workers;
  if (o.tiling) c.tiling = *o.tiling;
  if (o.mode) {
    if (*o.mode == "auto") c.mode.kind = inference::Mode::Kind::Auto;
    else if (*o.mode == "exact") c.mode.kind = inference::Mode::Kind::Exact;
    else if (*o.mode == "monte-carlo") c.mode.kind = inference::Mode::Kind::MonteCarlo;
    else throw Error(ErrorKind::Configuration, "unknown inference mode '" + *o.mode + "'");
  }
  if (o.mc_samples) c.mode.samples = *o.mc_samples;
  if (o.mc_seed) c.mode.seed = *o.mc_seed;
  if (o.threshold) c.outputs.threshold = *o.threshold;
  if (!o.table.empty()) c.outputs.table = o.table;
  if (!o.csv.empty()) c.outputs.csv = o.csv;
  if (!o.geojson.empty()) c.outputs.geojson = o.geojson;
  if (!o.pgm.empty()) c.outputs.pgm = o.pgm;
  if (!o.timings.empty()) c.outputs.timings = o.timings;
  c.validate();
  return c;
}

hplp::Program load_program(const RunConfig& c) {
  if (c.program.empty()) throw Error(ErrorKind::Configuration, "no program configured");
  return hplp::parse(read_file(c.program));
}

int cmd_ingest(const std::string& overpass, const std::string& geojson, const std::string& origin_text,
               const std::string& out) {
  const GeoPoint origin = parse_origin(origin_text);
  FeatureMap map;
  if (!overpass.empty()) {
    std::vector<OverpassWarning> warnings;
    map = parse_overpass(read_file(overpass), origin, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w.element << ": " << w.message << "\n";
  } else {
    map = parse_geojson(read_file(geojson), origin);
  }
  emit(out, feature_map_to_json(map));
  return 0;
}

int cmd_estimate(const RunConfig& c) {
  emit(c.outputs.table, relation_table_to_csv(build_relation_table(c, c.workers)));
  return 0;
}

RelationTable table_for(const RunConfig& c, const std::string& table_path, double* estimate_seconds) {
  const auto start = std::chrono::steady_clock::now();
  RelationTable table = table_path.empty() ? build_relation_table(c, c.workers)
                                           : relation_table_from_csv(read_file(table_path), c.grid());
  if (estimate_seconds) *estimate_seconds = seconds_since(start);
  return table;
}

int cmd_codegen(const RunConfig& c, const std::string& table_path, std::optional<std::size_t> location,
                const std::string& out) {
  const RelationTable table = table_for(c, table_path, nullptr);
  hplp::Program program;
  if (location) {
    if (*location >= table.locations()) throw Error(ErrorKind::InvalidArgument, "location index outside the grid");
    program.clauses = hplp::location_clauses(table, *location);
  } else {
    program = hplp::generate_relation_clauses(table);
  }
  emit(out, hplp::pretty_print(program));
  return 0;
}

int cmd_infer(const RunConfig& c, const std::string& table_path, bool write_table) {
  const hplp::Program rules = load_program(c);
  const TilePlan plan = tile(c.grid(), c.tiling);
  double estimate_seconds = 0.0;
  const RelationTable table = table_for(c, table_path, &estimate_seconds);
  if (write_table && !c.outputs.table.empty()) write_file(c.outputs.table, relation_table_to_csv(table));

  StageTimings timings;
  const PMLRaster raster = compute_pml(rules, table, plan, {c.mode, c.workers}, &timings);
  timings.estimate = estimate_seconds;
  timings.total += estimate_seconds;

  const bool any = !c.outputs.csv.empty() || !c.outputs.geojson.empty() || !c.outputs.pgm.empty();
  if (!c.outputs.csv.empty() || !any) emit(c.outputs.csv, pml_to_csv(raster));
  if (!c.outputs.geojson.empty()) write_file(c.outputs.geojson, pml_to_geojson(raster));
  if (!c.outputs.pgm.empty()) write_file(c.outputs.pgm, pml_to_pgm(raster, c.outputs.threshold));
  if (!c.outputs.timings.empty()) write_file(c.outputs.timings, timings.to_json());
  return 0;
}

std::pair<std::size_t, std::size_t> parse_res(const std::string& text) {
  const auto x = text.find('x');
  try {
    if (x == std::string::npos) throw std::invalid_argument("missing x");
    std::size_t a = 0, b = 0;
    const long rows = std::stol(text.substr(0, x), &a);
    const long cols = std::stol(text.substr(x + 1), &b);
    if (a != x || b != text.size() - x - 1 || rows < 2 || cols < 2) throw std::invalid_argument("bad");
    return {static_cast<std::size_t>(rows), static_cast<std::size_t>(cols)};
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::InvalidArgument, "--res expects ROWSxCOLS with both >= 2, got '" + text + "'");
  }
}

int cmd_interpolate(const std::string& in, const std::string& res, const std::string& out) {
  const auto [rows, cols] = parse_res(res);
  const PmlCsv source = pml_from_csv(read_file(in));
  const PMLRaster target = interpolate(source.raster, cols, rows);
  const bool same = rows == source.raster.grid.res_y && cols == source.raster.grid.res_x;
  emit(out, same ? pml_to_csv(target, source.coordinates) : pml_to_csv(target));
  return 0;
}

int cmd_compare(const std::string& a, const std::string& b) {
  const double value = mse(pml_from_csv(read_file(a)).raster, pml_from_csv(read_file(b)).raster);
  std::printf("%.6f\n", value);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probabilistic mission landscapes from uncertain maps and hybrid logic programs"};
  app.name("promis");
  app.require_subcommand(1);

  Overrides o;
  std::string config_path, table_path, out, overpass, geojson, origin, in, res, a, b;
  std::optional<std::size_t> location;

  auto add_config = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Run configuration JSON")->envname("PROMIS_CONFIG");
    cmd->add_option("--seed", o.seed, "Map sampling seed");
    cmd->add_option("--map-samples", o.map_samples, "Number of perturbed map samples N");
    cmd->add_option("--workers", o.workers, "Worker threads");
  };
  auto add_inference = [&](CLI::App* cmd) {
    cmd->add_option("--tiling", o.tiling, "Tiling depth s (4^s tiles)");
    cmd->add_option("--mode", o.mode, "auto, exact or monte-carlo");
    cmd->add_option("--mc-samples", o.mc_samples, "Monte Carlo samples per location");
    cmd->add_option("--mc-seed", o.mc_seed, "Monte Carlo seed");
    cmd->add_option("--csv", o.csv, "PML CSV output");
    cmd->add_option("--geojson", o.geojson, "PML GeoJSON output");
    cmd->add_option("--pgm", o.pgm, "PML PGM output");
    cmd->add_option("--timings", o.timings, "Stage timing JSON output");
    cmd->add_option("--threshold", o.threshold, "Mask PGM values below this probability");
  };

  auto* ingest = app.add_subcommand("ingest", "Convert Overpass or GeoJSON to a feature-map file");
  auto* ov = ingest->add_option("--overpass", overpass, "Overpass JSON input");
  auto* gj = ingest->add_option("--geojson", geojson, "GeoJSON input");
  ov->excludes(gj);
  ingest->add_option("--origin", origin, "Projection origin LAT,LON")->required();
  ingest->add_option("--out", out, "Feature-map output (stdout if omitted)");

  auto* estimate = app.add_subcommand("estimate", "Estimate the relation table");
  add_config(estimate);
  estimate->add_option("--out", o.table, "Relation table CSV output (stdout if omitted)");

  auto* codegen = app.add_subcommand("codegen", "Emit relation facts as program clauses");
  add_config(codegen);
  codegen->add_option("--table", table_path, "Relation table CSV (estimated if omitted)");
  codegen->add_option("--location", location, "Only this location index");
  codegen->add_option("--out", out, "Program output (stdout if omitted)");

  auto* infer = app.add_subcommand("infer", "Compute the probabilistic mission landscape");
  add_config(infer);
  add_inference(infer);
  infer->add_option("--table", table_path, "Relation table CSV (estimated if omitted)");

  auto* run = app.add_subcommand("run", "Estimate and infer in one pass");
  add_config(run);
  add_inference(run);
  run->add_option("--table-out", o.table, "Relation table CSV output");

  auto* interp = app.add_subcommand("interpolate", "Bilinear upsampling of a PML CSV");
  interp->add_option("--in", in, "PML CSV input")->required();
  interp->add_option("--res", res, "Target resolution ROWSxCOLS")->required();
  interp->add_option("--out", out, "PML CSV output (stdout if omitted)");

  auto* compare = app.add_subcommand("compare", "Mean squared error between two PML CSVs");
  compare->add_option("--a", a, "First PML CSV")->required();
  compare->add_option("--b", b, "Second PML CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*ingest) {
      if (overpass.empty() == geojson.empty()) throw Error(ErrorKind::InvalidArgument, "give exactly one of --overpass, --geojson");
      return cmd_ingest(overpass, geojson, origin, out);
    }
    if (*estimate) return cmd_estimate(load_config(config_path, o));
    if (*codegen) return cmd_codegen(load_config(config_path, o), table_path, location, out);
    if (*infer) return cmd_infer(load_config(config_path, o), table_path, false);
    if (*run) return cmd_infer(load_config(config_path, o), {}, true);
    if (*interp) return cmd_interpolate(in, res, out);
    if (*compare) return cmd_compare(a, b);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
