#include "promis/perturb.hpp"

#include <cmath>

#include <Eigen/Geometry>

#include "promis/error.hpp"
#include "promis/random.hpp"

namespace promis {

namespace {
constexpr std::uint64_t kPerturbDomain = 0x70657274ULL;  // "pert"
}

void PerturbationModel::validate() const {
  for (double s : {translation_std_east, translation_std_north, rotation_std, scale_std})
    if (!(s >= 0.0) || !std::isfinite(s))
      throw Error(ErrorKind::InvalidArgument, "perturbation standard deviations must be finite and >= 0");
}

bool PerturbationModel::is_zero() const {
  return translation_std_east == 0.0 && translation_std_north == 0.0 && rotation_std == 0.0 &&
         scale_std == 0.0;
}

FeatureError draw_feature_error(const PerturbationModel& model, std::uint64_t seed,
                                std::size_t sample_index, std::size_t feature_index) {
  const CounterRng rng({kPerturbDomain, seed, sample_index, feature_index});
  const double east = rng.normal(0, 0.0, model.translation_std_east);
  const double north = rng.normal(1, 0.0, model.translation_std_north);
  const double angle = rng.normal(2, 0.0, model.rotation_std);
  const double scale = rng.normal(3, 1.0, model.scale_std);

  FeatureError error;
  error.linear = scale * Eigen::Rotation2Dd(angle).toRotationMatrix();
  error.translation = {east, north};
  return error;
}

Geometry apply_error(const Geometry& geometry, const FeatureError& error) {
  Geometry out{geometry.kind, {}};
  if (geometry.vertices.empty()) return out;
  if (error.linear.isIdentity(0.0)) {
    out.vertices.reserve(geometry.vertices.size());
    for (const auto& v : geometry.vertices) out.vertices.push_back(v + error.translation);
    return out;
  }

  // A closed ring repeats its first vertex; count it once for the centroid.
  const std::size_t distinct = geometry.kind == GeometryKind::Polygon ? geometry.vertices.size() - 1
                                                                        : geometry.vertices.size();
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  for (std::size_t i = 0; i < distinct; ++i) centroid += geometry.vertices[i];
  centroid /= static_cast<double>(distinct);

  out.vertices.reserve(geometry.vertices.size());
  for (const auto& v : geometry.vertices)
    out.vertices.push_back(error.linear * (v - centroid) + centroid + error.translation);
  if (geometry.kind == GeometryKind::Polygon) out.vertices.back() = out.vertices.front();
  return out;
}

MapSample sample_map(const FeatureMap& map, const PerturbationModel& model, std::uint64_t seed,
                     std::size_t sample_index) {
  model.validate();
  MapSample sample{map, sample_index};
  if (model.is_zero()) return sample;
  for (std::size_t i = 0; i < map.features.size(); ++i)
    sample.variant.features[i].geometry =
        apply_error(map.features[i].geometry, draw_feature_error(model, seed, sample_index, i));
  return sample;
}

std::vector<MapSample> sample_maps(const FeatureMap& map, const PerturbationModel& model,
                                   std::uint64_t seed, std::size_t count) {
  if (count == 0) throw Error(ErrorKind::InvalidArgument, "sample count must be >= 1");
  std::vector<MapSample> out;
  out.reserve(count);
  for (std::size_t n = 0; n < count; ++n) out.push_back(sample_map(map, model, seed, n));
  return out;
}

}  // namespace promis
