#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "promis/geo.hpp"

namespace promis {

/// Gaussian parameters of the per-feature affine error: v' = s R(a) (v - c) + c + t.
struct PerturbationModel {
  double translation_std_east = 0.0;
  double translation_std_north = 0.0;
  double rotation_std = 0.0;  // radians
  double scale_std = 0.0;     // around a unit scale

  void validate() const;
  bool is_zero() const;
};

struct MapSample {
  FeatureMap variant;
  std::size_t sample_index = 0;
};

/// The affine error drawn for one feature of one sample.
struct FeatureError {
  Eigen::Matrix2d linear = Eigen::Matrix2d::Identity();
  Eigen::Vector2d translation = Eigen::Vector2d::Zero();
};

FeatureError draw_feature_error(const PerturbationModel& model, std::uint64_t seed,
                                std::size_t sample_index, std::size_t feature_index);

/// Applies the error about the feature's vertex centroid.
Geometry apply_error(const Geometry& geometry, const FeatureError& error);

MapSample sample_map(const FeatureMap& map, const PerturbationModel& model, std::uint64_t seed,
                     std::size_t sample_index);

std::vector<MapSample> sample_maps(const FeatureMap& map, const PerturbationModel& model,
                                   std::uint64_t seed, std::size_t count);

}  // namespace promis
