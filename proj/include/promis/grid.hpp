#pragma once

#include <cstddef>

#include "promis/geo.hpp"

namespace promis {

/// Regular raster of agent states centred on `origin`. Row 0 is the southern edge and
/// location indices are row-major: index = row * res_x + col.
struct GridSpec {
  GeoPoint origin;
  double width = 0.0;   // meters, east-west extent
  double height = 0.0;  // meters, north-south extent
  std::size_t res_x = 0;
  std::size_t res_y = 0;

  void validate() const;

  std::size_t size() const { return res_x * res_y; }
  std::size_t index(std::size_t row, std::size_t col) const { return row * res_x + col; }
  std::size_t row_of(std::size_t index) const { return index / res_x; }
  std::size_t col_of(std::size_t index) const { return index % res_x; }

  LocalPoint point(std::size_t row, std::size_t col) const {
    return {(static_cast<double>(col) / static_cast<double>(res_x - 1) - 0.5) * width,
            (static_cast<double>(row) / static_cast<double>(res_y - 1) - 0.5) * height};
  }
  LocalPoint point(std::size_t index) const { return point(row_of(index), col_of(index)); }

  bool operator==(const GridSpec&) const = default;
};

}  // namespace promis
