#include "promis/grid.hpp"

#include <cmath>

#include "promis/error.hpp"

namespace promis {

void GridSpec::validate() const {
  promis::validate(origin);
  if (!(width > 0.0) || !(height > 0.0) || !std::isfinite(width) || !std::isfinite(height))
    throw Error(ErrorKind::Configuration, "grid width and height must be > 0");
  if (res_x < 2 || res_y < 2) throw Error(ErrorKind::Configuration, "grid resolution must be >= 2 per axis");
}

}  // namespace promis
