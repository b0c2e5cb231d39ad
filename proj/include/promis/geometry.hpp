#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "promis/geo.hpp"

namespace promis::geometry {

template <typename P, typename A, typename B>
typename P::Scalar point_segment_distance(const Eigen::MatrixBase<P>& p, const Eigen::MatrixBase<A>& a,
                                          const Eigen::MatrixBase<B>& b) {
  using Scalar = typename P::Scalar;
  const auto ab = (b - a).eval();
  const Scalar length2 = ab.squaredNorm();
  if (length2 == Scalar(0)) return (p - a).norm();
  const Scalar t = std::clamp(Scalar((p - a).dot(ab) / length2), Scalar(0), Scalar(1));
  return (p - (a + t * ab)).norm();
}

/// Minimum distance from `p` to the chain v0-v1-...-vn.
template <typename P, typename Scalar = typename P::Scalar>
Scalar point_chain_distance(const Eigen::MatrixBase<P>& p,
                            std::span<const Eigen::Matrix<Scalar, 2, 1>> chain) {
  if (chain.size() == 1) return (p - chain[0]).norm();
  Scalar best = std::numeric_limits<Scalar>::infinity();
  for (std::size_t i = 0; i + 1 < chain.size(); ++i)
    best = std::min(best, point_segment_distance(p, chain[i], chain[i + 1]));
  return best;
}

/// Even-odd containment test on a closed ring; points on an edge count as inside.
template <typename P, typename Scalar = typename P::Scalar>
bool ring_contains(const Eigen::MatrixBase<P>& p, std::span<const Eigen::Matrix<Scalar, 2, 1>> ring) {
  if (ring.size() < 2) return false;
  bool inside = false;
  for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
    const auto& a = ring[i];
    const auto& b = ring[j];
    if (point_segment_distance(p, a, b) == Scalar(0)) return true;
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const Scalar x = (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x();
      if (p.x() < x) inside = !inside;
    }
  }
  return inside;
}

/// Euclidean distance from `p` to a feature geometry; zero inside polygons.
inline double distance(const LocalPoint& p, const Geometry& g) {
  const std::span<const LocalPoint> v(g.vertices);
  if (g.kind == GeometryKind::Polygon && ring_contains(p, v)) return 0.0;
  return point_chain_distance(p, v);
}

/// Axis-aligned bounds of a vertex set.
inline Eigen::AlignedBox2d bounds(const Geometry& g) {
  Eigen::AlignedBox2d box;
  for (const auto& v : g.vertices) box.extend(v);
  return box;
}

}  // namespace promis::geometry
