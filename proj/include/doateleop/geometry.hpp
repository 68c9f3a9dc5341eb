#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

namespace doateleop {

template <typename Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;

using Vec2 = Vector2<double>;

/// Wraps an angle into (-pi, pi].
template <typename Scalar>
Scalar wrap_angle(Scalar a) {
  const Scalar pi = std::numbers::pi_v<Scalar>;
  const Scalar two_pi = 2 * pi;
  Scalar r = std::fmod(a, two_pi);
  if (r <= -pi) {
    r += two_pi;
  } else if (r > pi) {
    r -= two_pi;
  }
  return r;
}

template <typename Scalar>
Eigen::Matrix<Scalar, 2, 2> rotation(Scalar angle) {
  const Scalar c = std::cos(angle);
  const Scalar s = std::sin(angle);
  Eigen::Matrix<Scalar, 2, 2> r;
  r << c, -s, s, c;
  return r;
}

/// Counterclockwise rotation of a planar vector.
template <typename Derived>
auto rotate(const Eigen::MatrixBase<Derived>& v, typename Derived::Scalar angle) {
  using Scalar = typename Derived::Scalar;
  return Vector2<Scalar>(rotation<Scalar>(angle) * v);
}

template <typename Scalar>
Scalar cross2(const Vector2<Scalar>& a, const Vector2<Scalar>& b) {
  return a.x() * b.y() - a.y() * b.x();
}

/// Proper or touching intersection of segments [p0,p1] and [q0,q1].
/// Returns the parameter along the first segment, or nullopt.
template <typename Scalar>
std::optional<Scalar> segment_intersection(const Vector2<Scalar>& p0, const Vector2<Scalar>& p1,
                                           const Vector2<Scalar>& q0, const Vector2<Scalar>& q1) {
  const Vector2<Scalar> r = p1 - p0;
  const Vector2<Scalar> s = q1 - q0;
  const Scalar denom = cross2(r, s);
  const Vector2<Scalar> qp = q0 - p0;
  if (std::abs(denom) < Scalar(1e-15)) {
    return std::nullopt;  // parallel or collinear: treated as non-crossing
  }
  const Scalar t = cross2(qp, s) / denom;
  const Scalar u = cross2(qp, r) / denom;
  if (t < 0 || t > 1 || u < 0 || u > 1) {
    return std::nullopt;
  }
  return t;
}

template <typename Scalar>
bool segments_intersect(const Vector2<Scalar>& p0, const Vector2<Scalar>& p1,
                        const Vector2<Scalar>& q0, const Vector2<Scalar>& q1) {
  return segment_intersection(p0, p1, q0, q1).has_value();
}

template <typename Scalar>
Vector2<Scalar> closest_point_on_segment(const Vector2<Scalar>& p, const Vector2<Scalar>& a,
                                         const Vector2<Scalar>& b) {
  const Vector2<Scalar> ab = b - a;
  const Scalar len2 = ab.squaredNorm();
  if (len2 <= Scalar(0)) {
    return a;
  }
  const Scalar t = std::clamp((p - a).dot(ab) / len2, Scalar(0), Scalar(1));
  return a + t * ab;
}

template <typename Scalar>
Scalar point_segment_distance(const Vector2<Scalar>& p, const Vector2<Scalar>& a,
                              const Vector2<Scalar>& b) {
  return (p - closest_point_on_segment(p, a, b)).norm();
}

/// Angle of a planar vector measured counterclockwise from +x.
template <typename Scalar>
Scalar bearing(const Vector2<Scalar>& v) {
  return std::atan2(v.y(), v.x());
}

struct Bounds {
  Vec2 min{0.0, 0.0};
  Vec2 max{0.0, 0.0};

  bool contains(const Vec2& p) const {
    return p.x() >= min.x() && p.x() <= max.x() && p.y() >= min.y() && p.y() <= max.y();
  }
  double width() const { return max.x() - min.x(); }
  double height() const { return max.y() - min.y(); }
};

}  // namespace doateleop
