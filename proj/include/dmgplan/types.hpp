#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace dmgplan {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Isometry = Eigen::Isometry3d;

/// Axis-aligned bounding box in meters.
struct Aabb {
  Vec3 min{Vec3::Constant(std::numeric_limits<double>::max())};
  Vec3 max{Vec3::Constant(std::numeric_limits<double>::lowest())};

  void expand(const Vec3& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }
  bool contains(const Vec3& p, double tol = 0.0) const {
    return (p.array() >= min.array() - tol).all() &&
           (p.array() <= max.array() + tol).all();
  }
  Vec3 extent() const { return max - min; }
  Vec3 center() const { return 0.5 * (min + max); }
  double diameter() const { return extent().norm(); }
};

enum class Errc {
  UnreadableFile,
  TooFewPoints,
  DegenerateGeometry,
  ResolutionTooCoarse,
  EmptyGraph,
  NoAdmissibleNode,
  NoPath,
  InvalidStart,
  InvalidGoal,
  EmptyIntersection,
  NoValidPoses,
  NoPushPoint,
  ExecutionStall,
  ContactLost,
  InvalidArgument,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

/// Tangent-plane frame at a surface contact. t1 is the normalized projection
/// of a fixed global axis (+x, falling back to +y when the normal is nearly
/// parallel to it) so that angle sets are comparable across neighboring
/// contacts; t2 = normal x t1.
struct TangentFrame {
  Vec3 t1;
  Vec3 t2;
  Vec3 normal;
};

TangentFrame tangent_frame(const Vec3& unit_normal);

/// Direction in the tangent plane at `deg` degrees from t1 toward t2.
inline Vec3 angle_direction(const TangentFrame& f, double deg) {
  const double rad = deg * M_PI / 180.0;
  return std::cos(rad) * f.t1 + std::sin(rad) * f.t2;
}

/// Angle of `dir` projected onto the tangent plane, in [0, 360).
double direction_angle_deg(const TangentFrame& f, const Vec3& dir);

/// Nearest multiple of `step_deg` on the circle, result in [0, 360).
int discretize_angle(double deg, int step_deg);

inline int wrap_deg(int deg) {
  int r = deg % 360;
  return r < 0 ? r + 360 : r;
}

/// Circular distance between two angles in degrees, in [0, 180].
inline int circular_distance_deg(int a, int b) {
  int d = wrap_deg(a - b);
  return d > 180 ? 360 - d : d;
}

}  // namespace dmgplan
