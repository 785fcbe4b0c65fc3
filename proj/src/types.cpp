#include "dmgplan/types.hpp"

namespace dmgplan {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::UnreadableFile: return "UnreadableFile";
    case Errc::TooFewPoints: return "TooFewPoints";
    case Errc::DegenerateGeometry: return "DegenerateGeometry";
    case Errc::ResolutionTooCoarse: return "ResolutionTooCoarse";
    case Errc::EmptyGraph: return "EmptyGraph";
    case Errc::NoAdmissibleNode: return "NoAdmissibleNode";
    case Errc::NoPath: return "NoPath";
    case Errc::InvalidStart: return "InvalidStart";
    case Errc::InvalidGoal: return "InvalidGoal";
    case Errc::EmptyIntersection: return "EmptyIntersection";
    case Errc::NoValidPoses: return "NoValidPoses";
    case Errc::NoPushPoint: return "NoPushPoint";
    case Errc::ExecutionStall: return "ExecutionStall";
    case Errc::ContactLost: return "ContactLost";
    case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "UnknownError";
}

TangentFrame tangent_frame(const Vec3& unit_normal) {
  Vec3 ref = Vec3::UnitX();
  if (std::abs(unit_normal.dot(ref)) > 0.99) ref = Vec3::UnitY();
  Vec3 t1 = (ref - unit_normal.dot(ref) * unit_normal).normalized();
  Vec3 t2 = unit_normal.cross(t1);
  return {t1, t2, unit_normal};
}

double direction_angle_deg(const TangentFrame& f, const Vec3& dir) {
  const double x = dir.dot(f.t1);
  const double y = dir.dot(f.t2);
  double deg = std::atan2(y, x) * 180.0 / M_PI;
  if (deg < 0.0) deg += 360.0;
  if (deg >= 360.0) deg -= 360.0;
  return deg;
}

int discretize_angle(double deg, int step_deg) {
  const double s = static_cast<double>(step_deg);
  int q = static_cast<int>(std::lround(deg / s)) * step_deg;
  return wrap_deg(q);
}

}  // namespace dmgplan
