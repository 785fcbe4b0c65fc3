#include "dmgplan/ects.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dmgplan {
namespace {

constexpr double kPushAlignment = 0.5;
constexpr double kComfortArcDeg = 120.0;
constexpr double kDegToRad = M_PI / 180.0;

double clamp_mag(double x, double limit) {
  return std::clamp(x, -limit, limit);
}

Vec3 clamp_norm(const Vec3& v, double limit) {
  const double n = v.norm();
  return n > limit ? Vec3(v * (limit / n)) : v;
}

Twist to_world(const Mat3& rotation, const Twist& local) {
  return {rotation * local.v, rotation * local.w};
}

void integrate(Isometry& pose, const Twist& world_twist, double dt) {
  const Vec3 w = world_twist.w * dt;
  const double angle = w.norm();
  if (angle > 0) {
    pose.linear() = (Eigen::AngleAxisd(angle, w / angle) * pose.linear()).eval();
  }
  pose.translation() += world_twist.v * dt;
}

/// Extraction inverse to Rot_y(phi); valid because every rotation in a run
/// happens about the gripper y-axis.
double y_rotation_of(const Mat3& r) {
  return std::atan2(r(0, 2), r(0, 0));
}

}  // namespace

void EctsParams::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw Error(Errc::InvalidArgument, "alpha must lie in [0, 1]");
  if (beta != 0 && beta != 1)
    throw Error(Errc::InvalidArgument, "beta must be 0 or 1");
}

void ControllerGains::validate() const {
  if (k_opening <= 0 || k_linear <= 0 || k_angular <= 0)
    throw Error(Errc::InvalidArgument, "controller gains must be positive");
  if (dt <= 0) throw Error(Errc::InvalidArgument, "dt must be positive");
  if (tolerance_pos <= 0 || tolerance_ang <= 0)
    throw Error(Errc::InvalidArgument, "tolerances must be positive");
  if (v_max < 0 || omega_max < 0)
    throw Error(Errc::InvalidArgument, "velocity limits must be nonnegative");
  if (max_steps <= 0)
    throw Error(Errc::InvalidArgument, "max_steps must be positive");
  if (standoff < 0 || push_depth < 0)
    throw Error(Errc::InvalidArgument, "distances must be nonnegative");
}

std::pair<Twist, Twist> ects_map(const EctsParams& params, const Twist& x_a,
                                 const Twist& x_r) {
  const double a = params.alpha;
  const double b = params.beta;
  return {a * x_a - (1.0 - a) * x_r, -b * x_a + a * x_r};
}

std::pair<Twist, Twist> ects_unmap(const EctsParams& params, const Twist& x1,
                                   const Twist& x2) {
  const double a = params.alpha;
  const double b = params.beta;
  const double det = a * a - b * (1.0 - a);
  if (std::abs(det) < 1e-12)
    throw Error(Errc::InvalidArgument, "coordination matrix is singular");
  const double inv = 1.0 / det;
  return {inv * (a * x1 + (1.0 - a) * x2), inv * (b * x1 + a * x2)};
}

Twist translation_velocity(const Eigen::Vector2d& t_k, const Mat3& R, double m) {
  return translation_velocity(R * Vec3(t_k.x(), 0.0, t_k.y()), m);
}

Twist translation_velocity(const Vec3& t_global, double m) {
  const double n = t_global.norm();
  if (n < 1e-12)
    throw Error(Errc::InvalidArgument, "translation direction has zero length");
  return {(-m / n) * t_global, Vec3::Zero()};
}

Twist rotation_velocity(double theta, double phi_t, double phi_dot) {
  const double a = theta + phi_t;
  return {Vec3(std::cos(a) * phi_dot, 0.0, -std::sin(a) * phi_dot),
          Vec3(0.0, phi_dot, 0.0)};
}

Vec3 find_push_contact(const Dmg& dmg, const OrientedSurface& surface,
                       const GraspState& grasp, const PrimitiveStep& step,
                       double depth, double resolution) {
  if (grasp.principal_node >= dmg.size())
    throw Error(Errc::InvalidArgument, "grasp node out of range");
  const DmgNode& node = dmg.nodes[grasp.principal_node];

  if (step.kind == PrimitiveStep::Kind::translation) {
    const double len = step.translation.norm();
    if (len < 1e-12)
      throw Error(Errc::InvalidArgument, "zero-length translation");
    const Vec3 dir = step.translation / len;
    const auto hits = ray_intersect(surface, node.contact, dir,
                                    0.25 * resolution, resolution);
    for (const RayHit& h : hits)
      if (h.alignment > kPushAlignment) return h.position;
    throw Error(Errc::NoPushPoint, "no opposing face along the translation");
  }

  if (std::abs(step.rotation_deg) < 1e-12)
    throw Error(Errc::InvalidArgument, "zero rotation has no push side");
  const TangentFrame frame = tangent_frame(node.normal);
  const Vec3 finger = angle_direction(frame, grasp.principal_angle);

  double d = depth;
  const auto along = ray_intersect(surface, node.contact, finger,
                                   0.25 * resolution, resolution);
  for (const RayHit& h : along) {
    if (h.alignment > kPushAlignment) {
      d = std::min(d, 0.5 * h.distance);  // stay inside the local extent
      break;
    }
  }

  const Vec3 inset = node.contact + d * finger;
  // Pushing the side at +normal x finger torques the object so the finger
  // angle grows; pick the side matching the requested sign.
  const Vec3 side = (step.rotation_deg > 0 ? 1.0 : -1.0) *
                    Vec3(node.normal.cross(finger));
  const auto hits = ray_intersect(surface, inset, side, 0.25 * resolution,
                                  resolution);
  for (const RayHit& h : hits)
    if (h.alignment > kPushAlignment) return h.position;
  throw Error(Errc::NoPushPoint, "no face on the rotation push side");
}

const char* phase_name(Phase p) {
  switch (p) {
    case Phase::FindContact: return "find_contact";
    case Phase::Approach: return "approach";
    case Phase::Execute: return "execute";
    case Phase::Leave: return "leave";
  }
  return "unknown";
}

namespace {

struct SimState {
  Isometry object = Isometry::Identity();   // in the gripper-1 frame
  Isometry world1 = Isometry::Identity();
  Isometry world2 = Isometry::Identity();
  double opening = 0;
  double time = 0;
  std::vector<TrajectoryRecord>* log = nullptr;

  void record(Phase phase, const Twist& x1, const Twist& x2) {
    log->push_back({time, phase, object, world1, world2, x1, x2, opening});
  }
};

void step_free_arm2(SimState& s, const Vec3& target, double v_max, double dt,
                    Phase phase, int max_steps) {
  int steps = 0;
  while ((target - s.world2.translation()).norm() > 1e-9) {
    if (v_max <= 0 || ++steps > max_steps)
      throw Error(Errc::ExecutionStall, "second arm cannot reach its target");
    const Vec3 v = clamp_norm((target - s.world2.translation()) / dt, v_max);
    s.record(phase, {}, {v, Vec3::Zero()});
    s.world2.translation() += v * dt;
    s.time += dt;
  }
}

}  // namespace

SimulationResult simulate_execution(const OrientedSurface& surface,
                                    const Dmg& dmg,
                                    const PrimitiveSequence& sequence,
                                    const GraspState& start,
                                    const EctsParams& params,
                                    const ControllerGains& gains,
                                    const Twist& x_a) {
  params.validate();
  gains.validate();

  SimulationResult result;
  SimState s;
  s.log = &result.trajectory;
  s.opening = start.opening;

  const double res = dmg.resolution;
  const double depth =
      gains.push_depth > 0 ? gains.push_depth : 5.0 * res;

  if (start.principal_node >= dmg.nodes.size())
    throw Error(Errc::InvalidArgument, "start node is out of range");
  const DmgNode& anchor = dmg.nodes[start.principal_node];
  Vec3 axis_y = start.closing_dir;
  if (axis_y.norm() < 1e-9) axis_y = -anchor.normal;
  axis_y.normalize();
  Vec3 axis_z =
      angle_direction(tangent_frame(anchor.normal), start.principal_angle);
  axis_z = (axis_z - axis_z.dot(axis_y) * axis_y).normalized();
  const Vec3 axis_x = axis_y.cross(axis_z);

  // Gripper-1 frame: origin at the held contact, y along closing, z along
  // the fingers.  Rotations about gripper y then pivot on the contact.
  Mat3 rot;
  rot.row(0) = axis_x.transpose();
  rot.row(1) = axis_y.transpose();
  rot.row(2) = axis_z.transpose();
  s.object.linear() = rot;
  s.object.translation() = -(rot * anchor.contact);

  Isometry expected = s.object;
  GraspState grasp = start;

  for (const PrimitiveStep& step : sequence.steps) {
    const bool rotation = step.kind == PrimitiveStep::Kind::rotation;
    const double magnitude =
        rotation ? std::abs(step.rotation_deg) : step.translation.norm();
    if (magnitude < 1e-12) {
      grasp = step.after;
      continue;
    }

    if (rotation && magnitude > kComfortArcDeg) {
      std::ostringstream msg;
      msg << "rotation of " << step.rotation_deg
          << " deg exceeds the comfort arc";
      result.report.warnings.push_back(msg.str());
    }

    // Absolute target pose: composing ideal deltas keeps per-primitive
    // controller residue from accumulating.
    if (rotation) {
      expected = Isometry(Eigen::AngleAxisd(step.rotation_deg * kDegToRad,
                                            Vec3::UnitY())) *
                 expected;
    } else {
      expected.translation() -= expected.linear() * step.translation;
    }

    const Vec3 contact_obj =
        find_push_contact(dmg, surface, grasp, step, depth, res);
    const Vec3 near = surface.point(surface.grid().nearest(contact_obj));
    if ((near - contact_obj).norm() > 2.0 * res)
      throw Error(Errc::ContactLost, "push point is off the surface");
    const Vec3 face_normal = surface.normal(surface.grid().nearest(contact_obj));

    s.record(Phase::FindContact, {}, {});
    s.time += gains.dt;

    const auto contact_world = [&] {
      return Vec3(s.world1 * s.object * contact_obj);
    };
    const auto normal_world = [&] {
      return Vec3(s.world1.linear() * s.object.linear() * face_normal);
    };
    step_free_arm2(s, contact_world() + gains.standoff * normal_world(),
                   gains.v_max, gains.dt, Phase::Approach, gains.max_steps);
    step_free_arm2(s, contact_world(), gains.v_max, gains.dt, Phase::Approach,
                   gains.max_steps);

    int steps = 0;
    for (;;) {
      Twist x_r;
      bool done = false;
      // Settle well inside the tolerance; residue from one primitive must
      // not push the next one's net error past the reporting bound.
      constexpr double kSettle = 0.25;
      if (rotation) {
        const double remaining =
            y_rotation_of(expected.linear() * s.object.linear().transpose());
        if (std::abs(remaining) <= kSettle * gains.tolerance_ang * kDegToRad) {
          done = true;
        } else {
          const double phi_dot =
              clamp_mag(gains.k_angular * remaining, gains.omega_max);
          const Vec3 q = s.object * contact_obj;
          const double radius = std::hypot(q.x(), q.z());
          const double angle = std::atan2(q.x(), q.z());
          x_r = rotation_velocity(angle, 0.0, phi_dot);
          x_r.v *= radius;
          s.object = Isometry(Eigen::AngleAxisd(phi_dot * gains.dt,
                                                Vec3::UnitY())) *
                     s.object;
        }
      } else {
        const Vec3 remaining = expected.translation() - s.object.translation();
        if (remaining.norm() <= kSettle * gains.tolerance_pos) {
          done = true;
        } else {
          const Vec3 v = clamp_norm(gains.k_linear * remaining, gains.v_max);
          x_r = {v, Vec3::Zero()};
          s.object.translation() += v * gains.dt;
        }
      }
      if (done) break;
      if (++steps > gains.max_steps)
        throw Error(Errc::ExecutionStall, "primitive exceeded its step budget");

      s.opening += clamp_mag(gains.k_opening * (step.after.opening - s.opening),
                             gains.v_max) *
                   gains.dt;
      const auto [x1, x2] =
          ects_map(params, x_a, to_world(s.world1.linear(), x_r));
      integrate(s.world1, x1, gains.dt);
      integrate(s.world2, x2, gains.dt);
      s.record(Phase::Execute, x1, x2);
      s.time += gains.dt;
    }

    step_free_arm2(s, contact_world() + gains.standoff * normal_world(),
                   gains.v_max, gains.dt, Phase::Leave, gains.max_steps);
    grasp = step.after;
  }

  result.report.steps = result.trajectory.size();
  result.final_object_pose = s.object;
  if (!sequence.steps.empty()) {
    const Vec3 goal_contact =
        dmg.nodes[sequence.steps.back().after.principal_node].contact;
    result.report.position_error = (s.object * goal_contact).norm();
    const Eigen::AngleAxisd err(expected.linear() *
                                s.object.linear().transpose());
    result.report.angle_error_deg = std::abs(err.angle()) / kDegToRad;
  }
  return result;
}

}  // namespace dmgplan
