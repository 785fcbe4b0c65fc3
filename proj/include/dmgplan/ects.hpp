#pragma once

#include "dmgplan/planner.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace dmgplan {

struct Twist {
  Vec3 v = Vec3::Zero();
  Vec3 w = Vec3::Zero();

  Twist operator+(const Twist& o) const { return {v + o.v, w + o.w}; }
  Twist operator-(const Twist& o) const { return {v - o.v, w - o.w}; }
  Twist operator*(double s) const { return {v * s, w * s}; }
  double norm() const { return std::sqrt(v.squaredNorm() + w.squaredNorm()); }
};

inline Twist operator*(double s, const Twist& t) { return t * s; }

/// Coordination coefficients of the dual-arm task-space map.
struct EctsParams {
  double alpha = 0.5;  // in [0, 1]
  int beta = 1;        // 0 or 1

  void validate() const;
};

struct ControllerGains {
  double k_opening = 0.7;
  double k_linear = 0.32;
  double k_angular = 16.0;
  double dt = 0.005;           // seconds
  double tolerance_pos = 1e-3; // meters
  double tolerance_ang = 0.1;  // degrees
  double v_max = 0.05;         // m/s magnitude saturation
  double omega_max = 0.5;      // rad/s saturation
  int max_steps = 20000;       // per-primitive execute budget
  double standoff = 0.02;      // pusher approach distance, meters
  double push_depth = 0;       // rotation inset, meters; 0: 5x the graph resolution

  void validate() const;
};

/// Task-space to arm-space map:
/// x1 = alpha*xa - (1-alpha)*xr ; x2 = -beta*xa + alpha*xr.
std::pair<Twist, Twist> ects_map(const EctsParams& params, const Twist& x_a,
                                 const Twist& x_r);

/// Inverse of ects_map; valid when alpha^2 - beta*(1-alpha) is nonzero.
std::pair<Twist, Twist> ects_unmap(const EctsParams& params, const Twist& x1,
                                   const Twist& x2);

/// Relative velocity for a finger slide: the object moves opposite the
/// in-gripper translation, with zero angular part. t_k lies in the gripper
/// xz-plane; R rotates gripper coordinates into the global frame.
Twist translation_velocity(const Eigen::Vector2d& t_k, const Mat3& R, double m);

Twist translation_velocity(const Vec3& t_global, double m);

/// Relative velocity of the pusher point tracking the unit circle in the
/// gripper zx-plane during an in-hand rotation: components
/// (cos(theta+phi_t)*phi_dot, 0, -sin(theta+phi_t)*phi_dot) and angular
/// velocity phi_dot about the gripper y-axis.
Twist rotation_velocity(double theta, double phi_t, double phi_dot);

/// Contact point for the external pusher, in object coordinates.
/// Translations push against the first crossing facing onward along the
/// motion; rotations push on the side of the finger that twists the object
/// the requested way, probing at inset depth d along the finger.
Vec3 find_push_contact(const Dmg& dmg, const OrientedSurface& surface,
                       const GraspState& grasp, const PrimitiveStep& step,
                       double depth, double resolution);

enum class Phase { FindContact, Approach, Execute, Leave };

const char* phase_name(Phase p);

struct TrajectoryRecord {
  double time = 0;
  Phase phase = Phase::FindContact;
  Isometry object_in_gripper = Isometry::Identity();
  Isometry gripper1_world = Isometry::Identity();
  Isometry gripper2_world = Isometry::Identity();
  Twist x1, x2;
  double opening = 0;
};

struct SimulationReport {
  double position_error = 0;   // meters, against the expected final pose
  double angle_error_deg = 0;
  std::size_t steps = 0;
  std::size_t stalls = 0;
  std::vector<std::string> warnings;
};

struct SimulationResult {
  std::vector<TrajectoryRecord> trajectory;
  SimulationReport report;
  Isometry final_object_pose = Isometry::Identity();  // in the gripper frame
};

/// Kinematic playback of a primitive sequence under ideal sticking contact:
/// each primitive runs FindContact, Approach, Execute, Leave, with the
/// execute magnitude P-controlled on the remaining error toward the
/// primitive's absolute target pose. x_a is the absolute dual-arm motion,
/// zero by default.
SimulationResult simulate_execution(const OrientedSurface& surface,
                                    const Dmg& dmg,
                                    const PrimitiveSequence& sequence,
                                    const GraspState& start,
                                    const EctsParams& params,
                                    const ControllerGains& gains,
                                    const Twist& x_a = {});

}  // namespace dmgplan
