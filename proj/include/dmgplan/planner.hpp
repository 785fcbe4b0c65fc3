#pragma once

#include "dmgplan/dmg.hpp"
#include "dmgplan/surface.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dmgplan {

/// Dual-finger grasp configuration: the principal fingertip sits at a DMG
/// node with a finger angle inside that node's run; the secondary fingertip
/// mirrors it across the object along closing_dir.
struct GraspState {
  std::uint32_t principal_node = 0;
  int principal_angle = 0;      // degrees, multiple of the finger angle step
  Vec3 secondary_contact = Vec3::Zero();
  double opening = 0;           // fingertip separation, meters
  Vec3 closing_dir = Vec3::Zero();  // unit, principal toward secondary
};

struct CostWeights {
  double rotation = 0.0005;        // meters of cost per degree rotated
  double opening = 1.0;            // per meter of aperture change
  double pull = 10.0;              // per pull-requiring translation
  double excess_rotation = 0.001;  // per degree beyond comfort_arc
  double comfort_arc = 120.0;      // degrees
};

struct PlanDiagnostics {
  std::size_t expanded = 0;
  std::size_t rejected_secondary = 0;
  std::size_t rejected_aperture = 0;
  double cost = 0;
};

struct PlanResult {
  std::vector<std::uint32_t> path;  // node ids, start first
  PlanDiagnostics diagnostics;
  std::vector<std::string> warnings;
};

/// Secondary fingertip resolved by casting the closing line through the
/// object: position and separation of the opposite face, plus the DMG node
/// it snaps to. aperture_exceeded marks a graspable face beyond max_aperture.
struct SecondaryGrasp {
  Vec3 contact;
  double opening;
  std::uint32_t node;
  bool aperture_exceeded = false;
};

/// Nearest node whose angular run contains the discretized angle; the
/// shortlist is every node within 2x resolution of the closest one.
std::uint32_t snap_to_node(const Dmg& dmg, const Vec3& contact, int angle_deg,
                           double resolution);

/// Opposite-side contact for a principal grasp: farthest ray crossing whose
/// surface faces onward along the closing line, snapped to the nearest DMG
/// node (position only; lowest id on ties). Empty when the ray misses, no
/// graspable face exists, or no node lies near the crossing.
std::optional<SecondaryGrasp> resolve_secondary(const Dmg& dmg,
                                                const OrientedSurface& surface,
                                                const Vec3& principal,
                                                const Vec3& closing_dir,
                                                double max_aperture,
                                                double resolution);

/// True when sliding the principal contact by `translation` has no surface
/// to push against: the ray from the contact along the translation finds no
/// crossing facing onward.
bool translation_requires_pull(const OrientedSurface& surface,
                               const Vec3& contact, const Vec3& translation,
                               double resolution);

/// Least-cost node path from start to goal over the DMG, searched over
/// (node, angle) states so rotation costs are exact. With
/// secondary_constraint, every visited node must keep the secondary
/// fingertip on a node of its starting component with opening within
/// max_aperture.
PlanResult plan_path(const Dmg& dmg, const OrientedSurface& surface,
                     const GraspState& start, const GraspState& goal,
                     const CostWeights& weights, double max_aperture,
                     double resolution, bool secondary_constraint = true);

enum class RotationPolicy { minimal, goal_seeking };

struct PrimitiveStep {
  enum class Kind { rotation, translation };
  Kind kind = Kind::rotation;
  double rotation_deg = 0;
  Vec3 translation = Vec3::Zero();
  GraspState after;  // expected grasp once the step completes
};

/// Alternating rotation/translation program: r0, t0, r1, t1, ..., rK-1.
/// Starts and ends with a rotation entry (possibly zero).
struct PrimitiveSequence {
  std::vector<PrimitiveStep> steps;

  Vec3 net_translation() const;
  double net_rotation_deg() const;
};

/// Expand a node path into primitives. Rotations stay inside each node's
/// angular run; `minimal` picks the smallest rotation entering the next
/// run's overlap, `goal_seeking` the overlap angle closest to goal_angle.
PrimitiveSequence to_primitives(const Dmg& dmg, const OrientedSurface& surface,
                                const std::vector<std::uint32_t>& path,
                                const GraspState& start, int goal_angle,
                                RotationPolicy policy, double max_aperture,
                                double resolution);

/// Merge translations separated by a negligible rotation (at most angle_tol
/// degrees) when their directions differ by at most direction_tol degrees.
/// Dropped rotations are carried into the next rotation entry, so the net
/// rotation and total displacement are preserved exactly.
PrimitiveSequence merge_segments(const PrimitiveSequence& seq, double angle_tol,
                                 double direction_tol);

/// Fold the steps over the start state and check each snapshot; returns the
/// final state. Throws on snapshot mismatch beyond the tolerance.
GraspState replay(const PrimitiveSequence& seq, const Dmg& dmg,
                  const GraspState& start, double tolerance);

}  // namespace dmgplan
