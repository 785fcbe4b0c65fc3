#pragma once

#include "dmgplan/surface.hpp"

#include <cstdint>
#include <vector>

namespace dmgplan {

/// Fingertip geometry used by the admissibility test: a rectangle of the
/// given length and width in the tangent plane at the contact. Points rising
/// more than height_clearance above the plane inside the rectangle block the
/// angle. angle_step discretizes the tangent circle.
struct FingerModel {
  double length = 0.1;             // meters
  double width = 0.02;             // meters
  double height_clearance = 0.003; // meters
  int angle_step = 5;              // degrees, must divide 360

  void validate() const;
};

/// Circularly contiguous run of discretized angles: start, start+step, ...,
/// count entries, wrapping at 360.
struct AngularComponent {
  int start = 0;  // degrees in [0,360), multiple of step
  int count = 0;
  int step = 5;

  bool full_circle() const { return count * step >= 360; }
  int end() const { return wrap_deg(start + (count - 1) * step); }
  bool contains(int angle_deg) const {
    const int off = wrap_deg(angle_deg - start);
    return off % step == 0 && off / step < count;
  }
  /// Position of the angle inside the run, 0-based; angle must be contained.
  int index_of(int angle_deg) const { return wrap_deg(angle_deg - start) / step; }
  std::vector<int> angles() const;

  /// Signed rotation from one contained angle to another that never leaves
  /// the run. Unique for partial arcs; shortest direction for full circles
  /// (ties resolved toward positive).
  int rotation_within(int from_deg, int to_deg) const;

  /// Angles contained in both runs, ascending.
  std::vector<int> intersect(const AngularComponent& other) const;
  bool intersects(const AngularComponent& other) const;
};

std::vector<AngularComponent> split_components(const std::vector<int>& angles,
                                               int angle_step);

struct DmgNode {
  Vec3 contact;
  Vec3 normal;
  AngularComponent arc;
  std::uint32_t patch = 0;      // index into the refined patch graph
  std::uint32_t arc_index = 0;  // which angular run of that patch
};

/// Dexterous manipulation graph: one node per (contact patch, angular run),
/// edges between adjacent patches whose runs share an angle, plus the
/// connected-component labelling that partitions reachable contact space.
struct Dmg {
  std::vector<DmgNode> nodes;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;  // a < b
  std::vector<std::uint32_t> component;                        // per node
  std::uint32_t component_count = 0;
  FingerModel finger;
  double delta = 0.07;
  double resolution = 0.013;          // segmentation resolution the graph was built at
  std::vector<Vec3> blocked_patches;  // contacts whose angle set came out empty

  std::size_t size() const { return nodes.size(); }
  const std::vector<std::vector<std::uint32_t>>& neighbors() const { return adjacency_; }
  /// Node ids sharing the given patch index.
  std::vector<std::uint32_t> nodes_at_patch(std::uint32_t patch) const;

  /// Sorts and deduplicates edges, then recomputes the adjacency lists and
  /// component labels. Must run after assembling nodes/edges by hand; the
  /// result is read-only afterwards and safe to share across threads.
  void rebuild();

 private:
  std::vector<std::vector<std::uint32_t>> adjacency_;
};

/// Drop patch-graph edges whose endpoint normals differ by more than delta,
/// then drop patches left with no neighbors.
SurfacePatchGraph refine_by_normals(const SurfacePatchGraph& graph, double delta);

/// Discretized angles whose finger rectangle at the contact is free of
/// blocking surface points. Sorted ascending; may be empty.
std::vector<int> admissible_angles(const OrientedSurface& surface,
                                   const Vec3& contact, const Vec3& normal,
                                   const FingerModel& finger);

Dmg build_dmg(const SurfacePatchGraph& graph, const OrientedSurface& surface,
              const FingerModel& finger, double delta);

}  // namespace dmgplan
