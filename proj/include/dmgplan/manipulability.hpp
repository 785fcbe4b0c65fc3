#pragma once

#include "dmgplan/planner.hpp"

#include <string>
#include <vector>

namespace dmgplan {

/// One candidate gripper pose: a bbox grid point paired with a finger angle,
/// snapped onto the DMG with the closing direction opposing the local
/// surface normal.
struct PoseSample {
  Vec3 query = Vec3::Zero();    // raw grid position
  Vec3 contact = Vec3::Zero();  // snapped node contact when valid
  int angle = 0;                // degrees
  Vec3 closing_dir = Vec3::Zero();
  std::uint32_t node = std::numeric_limits<std::uint32_t>::max();
  double opening = 0;
  bool valid = false;
  std::string rejection;        // empty when valid
};

/// Binary pairwise in-hand reachability over the valid samples, with a block
/// ordering for rendering and regrasp-area reporting.
struct ManipulabilityMatrix {
  std::size_t size = 0;                    // valid sample count
  std::vector<std::uint32_t> sample_index; // row -> index into the sample list
  std::vector<char> entries;               // row-major size x size, 0 or 1
  std::vector<std::uint32_t> permutation;  // block-contiguous row order
  std::vector<std::uint32_t> block;        // per row
  std::size_t block_count = 0;

  char at(std::size_t i, std::size_t j) const { return entries[i * size + j]; }
};

std::vector<PoseSample> sample_poses(const Dmg& dmg,
                                     const OrientedSurface& surface,
                                     double grid_step, int angle_step,
                                     double max_aperture, double resolution);

/// entry(i,j) = 1 iff a plan exists from sample i to sample j. Reachability
/// runs node-level with per-closing-direction secondary memoization, which
/// matches plan_path exactly because rotations are free within an angular
/// run; `exhaustive` forces one full plan_path call per pair instead.
ManipulabilityMatrix build_matrix(const Dmg& dmg, const OrientedSurface& surface,
                                  const std::vector<PoseSample>& samples,
                                  const CostWeights& weights,
                                  double max_aperture, double resolution,
                                  bool exhaustive = false);

/// Fills permutation/block/block_count: connected components of the matrix,
/// largest first (ties by lowest original row), original order inside each.
void order_blocks(ManipulabilityMatrix& matrix);

struct RegraspArea {
  std::uint32_t block = 0;
  std::size_t member_count = 0;
  Aabb contact_bounds;
  std::vector<std::uint32_t> representatives;  // sample indices, medoid first
};

std::vector<RegraspArea> report_regrasp_areas(
    const ManipulabilityMatrix& matrix, const std::vector<PoseSample>& samples,
    std::size_t representatives_per_block = 3);

}  // namespace dmgplan
