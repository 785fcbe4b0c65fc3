#pragma once

#include "dmgplan/types.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

namespace dmgplan {

/// Uniform hash grid over a point set, used for radius and k-NN queries.
class SpatialGrid {
 public:
  SpatialGrid() = default;
  SpatialGrid(const std::vector<Vec3>& points, double cell_size);

  double cell_size() const { return cell_; }

  /// Indices of points within `radius` of `p` (inclusive), ascending.
  std::vector<std::uint32_t> radius_query(const Vec3& p, double radius) const;

  /// Indices of the k nearest points to `p`, closest first; excludes
  /// `exclude` when given. Ties broken by index.
  std::vector<std::uint32_t> knn(const Vec3& p, std::size_t k,
                                 std::optional<std::uint32_t> exclude = {}) const;

  /// Index of the nearest point to `p` (lowest index on ties).
  std::uint32_t nearest(const Vec3& p) const;

  /// Point storage address after the owner is copied or moved.
  void rebind(const std::vector<Vec3>* points) { points_ = points; }

 private:
  const std::vector<Vec3>* points_ = nullptr;
  double cell_ = 1.0;
  Vec3 origin_ = Vec3::Zero();
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> cells_;

  std::uint64_t key(int ix, int iy, int iz) const;
  void cell_of(const Vec3& p, int& ix, int& iy, int& iz) const;
};

/// Point set with unit outward normals; geometric ground truth for every
/// downstream query. Immutable after construction. Coordinates are kept in
/// structure-of-arrays form for the scan kernels.
class OrientedSurface {
 public:
  static OrientedSurface create(std::vector<Vec3> points,
                                std::vector<Vec3> normals);

  // The spatial grid indexes points_ by address and must follow it around.
  OrientedSurface(const OrientedSurface& o) { *this = o; }
  OrientedSurface(OrientedSurface&& o) noexcept { *this = std::move(o); }
  OrientedSurface& operator=(const OrientedSurface& o) {
    if (this != &o) {
      points_ = o.points_;
      normals_ = o.normals_;
      xs_ = o.xs_;
      ys_ = o.ys_;
      zs_ = o.zs_;
      bbox_ = o.bbox_;
      grid_ = o.grid_;
      grid_.rebind(&points_);
    }
    return *this;
  }
  OrientedSurface& operator=(OrientedSurface&& o) noexcept {
    if (this != &o) {
      points_ = std::move(o.points_);
      normals_ = std::move(o.normals_);
      xs_ = std::move(o.xs_);
      ys_ = std::move(o.ys_);
      zs_ = std::move(o.zs_);
      bbox_ = o.bbox_;
      grid_ = std::move(o.grid_);
      grid_.rebind(&points_);
    }
    return *this;
  }

  std::size_t size() const { return xs_.size(); }
  Vec3 point(std::size_t i) const { return {xs_[i], ys_[i], zs_[i]}; }
  Vec3 normal(std::size_t i) const { return normals_[i]; }
  const std::vector<Vec3>& normals() const { return normals_; }
  const Aabb& bbox() const { return bbox_; }

  const double* xs() const { return xs_.data(); }
  const double* ys() const { return ys_.data(); }
  const double* zs() const { return zs_.data(); }

  const SpatialGrid& grid() const { return grid_; }
  const std::vector<Vec3>& points_aos() const { return points_; }

 private:
  OrientedSurface() = default;

  std::vector<Vec3> points_;
  std::vector<Vec3> normals_;
  std::vector<double> xs_, ys_, zs_;
  Aabb bbox_;
  SpatialGrid grid_;
};

/// Segmentation output: one patch per region seed, adjacency between patches
/// that touch across the boundary.
struct SurfacePatch {
  Vec3 centroid;                             // a member point
  Vec3 normal;                               // normalized mean member normal
  std::vector<std::uint32_t> member_indices; // ascending point indices
};

struct SurfacePatchGraph {
  std::vector<SurfacePatch> patches;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> adjacency;  // a < b
  double resolution = 0.0;
  std::vector<std::string> warnings;

  std::size_t size() const { return patches.size(); }
  std::vector<std::vector<std::uint32_t>> adjacency_lists() const;
};

struct SegmentationParams {
  double resolution = 0.013;   // meters
  int connectivity = 26;       // 6, 18 or 26: voxel neighborhoods eligible for adjacency
  double normal_weight = 5.0;  // weight of the normal term in the growing distance
  bool fail_on_coarse = false; // one patch holding >90% of points: throw instead of warn
};

/// One detected crossing of a ray with the sampled surface.
struct RayHit {
  Vec3 position;     // origin + distance * direction
  Vec3 normal;       // normalized mean normal of supporting points
  double distance;   // along the ray, > 0
  double alignment;  // normal . direction
  int support;       // number of supporting points
};

OrientedSurface load_surface(const std::filesystem::path& path, int normal_k,
                             double input_scale = 1.0);

/// Estimate outward unit normals by local plane fitting over k neighbors.
std::vector<Vec3> estimate_normals(const std::vector<Vec3>& points, int k);

SurfacePatchGraph segment(const OrientedSurface& surface,
                          const SegmentationParams& params);

inline SurfacePatchGraph segment(const OrientedSurface& surface, double resolution) {
  SegmentationParams p;
  p.resolution = resolution;
  return segment(surface, p);
}

/// Surface crossings along origin + t*direction with t > skip_radius, sorted
/// by distance. Hits are density clusters within a disc of radius
/// `disc_radius` around the ray; points whose normal is nearly perpendicular
/// to the ray do not count as crossing evidence, and clusters split where
/// the gap along the ray exceeds 2*disc_radius or the crossing side flips.
std::vector<RayHit> ray_intersect(const OrientedSurface& surface,
                                  const Vec3& origin, const Vec3& direction,
                                  double skip_radius, double disc_radius,
                                  double min_transversality = 0.35);

}  // namespace dmgplan
