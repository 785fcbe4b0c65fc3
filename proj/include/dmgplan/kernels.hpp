#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace dmgplan::kernels {

/// Candidate point along a ray: t = signed distance of the projection onto
/// the ray, index into the source arrays. ray_scan keeps source order.
struct RayCandidate {
  double t;
  std::uint32_t index;
};

/// One dispatchable kernel set. Scalar and SIMD variants implement the same
/// arithmetic in the same per-element operation order, so their outputs are
/// bit-identical; the equivalence tests assert exact equality.
struct Ops {
  const char* name;

  /// Collect points whose distance from the ray line is within
  /// sqrt(radius_sq) and whose projection parameter t is positive.
  void (*ray_scan)(const double* xs, const double* ys, const double* zs,
                   std::size_t n, const double origin[3], const double dir[3],
                   double radius_sq, std::vector<RayCandidate>& out);

  /// Project points into a local frame anchored at p:
  /// u = (q-p).t1, v = (q-p).t2, h = (q-p).nrm.
  void (*frame_project)(const double* xs, const double* ys, const double* zs,
                        std::size_t n, const double p[3], const double t1[3],
                        const double t2[3], const double nrm[3], double* u,
                        double* v, double* h);

  /// True when any (u,v) lands inside the rectangle [0,length] x
  /// [-half_width, half_width] after rotating the frame by -angle
  /// (cos_a/sin_a of the rectangle direction).
  bool (*any_in_rect)(const double* u, const double* v, std::size_t n,
                      double cos_a, double sin_a, double length,
                      double half_width);
};

const Ops& scalar_ops();

/// AVX2 implementation, or nullptr when the CPU lacks support.
const Ops* avx2_ops();

/// Kernel set selected at startup: AVX2 when the CPU supports it, scalar
/// otherwise. DMGPLAN_KERNELS=scalar|avx2 overrides.
const Ops& active();

}  // namespace dmgplan::kernels
