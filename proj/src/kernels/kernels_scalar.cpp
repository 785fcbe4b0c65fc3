#include "dmgplan/kernels.hpp"

// Scalar reference kernels. The SIMD variants mirror the exact operation
// order used here (no FMA contraction) so results compare bit-identical.

namespace dmgplan::kernels {
namespace {

void ray_scan_scalar(const double* xs, const double* ys, const double* zs,
                     std::size_t n, const double origin[3], const double dir[3],
                     double radius_sq, std::vector<RayCandidate>& out) {
  const double ox = origin[0], oy = origin[1], oz = origin[2];
  const double dx = dir[0], dy = dir[1], dz = dir[2];
  for (std::size_t i = 0; i < n; ++i) {
    const double px = xs[i] - ox;
    const double py = ys[i] - oy;
    const double pz = zs[i] - oz;
    const double t = (px * dx + py * dy) + pz * dz;
    const double rx = px - t * dx;
    const double ry = py - t * dy;
    const double rz = pz - t * dz;
    const double r2 = (rx * rx + ry * ry) + rz * rz;
    if (t > 0.0 && r2 <= radius_sq) {
      out.push_back({t, static_cast<std::uint32_t>(i)});
    }
  }
}

void frame_project_scalar(const double* xs, const double* ys, const double* zs,
                          std::size_t n, const double p[3], const double t1[3],
                          const double t2[3], const double nrm[3], double* u,
                          double* v, double* h) {
  const double px = p[0], py = p[1], pz = p[2];
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - px;
    const double dy = ys[i] - py;
    const double dz = zs[i] - pz;
    u[i] = (dx * t1[0] + dy * t1[1]) + dz * t1[2];
    v[i] = (dx * t2[0] + dy * t2[1]) + dz * t2[2];
    h[i] = (dx * nrm[0] + dy * nrm[1]) + dz * nrm[2];
  }
}

bool any_in_rect_scalar(const double* u, const double* v, std::size_t n,
                        double cos_a, double sin_a, double length,
                        double half_width) {
  for (std::size_t i = 0; i < n; ++i) {
    const double ua = u[i] * cos_a + v[i] * sin_a;
    const double va = v[i] * cos_a - u[i] * sin_a;
    if (ua >= 0.0 && ua <= length && va >= -half_width && va <= half_width) {
      return true;
    }
  }
  return false;
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops ops{"scalar", ray_scan_scalar, frame_project_scalar,
                       any_in_rect_scalar};
  return ops;
}

}  // namespace dmgplan::kernels
