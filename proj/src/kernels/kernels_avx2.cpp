#include "dmgplan/kernels.hpp"

// AVX2 variants of the scan kernels. Four doubles per vector, mul/add only
// (no FMA) so each lane computes exactly what the scalar kernel computes.

#if defined(DMGPLAN_BUILD_AVX2)

#include <immintrin.h>

namespace dmgplan::kernels {
namespace {

inline __m256d dot3(__m256d ax, __m256d ay, __m256d az, __m256d bx, __m256d by,
                    __m256d bz) {
  return _mm256_add_pd(
      _mm256_add_pd(_mm256_mul_pd(ax, bx), _mm256_mul_pd(ay, by)),
      _mm256_mul_pd(az, bz));
}

void ray_scan_avx2(const double* xs, const double* ys, const double* zs,
                   std::size_t n, const double origin[3], const double dir[3],
                   double radius_sq, std::vector<RayCandidate>& out) {
  const __m256d ox = _mm256_set1_pd(origin[0]);
  const __m256d oy = _mm256_set1_pd(origin[1]);
  const __m256d oz = _mm256_set1_pd(origin[2]);
  const __m256d dx = _mm256_set1_pd(dir[0]);
  const __m256d dy = _mm256_set1_pd(dir[1]);
  const __m256d dz = _mm256_set1_pd(dir[2]);
  const __m256d r2max = _mm256_set1_pd(radius_sq);
  const __m256d zero = _mm256_setzero_pd();

  std::size_t i = 0;
  alignas(32) double tbuf[4];
  for (; i + 4 <= n; i += 4) {
    const __m256d px = _mm256_sub_pd(_mm256_loadu_pd(xs + i), ox);
    const __m256d py = _mm256_sub_pd(_mm256_loadu_pd(ys + i), oy);
    const __m256d pz = _mm256_sub_pd(_mm256_loadu_pd(zs + i), oz);
    const __m256d t = dot3(px, py, pz, dx, dy, dz);
    const __m256d rx = _mm256_sub_pd(px, _mm256_mul_pd(t, dx));
    const __m256d ry = _mm256_sub_pd(py, _mm256_mul_pd(t, dy));
    const __m256d rz = _mm256_sub_pd(pz, _mm256_mul_pd(t, dz));
    const __m256d r2 = dot3(rx, ry, rz, rx, ry, rz);
    const __m256d keep = _mm256_and_pd(_mm256_cmp_pd(t, zero, _CMP_GT_OQ),
                                       _mm256_cmp_pd(r2, r2max, _CMP_LE_OQ));
    int mask = _mm256_movemask_pd(keep);
    if (mask) {
      _mm256_store_pd(tbuf, t);
      for (int lane = 0; lane < 4; ++lane) {
        if (mask & (1 << lane)) {
          out.push_back({tbuf[lane], static_cast<std::uint32_t>(i + lane)});
        }
      }
    }
  }
  for (; i < n; ++i) {
    const double px = xs[i] - origin[0];
    const double py = ys[i] - origin[1];
    const double pz = zs[i] - origin[2];
    const double t = (px * dir[0] + py * dir[1]) + pz * dir[2];
    const double rx = px - t * dir[0];
    const double ry = py - t * dir[1];
    const double rz = pz - t * dir[2];
    const double r2 = (rx * rx + ry * ry) + rz * rz;
    if (t > 0.0 && r2 <= radius_sq) {
      out.push_back({t, static_cast<std::uint32_t>(i)});
    }
  }
}

void frame_project_avx2(const double* xs, const double* ys, const double* zs,
                        std::size_t n, const double p[3], const double t1[3],
                        const double t2[3], const double nrm[3], double* u,
                        double* v, double* h) {
  const __m256d px = _mm256_set1_pd(p[0]);
  const __m256d py = _mm256_set1_pd(p[1]);
  const __m256d pz = _mm256_set1_pd(p[2]);
  const __m256d ax = _mm256_set1_pd(t1[0]), ay = _mm256_set1_pd(t1[1]),
                az = _mm256_set1_pd(t1[2]);
  const __m256d bx = _mm256_set1_pd(t2[0]), by = _mm256_set1_pd(t2[1]),
                bz = _mm256_set1_pd(t2[2]);
  const __m256d cx = _mm256_set1_pd(nrm[0]), cy = _mm256_set1_pd(nrm[1]),
                cz = _mm256_set1_pd(nrm[2]);

  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + i), px);
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + i), py);
    const __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(zs + i), pz);
    _mm256_storeu_pd(u + i, dot3(dx, dy, dz, ax, ay, az));
    _mm256_storeu_pd(v + i, dot3(dx, dy, dz, bx, by, bz));
    _mm256_storeu_pd(h + i, dot3(dx, dy, dz, cx, cy, cz));
  }
  for (; i < n; ++i) {
    const double dx = xs[i] - p[0];
    const double dy = ys[i] - p[1];
    const double dz = zs[i] - p[2];
    u[i] = (dx * t1[0] + dy * t1[1]) + dz * t1[2];
    v[i] = (dx * t2[0] + dy * t2[1]) + dz * t2[2];
    h[i] = (dx * nrm[0] + dy * nrm[1]) + dz * nrm[2];
  }
}

bool any_in_rect_avx2(const double* u, const double* v, std::size_t n,
                      double cos_a, double sin_a, double length,
                      double half_width) {
  const __m256d ca = _mm256_set1_pd(cos_a);
  const __m256d sa = _mm256_set1_pd(sin_a);
  const __m256d len = _mm256_set1_pd(length);
  const __m256d hw = _mm256_set1_pd(half_width);
  const __m256d nhw = _mm256_set1_pd(-half_width);
  const __m256d zero = _mm256_setzero_pd();

  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d ui = _mm256_loadu_pd(u + i);
    const __m256d vi = _mm256_loadu_pd(v + i);
    const __m256d ua = _mm256_add_pd(_mm256_mul_pd(ui, ca), _mm256_mul_pd(vi, sa));
    const __m256d va = _mm256_sub_pd(_mm256_mul_pd(vi, ca), _mm256_mul_pd(ui, sa));
    __m256d inside = _mm256_and_pd(_mm256_cmp_pd(ua, zero, _CMP_GE_OQ),
                                   _mm256_cmp_pd(ua, len, _CMP_LE_OQ));
    inside = _mm256_and_pd(inside, _mm256_cmp_pd(va, nhw, _CMP_GE_OQ));
    inside = _mm256_and_pd(inside, _mm256_cmp_pd(va, hw, _CMP_LE_OQ));
    if (_mm256_movemask_pd(inside)) return true;
  }
  for (; i < n; ++i) {
    const double ua = u[i] * cos_a + v[i] * sin_a;
    const double va = v[i] * cos_a - u[i] * sin_a;
    if (ua >= 0.0 && ua <= length && va >= -half_width && va <= half_width) {
      return true;
    }
  }
  return false;
}

}  // namespace

const Ops* avx2_ops() {
  if (!__builtin_cpu_supports("avx2")) return nullptr;
  static const Ops ops{"avx2", ray_scan_avx2, frame_project_avx2,
                       any_in_rect_avx2};
  return &ops;
}

}  // namespace dmgplan::kernels

#else  // !DMGPLAN_BUILD_AVX2

namespace dmgplan::kernels {
const Ops* avx2_ops() { return nullptr; }
}  // namespace dmgplan::kernels

#endif
