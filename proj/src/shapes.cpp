#include "dmgplan/shapes.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace dmgplan::shapes {

namespace {

constexpr double kPi = std::numbers::pi;

struct Cloud {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;

  void add(const Vec3& p, const Vec3& n) {
    points.push_back(p);
    normals.push_back(n);
  }

  OrientedSurface finish() {
    return OrientedSurface::create(std::move(points), std::move(normals));
  }
};

// Cell-centered grid over a rectangle given by origin + u,v edges. Keeps
// points strictly inside the face so box edges never carry two normals.
void sample_rect(Cloud& c, const Vec3& origin, const Vec3& edge_u,
                 const Vec3& edge_v, const Vec3& normal, double pitch) {
  const double lu = edge_u.norm();
  const double lv = edge_v.norm();
  if (lu <= 0 || lv <= 0) return;
  const int nu = std::max(1, static_cast<int>(std::lround(lu / pitch)));
  const int nv = std::max(1, static_cast<int>(std::lround(lv / pitch)));
  const Vec3 du = edge_u / nu;
  const Vec3 dv = edge_v / nv;
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j)
      c.add(origin + (i + 0.5) * du + (j + 0.5) * dv, normal);
}

// Annulus (or full disc when r_in = 0) in the plane z = z0, normal +-z.
void sample_annulus(Cloud& c, double r_in, double r_out, double z0,
                    double nz, double pitch) {
  if (r_out <= r_in) return;
  const int nr = std::max(1, static_cast<int>(std::lround((r_out - r_in) / pitch)));
  const double dr = (r_out - r_in) / nr;
  const Vec3 n(0, 0, nz);
  if (r_in <= 0) c.add(Vec3(0, 0, z0), n);
  for (int k = 0; k < nr; ++k) {
    const double r = r_in + (k + 0.5) * dr;
    const int na = std::max(6, static_cast<int>(std::lround(2 * kPi * r / pitch)));
    for (int a = 0; a < na; ++a) {
      const double th = 2 * kPi * (a + 0.5) / na;
      c.add(Vec3(r * std::cos(th), r * std::sin(th), z0), n);
    }
  }
}

// Lateral cylinder surface z in [z0, z1] at fixed angular pitch, radial normals.
void sample_lateral(Cloud& c, double radius, double z0, double z1,
                    double angular_pitch_deg, double linear_pitch) {
  const int na = std::max(3, static_cast<int>(std::lround(360.0 / angular_pitch_deg)));
  const int nz = std::max(1, static_cast<int>(std::lround((z1 - z0) / linear_pitch)));
  const double dz = (z1 - z0) / nz;
  for (int a = 0; a < na; ++a) {
    const double th = 2 * kPi * (a + 0.5) / na;
    const Vec3 n(std::cos(th), std::sin(th), 0);
    for (int k = 0; k < nz; ++k)
      c.add(Vec3(radius * n.x(), radius * n.y(), z0 + (k + 0.5) * dz), n);
  }
}

}  // namespace

OrientedSurface make_box(double sx, double sy, double sz, double pitch) {
  Cloud c;
  const Vec3 h(sx / 2, sy / 2, sz / 2);
  const Vec3 ex(sx, 0, 0), ey(0, sy, 0), ez(0, 0, sz);
  sample_rect(c, {-h.x(), -h.y(), h.z()}, ex, ey, {0, 0, 1}, pitch);    // top
  sample_rect(c, {-h.x(), -h.y(), -h.z()}, ex, ey, {0, 0, -1}, pitch);  // bottom
  sample_rect(c, {-h.x(), h.y(), -h.z()}, ex, ez, {0, 1, 0}, pitch);
  sample_rect(c, {-h.x(), -h.y(), -h.z()}, ex, ez, {0, -1, 0}, pitch);
  sample_rect(c, {h.x(), -h.y(), -h.z()}, ey, ez, {1, 0, 0}, pitch);
  sample_rect(c, {-h.x(), -h.y(), -h.z()}, ey, ez, {-1, 0, 0}, pitch);
  return c.finish();
}

OrientedSurface make_cylinder(double radius, double height,
                              double angular_pitch_deg, double linear_pitch) {
  Cloud c;
  sample_lateral(c, radius, -height / 2, height / 2, angular_pitch_deg, linear_pitch);
  sample_annulus(c, 0, radius, height / 2, 1, linear_pitch);
  sample_annulus(c, 0, radius, -height / 2, -1, linear_pitch);
  return c.finish();
}

OrientedSurface make_sphere(double radius, double angular_pitch_deg) {
  Cloud c;
  const int nlat = std::max(3, static_cast<int>(std::lround(180.0 / angular_pitch_deg)));
  for (int i = 0; i < nlat; ++i) {
    const double polar = kPi * (i + 0.5) / nlat;
    const double ring_r = radius * std::sin(polar);
    const int nlon = std::max(3, static_cast<int>(std::lround(
                                      2 * kPi * ring_r /
                                      (radius * angular_pitch_deg * kPi / 180.0))));
    for (int j = 0; j < nlon; ++j) {
      const double az = 2 * kPi * (j + 0.5) / nlon;
      const Vec3 n(std::sin(polar) * std::cos(az), std::sin(polar) * std::sin(az),
                   std::cos(polar));
      c.add(radius * n, n);
    }
  }
  return c.finish();
}

OrientedSurface make_plug(double base_r, double base_h, double neck_r,
                          double neck_h, double head_r, double head_h,
                          double angular_pitch_deg, double linear_pitch) {
  Cloud c;
  const double z_base_top = base_h;
  const double z_neck_top = base_h + neck_h;
  const double z_head_top = base_h + neck_h + head_h;
  sample_annulus(c, 0, base_r, 0, -1, linear_pitch);                 // base bottom
  sample_lateral(c, base_r, 0, z_base_top, angular_pitch_deg, linear_pitch);
  sample_annulus(c, neck_r, base_r, z_base_top, 1, linear_pitch);    // base shoulder
  sample_lateral(c, neck_r, z_base_top, z_neck_top, angular_pitch_deg, linear_pitch);
  sample_annulus(c, neck_r, head_r, z_neck_top, -1, linear_pitch);   // head underside
  sample_lateral(c, head_r, z_neck_top, z_head_top, angular_pitch_deg, linear_pitch);
  sample_annulus(c, 0, head_r, z_head_top, 1, linear_pitch);         // head top
  return c.finish();
}

OrientedSurface make_plate_with_slot(double sx, double sy, double sz,
                                     double slot_w, double slot_len,
                                     double slot_depth, double pitch) {
  Cloud c;
  const double x0 = sx / 2 - slot_w / 2;
  const double x1 = sx / 2 + slot_w / 2;
  const bool open = slot_len >= sy;
  const double y0 = open ? 0.0 : sy / 2 - slot_len / 2;
  const double y1 = open ? sy : sy / 2 + slot_len / 2;
  const double zf = slot_depth;  // pocket floor height

  sample_rect(c, {0, 0, sz}, {sx, 0, 0}, {0, sy, 0}, {0, 0, 1}, pitch);  // top
  // bottom frame around the pocket footprint
  sample_rect(c, {0, 0, 0}, {x0, 0, 0}, {0, sy, 0}, {0, 0, -1}, pitch);
  sample_rect(c, {x1, 0, 0}, {sx - x1, 0, 0}, {0, sy, 0}, {0, 0, -1}, pitch);
  if (!open) {
    sample_rect(c, {x0, 0, 0}, {x1 - x0, 0, 0}, {0, y0, 0}, {0, 0, -1}, pitch);
    sample_rect(c, {x0, y1, 0}, {x1 - x0, 0, 0}, {0, sy - y1, 0}, {0, 0, -1}, pitch);
  }
  // pocket floor and walls (normals point into the cavity)
  sample_rect(c, {x0, y0, zf}, {x1 - x0, 0, 0}, {0, y1 - y0, 0}, {0, 0, -1}, pitch);
  sample_rect(c, {x0, y0, 0}, {0, y1 - y0, 0}, {0, 0, zf}, {1, 0, 0}, pitch);
  sample_rect(c, {x1, y0, 0}, {0, y1 - y0, 0}, {0, 0, zf}, {-1, 0, 0}, pitch);
  if (!open) {
    sample_rect(c, {x0, y0, 0}, {x1 - x0, 0, 0}, {0, 0, zf}, {0, 1, 0}, pitch);
    sample_rect(c, {x0, y1, 0}, {x1 - x0, 0, 0}, {0, 0, zf}, {0, -1, 0}, pitch);
  }
  // outer sides; an open slot cuts a mouth into the two y faces
  for (double y : {0.0, sy}) {
    const Vec3 out_n{0, y == 0.0 ? -1.0 : 1.0, 0};
    if (open) {
      sample_rect(c, {0, y, 0}, {x0, 0, 0}, {0, 0, sz}, out_n, pitch);
      sample_rect(c, {x1, y, 0}, {sx - x1, 0, 0}, {0, 0, sz}, out_n, pitch);
      sample_rect(c, {x0, y, zf}, {x1 - x0, 0, 0}, {0, 0, sz - zf}, out_n, pitch);
    } else {
      sample_rect(c, {0, y, 0}, {sx, 0, 0}, {0, 0, sz}, out_n, pitch);
    }
  }
  sample_rect(c, {0, 0, 0}, {0, sy, 0}, {0, 0, sz}, {-1, 0, 0}, pitch);
  sample_rect(c, {sx, 0, 0}, {0, sy, 0}, {0, 0, sz}, {1, 0, 0}, pitch);
  return c.finish();
}

OrientedSurface make_tee(double sx, double sy, double sz, double wall_x,
                         double wall_t, double wall_h, double pitch) {
  Cloud c;
  const double wx0 = wall_x;
  const double wx1 = wall_x + wall_t;
  const double wz1 = sz + wall_h;
  // bar top on both sides of the wall
  sample_rect(c, {0, 0, sz}, {wx0, 0, 0}, {0, sy, 0}, {0, 0, 1}, pitch);
  sample_rect(c, {wx1, 0, sz}, {sx - wx1, 0, 0}, {0, sy, 0}, {0, 0, 1}, pitch);
  sample_rect(c, {0, 0, 0}, {sx, 0, 0}, {0, sy, 0}, {0, 0, -1}, pitch);  // bottom
  // bar sides and ends
  sample_rect(c, {0, 0, 0}, {sx, 0, 0}, {0, 0, sz}, {0, -1, 0}, pitch);
  sample_rect(c, {0, sy, 0}, {sx, 0, 0}, {0, 0, sz}, {0, 1, 0}, pitch);
  sample_rect(c, {0, 0, 0}, {0, sy, 0}, {0, 0, sz}, {-1, 0, 0}, pitch);
  sample_rect(c, {sx, 0, 0}, {0, sy, 0}, {0, 0, sz}, {1, 0, 0}, pitch);
  // wall faces
  sample_rect(c, {wx0, 0, sz}, {0, sy, 0}, {0, 0, wall_h}, {-1, 0, 0}, pitch);
  sample_rect(c, {wx1, 0, sz}, {0, sy, 0}, {0, 0, wall_h}, {1, 0, 0}, pitch);
  sample_rect(c, {wx0, 0, wz1}, {wall_t, 0, 0}, {0, sy, 0}, {0, 0, 1}, pitch);
  sample_rect(c, {wx0, 0, sz}, {wall_t, 0, 0}, {0, 0, wall_h}, {0, -1, 0}, pitch);
  sample_rect(c, {wx0, sy, sz}, {wall_t, 0, 0}, {0, 0, wall_h}, {0, 1, 0}, pitch);
  return c.finish();
}

ShapeSpec ShapeSpec::parse(const std::string& text, double pitch) {
  ShapeSpec spec;
  spec.pitch = pitch;
  const auto colon = text.find(':');
  spec.name = text.substr(0, colon);
  if (colon != std::string::npos) {
    std::istringstream dims(text.substr(colon + 1));
    std::string item;
    while (std::getline(dims, item, ',')) {
      try {
        spec.dims.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw Error(Errc::InvalidArgument, "bad shape dimension '" + item + "'");
      }
    }
  }
  for (double d : spec.dims) {
    if (!(d > 0)) throw Error(Errc::InvalidArgument, "shape dimensions must be positive");
  }
  return spec;
}

OrientedSurface generate(const ShapeSpec& spec) {
  auto dim = [&](std::size_t i, double fallback) {
    return i < spec.dims.size() ? spec.dims[i] : fallback;
  };
  const double p = spec.pitch;
  if (spec.name == "box") {
    return make_box(dim(0, 0.1), dim(1, 0.1), dim(2, 0.02), p);
  }
  if (spec.name == "plate") {
    return make_box(dim(0, 0.2), dim(1, 0.06), dim(2, 0.01), p);
  }
  if (spec.name == "bar") {
    return make_box(dim(0, 0.3), dim(1, 0.03), dim(2, 0.02), p);
  }
  if (spec.name == "cylinder") {
    return make_cylinder(dim(0, 0.04), dim(1, 0.12), dim(2, 5.0), p);
  }
  if (spec.name == "sphere") {
    return make_sphere(dim(0, 0.08), dim(1, 2.5));
  }
  if (spec.name == "plug") {
    return make_plug(dim(0, 0.045), dim(1, 0.03), dim(2, 0.015), dim(3, 0.04),
                     dim(4, 0.035), dim(5, 0.025), dim(6, 5.0), p);
  }
  if (spec.name == "plate_with_slot") {
    return make_plate_with_slot(dim(0, 0.2), dim(1, 0.06), dim(2, 0.03),
                                dim(3, 0.05), dim(4, 0.03), dim(5, 0.015), p);
  }
  throw Error(Errc::InvalidArgument, "unknown shape '" + spec.name + "'");
}

}  // namespace dmgplan::shapes
