#pragma once

#include "dmgplan/surface.hpp"

#include <string>
#include <vector>

namespace dmgplan::shapes {

/// Parsed form of the CLI `--shape name:d1,d2,...` argument.
struct ShapeSpec {
  std::string name;           // box, plate, bar, cylinder, sphere, plug, plate_with_slot
  std::vector<double> dims;   // meters, generator-specific; may be empty for defaults
  double pitch = 0.005;       // sampling pitch, meters

  static ShapeSpec parse(const std::string& text, double pitch);
};

OrientedSurface generate(const ShapeSpec& spec);

/// Axis-aligned box centered at the origin, faces sampled cell-centered so
/// every point carries the exact face normal.
OrientedSurface make_box(double sx, double sy, double sz, double pitch);

/// Cylinder with axis z, centered at the origin. Lateral surface sampled at
/// `angular_pitch_deg` columns; caps as concentric rings.
OrientedSurface make_cylinder(double radius, double height,
                              double angular_pitch_deg, double linear_pitch);

/// Sphere centered at the origin, latitude/longitude sampling at roughly
/// uniform `angular_pitch_deg` spacing, exact radial normals.
OrientedSurface make_sphere(double radius, double angular_pitch_deg);

/// Three stacked coaxial cylinders (wide base, narrow neck, wide head) along
/// +z starting at z = 0. Annular shoulders are sampled so the overhangs that
/// confine a finger on the neck are present in the cloud.
OrientedSurface make_plug(double base_r, double base_h, double neck_r,
                          double neck_h, double head_r, double head_h,
                          double angular_pitch_deg, double linear_pitch);

/// Plate spanning [0,sx]x[0,sy]x[0,sz] with a rectangular pocket milled into
/// the bottom face, centered in x and y: cavity x within slot_w, y within
/// slot_len, z in [0, slot_depth). slot_len >= sy yields an open channel
/// through the full depth (no end walls).
OrientedSurface make_plate_with_slot(double sx, double sy, double sz,
                                     double slot_w, double slot_len,
                                     double slot_depth, double pitch);

/// Bar spanning [0,sx]x[0,sy]x[0,sz] with a wall of thickness wall_t and
/// height wall_h rising from the top face at x in [wall_x, wall_x + wall_t],
/// across the full y extent. Test solid for directional finger blocking.
OrientedSurface make_tee(double sx, double sy, double sz, double wall_x,
                         double wall_t, double wall_h, double pitch);

}  // namespace dmgplan::shapes
