#pragma once

// Shared fixture builders for the test suites.

#include "dmgplan/dmg.hpp"
#include "dmgplan/planner.hpp"
#include "dmgplan/shapes.hpp"
#include "dmgplan/surface.hpp"

#include <unistd.h>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace fixtures {

using namespace dmgplan;

struct Bundle {
  OrientedSurface surface;
  SurfacePatchGraph graph;
  Dmg dmg;
};

inline FingerModel default_finger() { return FingerModel{}; }

inline Bundle make_bundle(OrientedSurface surface, double resolution = 0.013,
                          FingerModel finger = FingerModel{},
                          double delta = 0.07) {
  Bundle b{std::move(surface), {}, {}};
  b.graph = segment(b.surface, resolution);
  b.dmg = build_dmg(b.graph, b.surface, finger, delta);
  return b;
}

inline Bundle box_bundle(double sx = 0.1, double sy = 0.1, double sz = 0.02,
                         double pitch = 0.005, double resolution = 0.013) {
  return make_bundle(shapes::make_box(sx, sy, sz, pitch), resolution);
}

inline OrientedSurface plug_surface() {
  return shapes::make_plug(0.035, 0.02, 0.012, 0.03, 0.03, 0.02, 10.0, 0.004);
}

inline OrientedSurface slot_plate_surface() {
  return shapes::make_plate_with_slot(0.2, 0.12, 0.015, 0.04, 0.05, 0.008,
                                      0.005);
}

/// Thick plate with a full-length channel cut into the bottom. The channel
/// is deeper than the segmentation resolution, so the two bottom strips and
/// the channel ceiling never become patch-adjacent: the bottom splits while
/// the top face stays one region.
inline OrientedSurface channel_plate_surface() {
  return shapes::make_plate_with_slot(0.2, 0.12, 0.03, 0.04, 0.2, 0.02,
                                      0.005);
}

/// Seeded sub-resolution position noise. Breaks the exact grid regularity of
/// the generated shapes so that distinct contact paths never have costs within
/// rounding distance of each other.
inline OrientedSurface jitter(const OrientedSurface& s, double amplitude,
                              unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-amplitude, amplitude);
  std::vector<Vec3> pts, nrm;
  pts.reserve(s.size());
  nrm.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    pts.push_back(s.point(i) + Vec3{u(rng), u(rng), u(rng)});
    nrm.push_back(s.normal(i));
  }
  return OrientedSurface::create(std::move(pts), std::move(nrm));
}

/// Union of several clouds, each rigidly shifted.
inline OrientedSurface merge_shifted(
    const std::vector<std::pair<OrientedSurface, Vec3>>& parts) {
  std::vector<Vec3> pts, nrm;
  for (const auto& [s, shift] : parts) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      pts.push_back(s.point(i) + shift);
      nrm.push_back(s.normal(i));
    }
  }
  return OrientedSurface::create(std::move(pts), std::move(nrm));
}

/// 300x120x20 mm plate with two 20x80x30 mm walls standing on top, leaving a
/// 60 mm corridor between them. A fingertip at the corridor center can only
/// point along +-y, in two separate angular runs. Built once per binary.
inline const Bundle& corridor_bundle() {
  static const Bundle b = [] {
    OrientedSurface s = merge_shifted({
        {shapes::make_box(0.3, 0.12, 0.02, 0.005), {0, 0, 0}},
        {shapes::make_box(0.02, 0.08, 0.03, 0.004), {-0.04, 0, 0.025}},
        {shapes::make_box(0.02, 0.08, 0.03, 0.004), {0.04, 0, 0.025}},
    });
    FingerModel finger;
    finger.angle_step = 15;
    return make_bundle(std::move(s), 0.013, finger);
  }();
  return b;
}

inline OrientedSurface two_cubes_surface(double side = 0.06,
                                         double gap_factor = 10.0,
                                         double pitch = 0.006,
                                         double resolution = 0.013) {
  const OrientedSurface one = shapes::make_box(side, side, side, pitch);
  std::vector<Vec3> pts;
  std::vector<Vec3> nrm;
  const double shift = side + gap_factor * resolution;
  for (std::size_t i = 0; i < one.size(); ++i) {
    pts.push_back(one.point(i));
    nrm.push_back(one.normal(i));
  }
  for (std::size_t i = 0; i < one.size(); ++i) {
    pts.push_back(one.point(i) + Vec3(shift, 0, 0));
    nrm.push_back(one.normal(i));
  }
  return OrientedSurface::create(std::move(pts), std::move(nrm));
}

/// Hand-assembled chain graph: contacts in a row, one node each, consecutive
/// edges. Arcs default to full circles at the finger's step.
inline Dmg chain_dmg(const std::vector<Vec3>& contacts,
                     std::vector<AngularComponent> arcs = {},
                     int angle_step = 5) {
  Dmg dmg;
  dmg.finger.angle_step = angle_step;
  for (std::size_t i = 0; i < contacts.size(); ++i) {
    DmgNode n;
    n.contact = contacts[i];
    n.normal = Vec3(0, 0, 1);
    n.arc = i < arcs.size()
                ? arcs[i]
                : AngularComponent{0, 360 / angle_step, angle_step};
    n.patch = static_cast<std::uint32_t>(i);
    dmg.nodes.push_back(n);
  }
  for (std::uint32_t i = 0; i + 1 < contacts.size(); ++i) {
    dmg.edges.push_back({i, i + 1});
  }
  dmg.resolution = 0.013;
  dmg.rebuild();
  return dmg;
}

/// Far-away dummy surface: rays from synthetic graphs miss it, so secondary
/// resolution falls back without throwing.
inline OrientedSurface remote_surface() {
  OrientedSurface s = shapes::make_box(0.02, 0.02, 0.02, 0.01);
  std::vector<Vec3> pts;
  std::vector<Vec3> nrm;
  for (std::size_t i = 0; i < s.size(); ++i) {
    pts.push_back(s.point(i) + Vec3(0, 0, -5.0));
    nrm.push_back(s.normal(i));
  }
  return OrientedSurface::create(std::move(pts), std::move(nrm));
}

/// Grasp at a node with closing into the object, secondary resolved when the
/// geometry allows it.
inline GraspState grasp_at(const Dmg& dmg, const OrientedSurface& surface,
                           std::uint32_t node, int angle,
                           double max_aperture = 0.25) {
  GraspState g;
  g.principal_node = node;
  g.principal_angle = angle;
  g.closing_dir = -dmg.nodes[node].normal;
  const auto sec = resolve_secondary(dmg, surface, dmg.nodes[node].contact,
                                     g.closing_dir, max_aperture,
                                     dmg.resolution);
  if (sec && !sec->aperture_exceeded) {
    g.secondary_contact = sec->contact;
    g.opening = sec->opening;
  }
  return g;
}

/// Connected components of the patch adjacency graph.
inline std::uint32_t patch_components(const SurfacePatchGraph& graph) {
  constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> label(graph.size(), kNone);
  const auto lists = graph.adjacency_lists();
  std::uint32_t next = 0;
  for (std::uint32_t seed = 0; seed < graph.size(); ++seed) {
    if (label[seed] != kNone) continue;
    std::vector<std::uint32_t> stack{seed};
    label[seed] = next;
    while (!stack.empty()) {
      const std::uint32_t v = stack.back();
      stack.pop_back();
      for (std::uint32_t w : lists[v]) {
        if (label[w] == kNone) {
          label[w] = next;
          stack.push_back(w);
        }
      }
    }
    ++next;
  }
  return next;
}

/// Node whose contact is nearest to the query; no angle filtering.
inline std::uint32_t nearest_node(const Dmg& dmg, const Vec3& p) {
  std::uint32_t best = 0;
  double best_d = std::numeric_limits<double>::max();
  for (std::uint32_t i = 0; i < dmg.nodes.size(); ++i) {
    const double d = (dmg.nodes[i].contact - p).norm();
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("dmgplan_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const {
    return (path_ / name).string();
  }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

inline void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

}  // namespace fixtures
