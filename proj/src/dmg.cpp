#include "dmgplan/dmg.hpp"
#include "dmgplan/kernels.hpp"

#include <algorithm>
#include <numeric>

namespace dmgplan {

void FingerModel::validate() const {
  if (!(length > 0) || !(width > 0) || height_clearance < 0) {
    throw Error(Errc::InvalidArgument, "finger length/width must be positive");
  }
  if (angle_step <= 0 || 360 % angle_step != 0) {
    throw Error(Errc::InvalidArgument, "angle_step must divide 360");
  }
}

std::vector<int> AngularComponent::angles() const {
  std::vector<int> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) out.push_back(wrap_deg(start + k * step));
  return out;
}

int AngularComponent::rotation_within(int from_deg, int to_deg) const {
  if (!contains(from_deg) || !contains(to_deg)) {
    throw Error(Errc::InvalidArgument, "rotation endpoints must lie in the run");
  }
  if (full_circle()) {
    int d = wrap_deg(to_deg - from_deg);
    return d > 180 ? d - 360 : d;
  }
  return (index_of(to_deg) - index_of(from_deg)) * step;
}

std::vector<int> AngularComponent::intersect(const AngularComponent& other) const {
  std::vector<int> out;
  for (int k = 0; k < count; ++k) {
    const int a = wrap_deg(start + k * step);
    if (other.contains(a)) out.push_back(a);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool AngularComponent::intersects(const AngularComponent& other) const {
  for (int k = 0; k < count; ++k) {
    if (other.contains(wrap_deg(start + k * step))) return true;
  }
  return false;
}

std::vector<AngularComponent> split_components(const std::vector<int>& angles,
                                               int angle_step) {
  std::vector<AngularComponent> out;
  if (angles.empty()) return out;
  const int slots = 360 / angle_step;
  std::vector<char> present(slots, 0);
  for (int a : angles) {
    const int w = wrap_deg(a);
    if (w % angle_step != 0) {
      throw Error(Errc::InvalidArgument, "angle not on the discretization grid");
    }
    present[w / angle_step] = 1;
  }
  const int filled = static_cast<int>(std::count(present.begin(), present.end(), 1));
  if (filled == slots) {
    out.push_back({0, slots, angle_step});
    return out;
  }
  // Run starts are filled slots preceded by an empty one (circularly).
  for (int s = 0; s < slots; ++s) {
    if (!present[s] || present[(s + slots - 1) % slots]) continue;
    int len = 0;
    while (present[(s + len) % slots]) ++len;
    out.push_back({s * angle_step, len, angle_step});
  }
  std::sort(out.begin(), out.end(),
            [](const AngularComponent& a, const AngularComponent& b) {
              return a.start < b.start;
            });
  return out;
}

SurfacePatchGraph refine_by_normals(const SurfacePatchGraph& graph, double delta) {
  if (!(delta > 0) || delta > 2.0) {
    throw Error(Errc::InvalidArgument, "delta must lie in (0, 2]");
  }
  std::vector<char> has_edge(graph.patches.size(), 0);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> kept;
  for (auto [a, b] : graph.adjacency) {
    if ((graph.patches[a].normal - graph.patches[b].normal).norm() > delta) continue;
    kept.emplace_back(a, b);
    has_edge[a] = has_edge[b] = 1;
  }
  SurfacePatchGraph out;
  out.resolution = graph.resolution;
  out.warnings = graph.warnings;
  std::vector<std::uint32_t> remap(graph.patches.size(),
                                   std::numeric_limits<std::uint32_t>::max());
  for (std::uint32_t i = 0; i < graph.patches.size(); ++i) {
    if (!has_edge[i]) continue;  // isolated after pruning
    remap[i] = static_cast<std::uint32_t>(out.patches.size());
    out.patches.push_back(graph.patches[i]);
  }
  for (auto [a, b] : kept) out.adjacency.emplace_back(remap[a], remap[b]);
  std::sort(out.adjacency.begin(), out.adjacency.end());
  return out;
}

std::vector<int> admissible_angles(const OrientedSurface& surface,
                                   const Vec3& contact, const Vec3& normal,
                                   const FingerModel& finger) {
  finger.validate();
  if (!surface.bbox().contains(contact, surface.bbox().diameter() * 0.05 + 1e-6)) {
    throw Error(Errc::InvalidArgument, "contact lies outside the surface bounds");
  }
  const TangentFrame frame = tangent_frame(normal);
  const double reach = finger.length + finger.width;
  const auto candidates = surface.grid().radius_query(contact, reach);

  // Project candidates into the contact frame once; only points rising above
  // the clearance can block any angle, so the per-angle scans run on the
  // filtered set.
  std::vector<double> cx(candidates.size()), cy(candidates.size()), cz(candidates.size());
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const Vec3 q = surface.point(candidates[k]);
    cx[k] = q.x();
    cy[k] = q.y();
    cz[k] = q.z();
  }
  std::vector<double> u(candidates.size()), v(candidates.size()), h(candidates.size());
  const double p[3] = {contact.x(), contact.y(), contact.z()};
  const double t1[3] = {frame.t1.x(), frame.t1.y(), frame.t1.z()};
  const double t2[3] = {frame.t2.x(), frame.t2.y(), frame.t2.z()};
  const double nn[3] = {frame.normal.x(), frame.normal.y(), frame.normal.z()};
  const auto& ops = kernels::active();
  ops.frame_project(cx.data(), cy.data(), cz.data(), candidates.size(), p, t1,
                    t2, nn, u.data(), v.data(), h.data());

  std::vector<double> bu, bv;
  bu.reserve(candidates.size());
  bv.reserve(candidates.size());
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    if (h[k] > finger.height_clearance) {
      bu.push_back(u[k]);
      bv.push_back(v[k]);
    }
  }

  std::vector<int> out;
  const int slots = 360 / finger.angle_step;
  for (int s = 0; s < slots; ++s) {
    const double rad = s * finger.angle_step * M_PI / 180.0;
    const bool blocked =
        ops.any_in_rect(bu.data(), bv.data(), bu.size(), std::cos(rad),
                        std::sin(rad), finger.length, finger.width / 2);
    if (!blocked) out.push_back(s * finger.angle_step);
  }
  return out;
}

void Dmg::rebuild() {
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  adjacency_.assign(nodes.size(), {});
  for (auto [a, b] : edges) {
    adjacency_[a].push_back(b);
    adjacency_[b].push_back(a);
  }
  for (auto& l : adjacency_) std::sort(l.begin(), l.end());

  component.assign(nodes.size(), std::numeric_limits<std::uint32_t>::max());
  std::uint32_t label = 0;
  std::vector<std::uint32_t> stack;
  for (std::uint32_t seed = 0; seed < nodes.size(); ++seed) {
    if (component[seed] != std::numeric_limits<std::uint32_t>::max()) continue;
    stack.push_back(seed);
    component[seed] = label;
    while (!stack.empty()) {
      const std::uint32_t cur = stack.back();
      stack.pop_back();
      for (std::uint32_t nb : adjacency_[cur]) {
        if (component[nb] != std::numeric_limits<std::uint32_t>::max()) continue;
        component[nb] = label;
        stack.push_back(nb);
      }
    }
    ++label;
  }
  component_count = label;
}

std::vector<std::uint32_t> Dmg::nodes_at_patch(std::uint32_t patch) const {
  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].patch == patch) out.push_back(i);
  }
  return out;
}

Dmg build_dmg(const SurfacePatchGraph& graph, const OrientedSurface& surface,
              const FingerModel& finger, double delta) {
  finger.validate();
  Dmg dmg;
  dmg.finger = finger;
  dmg.delta = delta;
  dmg.resolution = graph.resolution;

  const SurfacePatchGraph refined = refine_by_normals(graph, delta);

  // Patches whose angle set comes out empty are removed before edges exist,
  // and logged for the manipulability report.
  std::vector<std::vector<AngularComponent>> runs(refined.patches.size());
  std::vector<char> alive(refined.patches.size(), 0);
  for (std::uint32_t i = 0; i < refined.patches.size(); ++i) {
    const auto angles = admissible_angles(surface, refined.patches[i].centroid,
                                          refined.patches[i].normal, finger);
    if (angles.empty()) {
      dmg.blocked_patches.push_back(refined.patches[i].centroid);
      continue;
    }
    runs[i] = split_components(angles, finger.angle_step);
    alive[i] = 1;
  }

  std::vector<std::uint32_t> patch_remap(refined.patches.size(),
                                         std::numeric_limits<std::uint32_t>::max());
  std::vector<std::vector<std::uint32_t>> node_of(refined.patches.size());
  std::uint32_t next_patch = 0;
  for (std::uint32_t i = 0; i < refined.patches.size(); ++i) {
    if (!alive[i]) continue;
    patch_remap[i] = next_patch++;
    for (std::uint32_t j = 0; j < runs[i].size(); ++j) {
      node_of[i].push_back(static_cast<std::uint32_t>(dmg.nodes.size()));
      DmgNode node;
      node.contact = refined.patches[i].centroid;
      node.normal = refined.patches[i].normal;
      node.arc = runs[i][j];
      node.patch = patch_remap[i];
      node.arc_index = j;
      dmg.nodes.push_back(node);
    }
  }
  if (dmg.nodes.empty()) {
    throw Error(Errc::EmptyGraph, "no contact patch admits any finger angle");
  }

  for (auto [a, b] : refined.adjacency) {
    if (!alive[a] || !alive[b]) continue;
    for (std::uint32_t j = 0; j < runs[a].size(); ++j)
      for (std::uint32_t k = 0; k < runs[b].size(); ++k) {
        if (!runs[a][j].intersects(runs[b][k])) continue;
        const std::uint32_t na = node_of[a][j];
        const std::uint32_t nb = node_of[b][k];
        dmg.edges.emplace_back(std::min(na, nb), std::max(na, nb));
      }
  }
  dmg.rebuild();
  return dmg;
}

}  // namespace dmgplan
