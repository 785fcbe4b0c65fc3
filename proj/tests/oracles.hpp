#pragma once

// Reference implementations used to cross-check the library. They share only
// the validity primitives (secondary resolution, pull detection, the frame
// convention) with production code; every search and set structure here is
// written from scratch in a deliberately naive style: dense scan-min Dijkstra
// over explicit (node, angle) states, Floyd-Warshall reachability closure,
// full-scan finger collision, array-based angular-set intersection.

#include "dmgplan/dmg.hpp"
#include "dmgplan/planner.hpp"
#include "dmgplan/surface.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <vector>

namespace oracle {

using namespace dmgplan;

inline std::vector<char> arc_table(const AngularComponent& arc) {
  std::vector<char> t(360 / arc.step, 0);
  for (int k = 0; k < arc.count; ++k) {
    t[wrap_deg(arc.start + k * arc.step) / arc.step] = 1;
  }
  return t;
}

inline bool arcs_share_angle(const AngularComponent& a,
                             const AngularComponent& b) {
  const auto ta = arc_table(a);
  const auto tb = arc_table(b);
  for (std::size_t i = 0; i < ta.size(); ++i) {
    if (ta[i] && tb[i]) return true;
  }
  return false;
}

/// Signed rotation from one contained angle to another staying inside the
/// run; shortest direction on full circles with 180-ties resolved positive.
inline int rotation_inside(const AngularComponent& arc, int from, int to) {
  if (arc.full_circle()) {
    const int d = wrap_deg(to - from);
    return d > 180 ? d - 360 : d;
  }
  const int ia = wrap_deg(from - arc.start) / arc.step;
  const int ib = wrap_deg(to - arc.start) / arc.step;
  return (ib - ia) * arc.step;
}

/// Full-scan version of the finger collision test over the same candidate
/// ball the production grid query uses (length + width around the contact).
inline bool angle_blocked(const OrientedSurface& surface, const Vec3& contact,
                          const Vec3& normal, const FingerModel& finger,
                          int angle_deg) {
  const TangentFrame frame = tangent_frame(normal);
  const double a = angle_deg * M_PI / 180.0;
  const Vec3 dir = std::cos(a) * frame.t1 + std::sin(a) * frame.t2;
  const Vec3 side = frame.normal.cross(dir);
  const double reach = finger.length + finger.width;
  for (std::size_t i = 0; i < surface.size(); ++i) {
    const Vec3 q = surface.point(i) - contact;
    if (q.norm() > reach) continue;
    if (!(q.dot(frame.normal) > finger.height_clearance)) continue;
    const double u = q.dot(dir);
    const double v = q.dot(side);
    if (u >= 0.0 && u <= finger.length && v >= -finger.width / 2 &&
        v <= finger.width / 2) {
      return true;
    }
  }
  return false;
}

inline std::vector<int> admissible_angles_naive(const OrientedSurface& surface,
                                                const Vec3& contact,
                                                const Vec3& normal,
                                                const FingerModel& finger) {
  std::vector<int> out;
  for (int a = 0; a < 360; a += finger.angle_step) {
    if (!angle_blocked(surface, contact, normal, finger, a)) out.push_back(a);
  }
  return out;
}

struct NodeCheck {
  char state = 0;  // 0 unknown, 1 valid, 2 no secondary, 3 aperture
  double opening = 0;
  std::uint32_t sec_node = std::numeric_limits<std::uint32_t>::max();
};

class Validity {
 public:
  Validity(const Dmg& dmg, const OrientedSurface& surface, Vec3 closing,
           double max_aperture)
      : dmg_(dmg),
        surface_(surface),
        closing_(std::move(closing)),
        max_aperture_(max_aperture),
        cache_(dmg.size()) {}

  const NodeCheck& operator()(std::uint32_t node) {
    NodeCheck& c = cache_[node];
    if (c.state == 0) {
      const auto sec =
          resolve_secondary(dmg_, surface_, dmg_.nodes[node].contact, closing_,
                            max_aperture_, dmg_.resolution);
      if (!sec) {
        c.state = 2;
      } else if (sec->aperture_exceeded) {
        c.state = 3;
        c.opening = sec->opening;
      } else {
        c.state = 1;
        c.opening = sec->opening;
        c.sec_node = sec->node;
      }
    }
    return c;
  }

 private:
  const Dmg& dmg_;
  const OrientedSurface& surface_;
  Vec3 closing_;
  double max_aperture_;
  std::vector<NodeCheck> cache_;
};

/// Exact least path cost by dense scan-min Dijkstra over (node, angle)
/// states. nullopt when no route completes (including an invalid start under
/// the secondary rule). Cost terms fold in the same order as the planner so
/// equal paths produce bitwise-equal sums.
inline std::optional<double> shortest_cost(
    const Dmg& dmg, const OrientedSurface& surface, const GraspState& start,
    const GraspState& goal, const CostWeights& w, double max_aperture,
    double resolution, bool secondary) {
  const double inf = std::numeric_limits<double>::max();
  const int step = dmg.finger.angle_step;
  const int slots = 360 / step;

  Vec3 closing = start.closing_dir;
  if (closing.norm() < 1e-9) closing = -dmg.nodes[start.principal_node].normal;
  closing.normalize();
  Validity valid(dmg, surface, closing, max_aperture);

  std::uint32_t sec_comp = 0;
  if (secondary) {
    if (valid(start.principal_node).state != 1) return std::nullopt;
    sec_comp = dmg.component[valid(start.principal_node).sec_node];
  }

  std::vector<std::vector<std::uint32_t>> adj(dmg.size());
  for (const auto& [a, b] : dmg.edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<std::vector<char>> tables;
  tables.reserve(dmg.size());
  for (const DmgNode& n : dmg.nodes) tables.push_back(arc_table(n.arc));

  std::map<std::pair<std::uint32_t, std::uint32_t>, bool> pull_memo;
  const auto pulls = [&](std::uint32_t from, std::uint32_t to) {
    const auto key = std::make_pair(from, to);
    const auto it = pull_memo.find(key);
    if (it != pull_memo.end()) return it->second;
    const bool p = translation_requires_pull(
        surface, dmg.nodes[from].contact,
        dmg.nodes[to].contact - dmg.nodes[from].contact, resolution);
    pull_memo[key] = p;
    return p;
  };

  const std::size_t n_states = dmg.size() * static_cast<std::size_t>(slots);
  std::vector<double> dist(n_states, inf);
  std::vector<char> settled(n_states, 0);
  dist[start.principal_node * slots +
       wrap_deg(start.principal_angle) / step] = 0;

  for (;;) {
    std::size_t cur = n_states;
    double best = inf;
    for (std::size_t s = 0; s < n_states; ++s) {
      if (!settled[s] && dist[s] < best) {
        best = dist[s];
        cur = s;
      }
    }
    if (cur == n_states) break;
    settled[cur] = 1;
    const auto node = static_cast<std::uint32_t>(cur / slots);
    const int angle = static_cast<int>(cur % slots) * step;

    for (std::uint32_t nb : adj[node]) {
      if (secondary) {
        const NodeCheck& c = valid(nb);
        if (c.state != 1 || dmg.component[c.sec_node] != sec_comp) continue;
      }
      const Vec3 motion = dmg.nodes[nb].contact - dmg.nodes[node].contact;
      double base = motion.norm();
      if (secondary) {
        base += w.opening * std::abs(valid(nb).opening - valid(node).opening);
      }
      if (pulls(node, nb)) base += w.pull;
      for (int slot = 0; slot < slots; ++slot) {
        if (!tables[node][slot] || !tables[nb][slot]) continue;
        const double r =
            std::abs(rotation_inside(dmg.nodes[node].arc, angle, slot * step));
        const double c =
            dist[cur] + base +
            (w.rotation * r +
             w.excess_rotation * std::max(0.0, r - w.comfort_arc));
        const std::size_t ns = nb * static_cast<std::size_t>(slots) + slot;
        if (c < dist[ns] - 1e-15) dist[ns] = c;
      }
    }
  }

  double best_total = inf;
  const AngularComponent& garc = dmg.nodes[goal.principal_node].arc;
  const int goal_angle = wrap_deg(goal.principal_angle);
  for (int slot = 0; slot < slots; ++slot) {
    const std::size_t s =
        goal.principal_node * static_cast<std::size_t>(slots) + slot;
    if (dist[s] == inf) continue;
    const double r =
        std::abs(rotation_inside(garc, slot * step, goal_angle));
    const double total =
        dist[s] +
        (w.rotation * r + w.excess_rotation * std::max(0.0, r - w.comfort_arc));
    if (total < best_total) best_total = total;
  }
  if (best_total == inf) return std::nullopt;
  return best_total;
}

/// Node-level reachability closure via Floyd-Warshall over the edges whose
/// endpoints are valid under the given closing direction and keep the
/// secondary on the start's component.
inline std::vector<char> reachable_nodes(const Dmg& dmg,
                                         const OrientedSurface& surface,
                                         const Vec3& closing,
                                         std::uint32_t start_node,
                                         double max_aperture) {
  const std::size_t n = dmg.size();
  Validity valid(dmg, surface, closing, max_aperture);
  std::vector<char> out(n, 0);
  if (valid(start_node).state != 1) return out;
  const std::uint32_t sec_comp = dmg.component[valid(start_node).sec_node];

  std::vector<char> ok(n, 0);
  for (std::uint32_t i = 0; i < n; ++i) {
    const NodeCheck& c = valid(i);
    ok[i] = c.state == 1 && dmg.component[c.sec_node] == sec_comp;
  }
  std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
  for (std::uint32_t i = 0; i < n; ++i) reach[i][i] = ok[i];
  for (const auto& [a, b] : dmg.edges) {
    if (ok[a] && ok[b]) {
      reach[a][b] = 1;
      reach[b][a] = 1;
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!reach[i][k]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (reach[k][j]) reach[i][j] = 1;
      }
    }
  }
  for (std::size_t j = 0; j < n; ++j) out[j] = reach[start_node][j];
  return out;
}

/// Partition of 0..n-1 into connected groups of a symmetric binary matrix,
/// via union-find; each group is reported as a sorted member list and groups
/// are sorted by first member for comparison.
inline std::vector<std::vector<std::size_t>> matrix_partition(
    const std::vector<char>& entries, std::size_t n) {
  std::vector<std::size_t> parent(n);
  for (std::size_t i = 0; i < n; ++i) parent[i] = i;
  const auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (entries[i * n + j]) parent[find(i)] = find(j);
    }
  }
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[find(i)].push_back(i);
  std::vector<std::vector<std::size_t>> out;
  for (auto& [root, members] : groups) out.push_back(std::move(members));
  return out;
}

}  // namespace oracle
