#include "dmgplan/manipulability.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace dmgplan {
namespace {

constexpr double kClosingCompat = 0.86602540378443864676;  // cos 30 deg

std::array<long long, 3> closing_key(const Vec3& c) {
  return {std::llround(c.x() * 1e6), std::llround(c.y() * 1e6),
          std::llround(c.z() * 1e6)};
}

struct NodeValidity {
  bool valid = false;
  std::uint32_t sec_node = 0;
};

/// Secondary-grasp admissibility of every node under one closing direction.
std::vector<NodeValidity> validity_table(const Dmg& dmg,
                                         const OrientedSurface& surface,
                                         const Vec3& closing, double max_aperture,
                                         double resolution) {
  std::vector<NodeValidity> table(dmg.size());
  for (std::uint32_t v = 0; v < dmg.size(); ++v) {
    const auto sec = resolve_secondary(dmg, surface, dmg.nodes[v].contact,
                                       closing, max_aperture, resolution);
    if (sec && !sec->aperture_exceeded) table[v] = {true, sec->node};
  }
  return table;
}

std::vector<char> reachable_from(const Dmg& dmg,
                                 const std::vector<NodeValidity>& table,
                                 std::uint32_t start) {
  std::vector<char> seen(dmg.size(), 0);
  if (!table[start].valid) return seen;
  const std::uint32_t sec_component = dmg.component[table[start].sec_node];
  std::vector<std::uint32_t> stack{start};
  seen[start] = 1;
  while (!stack.empty()) {
    const std::uint32_t v = stack.back();
    stack.pop_back();
    for (std::uint32_t w : dmg.neighbors()[v]) {
      if (seen[w] || !table[w].valid) continue;
      if (dmg.component[table[w].sec_node] != sec_component) continue;
      seen[w] = 1;
      stack.push_back(w);
    }
  }
  return seen;
}

}  // namespace

std::vector<PoseSample> sample_poses(const Dmg& dmg,
                                     const OrientedSurface& surface,
                                     double grid_step, int angle_step,
                                     double max_aperture, double resolution) {
  if (grid_step <= 0)
    throw Error(Errc::InvalidArgument, "grid_step must be positive");
  if (angle_step <= 0 || 360 % angle_step != 0)
    throw Error(Errc::InvalidArgument, "angle_step must divide 360");

  const Aabb& box = surface.bbox();
  std::array<int, 3> cells;
  for (int k = 0; k < 3; ++k)
    cells[k] = static_cast<int>(std::ceil(box.extent()[k] / grid_step - 1e-9));

  std::vector<PoseSample> samples;
  bool any_valid = false;
  for (int ix = 0; ix <= cells[0]; ++ix) {
    for (int iy = 0; iy <= cells[1]; ++iy) {
      for (int iz = 0; iz <= cells[2]; ++iz) {
        const Vec3 query = box.min + grid_step * Vec3(ix, iy, iz);
        const Vec3 nearest = surface.point(surface.grid().nearest(query));
        if ((nearest - query).norm() > grid_step) {
          PoseSample s;
          s.query = s.contact = query;
          s.rejection = "NoNearbyNode";
          samples.push_back(std::move(s));
          continue;
        }
        for (int a = 0; a < 360; a += angle_step) {
          PoseSample s;
          s.query = s.contact = query;
          s.angle = a;
          try {
            s.node = snap_to_node(dmg, query, a, resolution);
          } catch (const Error&) {
            s.rejection = "NoAdmissibleNode";
            samples.push_back(std::move(s));
            continue;
          }
          const DmgNode& node = dmg.nodes[s.node];
          s.contact = node.contact;
          s.closing_dir = -node.normal;
          const auto sec = resolve_secondary(dmg, surface, node.contact,
                                             s.closing_dir, max_aperture,
                                             resolution);
          if (!sec) {
            s.rejection = "NoSecondary";
          } else if (sec->aperture_exceeded) {
            s.rejection = "ApertureExceeded";
          } else {
            s.opening = sec->opening;
            s.valid = true;
            any_valid = true;
          }
          samples.push_back(std::move(s));
        }
      }
    }
  }
  if (!any_valid)
    throw Error(Errc::NoValidPoses, "no sampled pose snaps to a valid grasp");
  return samples;
}

ManipulabilityMatrix build_matrix(const Dmg& dmg, const OrientedSurface& surface,
                                  const std::vector<PoseSample>& samples,
                                  const CostWeights& weights,
                                  double max_aperture, double resolution,
                                  bool exhaustive) {
  ManipulabilityMatrix matrix;
  for (std::uint32_t i = 0; i < samples.size(); ++i)
    if (samples[i].valid) matrix.sample_index.push_back(i);
  matrix.size = matrix.sample_index.size();
  if (matrix.size == 0)
    throw Error(Errc::NoValidPoses, "matrix needs at least one valid pose");
  matrix.entries.assign(matrix.size * matrix.size, 0);

  std::map<std::array<long long, 3>, std::vector<NodeValidity>> tables;
  std::map<std::pair<std::uint32_t, std::array<long long, 3>>, std::vector<char>>
      reach;

  for (std::size_t i = 0; i < matrix.size; ++i) {
    const PoseSample& a = samples[matrix.sample_index[i]];
    const std::vector<char>* from = nullptr;
    if (!exhaustive) {
      const auto key = closing_key(a.closing_dir);
      auto table = tables.find(key);
      if (table == tables.end())
        table = tables.emplace(key, validity_table(dmg, surface, a.closing_dir,
                                                   max_aperture, resolution))
                    .first;
      auto hit = reach.find({a.node, key});
      if (hit == reach.end())
        hit = reach.emplace(std::make_pair(a.node, key),
                            reachable_from(dmg, table->second, a.node))
                  .first;
      from = &hit->second;
    }
    for (std::size_t j = i + 1; j < matrix.size; ++j) {
      const PoseSample& b = samples[matrix.sample_index[j]];
      if (a.closing_dir.dot(b.closing_dir) < kClosingCompat) continue;
      bool connected;
      if (exhaustive) {
        GraspState start{a.node, a.angle, Vec3::Zero(), a.opening, a.closing_dir};
        GraspState goal{b.node, b.angle, Vec3::Zero(), b.opening, b.closing_dir};
        try {
          plan_path(dmg, surface, start, goal, weights, max_aperture, resolution);
          connected = true;
        } catch (const Error&) {
          connected = false;
        }
      } else {
        connected = (*from)[b.node] != 0;
      }
      if (connected) {
        matrix.entries[i * matrix.size + j] = 1;
        matrix.entries[j * matrix.size + i] = 1;
      }
    }
  }
  order_blocks(matrix);
  return matrix;
}

void order_blocks(ManipulabilityMatrix& matrix) {
  const std::size_t n = matrix.size;
  std::vector<std::uint32_t> label(n, std::numeric_limits<std::uint32_t>::max());
  std::vector<std::vector<std::uint32_t>> groups;
  for (std::size_t i = 0; i < n; ++i) {
    if (label[i] != std::numeric_limits<std::uint32_t>::max()) continue;
    const auto id = static_cast<std::uint32_t>(groups.size());
    std::vector<std::uint32_t> members{static_cast<std::uint32_t>(i)};
    label[i] = id;
    for (std::size_t k = 0; k < members.size(); ++k) {
      for (std::size_t j = 0; j < n; ++j) {
        if (matrix.at(members[k], j) &&
            label[j] == std::numeric_limits<std::uint32_t>::max()) {
          label[j] = id;
          members.push_back(static_cast<std::uint32_t>(j));
        }
      }
    }
    std::sort(members.begin(), members.end());
    groups.push_back(std::move(members));
  }

  std::vector<std::uint32_t> order(groups.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (groups[a].size() != groups[b].size())
      return groups[a].size() > groups[b].size();
    return groups[a].front() < groups[b].front();
  });

  matrix.permutation.clear();
  matrix.block.assign(n, 0);
  for (std::uint32_t rank = 0; rank < order.size(); ++rank) {
    for (std::uint32_t row : groups[order[rank]]) {
      matrix.permutation.push_back(row);
      matrix.block[row] = rank;
    }
  }
  matrix.block_count = groups.size();
}

std::vector<RegraspArea> report_regrasp_areas(
    const ManipulabilityMatrix& matrix, const std::vector<PoseSample>& samples,
    std::size_t representatives_per_block) {
  std::vector<std::vector<std::uint32_t>> members(matrix.block_count);
  for (std::size_t row = 0; row < matrix.size; ++row)
    members[matrix.block[row]].push_back(matrix.sample_index[row]);

  std::vector<RegraspArea> areas;
  for (std::uint32_t b = 0; b < members.size(); ++b) {
    RegraspArea area;
    area.block = b;
    area.member_count = members[b].size();
    for (std::uint32_t s : members[b]) area.contact_bounds.expand(samples[s].contact);

    const auto& group = members[b];
    std::vector<std::uint32_t> reps;
    if (!group.empty()) {
      std::uint32_t medoid = group.front();
      double best = std::numeric_limits<double>::max();
      for (std::uint32_t s : group) {
        double total = 0;
        for (std::uint32_t t : group)
          total += (samples[s].contact - samples[t].contact).norm();
        if (total < best) {
          best = total;
          medoid = s;
        }
      }
      reps.push_back(medoid);
      while (reps.size() < representatives_per_block && reps.size() < group.size()) {
        std::uint32_t farthest = group.front();
        double best_min = -1;
        for (std::uint32_t s : group) {
          if (std::find(reps.begin(), reps.end(), s) != reps.end()) continue;
          double nearest = std::numeric_limits<double>::max();
          for (std::uint32_t r : reps)
            nearest = std::min(nearest,
                               (samples[s].contact - samples[r].contact).norm());
          if (nearest > best_min) {
            best_min = nearest;
            farthest = s;
          }
        }
        reps.push_back(farthest);
      }
    }
    area.representatives = std::move(reps);
    areas.push_back(std::move(area));
  }
  return areas;
}

}  // namespace dmgplan
