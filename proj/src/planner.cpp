#include "dmgplan/planner.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace dmgplan {

namespace {

constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

/// Graspable opposing face: the crossing must face onward along the ray so a
/// jaw closing from beyond presses against it.
constexpr double kGraspAlignment = 0.5;

double snap_radius(double resolution) { return 2.0 * resolution; }

}  // namespace

std::uint32_t snap_to_node(const Dmg& dmg, const Vec3& contact, int angle_deg,
                           double resolution) {
  if (dmg.nodes.empty()) {
    throw Error(Errc::EmptyGraph, "cannot snap on an empty graph");
  }
  double nearest = std::numeric_limits<double>::max();
  for (const DmgNode& n : dmg.nodes) {
    nearest = std::min(nearest, (n.contact - contact).norm());
  }
  const double shortlist = nearest + snap_radius(resolution);
  std::uint32_t best = kNone;
  double best_d = std::numeric_limits<double>::max();
  for (std::uint32_t i = 0; i < dmg.nodes.size(); ++i) {
    const double d = (dmg.nodes[i].contact - contact).norm();
    if (d > shortlist) continue;
    if (!dmg.nodes[i].arc.contains(wrap_deg(angle_deg))) continue;
    if (d < best_d - 1e-12) {
      best = i;
      best_d = d;
    }
  }
  if (best == kNone) {
    throw Error(Errc::NoAdmissibleNode,
                "no node near the query admits angle " + std::to_string(angle_deg));
  }
  return best;
}

std::optional<SecondaryGrasp> resolve_secondary(const Dmg& dmg,
                                                const OrientedSurface& surface,
                                                const Vec3& principal,
                                                const Vec3& closing_dir,
                                                double max_aperture,
                                                double resolution) {
  const auto hits = ray_intersect(surface, principal, closing_dir,
                                  0.25 * resolution, resolution);
  const RayHit* exit_hit = nullptr;
  for (const RayHit& h : hits) {
    if (h.alignment > kGraspAlignment) exit_hit = &h;  // farthest graspable face
  }
  if (!exit_hit) return std::nullopt;

  SecondaryGrasp out;
  out.contact = exit_hit->position;
  out.opening = exit_hit->distance;
  out.node = kNone;
  if (exit_hit->distance > max_aperture) {
    out.aperture_exceeded = true;
    return out;
  }
  double best_d = std::numeric_limits<double>::max();
  for (std::uint32_t i = 0; i < dmg.nodes.size(); ++i) {
    const double d = (dmg.nodes[i].contact - exit_hit->position).norm();
    if (d > snap_radius(resolution) || d >= best_d - 1e-12) continue;
    out.node = i;
    best_d = d;
  }
  if (out.node == kNone) return std::nullopt;
  return out;
}

bool translation_requires_pull(const OrientedSurface& surface,
                               const Vec3& contact, const Vec3& translation,
                               double resolution) {
  const double len = translation.norm();
  if (len < 1e-12) return false;
  const auto hits = ray_intersect(surface, contact, translation / len,
                                  0.25 * resolution, resolution);
  for (const RayHit& h : hits) {
    if (h.alignment > kGraspAlignment) return false;  // face to push against
  }
  return true;
}

namespace {

/// Per-node secondary lookup shared across the search. kUnknown entries are
/// resolved on first touch.
struct SecondaryCache {
  enum class State : char { unknown, valid, invalid_secondary, invalid_aperture };
  std::vector<State> state;
  std::vector<double> opening;
  std::vector<std::uint32_t> sec_node;

  explicit SecondaryCache(std::size_t n)
      : state(n, State::unknown), opening(n, 0), sec_node(n, kNone) {}

  State resolve(std::uint32_t node, const Dmg& dmg, const OrientedSurface& surface,
                const Vec3& closing_dir, double max_aperture, double resolution) {
    if (state[node] != State::unknown) return state[node];
    const auto sec = resolve_secondary(dmg, surface, dmg.nodes[node].contact,
                                       closing_dir, max_aperture, resolution);
    if (!sec) {
      state[node] = State::invalid_secondary;
    } else if (sec->aperture_exceeded) {
      state[node] = State::invalid_aperture;
      opening[node] = sec->opening;
    } else {
      state[node] = State::valid;
      opening[node] = sec->opening;
      sec_node[node] = sec->node;
    }
    return state[node];
  }
};

struct HeapEntry {
  double cost;
  std::uint32_t state;
  bool operator>(const HeapEntry& o) const { return cost > o.cost; }
};

double rotation_cost(double deg, const CostWeights& w) {
  const double r = std::abs(deg);
  return w.rotation * r + w.excess_rotation * std::max(0.0, r - w.comfort_arc);
}

}  // namespace

PlanResult plan_path(const Dmg& dmg, const OrientedSurface& surface,
                     const GraspState& start, const GraspState& goal,
                     const CostWeights& weights, double max_aperture,
                     double resolution, bool secondary_constraint) {
  if (start.principal_node >= dmg.size()) {
    throw Error(Errc::InvalidStart, "start node out of range");
  }
  if (goal.principal_node >= dmg.size()) {
    throw Error(Errc::InvalidGoal, "goal node out of range");
  }
  const DmgNode& sn = dmg.nodes[start.principal_node];
  const DmgNode& gn = dmg.nodes[goal.principal_node];
  if (!sn.arc.contains(wrap_deg(start.principal_angle))) {
    throw Error(Errc::InvalidStart, "start angle outside the node's angular run");
  }
  if (!gn.arc.contains(wrap_deg(goal.principal_angle))) {
    throw Error(Errc::InvalidGoal, "goal angle outside the node's angular run");
  }
  if (dmg.component[start.principal_node] != dmg.component[goal.principal_node]) {
    throw Error(Errc::NoPath,
                "start in component " +
                    std::to_string(dmg.component[start.principal_node]) +
                    ", goal in component " +
                    std::to_string(dmg.component[goal.principal_node]));
  }

  PlanResult result;
  const int step = dmg.finger.angle_step;
  const int slots = 360 / step;
  const auto state_of = [&](std::uint32_t node, int angle) {
    return node * slots + static_cast<std::uint32_t>(wrap_deg(angle) / step);
  };

  Vec3 closing = start.closing_dir;
  if (closing.norm() < 1e-9) closing = -sn.normal;
  closing.normalize();

  SecondaryCache cache(dmg.size());
  auto node_state = [&](std::uint32_t node) {
    return cache.resolve(node, dmg, surface, closing, max_aperture, resolution);
  };

  if (secondary_constraint) {
    const auto st = node_state(start.principal_node);
    if (st != SecondaryCache::State::valid) {
      throw Error(Errc::InvalidStart, "start grasp has no valid secondary contact");
    }
    if (std::abs(cache.opening[start.principal_node] - start.opening) >
        snap_radius(resolution) + 1e-9) {
      result.warnings.push_back("start opening differs from the cast opening");
    }
  }
  const std::uint32_t sec_component =
      secondary_constraint ? dmg.component[cache.sec_node[start.principal_node]]
                           : 0;

  const std::size_t n_states = dmg.size() * static_cast<std::size_t>(slots);
  std::vector<double> dist(n_states, std::numeric_limits<double>::max());
  std::vector<std::uint32_t> prev(n_states, kNone);
  std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<>> heap;

  const std::uint32_t s0 = state_of(start.principal_node, start.principal_angle);
  dist[s0] = 0;
  heap.push({0, s0});

  double best_total = std::numeric_limits<double>::max();
  std::uint32_t best_goal_state = kNone;

  while (!heap.empty()) {
    const HeapEntry top = heap.top();
    heap.pop();
    if (top.cost >= best_total) break;  // no completion can improve
    if (top.cost > dist[top.state]) continue;
    const std::uint32_t node = top.state / slots;
    const int angle = static_cast<int>(top.state % slots) * step;
    ++result.diagnostics.expanded;

    if (node == goal.principal_node) {
      const double total =
          top.cost + rotation_cost(dmg.nodes[node].arc.rotation_within(
                                       angle, wrap_deg(goal.principal_angle)),
                                   weights);
      if (total < best_total) {
        best_total = total;
        best_goal_state = top.state;
      }
    }

    for (std::uint32_t next : dmg.neighbors()[node]) {
      if (secondary_constraint) {
        const auto st = node_state(next);
        if (st == SecondaryCache::State::invalid_secondary) {
          ++result.diagnostics.rejected_secondary;
          continue;
        }
        if (st == SecondaryCache::State::invalid_aperture) {
          ++result.diagnostics.rejected_aperture;
          continue;
        }
        if (dmg.component[cache.sec_node[next]] != sec_component) {
          ++result.diagnostics.rejected_secondary;
          continue;
        }
      }
      const Vec3 motion = dmg.nodes[next].contact - dmg.nodes[node].contact;
      double base = motion.norm();
      if (secondary_constraint) {
        base += weights.opening *
                std::abs(cache.opening[next] - cache.opening[node]);
      }
      if (translation_requires_pull(surface, dmg.nodes[node].contact, motion,
                                    resolution)) {
        base += weights.pull;
      }
      // Rotate inside the current run onto a shared angle, then slide.
      for (int target : dmg.nodes[node].arc.intersect(dmg.nodes[next].arc)) {
        const double c =
            top.cost + base +
            rotation_cost(dmg.nodes[node].arc.rotation_within(angle, target),
                          weights);
        const std::uint32_t ns = state_of(next, target);
        if (c < dist[ns] - 1e-15) {
          dist[ns] = c;
          prev[ns] = top.state;
          heap.push({c, ns});
        }
      }
    }
  }

  if (best_goal_state == kNone) {
    throw Error(Errc::NoPath,
                "all routes between components " +
                    std::to_string(dmg.component[start.principal_node]) +
                    " and " + std::to_string(dmg.component[goal.principal_node]) +
                    " are invalidated");
  }

  std::vector<std::uint32_t> nodes;
  for (std::uint32_t s = best_goal_state; s != kNone; s = prev[s]) {
    nodes.push_back(s / slots);
  }
  std::reverse(nodes.begin(), nodes.end());
  result.path = std::move(nodes);
  result.diagnostics.cost = best_total;

  if (goal.closing_dir.norm() > 1e-9 &&
      (goal.closing_dir.normalized() - closing).norm() > 0.1) {
    result.warnings.push_back("goal closing direction differs from the maintained one");
  }
  if (secondary_constraint && goal.opening > 0 &&
      std::abs(cache.opening[goal.principal_node] - goal.opening) >
          snap_radius(resolution)) {
    result.warnings.push_back("goal opening differs from the cast opening");
  }
  return result;
}

Vec3 PrimitiveSequence::net_translation() const {
  Vec3 t = Vec3::Zero();
  for (const PrimitiveStep& s : steps) {
    if (s.kind == PrimitiveStep::Kind::translation) t += s.translation;
  }
  return t;
}

double PrimitiveSequence::net_rotation_deg() const {
  double r = 0;
  for (const PrimitiveStep& s : steps) {
    if (s.kind == PrimitiveStep::Kind::rotation) r += s.rotation_deg;
  }
  return r;
}

namespace {

GraspState state_at(const Dmg& dmg, const OrientedSurface& surface,
                    std::uint32_t node, int angle, const Vec3& closing,
                    double max_aperture, double resolution,
                    const GraspState& fallback) {
  GraspState st;
  st.principal_node = node;
  st.principal_angle = wrap_deg(angle);
  st.closing_dir = closing;
  const auto sec = resolve_secondary(dmg, surface, dmg.nodes[node].contact,
                                     closing, max_aperture, resolution);
  st.opening = sec ? sec->opening : fallback.opening;
  st.secondary_contact = dmg.nodes[node].contact + st.opening * closing;
  return st;
}

}  // namespace

PrimitiveSequence to_primitives(const Dmg& dmg, const OrientedSurface& surface,
                                const std::vector<std::uint32_t>& path,
                                const GraspState& start, int goal_angle,
                                RotationPolicy policy, double max_aperture,
                                double resolution) {
  if (path.empty()) {
    throw Error(Errc::InvalidArgument, "empty node path");
  }
  goal_angle = wrap_deg(goal_angle);
  if (!dmg.nodes[path.front()].arc.contains(wrap_deg(start.principal_angle))) {
    throw Error(Errc::InvalidStart, "start angle outside the first node's run");
  }
  if (!dmg.nodes[path.back()].arc.contains(goal_angle)) {
    throw Error(Errc::InvalidGoal, "goal angle outside the last node's run");
  }
  Vec3 closing = start.closing_dir;
  if (closing.norm() < 1e-9) closing = -dmg.nodes[path.front()].normal;
  closing.normalize();

  PrimitiveSequence seq;
  int gamma = wrap_deg(start.principal_angle);
  GraspState prev_state = start;

  for (std::size_t k = 0; k < path.size(); ++k) {
    const AngularComponent& cur = dmg.nodes[path[k]].arc;
    int target;
    if (k + 1 == path.size()) {
      target = goal_angle;
    } else {
      const AngularComponent& nxt = dmg.nodes[path[k + 1]].arc;
      const auto shared = cur.intersect(nxt);
      if (shared.empty()) {
        throw Error(Errc::EmptyIntersection,
                    "path nodes " + std::to_string(path[k]) + " and " +
                        std::to_string(path[k + 1]) + " share no angle");
      }
      if (policy == RotationPolicy::minimal && cur.contains(gamma) &&
          std::find(shared.begin(), shared.end(), gamma) != shared.end()) {
        target = gamma;
      } else {
        target = shared.front();
        double best_key = std::numeric_limits<double>::max();
        for (int a : shared) {
          const double rot = std::abs(cur.rotation_within(gamma, a));
          const double key = policy == RotationPolicy::minimal
                                 ? rot * 1000.0 + a
                                 : circular_distance_deg(a, goal_angle) * 1000.0 +
                                       rot + a * 1e-6;
          if (key < best_key) {
            best_key = key;
            target = a;
          }
        }
      }
    }

    PrimitiveStep rot;
    rot.kind = PrimitiveStep::Kind::rotation;
    rot.rotation_deg = cur.rotation_within(gamma, target);
    gamma = target;
    rot.after = state_at(dmg, surface, path[k], gamma, closing, max_aperture,
                         resolution, prev_state);
    prev_state = rot.after;
    seq.steps.push_back(rot);

    if (k + 1 < path.size()) {
      PrimitiveStep tr;
      tr.kind = PrimitiveStep::Kind::translation;
      tr.translation = dmg.nodes[path[k + 1]].contact - dmg.nodes[path[k]].contact;
      if (tr.translation.norm() < 1e-12) {
        throw Error(Errc::InvalidArgument, "zero-length translation between nodes");
      }
      tr.after = state_at(dmg, surface, path[k + 1], gamma, closing,
                          max_aperture, resolution, prev_state);
      prev_state = tr.after;
      seq.steps.push_back(tr);
    }
  }
  return seq;
}

PrimitiveSequence merge_segments(const PrimitiveSequence& seq, double angle_tol,
                                 double direction_tol) {
  PrimitiveSequence out;
  double carried = 0;  // rotation absorbed from merged-away entries
  std::size_t i = 0;
  while (i < seq.steps.size()) {
    PrimitiveStep step = seq.steps[i];
    if (step.kind == PrimitiveStep::Kind::rotation) {
      step.rotation_deg += carried;
      carried = 0;
      out.steps.push_back(step);
      ++i;
      continue;
    }
    // Translation: absorb following (rotation, translation) pairs while the
    // rotation is negligible and the direction stays aligned.
    while (i + 2 < seq.steps.size() &&
           seq.steps[i + 1].kind == PrimitiveStep::Kind::rotation &&
           seq.steps[i + 2].kind == PrimitiveStep::Kind::translation &&
           std::abs(seq.steps[i + 1].rotation_deg) <= angle_tol) {
      const Vec3& a = step.translation;
      const Vec3& b = seq.steps[i + 2].translation;
      const double denom = a.norm() * b.norm();
      if (denom < 1e-18) break;
      const double cosang = std::clamp(a.dot(b) / denom, -1.0, 1.0);
      if (std::acos(cosang) * 180.0 / M_PI > direction_tol) break;
      carried += seq.steps[i + 1].rotation_deg;
      step.translation += b;
      step.after = seq.steps[i + 2].after;
      i += 2;
    }
    out.steps.push_back(step);
    ++i;
  }
  if (carried != 0 && !out.steps.empty() &&
      out.steps.back().kind == PrimitiveStep::Kind::rotation) {
    out.steps.back().rotation_deg += carried;
  }
  return out;
}

GraspState replay(const PrimitiveSequence& seq, const Dmg& dmg,
                  const GraspState& start, double tolerance) {
  GraspState cur = start;
  Vec3 contact = dmg.nodes[start.principal_node].contact;
  double angle = start.principal_angle;
  for (const PrimitiveStep& step : seq.steps) {
    if (step.kind == PrimitiveStep::Kind::rotation) {
      angle += step.rotation_deg;
    } else {
      contact += step.translation;
    }
    const Vec3 expect = dmg.nodes[step.after.principal_node].contact;
    if ((contact - expect).norm() > tolerance) {
      throw Error(Errc::InvalidArgument, "replayed contact diverges from snapshot");
    }
    if (circular_distance_deg(wrap_deg(static_cast<int>(std::llround(angle))),
                              step.after.principal_angle) > 0) {
      throw Error(Errc::InvalidArgument, "replayed angle diverges from snapshot");
    }
    cur = step.after;
  }
  return cur;
}

}  // namespace dmgplan
