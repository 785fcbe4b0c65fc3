#include "dmgplan/dmg.hpp"

#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>

#include "dmgplan/shapes.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace dmgplan;

namespace {

SurfacePatch patch_at(const Vec3& centroid, const Vec3& normal) {
  SurfacePatch p;
  p.centroid = centroid;
  p.normal = normal.normalized();
  p.member_indices = {0};
  return p;
}

using CentroidEdge = std::pair<std::array<double, 3>, std::array<double, 3>>;

std::set<CentroidEdge> centroid_edges(const SurfacePatchGraph& g) {
  std::set<CentroidEdge> out;
  for (auto [a, b] : g.adjacency) {
    std::array<double, 3> ca{g.patches[a].centroid.x(),
                             g.patches[a].centroid.y(),
                             g.patches[a].centroid.z()};
    std::array<double, 3> cb{g.patches[b].centroid.x(),
                             g.patches[b].centroid.y(),
                             g.patches[b].centroid.z()};
    if (cb < ca) std::swap(ca, cb);
    out.insert({ca, cb});
  }
  return out;
}

}  // namespace

TEST_SUITE("dmg") {

TEST_CASE("angular component accessors") {
  const AngularComponent arc{350, 5, 5};  // 350,355,0,5,10
  CHECK_FALSE(arc.full_circle());
  CHECK(arc.end() == 10);
  CHECK(arc.contains(350));
  CHECK(arc.contains(0));
  CHECK(arc.contains(10));
  CHECK_FALSE(arc.contains(15));
  CHECK_FALSE(arc.contains(353));
  CHECK(arc.index_of(355) == 1);
  CHECK(arc.index_of(10) == 4);
  CHECK(arc.angles() == std::vector<int>{350, 355, 0, 5, 10});

  CHECK(arc.rotation_within(350, 10) == 20);
  CHECK(arc.rotation_within(10, 350) == -20);
  CHECK(arc.rotation_within(0, 0) == 0);

  const AngularComponent full{0, 72, 5};
  CHECK(full.full_circle());
  CHECK(full.rotation_within(0, 170) == 170);
  CHECK(full.rotation_within(0, 190) == -170);
  CHECK(full.rotation_within(0, 180) == 180);
  CHECK(full.rotation_within(90, 85) == -5);

  const AngularComponent a{80, 19, 5};  // 80..170
  const AngularComponent b{0, 19, 5};   // 0..90
  CHECK(a.intersects(b));
  CHECK(a.intersect(b) == std::vector<int>{80, 85, 90});
  const AngularComponent c{180, 10, 5};
  CHECK_FALSE(a.intersects(c));
  CHECK(a.intersect(c).empty());
}

TEST_CASE("split components finds maximal circular runs") {
  std::vector<int> full;
  for (int a = 0; a < 360; a += 5) full.push_back(a);
  auto comps = split_components(full, 5);
  REQUIRE(comps.size() == 1);
  CHECK(comps[0].count == 72);
  CHECK(comps[0].full_circle());

  comps = split_components({350, 355, 0, 5}, 5);
  REQUIRE(comps.size() == 1);
  CHECK(comps[0].start == 350);
  CHECK(comps[0].count == 4);
  CHECK(comps[0].end() == 5);

  std::vector<int> two;
  for (int a = 0; a <= 90; a += 5) two.push_back(a);
  for (int a = 180; a <= 270; a += 5) two.push_back(a);
  comps = split_components(two, 5);
  REQUIRE(comps.size() == 2);
  CHECK(comps[0].contains(45));
  CHECK(comps[1].contains(225));

  CHECK(split_components({}, 5).empty());
}

TEST_CASE("finger model validation") {
  FingerModel bad;
  bad.angle_step = 7;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = FingerModel{};
  bad.length = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
  CHECK_NOTHROW(FingerModel{}.validate());
}

TEST_CASE("refine keeps identical normals and cuts perpendicular ones") {
  SurfacePatchGraph g;
  g.resolution = 0.013;
  g.patches = {patch_at({0, 0, 0}, {0, 0, 1}), patch_at({0.01, 0, 0}, {0, 0, 1}),
               patch_at({0.02, 0, 0}, {1, 0, 0})};
  g.adjacency = {{0, 1}, {0, 2}, {1, 2}};

  const SurfacePatchGraph refined = refine_by_normals(g, 0.07);
  REQUIRE(refined.size() == 2);
  CHECK(refined.adjacency == decltype(refined.adjacency){{0, 1}});
  CHECK((refined.patches[0].normal - Vec3(0, 0, 1)).norm() < 1e-12);
  CHECK((refined.patches[1].normal - Vec3(0, 0, 1)).norm() < 1e-12);

  CHECK_THROWS_AS(refine_by_normals(g, 0.0), Error);
  CHECK_THROWS_AS(refine_by_normals(g, 2.5), Error);
}

TEST_CASE("five degree normal chord sits between the two pruning thresholds") {
  const double chord = 2.0 * std::sin(2.5 * M_PI / 180.0);
  CHECK(chord > 0.07);
  CHECK(chord < 0.10);

  SurfacePatchGraph g;
  g.resolution = 0.005;
  const double rad = 5.0 * M_PI / 180.0;
  g.patches = {patch_at({0.06, 0, 0}, {1, 0, 0}),
               patch_at({0.06 * std::cos(rad), 0.06 * std::sin(rad), 0},
                        {std::cos(rad), std::sin(rad), 0})};
  g.adjacency = {{0, 1}};
  CHECK((g.patches[0].normal - g.patches[1].normal).norm() ==
        doctest::Approx(chord).epsilon(1e-12));

  CHECK(refine_by_normals(g, 0.07).size() == 0);
  const SurfacePatchGraph kept = refine_by_normals(g, 0.10);
  CHECK(kept.size() == 2);
  CHECK(kept.adjacency.size() == 1);
}

TEST_CASE("cylinder columns separate under the tight threshold") {
  // Column spacing (5 deg at r=0.05 is 4.4mm) must sit inside the adjacency
  // radius while the voxel grid still isolates single columns.
  const OrientedSurface cyl = shapes::make_cylinder(0.05, 0.1, 5.0, 0.004);
  const SurfacePatchGraph g = segment(cyl, 0.0045);

  std::size_t straddling = 0;
  for (auto [a, b] : g.adjacency) {
    const double diff = (g.patches[a].normal - g.patches[b].normal).norm();
    if (diff > 0.07 && diff <= 0.10) ++straddling;
  }
  CHECK(straddling > 0);

  const SurfacePatchGraph tight = refine_by_normals(g, 0.07);
  const SurfacePatchGraph loose = refine_by_normals(g, 0.10);
  CHECK(tight.adjacency.size() < loose.adjacency.size());
  CHECK(fixtures::patch_components(tight) > fixtures::patch_components(loose));

  SUBCASE("edge set grows monotonically with delta") {
    const auto e_tight = centroid_edges(tight);
    const auto e_loose = centroid_edges(loose);
    const auto e_any = centroid_edges(refine_by_normals(g, 2.0));
    for (const auto& e : e_tight) CHECK(e_loose.count(e) == 1);
    for (const auto& e : e_loose) CHECK(e_any.count(e) == 1);
  }
}

TEST_CASE("plate center admits the whole circle") {
  const OrientedSurface plate = shapes::make_box(0.3, 0.3, 0.01, 0.005);
  const auto angles = admissible_angles(plate, Vec3(0, 0, 0.005),
                                        Vec3(0, 0, 1), FingerModel{});
  CHECK(angles.size() == 72);
}

TEST_CASE("plug neck admits two disjoint runs") {
  const OrientedSurface plug = fixtures::plug_surface();
  const auto angles = admissible_angles(plug, Vec3(0.012, 0, 0.035),
                                        Vec3(1, 0, 0), FingerModel{});
  CHECK_FALSE(angles.empty());
  CHECK(split_components(angles, 5).size() >= 2);
}

TEST_CASE("wall on a bar blocks only the angles sweeping across it") {
  const OrientedSurface tee =
      shapes::make_tee(0.3, 0.04, 0.02, 0.083, 0.02, 0.03, 0.004);
  const Vec3 contact(0.15, 0.02, 0.02);
  const auto angles =
      admissible_angles(tee, contact, Vec3(0, 0, 1), FingerModel{});
  const auto has = [&](int a) {
    return std::find(angles.begin(), angles.end(), a) != angles.end();
  };
  CHECK(has(0));
  CHECK(has(90));
  CHECK(has(270));
  CHECK_FALSE(has(180));

  SUBCASE("matches the exhaustive collision oracle") {
    const auto naive =
        oracle::admissible_angles_naive(tee, contact, Vec3(0, 0, 1),
                                        FingerModel{});
    CHECK(angles == naive);
  }
}

TEST_CASE("contacts far outside the surface are rejected") {
  const OrientedSurface box = shapes::make_box(0.1, 0.1, 0.02, 0.005);
  CHECK_THROWS_AS(
      admissible_angles(box, Vec3(5, 5, 5), Vec3(0, 0, 1), FingerModel{}),
      Error);
}

TEST_CASE("box builds one component per face") {
  const fixtures::Bundle b = fixtures::box_bundle();
  CHECK(b.dmg.component_count == 6);
  CHECK(b.dmg.size() > 6);
  CHECK(b.dmg.delta == 0.07);
  CHECK(b.dmg.resolution == 0.013);
  CHECK(b.dmg.component_count >= fixtures::patch_components(b.graph));

  std::map<std::uint32_t, Vec3> component_normal;
  for (std::size_t i = 0; i < b.dmg.size(); ++i) {
    const auto label = b.dmg.component[i];
    const auto it = component_normal.find(label);
    if (it == component_normal.end()) {
      component_normal[label] = b.dmg.nodes[i].normal;
    } else {
      CHECK(it->second.dot(b.dmg.nodes[i].normal) > 0.99);
    }
  }
  CHECK(component_normal.size() == 6);
}

TEST_CASE("edges connect adjacent patches with overlapping runs") {
  for (const fixtures::Bundle& b :
       {fixtures::box_bundle(),
        fixtures::make_bundle(fixtures::plug_surface())}) {
    // Node patch ids are compacted once blocked patches drop out, so map
    // contacts back to refined patches by centroid instead.
    const SurfacePatchGraph refined = refine_by_normals(b.graph, b.dmg.delta);
    std::map<std::array<double, 3>, std::uint32_t> refined_of;
    for (std::uint32_t i = 0; i < refined.size(); ++i) {
      const Vec3& c = refined.patches[i].centroid;
      refined_of[{c.x(), c.y(), c.z()}] = i;
    }
    const auto refined_index = [&](const Vec3& c) {
      return refined_of.at({c.x(), c.y(), c.z()});
    };
    std::set<std::pair<std::uint32_t, std::uint32_t>> patch_adj(
        refined.adjacency.begin(), refined.adjacency.end());
    for (auto [u, v] : b.dmg.edges) {
      const DmgNode& nu = b.dmg.nodes[u];
      const DmgNode& nv = b.dmg.nodes[v];
      CHECK(nu.patch != nv.patch);
      CHECK(oracle::arcs_share_angle(nu.arc, nv.arc));
      const std::uint32_t pu = refined_index(nu.contact);
      const std::uint32_t pv = refined_index(nv.contact);
      CHECK(patch_adj.count({std::min(pu, pv), std::max(pu, pv)}) == 1);
    }
  }
}

TEST_CASE("every node angle passes the exhaustive collision oracle") {
  const fixtures::Bundle b = fixtures::box_bundle();
  for (const DmgNode& n : b.dmg.nodes) {
    const auto naive = oracle::admissible_angles_naive(b.surface, n.contact,
                                                       n.normal, b.dmg.finger);
    const std::set<int> ok(naive.begin(), naive.end());
    for (int a : n.arc.angles()) {
      CHECK(ok.count(a) == 1);
    }
  }
}

TEST_CASE("plug neck produces split nodes without an edge") {
  const fixtures::Bundle b = fixtures::make_bundle(fixtures::plug_surface());

  std::uint32_t split_patch = std::numeric_limits<std::uint32_t>::max();
  for (const DmgNode& n : b.dmg.nodes) {
    const Vec3 c = n.contact;
    const double r = std::hypot(c.x(), c.y());
    if (c.z() > 0.022 && c.z() < 0.048 && r < 0.014 &&
        b.dmg.nodes_at_patch(n.patch).size() >= 2) {
      split_patch = n.patch;
      break;
    }
  }
  REQUIRE(split_patch != std::numeric_limits<std::uint32_t>::max());

  const auto twins = b.dmg.nodes_at_patch(split_patch);
  REQUIRE(twins.size() >= 2);
  for (std::size_t i = 0; i < twins.size(); ++i) {
    for (std::size_t j = i + 1; j < twins.size(); ++j) {
      const auto key = std::minmax(twins[i], twins[j]);
      CHECK(std::count(b.dmg.edges.begin(), b.dmg.edges.end(),
                       std::make_pair(key.first, key.second)) == 0);
    }
  }
}

TEST_CASE("same-patch nodes are never edge-connected anywhere") {
  for (const fixtures::Bundle& b :
       {fixtures::box_bundle(),
        fixtures::make_bundle(fixtures::plug_surface())}) {
    for (auto [u, v] : b.dmg.edges) {
      CHECK(u < v);
      CHECK(b.dmg.nodes[u].patch != b.dmg.nodes[v].patch);
    }
  }
}

TEST_CASE("dense sphere stays one component of full circles") {
  // Patches average a few 6-degree-apart point normals, so neighboring
  // patch normals can differ by a couple of steps; 0.25 covers that.
  const fixtures::Bundle b = fixtures::make_bundle(
      shapes::make_sphere(0.12, 6.0), 0.013, FingerModel{}, 0.25);
  CHECK(b.dmg.component_count == 1);
  for (const DmgNode& n : b.dmg.nodes) {
    CHECK(n.arc.full_circle());
  }
}

TEST_CASE("pocket ceilings end up blocked and logged") {
  const fixtures::Bundle b =
      fixtures::make_bundle(fixtures::slot_plate_surface());
  CHECK_FALSE(b.dmg.blocked_patches.empty());
  bool in_pocket = false;
  for (const Vec3& c : b.dmg.blocked_patches) {
    if (c.z() > 0.004 && c.z() < 0.012 && c.x() > 0.08 && c.x() < 0.12 &&
        c.y() > 0.035 && c.y() < 0.085) {
      in_pocket = true;
    }
  }
  CHECK(in_pocket);

  for (const DmgNode& n : b.dmg.nodes) {
    CHECK(n.arc.count > 0);
  }
}

TEST_CASE("empty refined graph raises EmptyGraph") {
  SurfacePatchGraph g;
  g.resolution = 0.013;
  g.patches = {patch_at({0, 0, 0}, {0, 0, 1}), patch_at({0.01, 0, 0}, {1, 0, 0})};
  g.adjacency = {{0, 1}};
  const OrientedSurface s = shapes::make_box(0.02, 0.02, 0.02, 0.01);
  try {
    build_dmg(g, s, FingerModel{}, 0.07);
    FAIL("expected EmptyGraph");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::EmptyGraph);
  }
}

TEST_CASE("hand-assembled graphs rebuild adjacency and components") {
  const Dmg dmg = fixtures::chain_dmg(
      {Vec3(0, 0, 0), Vec3(0.01, 0, 0), Vec3(0.02, 0, 0)});
  CHECK(dmg.component_count == 1);
  CHECK(dmg.neighbors()[1] == std::vector<std::uint32_t>{0, 2});
  CHECK(dmg.nodes_at_patch(2) == std::vector<std::uint32_t>{2});

  Dmg split = dmg;
  split.edges = {{0, 1}};
  split.rebuild();
  CHECK(split.component_count == 2);
  CHECK(split.component[0] == split.component[1]);
  CHECK(split.component[0] != split.component[2]);
}

}  // TEST_SUITE
