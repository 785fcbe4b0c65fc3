#include "dmgplan/io.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace dmgplan {
namespace {

using nlohmann::json;

constexpr const char* kDmgFormat = "dmgplan.dmg";
constexpr int kDmgVersion = 1;

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from(const json& j) {
  if (!j.is_array() || j.size() != 3)
    throw Error(Errc::UnreadableFile, "expected a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json pose_json(const Isometry& t) {
  const Eigen::Quaterniond q(t.linear());
  return {{"translation", vec_json(t.translation())},
          {"quaternion", json::array({q.w(), q.x(), q.y(), q.z()})}};
}

json twist_json(const Twist& t) {
  return {{"v", vec_json(t.v)}, {"w", vec_json(t.w)}};
}

json grasp_json(const GraspState& g) {
  return {{"node", g.principal_node},
          {"angle", g.principal_angle},
          {"secondary_contact", vec_json(g.secondary_contact)},
          {"opening", g.opening},
          {"closing_dir", vec_json(g.closing_dir)}};
}

}  // namespace

std::string dmg_to_json(const Dmg& dmg, const OrientedSurface& surface) {
  json doc;
  doc["format"] = kDmgFormat;
  doc["version"] = kDmgVersion;
  doc["delta"] = dmg.delta;
  doc["resolution"] = dmg.resolution;
  doc["finger"] = {{"length", dmg.finger.length},
                   {"width", dmg.finger.width},
                   {"height_clearance", dmg.finger.height_clearance},
                   {"angle_step", dmg.finger.angle_step}};

  json points = json::array();
  json normals = json::array();
  for (std::size_t i = 0; i < surface.size(); ++i) {
    points.push_back(vec_json(surface.point(i)));
    normals.push_back(vec_json(surface.normal(i)));
  }
  doc["surface"] = {{"points", std::move(points)},
                    {"normals", std::move(normals)}};

  json nodes = json::array();
  for (const DmgNode& n : dmg.nodes) {
    nodes.push_back({{"contact", vec_json(n.contact)},
                     {"normal", vec_json(n.normal)},
                     {"arc", {{"start", n.arc.start},
                              {"count", n.arc.count},
                              {"step", n.arc.step}}},
                     {"patch", n.patch},
                     {"arc_index", n.arc_index}});
  }
  doc["nodes"] = std::move(nodes);

  json edges = json::array();
  for (const auto& [a, b] : dmg.edges) edges.push_back(json::array({a, b}));
  doc["edges"] = std::move(edges);

  json blocked = json::array();
  for (const Vec3& p : dmg.blocked_patches) blocked.push_back(vec_json(p));
  doc["blocked_patches"] = std::move(blocked);

  return doc.dump() + "\n";
}

DmgBundle dmg_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::UnreadableFile, std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("format", "") != kDmgFormat)
    throw Error(Errc::UnreadableFile, "not a dmg document");
  if (doc.value("version", 0) != kDmgVersion)
    throw Error(Errc::UnreadableFile, "unsupported dmg document version");

  try {
    std::vector<Vec3> points, normals;
    for (const auto& p : doc.at("surface").at("points"))
      points.push_back(vec_from(p));
    for (const auto& n : doc.at("surface").at("normals"))
      normals.push_back(vec_from(n));

    DmgBundle bundle{Dmg{}, OrientedSurface::create(std::move(points),
                                                    std::move(normals))};
    Dmg& dmg = bundle.dmg;
    dmg.delta = doc.at("delta").get<double>();
    dmg.resolution = doc.at("resolution").get<double>();
    const json& finger = doc.at("finger");
    dmg.finger.length = finger.at("length").get<double>();
    dmg.finger.width = finger.at("width").get<double>();
    dmg.finger.height_clearance = finger.at("height_clearance").get<double>();
    dmg.finger.angle_step = finger.at("angle_step").get<int>();

    for (const auto& n : doc.at("nodes")) {
      DmgNode node;
      node.contact = vec_from(n.at("contact"));
      node.normal = vec_from(n.at("normal"));
      node.arc.start = n.at("arc").at("start").get<int>();
      node.arc.count = n.at("arc").at("count").get<int>();
      node.arc.step = n.at("arc").at("step").get<int>();
      node.patch = n.at("patch").get<std::uint32_t>();
      node.arc_index = n.at("arc_index").get<std::uint32_t>();
      dmg.nodes.push_back(node);
    }
    for (const auto& e : doc.at("edges"))
      dmg.edges.emplace_back(e.at(0).get<std::uint32_t>(),
                             e.at(1).get<std::uint32_t>());
    for (const auto& p : doc.at("blocked_patches"))
      dmg.blocked_patches.push_back(vec_from(p));

    for (const auto& [a, b] : dmg.edges)
      if (a >= dmg.size() || b >= dmg.size())
        throw Error(Errc::UnreadableFile, "edge references a missing node");

    dmg.rebuild();
    return bundle;
  } catch (const json::exception& e) {
    throw Error(Errc::UnreadableFile,
                std::string("malformed dmg document: ") + e.what());
  }
}

void save_dmg(const std::filesystem::path& path, const Dmg& dmg,
              const OrientedSurface& surface) {
  write_text_file(path, dmg_to_json(dmg, surface));
}

DmgBundle load_dmg(const std::filesystem::path& path) {
  return dmg_from_json(read_text_file(path));
}

std::string dmg_to_dot(const Dmg& dmg) {
  std::ostringstream out;
  out << "graph dmg {\n  node [shape=point];\n";
  for (std::uint32_t c = 0; c < dmg.component_count; ++c) {
    out << "  subgraph cluster_" << c << " {\n    label=\"component " << c
        << "\";\n";
    for (std::uint32_t v = 0; v < dmg.size(); ++v) {
      if (dmg.component[v] != c) continue;
      const DmgNode& n = dmg.nodes[v];
      out << "    n" << v << " [tooltip=\"patch " << n.patch << " arc ["
          << n.arc.start << ".." << n.arc.end() << "]\"];\n";
    }
    out << "  }\n";
  }
  for (const auto& [a, b] : dmg.edges) out << "  n" << a << " -- n" << b << ";\n";
  out << "}\n";
  return out.str();
}

std::string plan_to_json(const PlanResult& result, const PrimitiveSequence& merged,
                         const GraspState& start, const GraspState& goal) {
  json doc;
  doc["path"] = result.path;
  doc["cost"] = result.diagnostics.cost;
  doc["expanded"] = result.diagnostics.expanded;
  doc["rejected_secondary"] = result.diagnostics.rejected_secondary;
  doc["rejected_aperture"] = result.diagnostics.rejected_aperture;
  doc["warnings"] = result.warnings;
  doc["start"] = grasp_json(start);
  doc["goal"] = grasp_json(goal);

  json prims = json::array();
  for (const PrimitiveStep& s : merged.steps) {
    json entry;
    if (s.kind == PrimitiveStep::Kind::rotation) {
      entry = {{"kind", "rotation"}, {"degrees", s.rotation_deg}};
    } else {
      entry = {{"kind", "translation"},
               {"vector", vec_json(s.translation)},
               {"length", s.translation.norm()}};
    }
    entry["after"] = grasp_json(s.after);
    prims.push_back(std::move(entry));
  }
  doc["primitives"] = std::move(prims);
  doc["net_rotation_deg"] = merged.net_rotation_deg();
  doc["net_translation"] = vec_json(merged.net_translation());
  return doc.dump(2) + "\n";
}

namespace {

GraspState grasp_from(const json& j) {
  GraspState g;
  g.principal_node = j.at("node").get<std::uint32_t>();
  g.principal_angle = j.at("angle").get<int>();
  g.secondary_contact = vec_from(j.at("secondary_contact"));
  g.opening = j.at("opening").get<double>();
  g.closing_dir = vec_from(j.at("closing_dir"));
  return g;
}

}  // namespace

PlanDocument plan_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::UnreadableFile, std::string("invalid JSON: ") + e.what());
  }
  try {
    PlanDocument plan;
    for (const auto& id : doc.at("path"))
      plan.path.push_back(id.get<std::uint32_t>());
    plan.start = grasp_from(doc.at("start"));
    plan.goal = grasp_from(doc.at("goal"));
    for (const auto& p : doc.at("primitives")) {
      PrimitiveStep step;
      if (p.at("kind") == "rotation") {
        step.kind = PrimitiveStep::Kind::rotation;
        step.rotation_deg = p.at("degrees").get<double>();
      } else if (p.at("kind") == "translation") {
        step.kind = PrimitiveStep::Kind::translation;
        step.translation = vec_from(p.at("vector"));
      } else {
        throw Error(Errc::UnreadableFile, "unknown primitive kind");
      }
      step.after = grasp_from(p.at("after"));
      plan.primitives.steps.push_back(std::move(step));
    }
    return plan;
  } catch (const json::exception& e) {
    throw Error(Errc::UnreadableFile,
                std::string("malformed plan document: ") + e.what());
  }
}

std::string report_to_json(const SimulationReport& report) {
  json doc;
  doc["position_error"] = report.position_error;
  doc["angle_error_deg"] = report.angle_error_deg;
  doc["steps"] = report.steps;
  doc["stalls"] = report.stalls;
  doc["warnings"] = report.warnings;
  return doc.dump(2) + "\n";
}

void save_trajectory_jsonl(const std::filesystem::path& path,
                           const SimulationResult& result) {
  std::ofstream out(path);
  if (!out)
    throw Error(Errc::UnreadableFile, "cannot write '" + path.string() + "'");
  for (const TrajectoryRecord& r : result.trajectory) {
    json line = {{"time", r.time},
                 {"phase", phase_name(r.phase)},
                 {"object_in_gripper", pose_json(r.object_in_gripper)},
                 {"gripper1_world", pose_json(r.gripper1_world)},
                 {"gripper2_world", pose_json(r.gripper2_world)},
                 {"x1", twist_json(r.x1)},
                 {"x2", twist_json(r.x2)},
                 {"opening", r.opening}};
    out << line.dump() << "\n";
  }
}

void save_matrix_csv(const std::filesystem::path& path,
                     const ManipulabilityMatrix& matrix) {
  std::ofstream out(path);
  if (!out)
    throw Error(Errc::UnreadableFile, "cannot write '" + path.string() + "'");
  for (std::size_t i = 0; i < matrix.size; ++i) {
    for (std::size_t j = 0; j < matrix.size; ++j) {
      if (j) out << ',';
      out << int(matrix.at(matrix.permutation[i], matrix.permutation[j]));
    }
    out << '\n';
  }
}

void save_matrix_pgm(const std::filesystem::path& path,
                     const ManipulabilityMatrix& matrix) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error(Errc::UnreadableFile, "cannot write '" + path.string() + "'");
  out << "P5\n" << matrix.size << " " << matrix.size << "\n255\n";
  std::vector<unsigned char> row(matrix.size);
  for (std::size_t i = 0; i < matrix.size; ++i) {
    for (std::size_t j = 0; j < matrix.size; ++j)
      row[j] = matrix.at(matrix.permutation[i], matrix.permutation[j]) ? 0 : 255;
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size()));
  }
}

std::string matrix_sidecar_json(const ManipulabilityMatrix& matrix,
                                const std::vector<PoseSample>& samples,
                                const std::vector<RegraspArea>& areas) {
  json doc;
  doc["size"] = matrix.size;
  json rows = json::array();
  for (std::size_t i = 0; i < matrix.size; ++i) {
    const std::uint32_t original = matrix.permutation[i];
    const PoseSample& s = samples[matrix.sample_index[original]];
    rows.push_back({{"row", i},
                    {"sample", matrix.sample_index[original]},
                    {"node", s.node},
                    {"angle", s.angle},
                    {"block", matrix.block[original]},
                    {"contact", vec_json(s.contact)},
                    {"closing_dir", vec_json(s.closing_dir)}});
  }
  doc["rows"] = std::move(rows);

  json blocks = json::array();
  for (const RegraspArea& a : areas) {
    blocks.push_back({{"block", a.block},
                      {"members", a.member_count},
                      {"bounds", {{"min", vec_json(a.contact_bounds.min)},
                                  {"max", vec_json(a.contact_bounds.max)}}},
                      {"representatives", a.representatives}});
  }
  doc["blocks"] = std::move(blocks);
  return doc.dump(2) + "\n";
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error(Errc::UnreadableFile, "cannot write '" + path.string() + "'");
  out << text;
  if (!out)
    throw Error(Errc::UnreadableFile, "failed writing '" + path.string() + "'");
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(Errc::UnreadableFile, "cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace dmgplan
