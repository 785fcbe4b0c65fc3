#include "dmgplan/config.hpp"
#include "dmgplan/dmg.hpp"
#include "dmgplan/ects.hpp"
#include "dmgplan/io.hpp"
#include "dmgplan/manipulability.hpp"
#include "dmgplan/planner.hpp"
#include "dmgplan/shapes.hpp"
#include "dmgplan/surface.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace dmgplan;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::vector<std::string> overrides;  // section.key=value

  std::optional<double> resolution, delta, normal_weight, input_scale;
  std::optional<double> finger_length, finger_width, height_clearance;
  std::optional<double> max_aperture, grid_step, alpha, v_max, omega_max, dt;
  std::optional<double> push_depth, standoff;
  std::optional<int> connectivity, angle_step, matrix_angle_step, beta, max_steps;
  std::optional<std::string> policy;
  bool fail_on_coarse = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "configuration file (.json or .toml)");
  cmd->add_option("--out-dir", args.out_dir, "output directory");
  cmd->add_option("--set", args.overrides,
                  "override any configuration field as section.key=value");
  cmd->add_option("--resolution", args.resolution, "segmentation resolution, meters");
  cmd->add_option("--connectivity", args.connectivity, "voxel adjacency: 6, 18 or 26");
  cmd->add_option("--normal-weight", args.normal_weight, "segmentation normal weight");
  cmd->add_flag("--fail-on-coarse", args.fail_on_coarse,
                "treat a near-single-patch segmentation as an error");
  cmd->add_option("--delta", args.delta, "normal-difference pruning threshold");
  cmd->add_option("--finger-length", args.finger_length, "finger length, meters");
  cmd->add_option("--finger-width", args.finger_width, "finger width, meters");
  cmd->add_option("--height-clearance", args.height_clearance,
                  "collision clearance above the tangent plane, meters");
  cmd->add_option("--angle-step", args.angle_step, "finger angle step, degrees");
  cmd->add_option("--max-aperture", args.max_aperture, "maximum finger opening, meters");
  cmd->add_option("--policy", args.policy, "rotation policy: minimal or goal_seeking");
  cmd->add_option("--grid-step", args.grid_step, "pose sampling grid step, meters");
  cmd->add_option("--matrix-angle-step", args.matrix_angle_step,
                  "pose sampling angle step, degrees");
  cmd->add_option("--alpha", args.alpha, "coordination coefficient alpha");
  cmd->add_option("--beta", args.beta, "coordination coefficient beta (0 or 1)");
  cmd->add_option("--v-max", args.v_max, "linear velocity limit, m/s");
  cmd->add_option("--omega-max", args.omega_max, "angular velocity limit, rad/s");
  cmd->add_option("--dt", args.dt, "simulation step, seconds");
  cmd->add_option("--max-steps", args.max_steps, "per-primitive step budget");
  cmd->add_option("--push-depth", args.push_depth, "rotation push inset, meters");
  cmd->add_option("--standoff", args.standoff, "pusher approach distance, meters");
  cmd->add_option("--input-scale", args.input_scale, "scale applied to input coordinates");
}

void apply_override(Config& cfg, const std::string& text) {
  const auto eq = text.find('=');
  const auto dot = text.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq)
    throw Error(Errc::InvalidArgument,
                "--set expects section.key=value, got '" + text + "'");
  const std::string section = text.substr(0, dot);
  const std::string key = text.substr(dot + 1, eq - dot - 1);
  const std::string value = text.substr(eq + 1);

  nlohmann::json doc = nlohmann::json::parse(dump_config(cfg));
  nlohmann::json parsed;
  try {
    parsed = nlohmann::json::parse(value);
  } catch (const nlohmann::json::exception&) {
    parsed = value;  // bare strings stay strings
  }
  if (section == "top" || section == "root") {
    doc[key] = parsed;
  } else {
    doc[section][key] = parsed;
  }
  cfg = parse_config_json(doc.dump());
}

Config make_config(const CommonArgs& args) {
  Config cfg = args.config_path.empty() ? Config{} : load_config(args.config_path);
  for (const std::string& text : args.overrides) apply_override(cfg, text);

  if (args.resolution) cfg.segmentation.resolution = *args.resolution;
  if (args.connectivity) cfg.segmentation.connectivity = *args.connectivity;
  if (args.normal_weight) cfg.segmentation.normal_weight = *args.normal_weight;
  if (args.fail_on_coarse) cfg.segmentation.fail_on_coarse = true;
  if (args.delta) cfg.graph.delta = *args.delta;
  if (args.finger_length) cfg.graph.finger.length = *args.finger_length;
  if (args.finger_width) cfg.graph.finger.width = *args.finger_width;
  if (args.height_clearance) cfg.graph.finger.height_clearance = *args.height_clearance;
  if (args.angle_step) cfg.graph.finger.angle_step = *args.angle_step;
  if (args.max_aperture) cfg.planner.max_aperture = *args.max_aperture;
  if (args.policy) {
    if (*args.policy == "minimal") {
      cfg.planner.rotation_policy = RotationPolicy::minimal;
    } else if (*args.policy == "goal_seeking") {
      cfg.planner.rotation_policy = RotationPolicy::goal_seeking;
    } else {
      throw Error(Errc::InvalidArgument, "unknown policy '" + *args.policy + "'");
    }
  }
  if (args.grid_step) cfg.manipulability.grid_step = *args.grid_step;
  if (args.matrix_angle_step) cfg.manipulability.angle_step = *args.matrix_angle_step;
  if (args.alpha) cfg.ects.params.alpha = *args.alpha;
  if (args.beta) cfg.ects.params.beta = *args.beta;
  if (args.v_max) cfg.ects.gains.v_max = *args.v_max;
  if (args.omega_max) cfg.ects.gains.omega_max = *args.omega_max;
  if (args.dt) cfg.ects.gains.dt = *args.dt;
  if (args.max_steps) cfg.ects.gains.max_steps = *args.max_steps;
  if (args.push_depth) cfg.ects.push_depth = *args.push_depth;
  if (args.standoff) cfg.ects.gains.standoff = *args.standoff;
  if (args.input_scale) cfg.input_scale = *args.input_scale;

  cfg.validate();
  return cfg;
}

fs::path ensure_out_dir(const CommonArgs& args) {
  fs::path dir(args.out_dir);
  fs::create_directories(dir);
  return dir;
}

GraspState parse_grasp(const Dmg& dmg, const std::string& text, double resolution) {
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw Error(Errc::InvalidArgument,
                "grasp must be x,y,z:angle_deg, got '" + text + "'");
  Vec3 p;
  char comma1 = 0, comma2 = 0;
  std::istringstream in(text.substr(0, colon));
  in >> p.x() >> comma1 >> p.y() >> comma2 >> p.z();
  int angle = 0;
  std::istringstream angle_in(text.substr(colon + 1));
  angle_in >> angle;
  if (!in || !angle_in || comma1 != ',' || comma2 != ',')
    throw Error(Errc::InvalidArgument,
                "grasp must be x,y,z:angle_deg, got '" + text + "'");

  GraspState g;
  g.principal_node = snap_to_node(dmg, p, angle, resolution);
  g.principal_angle = discretize_angle(angle, dmg.nodes[g.principal_node].arc.step);
  g.closing_dir = -dmg.nodes[g.principal_node].normal;
  return g;
}

int run_build(const CommonArgs& args, const std::string& input,
              const std::string& shape, double pitch, int normal_k) {
  const Config cfg = make_config(args);
  const fs::path out = ensure_out_dir(args);

  const auto t0 = std::chrono::steady_clock::now();
  OrientedSurface surface =
      !input.empty()
          ? load_surface(input, normal_k, cfg.input_scale)
          : shapes::generate(shapes::ShapeSpec::parse(shape, pitch));

  SegmentationParams seg;
  seg.resolution = cfg.segmentation.resolution;
  seg.connectivity = cfg.segmentation.connectivity;
  seg.normal_weight = cfg.segmentation.normal_weight;
  seg.fail_on_coarse = cfg.segmentation.fail_on_coarse;
  const SurfacePatchGraph graph = segment(surface, seg);
  const Dmg dmg = build_dmg(graph, surface, cfg.graph.finger, cfg.graph.delta);
  const auto wall_ms = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - t0)
                           .count();

  save_dmg(out / "dmg.json", dmg, surface);
  write_text_file(out / "dmg.dot", dmg_to_dot(dmg));

  nlohmann::json stats;
  stats["points"] = surface.size();
  stats["patches"] = graph.size();
  stats["nodes"] = dmg.size();
  stats["edges"] = dmg.edges.size();
  stats["components"] = dmg.component_count;
  stats["blocked_patches"] = dmg.blocked_patches.size();
  stats["warnings"] = graph.warnings;
  stats["wall_ms"] = wall_ms;
  write_text_file(out / "build_stats.json", stats.dump(2) + "\n");

  std::cout << "points " << surface.size() << ", patches " << graph.size()
            << ", nodes " << dmg.size() << ", edges " << dmg.edges.size()
            << ", components " << dmg.component_count << ", blocked "
            << dmg.blocked_patches.size() << " (" << wall_ms << " ms)\n";
  for (const std::string& w : graph.warnings) std::cerr << "warning: " << w << "\n";
  return 0;
}

int run_plan(const CommonArgs& args, const std::string& dmg_path,
             const std::string& start_text, const std::string& goal_text,
             bool unconstrained) {
  const Config cfg = make_config(args);
  const fs::path out = ensure_out_dir(args);
  const DmgBundle bundle = load_dmg(dmg_path);
  const double res = bundle.dmg.resolution;

  GraspState start = parse_grasp(bundle.dmg, start_text, res);
  GraspState goal = parse_grasp(bundle.dmg, goal_text, res);
  if (const auto sec = resolve_secondary(bundle.dmg, bundle.surface,
                                         bundle.dmg.nodes[start.principal_node].contact,
                                         start.closing_dir,
                                         cfg.planner.max_aperture, res)) {
    start.secondary_contact = sec->contact;
    start.opening = sec->opening;
  }

  const PlanResult result =
      plan_path(bundle.dmg, bundle.surface, start, goal, cfg.planner.weights,
                cfg.planner.max_aperture, res, !unconstrained);
  const PrimitiveSequence prims = to_primitives(
      bundle.dmg, bundle.surface, result.path, start, goal.principal_angle,
      cfg.planner.rotation_policy, cfg.planner.max_aperture, res);
  const PrimitiveSequence merged = merge_segments(
      prims, cfg.planner.merge_angle_tol, cfg.planner.merge_direction_tol);
  replay(merged, bundle.dmg, start, res);

  write_text_file(out / "plan.json", plan_to_json(result, merged, start, goal));
  std::cout << "path " << result.path.size() << " nodes, cost "
            << result.diagnostics.cost << ", primitives " << merged.steps.size()
            << " (expanded " << result.diagnostics.expanded << ")\n";
  for (const std::string& w : result.warnings) std::cerr << "warning: " << w << "\n";
  return 0;
}

int run_matrix(const CommonArgs& args, const std::string& dmg_path,
               bool exhaustive) {
  const Config cfg = make_config(args);
  const fs::path out = ensure_out_dir(args);
  const DmgBundle bundle = load_dmg(dmg_path);
  const double res = bundle.dmg.resolution;
  const double grid_step = cfg.manipulability.grid_step > 0
                               ? cfg.manipulability.grid_step
                               : 2.0 * res;

  const auto samples =
      sample_poses(bundle.dmg, bundle.surface, grid_step,
                   cfg.manipulability.angle_step, cfg.planner.max_aperture, res);
  const auto matrix =
      build_matrix(bundle.dmg, bundle.surface, samples, cfg.planner.weights,
                   cfg.planner.max_aperture, res, exhaustive);
  const auto areas =
      report_regrasp_areas(matrix, samples, cfg.manipulability.representatives);

  save_matrix_csv(out / "matrix.csv", matrix);
  save_matrix_pgm(out / "matrix.pgm", matrix);
  write_text_file(out / "matrix.json", matrix_sidecar_json(matrix, samples, areas));

  std::size_t invalid = samples.size() - matrix.size;
  std::cout << "samples " << samples.size() << " (" << invalid << " invalid), "
            << "matrix " << matrix.size << "x" << matrix.size << ", blocks "
            << matrix.block_count << "\n";
  return 0;
}

int run_simulate(const CommonArgs& args, const std::string& dmg_path,
                 const std::string& plan_path) {
  const Config cfg = make_config(args);
  const fs::path out = ensure_out_dir(args);
  const DmgBundle bundle = load_dmg(dmg_path);
  const PlanDocument plan = plan_from_json(read_text_file(plan_path));

  ControllerGains gains = cfg.ects.gains;
  gains.push_depth = cfg.ects.push_depth;
  const SimulationResult result =
      simulate_execution(bundle.surface, bundle.dmg, plan.primitives, plan.start,
                         cfg.ects.params, gains);

  save_trajectory_jsonl(out / "trajectory.jsonl", result);
  write_text_file(out / "report.json", report_to_json(result.report));

  std::cout << "steps " << result.report.steps << ", position error "
            << result.report.position_error * 1000.0 << " mm, angle error "
            << result.report.angle_error_deg << " deg\n";
  for (const std::string& w : result.report.warnings)
    std::cerr << "warning: " << w << "\n";
  return 0;
}

int run_export(const CommonArgs& args, const std::string& dmg_path) {
  const fs::path out = ensure_out_dir(args);
  const DmgBundle bundle = load_dmg(dmg_path);

  write_text_file(out / "dmg.dot", dmg_to_dot(bundle.dmg));
  std::ostringstream xyz;
  for (std::size_t i = 0; i < bundle.surface.size(); ++i) {
    const Vec3 p = bundle.surface.point(i);
    const Vec3 n = bundle.surface.normal(i);
    xyz << p.x() << " " << p.y() << " " << p.z() << " " << n.x() << " "
        << n.y() << " " << n.z() << "\n";
  }
  write_text_file(out / "surface.xyz", xyz.str());
  std::cout << "wrote dmg.dot and surface.xyz (" << bundle.surface.size()
            << " points, " << bundle.dmg.size() << " nodes)\n";
  return 0;
}

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::NoPath:
      return 2;
    case Errc::ExecutionStall:
    case Errc::ContactLost:
    case Errc::NoPushPoint:
      return 3;
    default:
      return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dexterous manipulation graph toolkit"};
  app.require_subcommand(1);

  CommonArgs build_args, plan_args, matrix_args, sim_args, export_args;

  auto* build = app.add_subcommand("build", "build a graph from a point cloud or shape");
  std::string input, shape;
  double pitch = 0.005;
  int normal_k = 12;
  build->add_option("--input", input, "point cloud file (.xyz, .obj, .ply)");
  build->add_option("--shape", shape, "generated shape, name:d1,d2,...");
  build->add_option("--pitch", pitch, "shape sampling pitch, meters");
  build->add_option("--normal-k", normal_k, "neighbors for normal estimation");
  add_common(build, build_args);

  auto* plan = app.add_subcommand("plan", "plan an in-hand regrasp");
  std::string plan_dmg, start_text, goal_text;
  bool unconstrained = false;
  plan->add_option("--dmg", plan_dmg, "graph file from build")->required();
  plan->add_option("--start", start_text, "start grasp, x,y,z:angle_deg")->required();
  plan->add_option("--goal", goal_text, "goal grasp, x,y,z:angle_deg")->required();
  plan->add_flag("--unconstrained", unconstrained, "drop the secondary-finger constraint");
  add_common(plan, plan_args);

  auto* matrix = app.add_subcommand("matrix", "build the manipulability matrix");
  std::string matrix_dmg;
  bool exhaustive = false;
  matrix->add_option("--dmg", matrix_dmg, "graph file from build")->required();
  matrix->add_flag("--exhaustive", exhaustive, "plan every pair instead of node reachability");
  add_common(matrix, matrix_args);

  auto* simulate = app.add_subcommand("simulate", "execute a plan kinematically");
  std::string sim_dmg, sim_plan;
  simulate->add_option("--dmg", sim_dmg, "graph file from build")->required();
  simulate->add_option("--plan", sim_plan, "plan file from plan")->required();
  add_common(simulate, sim_args);

  auto* exporter = app.add_subcommand("export", "re-export visualization artifacts");
  std::string export_dmg;
  exporter->add_option("--dmg", export_dmg, "graph file from build")->required();
  add_common(exporter, export_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (build->parsed()) {
      if (input.empty() == shape.empty())
        throw Error(Errc::InvalidArgument, "give exactly one of --input or --shape");
      return run_build(build_args, input, shape, pitch, normal_k);
    }
    if (plan->parsed())
      return run_plan(plan_args, plan_dmg, start_text, goal_text, unconstrained);
    if (matrix->parsed()) return run_matrix(matrix_args, matrix_dmg, exhaustive);
    if (simulate->parsed()) return run_simulate(sim_args, sim_dmg, sim_plan);
    if (exporter->parsed()) return run_export(export_args, export_dmg);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
