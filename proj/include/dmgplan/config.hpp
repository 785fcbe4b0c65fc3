#pragma once

#include "dmgplan/dmg.hpp"
#include "dmgplan/ects.hpp"
#include "dmgplan/planner.hpp"

#include <filesystem>
#include <string>

namespace dmgplan {

/// Every tunable of the pipeline with its default. File values override
/// defaults; command-line flags override file values.
struct Config {
  double input_scale = 1.0;

  struct Segmentation {
    double resolution = 0.013;  // meters
    int connectivity = 26;
    double normal_weight = 5.0;
    bool fail_on_coarse = false;
  } segmentation;

  struct Graph {
    double delta = 0.07;
    FingerModel finger;  // length 0.1, width 0.02, clearance 0.003, step 5
  } graph;

  struct Planner {
    CostWeights weights;
    double max_aperture = 0.25;  // meters
    RotationPolicy rotation_policy = RotationPolicy::minimal;
    double merge_angle_tol = 1e-9;     // degrees
    double merge_direction_tol = 1.0;  // degrees
  } planner;

  struct Manipulability {
    double grid_step = 0;  // 0: use 2x segmentation resolution
    int angle_step = 30;
    std::size_t representatives = 3;
  } manipulability;

  struct Ects {
    EctsParams params;
    ControllerGains gains;
    double push_depth = 0;  // 0: use 5x segmentation resolution
  } ects;

  void validate() const;
  double effective_grid_step() const;
  double effective_push_depth() const;
};

/// Reads .json or .toml (flat [section] tables, scalar/array values) by
/// extension and applies it over the defaults.
Config load_config(const std::filesystem::path& path);

Config parse_config_json(const std::string& text);
Config parse_config_toml(const std::string& text);

/// Full configuration as pretty JSON, defaults included.
std::string dump_config(const Config& config);

}  // namespace dmgplan
