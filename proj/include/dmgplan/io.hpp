#pragma once

#include "dmgplan/dmg.hpp"
#include "dmgplan/ects.hpp"
#include "dmgplan/manipulability.hpp"
#include "dmgplan/planner.hpp"
#include "dmgplan/surface.hpp"

#include <filesystem>
#include <string>

namespace dmgplan {

/// Graph plus the surface it was built on; the serialized document embeds
/// both so planning needs no other input.
struct DmgBundle {
  Dmg dmg;
  OrientedSurface surface;
};

std::string dmg_to_json(const Dmg& dmg, const OrientedSurface& surface);
DmgBundle dmg_from_json(const std::string& text);
void save_dmg(const std::filesystem::path& path, const Dmg& dmg,
              const OrientedSurface& surface);
DmgBundle load_dmg(const std::filesystem::path& path);

/// Graphviz rendering, one cluster per connected component.
std::string dmg_to_dot(const Dmg& dmg);

std::string plan_to_json(const PlanResult& result, const PrimitiveSequence& merged,
                         const GraspState& start, const GraspState& goal);

/// Round-trippable slice of a plan document: what simulation needs.
struct PlanDocument {
  std::vector<std::uint32_t> path;
  PrimitiveSequence primitives;
  GraspState start;
  GraspState goal;
};

PlanDocument plan_from_json(const std::string& text);

std::string report_to_json(const SimulationReport& report);
void save_trajectory_jsonl(const std::filesystem::path& path,
                           const SimulationResult& result);

void save_matrix_csv(const std::filesystem::path& path,
                     const ManipulabilityMatrix& matrix);
/// Binary PGM (P5), one pixel per entry in block order, 0 black / 255 white.
void save_matrix_pgm(const std::filesystem::path& path,
                     const ManipulabilityMatrix& matrix);
/// Row metadata: pose, node, block label per rendered row.
std::string matrix_sidecar_json(const ManipulabilityMatrix& matrix,
                                const std::vector<PoseSample>& samples,
                                const std::vector<RegraspArea>& areas);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace dmgplan
