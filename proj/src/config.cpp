#include "dmgplan/config.hpp"

#include <json.hpp>

#include <cctype>
#include <fstream>
#include <functional>
#include <sstream>

namespace dmgplan {
namespace {

using nlohmann::json;

RotationPolicy policy_from(const std::string& name) {
  if (name == "minimal") return RotationPolicy::minimal;
  if (name == "goal_seeking") return RotationPolicy::goal_seeking;
  throw Error(Errc::InvalidArgument, "unknown rotation policy '" + name + "'");
}

const char* policy_name(RotationPolicy p) {
  return p == RotationPolicy::minimal ? "minimal" : "goal_seeking";
}

template <typename T>
void assign(const json& section, const char* key, T& out) {
  if (section.contains(key)) out = section.at(key).get<T>();
}

void apply_section(const json& doc, const char* name,
                   const std::function<void(const json&)>& fn,
                   std::vector<std::string>& seen) {
  seen.push_back(name);
  if (doc.contains(name)) {
    if (!doc.at(name).is_object())
      throw Error(Errc::InvalidArgument,
                  std::string("section '") + name + "' must be a table");
    fn(doc.at(name));
  }
}

void check_keys(const json& section, const std::string& name,
                std::initializer_list<const char*> known) {
  for (const auto& item : section.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || item.key() == k;
    if (!ok)
      throw Error(Errc::InvalidArgument,
                  "unknown configuration key '" + name + "." + item.key() + "'");
  }
}

Config apply_json(const json& doc) {
  if (!doc.is_object())
    throw Error(Errc::InvalidArgument, "configuration root must be an object");
  Config c;
  std::vector<std::string> sections;

  assign(doc, "input_scale", c.input_scale);

  apply_section(doc, "segmentation", [&](const json& s) {
    check_keys(s, "segmentation",
               {"resolution", "connectivity", "normal_weight", "fail_on_coarse"});
    assign(s, "resolution", c.segmentation.resolution);
    assign(s, "connectivity", c.segmentation.connectivity);
    assign(s, "normal_weight", c.segmentation.normal_weight);
    assign(s, "fail_on_coarse", c.segmentation.fail_on_coarse);
  }, sections);

  apply_section(doc, "graph", [&](const json& s) {
    check_keys(s, "graph", {"delta", "finger_length", "finger_width",
                            "height_clearance", "angle_step"});
    assign(s, "delta", c.graph.delta);
    assign(s, "finger_length", c.graph.finger.length);
    assign(s, "finger_width", c.graph.finger.width);
    assign(s, "height_clearance", c.graph.finger.height_clearance);
    assign(s, "angle_step", c.graph.finger.angle_step);
  }, sections);

  apply_section(doc, "planner", [&](const json& s) {
    check_keys(s, "planner",
               {"w_rotation", "w_opening", "w_pull", "w_excess_rotation",
                "comfort_arc", "max_aperture", "rotation_policy",
                "merge_angle_tol", "merge_direction_tol"});
    assign(s, "w_rotation", c.planner.weights.rotation);
    assign(s, "w_opening", c.planner.weights.opening);
    assign(s, "w_pull", c.planner.weights.pull);
    assign(s, "w_excess_rotation", c.planner.weights.excess_rotation);
    assign(s, "comfort_arc", c.planner.weights.comfort_arc);
    assign(s, "max_aperture", c.planner.max_aperture);
    if (s.contains("rotation_policy"))
      c.planner.rotation_policy = policy_from(s.at("rotation_policy").get<std::string>());
    assign(s, "merge_angle_tol", c.planner.merge_angle_tol);
    assign(s, "merge_direction_tol", c.planner.merge_direction_tol);
  }, sections);

  apply_section(doc, "manipulability", [&](const json& s) {
    check_keys(s, "manipulability", {"grid_step", "angle_step", "representatives"});
    assign(s, "grid_step", c.manipulability.grid_step);
    assign(s, "angle_step", c.manipulability.angle_step);
    assign(s, "representatives", c.manipulability.representatives);
  }, sections);

  apply_section(doc, "ects", [&](const json& s) {
    check_keys(s, "ects",
               {"alpha", "beta", "k_opening", "k_linear", "k_angular", "dt",
                "tolerance_pos", "tolerance_ang", "v_max", "omega_max",
                "max_steps", "standoff", "push_depth"});
    assign(s, "alpha", c.ects.params.alpha);
    assign(s, "beta", c.ects.params.beta);
    assign(s, "k_opening", c.ects.gains.k_opening);
    assign(s, "k_linear", c.ects.gains.k_linear);
    assign(s, "k_angular", c.ects.gains.k_angular);
    assign(s, "dt", c.ects.gains.dt);
    assign(s, "tolerance_pos", c.ects.gains.tolerance_pos);
    assign(s, "tolerance_ang", c.ects.gains.tolerance_ang);
    assign(s, "v_max", c.ects.gains.v_max);
    assign(s, "omega_max", c.ects.gains.omega_max);
    assign(s, "max_steps", c.ects.gains.max_steps);
    assign(s, "standoff", c.ects.gains.standoff);
    assign(s, "push_depth", c.ects.push_depth);
  }, sections);

  for (const auto& item : doc.items()) {
    if (item.key() == "input_scale") continue;
    bool ok = false;
    for (const auto& s : sections) ok = ok || item.key() == s;
    if (!ok)
      throw Error(Errc::InvalidArgument,
                  "unknown configuration section '" + item.key() + "'");
  }

  c.validate();
  return c;
}

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

json toml_scalar(const std::string& text) {
  if (text.size() >= 2 && text.front() == '"' && text.back() == '"')
    return text.substr(1, text.size() - 2);
  if (text == "true") return true;
  if (text == "false") return false;
  try {
    std::size_t used = 0;
    if (text.find_first_of(".eE") == std::string::npos) {
      const long long v = std::stoll(text, &used);
      if (used == text.size()) return v;
    } else {
      const double v = std::stod(text, &used);
      if (used == text.size()) return v;
    }
  } catch (const std::exception&) {
  }
  throw Error(Errc::InvalidArgument, "cannot parse value '" + text + "'");
}

}  // namespace

void Config::validate() const {
  if (input_scale <= 0)
    throw Error(Errc::InvalidArgument, "input_scale must be positive");
  if (segmentation.resolution <= 0)
    throw Error(Errc::InvalidArgument, "resolution must be positive");
  if (segmentation.connectivity != 6 && segmentation.connectivity != 18 &&
      segmentation.connectivity != 26)
    throw Error(Errc::InvalidArgument, "connectivity must be 6, 18 or 26");
  if (segmentation.normal_weight < 0)
    throw Error(Errc::InvalidArgument, "normal_weight must be nonnegative");
  if (!(graph.delta > 0 && graph.delta <= 2.0))
    throw Error(Errc::InvalidArgument, "delta must lie in (0, 2]");
  graph.finger.validate();
  const CostWeights& w = planner.weights;
  if (w.rotation < 0 || w.opening < 0 || w.pull < 0 || w.excess_rotation < 0 ||
      w.comfort_arc < 0)
    throw Error(Errc::InvalidArgument, "cost weights must be nonnegative");
  if (planner.max_aperture <= 0)
    throw Error(Errc::InvalidArgument, "max_aperture must be positive");
  if (planner.merge_angle_tol < 0 || planner.merge_direction_tol < 0)
    throw Error(Errc::InvalidArgument, "merge tolerances must be nonnegative");
  if (manipulability.grid_step < 0)
    throw Error(Errc::InvalidArgument, "grid_step must be nonnegative");
  if (manipulability.angle_step <= 0 || 360 % manipulability.angle_step != 0)
    throw Error(Errc::InvalidArgument, "matrix angle_step must divide 360");
  if (manipulability.representatives == 0)
    throw Error(Errc::InvalidArgument, "representatives must be at least 1");
  ects.params.validate();
  ects.gains.validate();
  if (ects.push_depth < 0)
    throw Error(Errc::InvalidArgument, "push_depth must be nonnegative");
}

double Config::effective_grid_step() const {
  return manipulability.grid_step > 0 ? manipulability.grid_step
                                      : 2.0 * segmentation.resolution;
}

double Config::effective_push_depth() const {
  return ects.push_depth > 0 ? ects.push_depth : 5.0 * segmentation.resolution;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw Error(Errc::UnreadableFile, "cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string ext = path.extension().string();
  if (ext == ".json") return parse_config_json(buffer.str());
  if (ext == ".toml") return parse_config_toml(buffer.str());
  throw Error(Errc::InvalidArgument,
              "unsupported config format '" + ext + "' (use .json or .toml)");
}

Config parse_config_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidArgument, std::string("invalid JSON: ") + e.what());
  }
  return apply_json(doc);
}

Config parse_config_toml(const std::string& text) {
  json doc = json::object();
  json* section = &doc;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw Error(Errc::InvalidArgument,
                    "malformed table header at line " + std::to_string(line_no));
      const std::string name = trim(line.substr(1, line.size() - 2));
      if (name.empty())
        throw Error(Errc::InvalidArgument,
                    "empty table name at line " + std::to_string(line_no));
      section = &doc[name];
      if (section->is_null()) *section = json::object();
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(Errc::InvalidArgument,
                  "expected key = value at line " + std::to_string(line_no));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw Error(Errc::InvalidArgument,
                  "expected key = value at line " + std::to_string(line_no));
    if (value.front() == '[') {
      if (value.back() != ']')
        throw Error(Errc::InvalidArgument,
                    "unterminated array at line " + std::to_string(line_no));
      json arr = json::array();
      std::string body = value.substr(1, value.size() - 2);
      std::istringstream items(body);
      std::string item;
      while (std::getline(items, item, ',')) {
        const std::string t = trim(item);
        if (!t.empty()) arr.push_back(toml_scalar(t));
      }
      (*section)[key] = std::move(arr);
    } else {
      (*section)[key] = toml_scalar(value);
    }
  }
  return apply_json(doc);
}

std::string dump_config(const Config& c) {
  json doc;
  doc["input_scale"] = c.input_scale;
  doc["segmentation"] = {{"resolution", c.segmentation.resolution},
                         {"connectivity", c.segmentation.connectivity},
                         {"normal_weight", c.segmentation.normal_weight},
                         {"fail_on_coarse", c.segmentation.fail_on_coarse}};
  doc["graph"] = {{"delta", c.graph.delta},
                  {"finger_length", c.graph.finger.length},
                  {"finger_width", c.graph.finger.width},
                  {"height_clearance", c.graph.finger.height_clearance},
                  {"angle_step", c.graph.finger.angle_step}};
  doc["planner"] = {{"w_rotation", c.planner.weights.rotation},
                    {"w_opening", c.planner.weights.opening},
                    {"w_pull", c.planner.weights.pull},
                    {"w_excess_rotation", c.planner.weights.excess_rotation},
                    {"comfort_arc", c.planner.weights.comfort_arc},
                    {"max_aperture", c.planner.max_aperture},
                    {"rotation_policy", policy_name(c.planner.rotation_policy)},
                    {"merge_angle_tol", c.planner.merge_angle_tol},
                    {"merge_direction_tol", c.planner.merge_direction_tol}};
  doc["manipulability"] = {{"grid_step", c.manipulability.grid_step},
                           {"angle_step", c.manipulability.angle_step},
                           {"representatives", c.manipulability.representatives}};
  doc["ects"] = {{"alpha", c.ects.params.alpha},
                 {"beta", c.ects.params.beta},
                 {"k_opening", c.ects.gains.k_opening},
                 {"k_linear", c.ects.gains.k_linear},
                 {"k_angular", c.ects.gains.k_angular},
                 {"dt", c.ects.gains.dt},
                 {"tolerance_pos", c.ects.gains.tolerance_pos},
                 {"tolerance_ang", c.ects.gains.tolerance_ang},
                 {"v_max", c.ects.gains.v_max},
                 {"omega_max", c.ects.gains.omega_max},
                 {"max_steps", c.ects.gains.max_steps},
                 {"standoff", c.ects.gains.standoff},
                 {"push_depth", c.ects.push_depth}};
  return doc.dump(2) + "\n";
}

}  // namespace dmgplan
