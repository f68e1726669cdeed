#include "navrl/scenario.hpp"

#include <json.hpp>

#include <cmath>
#include <deque>
#include <fstream>
#include <numbers>
#include <set>

namespace navrl::scenarios {

namespace {

using nlohmann::json;

constexpr int kSchemaVersion = 1;
constexpr double kFloodFillResolution = 0.05;

void require_keys(const json& obj, const std::set<std::string>& allowed,
                  const std::set<std::string>& required,
                  const std::string& where) {
  for (const auto& [key, value] : obj.items())
    if (!allowed.contains(key))
      throw ScenarioError("scenario load: unknown key '" + key + "' in " +
                          where);
  for (const auto& key : required)
    if (!obj.contains(key))
      throw ScenarioError("scenario load: missing key '" + key + "' in " +
                          where);
}

double number(const json& obj, const std::string& key) {
  if (!obj.at(key).is_number())
    throw ScenarioError("scenario load: '" + key + "' must be a number");
  return obj.at(key).get<double>();
}

sim::Vec2 point(const json& obj, const std::string& where) {
  require_keys(obj, {"x", "y"}, {"x", "y"}, where);
  return {number(obj, "x"), number(obj, "y")};
}

}  // namespace

sim::WorldModel ScenarioSpec::make_world() const {
  return sim::WorldModel(params, start_pose, walls, circles, boxes);
}

ScenarioSpec load_scenario(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in)
    throw ScenarioError("scenario load: cannot open " + file.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ScenarioError("scenario load: " + file.string() + ": " + e.what());
  }

  require_keys(doc,
               {"schema_version", "id", "name", "half_extent", "robot_radius",
                "start_pose", "walls", "circles", "boxes", "fixed_goals",
                "training_episodes"},
               {"schema_version", "id", "name", "half_extent", "start_pose",
                "fixed_goals", "training_episodes"},
               "scenario");
  if (doc.at("schema_version").get<int>() != kSchemaVersion)
    throw ScenarioError("scenario load: unsupported schema_version");

  ScenarioSpec spec;
  spec.id = doc.at("id").get<int>();
  spec.name = doc.at("name").get<std::string>();
  spec.params.half_extent = number(doc, "half_extent");
  if (spec.params.half_extent <= 0.0)
    throw ScenarioError("scenario load: half_extent must be positive");
  if (doc.contains("robot_radius")) {
    spec.params.robot_radius = number(doc, "robot_radius");
    if (spec.params.robot_radius <= 0.0)
      throw ScenarioError("scenario load: robot_radius must be positive");
  }

  const json& sp = doc.at("start_pose");
  require_keys(sp, {"x", "y", "heading_deg"}, {"x", "y", "heading_deg"},
               "start_pose");
  spec.start_pose.x = number(sp, "x");
  spec.start_pose.y = number(sp, "y");
  spec.start_pose.heading =
      wrap_angle(number(sp, "heading_deg") * std::numbers::pi / 180.0);

  for (const json& w : doc.value("walls", json::array())) {
    require_keys(w, {"x0", "y0", "x1", "y1"}, {"x0", "y0", "x1", "y1"},
                 "walls[]");
    spec.walls.push_back(
        {{number(w, "x0"), number(w, "y0")}, {number(w, "x1"), number(w, "y1")}});
  }
  for (const json& c : doc.value("circles", json::array())) {
    require_keys(c, {"x", "y", "radius"}, {"x", "y", "radius"}, "circles[]");
    const double r = number(c, "radius");
    if (r <= 0.0) throw ScenarioError("scenario load: circle radius must be positive");
    spec.circles.push_back({{number(c, "x"), number(c, "y")}, r});
  }
  for (const json& b : doc.value("boxes", json::array())) {
    require_keys(b, {"x", "y", "half_w", "half_h"},
                 {"x", "y", "half_w", "half_h"}, "boxes[]");
    const double hw = number(b, "half_w");
    const double hh = number(b, "half_h");
    if (hw <= 0.0 || hh <= 0.0)
      throw ScenarioError("scenario load: box half extents must be positive");
    spec.boxes.push_back({{number(b, "x"), number(b, "y")}, hw, hh});
  }

  const json& goals = doc.at("fixed_goals");
  if (!goals.is_array() || goals.size() != 4)
    throw ScenarioError("scenario load: fixed_goals must list exactly 4 points");
  for (std::size_t i = 0; i < 4; ++i)
    spec.fixed_goals[i] = point(goals[i], "fixed_goals[]");

  spec.training_episodes = doc.at("training_episodes").get<int>();
  if (spec.training_episodes <= 0)
    throw ScenarioError("scenario load: training_episodes must be positive");

  // Clearance: start pose and every fixed goal must respect the spawn margin.
  const sim::WorldModel world = spec.make_world();
  const double margin = spec.params.spawn_clearance;
  if (world.clearance({spec.start_pose.x, spec.start_pose.y}) < margin)
    throw ScenarioError("scenario load: start pose violates clearance " +
                        std::to_string(margin));
  for (std::size_t i = 0; i < 4; ++i)
    if (world.clearance(spec.fixed_goals[i]) < margin)
      throw ScenarioError("scenario load: fixed goal " + std::to_string(i) +
                          " violates clearance " + std::to_string(margin));

  const auto unreachable = validate_reachability(spec);
  if (!unreachable.empty()) {
    std::string msg = "scenario load: fixed goals unreachable from start:";
    for (int g : unreachable) msg += " " + std::to_string(g);
    throw ScenarioError(msg);
  }
  return spec;
}

ScenarioSpec load_scenario(int id, const std::filesystem::path& scenario_dir) {
  if (id < 1 || id > 3)
    throw ScenarioError("scenario load: id must be 1, 2, or 3");
  const auto file =
      scenario_dir / ("scenario" + std::to_string(id) + ".json");
  ScenarioSpec spec = load_scenario(file);
  if (spec.id != id)
    throw ScenarioError("scenario load: file " + file.string() +
                        " declares id " + std::to_string(spec.id));
  return spec;
}

std::vector<int> validate_reachability(const ScenarioSpec& spec) {
  const sim::WorldModel world = spec.make_world();
  const double h = spec.params.half_extent;
  // Inflate by the collision threshold plus one motion step so a traversable
  // cell is one the robot can cross without tripping the collision check.
  const double inflation = spec.params.collision_distance +
                           spec.params.linear_speed * spec.params.control_dt;

  const int cells = std::max(1, static_cast<int>(std::round(2.0 * h / kFloodFillResolution)));
  const double cell = 2.0 * h / cells;
  auto center = [&](int ix, int iy) -> sim::Vec2 {
    return {-h + (ix + 0.5) * cell, -h + (iy + 0.5) * cell};
  };
  auto index_of = [&](const sim::Vec2& p) -> std::pair<int, int> {
    int ix = std::clamp(static_cast<int>((p.x + h) / cell), 0, cells - 1);
    int iy = std::clamp(static_cast<int>((p.y + h) / cell), 0, cells - 1);
    return {ix, iy};
  };

  std::vector<char> free_cell(static_cast<std::size_t>(cells) * cells);
  for (int iy = 0; iy < cells; ++iy)
    for (int ix = 0; ix < cells; ++ix)
      free_cell[iy * cells + ix] = world.clearance(center(ix, iy)) > inflation;

  std::vector<char> visited(free_cell.size(), 0);
  const auto [sx, sy] = index_of({spec.start_pose.x, spec.start_pose.y});
  std::deque<std::pair<int, int>> frontier;
  if (free_cell[sy * cells + sx]) {
    visited[sy * cells + sx] = 1;
    frontier.emplace_back(sx, sy);
  }
  while (!frontier.empty()) {
    const auto [cx, cy] = frontier.front();
    frontier.pop_front();
    constexpr int dx[4] = {1, -1, 0, 0};
    constexpr int dy[4] = {0, 0, 1, -1};
    for (int k = 0; k < 4; ++k) {
      const int nx = cx + dx[k];
      const int ny = cy + dy[k];
      if (nx < 0 || ny < 0 || nx >= cells || ny >= cells) continue;
      const int idx = ny * cells + nx;
      if (!free_cell[idx] || visited[idx]) continue;
      visited[idx] = 1;
      frontier.emplace_back(nx, ny);
    }
  }

  std::vector<int> unreachable;
  for (int g = 0; g < 4; ++g) {
    const auto [gx, gy] = index_of(spec.fixed_goals[g]);
    if (!visited[gy * cells + gx]) unreachable.push_back(g);
  }
  return unreachable;
}

}  // namespace navrl::scenarios
