#include <cmath>
#include <numbers>

#include "fexp/error.hpp"
#include "fexp/sim.hpp"
#include "fexp/random.hpp"

namespace fexp {

namespace {

struct PlaceFrame {
  Pose3 center;
  Pose3 standpoint;
  // unit vectors in the xy plane: `away` points from the standpoint across the surface
  double away_x, away_y;
  double side_x, side_y;
};

// Surface slots in (away, side) coordinates relative to the place center.
constexpr std::array<std::array<double, 2>, 7> kSlots = {{
    {-0.35, -0.30},
    {-0.35, 0.00},
    {-0.35, 0.30},
    {-0.05, -0.15},
    {-0.05, 0.15},
    {0.10, -0.40},
    {0.10, 0.40},
}};

constexpr double kRestHeight = 0.03;  // object centre above the surface
constexpr double kSlotClearance = 0.1;

std::map<std::string, PlaceFrame> kitchen_frames()
{
  return {
      {"dining table", {{5.7, 0.0, 0.75}, {5.0, 0.0, 0.0}, 1.0, 0.0, 0.0, 1.0}},
      {"left kitchen counter", {{0.0, 5.7, 0.9}, {0.0, 5.0, 0.0}, 0.0, 1.0, -1.0, 0.0}},
  };
}

PlaceFrame frame_for(const WorldLayout& layout, const std::string& place)
{
  auto frames = kitchen_frames();
  auto it = frames.find(place);
  if (it == frames.end()) fail(ErrorKind::Usage, "layout has no place named " + place);
  PlaceFrame f = it->second;
  f.center = layout.entities.at(place);
  f.standpoint = layout.standpoints.at(place);
  return f;
}

Pose3 on_surface(const PlaceFrame& f, double away, double side)
{
  return {f.center.x + away * f.away_x + side * f.side_x, f.center.y + away * f.away_y + side * f.side_y,
          f.center.z + kRestHeight};
}

bool slot_free(const WorldLayout& layout, const Pose3& p, const std::string& ignore = {})
{
  for (const auto& [name, pose] : layout.entities) {
    if (name == ignore || is_place(name)) continue;
    if (distance(pose, p) < kSlotClearance) return false;
  }
  return true;
}

Pose3 random_free_slot(const WorldLayout& layout, const PlaceFrame& f, std::mt19937_64& rng,
                       const std::string& ignore = {})
{
  std::vector<Pose3> free;
  for (const auto& s : kSlots) {
    Pose3 p = on_surface(f, s[0], s[1]);
    if (slot_free(layout, p, ignore)) free.push_back(p);
  }
  if (free.empty()) fail(ErrorKind::Config, "no free surface slot left on a place");
  return free[random_index(rng, free.size())];
}

std::string other_place(const std::string& place)
{
  return place == kPlaces[0] ? std::string(kPlaces[1]) : std::string(kPlaces[0]);
}

}  // namespace

Pose3 WorldLayout::manipulation_point() const
{
  const Pose3& base = standpoints.at(goal_place);
  return {base.x, base.y, entities.at(goal_place).z};
}

std::vector<std::string> layout_names() { return {"kitchen"}; }

WorldLayout make_layout(std::string_view name, std::string_view target, std::string_view goal_place,
                        std::mt19937_64& rng)
{
  if (name != "kitchen") fail(ErrorKind::Config, "unknown world layout: " + std::string(name));
  if (!is_object(target)) fail(ErrorKind::Config, "unknown target object: " + std::string(target));
  if (!is_place(goal_place)) fail(ErrorKind::Config, "unknown goal place: " + std::string(goal_place));

  WorldLayout layout;
  layout.target = target;
  layout.goal_place = goal_place;
  for (const auto& [place, frame] : kitchen_frames()) {
    layout.entities[place] = frame.center;
    layout.standpoints[place] = frame.standpoint;
  }
  for (std::size_t i = 0; i < kDistractors.size(); ++i)
    layout.entities[std::string(kDistractors[i])] = {-2.0, -2.0 - 0.3 * static_cast<double>(i), 0.8};

  const PlaceFrame goal = frame_for(layout, layout.goal_place);
  const PlaceFrame other = frame_for(layout, other_place(layout.goal_place));
  layout.entities[layout.target] = random_free_slot(layout, goal, rng);
  for (auto obj : kObjects) {
    if (obj == target) continue;
    const bool at_goal = uniform(rng) < 0.5;
    layout.entities[std::string(obj)] = random_free_slot(layout, at_goal ? goal : other, rng);
  }
  return layout;
}

WorldLayout inject_fault(WorldLayout layout, FailureScenario scenario, const SimParams& params,
                         std::mt19937_64& rng)
{
  if (!layout.entities.contains(layout.target) || !layout.entities.contains(layout.goal_place))
    fail(ErrorKind::Usage, "layout lacks its target object or goal place");
  const PlaceFrame goal = frame_for(layout, layout.goal_place);
  Pose3& target = layout.entities.at(layout.target);

  switch (scenario) {
    case FailureScenario::NoFailure: break;

    case FailureScenario::TooFarAway: {
      // Far edge of the surface: beyond reach from the standpoint, still inside the goal area.
      const double away = uniform(rng, 0.6, 0.85);
      const double side = uniform(rng, -0.3, 0.3);
      target = on_surface(goal, away, side);
      break;
    }

    case FailureScenario::CloseToOthers: {
      const std::size_t count = 1 + random_index(rng, 3);
      for (std::size_t i = 0; i < count; ++i) {
        const double r = uniform(rng, 0.4 * params.clutter_distance, 0.9 * params.clutter_distance);
        const double theta = uniform(rng, 0.0, 2.0 * std::numbers::pi);
        layout.entities[std::string(kDistractors[i])] = {target.x + r * std::cos(theta),
                                                         target.y + r * std::sin(theta), target.z};
      }
      break;
    }

    case FailureScenario::NotPresent: {
      const PlaceFrame other = frame_for(layout, other_place(layout.goal_place));
      target = random_free_slot(layout, other, rng, layout.target);
      break;
    }

    case FailureScenario::Occluded: {
      // Between the robot and the target, on the same surface.
      const Pose3 eye = layout.standpoints.at(layout.goal_place);
      const double dx = eye.x - target.x;
      const double dy = eye.y - target.y;
      const double len = std::hypot(dx, dy);
      constexpr double kGap = 0.15;
      layout.entities[std::string(kOccluder)] = {target.x + kGap * dx / len, target.y + kGap * dy / len,
                                                 target.z};
      layout.flags.occluded = true;
      break;
    }

    case FailureScenario::MisLocalization: {
      // Offset points back from the goal, within +-60 degrees.
      const double magnitude = params.misloc_distance + uniform(rng, 0.1, 0.5);
      const double base = std::atan2(-goal.away_y, -goal.away_x);
      const double theta = base + uniform(rng, -std::numbers::pi / 3.0, std::numbers::pi / 3.0);
      layout.localization_offset = {magnitude * std::cos(theta), magnitude * std::sin(theta), 0.0};
      break;
    }

    case FailureScenario::Controller: layout.flags.motor_fault = true; break;
  }
  return layout;
}

}  // namespace fexp
