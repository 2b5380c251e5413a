#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "fexp/error.hpp"
#include "fexp/sim.hpp"

namespace fexp {

namespace {

template <std::size_t N>
bool contains(const std::array<std::string_view, N>& names, std::string_view name)
{
  return std::find(names.begin(), names.end(), name) != names.end();
}

}  // namespace

bool is_object(std::string_view name) { return contains(kObjects, name); }
bool is_place(std::string_view name) { return contains(kPlaces, name); }

bool is_catalog_entity(std::string_view name)
{
  return is_object(name) || is_place(name) || contains(kDistractors, name);
}

std::vector<std::string> entity_catalog()
{
  std::vector<std::string> names;
  for (auto n : kObjects) names.emplace_back(n);
  for (auto n : kPlaces) names.emplace_back(n);
  for (auto n : kDistractors) names.emplace_back(n);
  return names;
}

std::size_t object_index(std::string_view name)
{
  auto it = std::find(kObjects.begin(), kObjects.end(), name);
  if (it == kObjects.end()) fail(ErrorKind::Usage, "not an object of interest: " + std::string(name));
  return static_cast<std::size_t>(it - kObjects.begin());
}

double norm(const Vec3& v) { return std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z); }

double distance(const Pose3& a, const Pose3& b) { return norm({a.x - b.x, a.y - b.y, a.z - b.z}); }

bool is_finite(const Pose3& p) { return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z); }

double quantize(double value)
{
  if (value == 0.0) return 0.0;  // folds -0 into +0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return std::strtod(buf, nullptr);
}

// ---------------------------------------------------------------------------

std::string_view to_string(TaskKey key)
{
  switch (key) {
    case TaskKey::Grasp: return "k_grasp";
    case TaskKey::FindGrasp: return "k_findgrasp";
    case TaskKey::Move: return "k_move";
    case TaskKey::Pick: return "k_pick";
    case TaskKey::Detect: return "k_detect";
    case TaskKey::Seg: return "k_seg";
  }
  return "?";
}

std::optional<TaskKey> parse_task_key(std::string_view name)
{
  for (auto key : kTaskKeys)
    if (to_string(key) == name) return key;
  return std::nullopt;
}

std::optional<int> status_code(TaskStatus status)
{
  switch (status) {
    case TaskStatus::Active: return 0;
    case TaskStatus::Completed: return 1;
    case TaskStatus::Errored: return -1;
    case TaskStatus::Undefined: break;
  }
  return std::nullopt;
}

TaskStatus status_from_code(std::optional<int> code)
{
  if (!code) return TaskStatus::Undefined;
  switch (*code) {
    case 0: return TaskStatus::Active;
    case 1: return TaskStatus::Completed;
    case -1: return TaskStatus::Errored;
    default: fail(ErrorKind::Schema, "invalid task-state code " + std::to_string(*code));
  }
}

std::string_view to_string(Action action)
{
  switch (action) {
    case Action::Move: return "move";
    case Action::Segment: return "segment";
    case Action::Detect: return "detect";
    case Action::FindGrasp: return "findgrasp";
    case Action::Grasp: return "grasp";
    case Action::Lift: return "lift";
    case Action::Place: return "place";
  }
  return "?";
}

std::optional<Action> parse_action(std::string_view name)
{
  for (auto a : kDefaultPlan)
    if (to_string(a) == name) return a;
  return std::nullopt;
}

TaskKey task_key_of(Action action)
{
  switch (action) {
    case Action::Move: return TaskKey::Move;
    case Action::Segment: return TaskKey::Seg;
    case Action::Detect: return TaskKey::Detect;
    case Action::FindGrasp: return TaskKey::FindGrasp;
    case Action::Grasp: return TaskKey::Grasp;
    case Action::Lift:
    case Action::Place: return TaskKey::Pick;
  }
  return TaskKey::Pick;
}

std::string_view to_string(FailureScenario scenario)
{
  switch (scenario) {
    case FailureScenario::NoFailure: return "no_failure";
    case FailureScenario::TooFarAway: return "too_far_away";
    case FailureScenario::CloseToOthers: return "close_to_others";
    case FailureScenario::NotPresent: return "not_present";
    case FailureScenario::Occluded: return "occluded";
    case FailureScenario::MisLocalization: return "mislocalization";
    case FailureScenario::Controller: return "controller";
  }
  return "?";
}

std::optional<FailureScenario> parse_scenario(std::string_view name)
{
  if (name == to_string(FailureScenario::NoFailure)) return FailureScenario::NoFailure;
  for (auto s : kFailingScenarios)
    if (to_string(s) == name) return s;
  return std::nullopt;
}

std::string_view to_string(FailureType type)
{
  switch (type) {
    case FailureType::None: return "none";
    case FailureType::MotionPlanning: return "motion-planning";
    case FailureType::Detection: return "detection";
    case FailureType::Navigation: return "navigation";
  }
  return "?";
}

FailureType failure_type(FailureScenario scenario)
{
  switch (scenario) {
    case FailureScenario::TooFarAway:
    case FailureScenario::CloseToOthers: return FailureType::MotionPlanning;
    case FailureScenario::NotPresent:
    case FailureScenario::Occluded: return FailureType::Detection;
    case FailureScenario::MisLocalization:
    case FailureScenario::Controller: return FailureType::Navigation;
    case FailureScenario::NoFailure: break;
  }
  return FailureType::None;
}

std::optional<Action> failed_action(FailureScenario scenario)
{
  switch (scenario) {
    case FailureScenario::TooFarAway:
    case FailureScenario::CloseToOthers: return Action::Grasp;
    case FailureScenario::NotPresent:
    case FailureScenario::Occluded: return Action::Detect;
    case FailureScenario::MisLocalization: return Action::Segment;
    case FailureScenario::Controller: return Action::Move;
    case FailureScenario::NoFailure: break;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

int ActionDurations::of(Action action) const
{
  switch (action) {
    case Action::Move: return move;
    case Action::Segment: return segment;
    case Action::Detect: return detect;
    case Action::FindGrasp: return findgrasp;
    case Action::Grasp: return grasp;
    case Action::Lift: return lift;
    case Action::Place: return place;
  }
  return 1;
}

void SimParams::validate() const
{
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) fail(ErrorKind::Config, std::string(what) + " must be positive");
  };
  positive(reach, "sim.reach");
  positive(clutter_distance, "sim.clutter_distance");
  positive(misloc_distance, "sim.misloc_distance");
  positive(goal_radius, "sim.goal_radius");
  positive(move_speed, "sim.move_speed");
  for (auto a : kDefaultPlan)
    if (durations.of(a) < 1)
      fail(ErrorKind::Config, "duration of " + std::string(to_string(a)) + " must be >= 1 s");
}

void EpisodeConfig::validate() const
{
  if (!is_object(object)) fail(ErrorKind::Config, "object must be one of the objects of interest: " + object);
  if (!is_place(goal_place)) fail(ErrorKind::Config, "goal place must be a place of interest: " + goal_place);
  params.validate();
}

bool is_failure(const Snapshot& snapshot)
{
  return std::any_of(snapshot.task_states.status.begin(), snapshot.task_states.status.end(),
                     [](TaskStatus s) { return s == TaskStatus::Errored; });
}

bool is_success(const Snapshot& snapshot)
{
  return std::all_of(snapshot.task_states.status.begin(), snapshot.task_states.status.end(),
                     [](TaskStatus s) { return s == TaskStatus::Completed; });
}

bool is_terminal(const Snapshot& snapshot) { return is_failure(snapshot) || is_success(snapshot); }

}  // namespace fexp
