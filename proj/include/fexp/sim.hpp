#pragma once

// Abstract kinematic simulator for a single pick-and-place plan in a
// household world. Produces 1 Hz snapshot traces with ground-truth outcome
// labels, and injects the six contextual/component failure scenarios.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fexp {

// ---------------------------------------------------------------------------
// Entities

inline constexpr std::array<std::string_view, 5> kObjects = {"milk", "coke can", "ice cream", "bottle",
                                                             "cup"};
inline constexpr std::array<std::string_view, 2> kPlaces = {"dining table", "left kitchen counter"};
inline constexpr std::array<std::string_view, 4> kDistractors = {"bowl", "plate", "fork", "cereal box"};
inline constexpr std::string_view kOccluder = "cereal box";

bool is_object(std::string_view name);
bool is_place(std::string_view name);
bool is_catalog_entity(std::string_view name);
/// Every entity name the world may contain, in a fixed order.
std::vector<std::string> entity_catalog();
/// Index of `name` in kObjects; throws on anything else.
std::size_t object_index(std::string_view name);

struct Pose3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Pose3&, const Pose3&) = default;
};

using Vec3 = Pose3;

double distance(const Pose3& a, const Pose3& b);
double norm(const Vec3& v);
bool is_finite(const Pose3& p);

struct AgentKinematics {
  Vec3 angular_velocity;
  Vec3 linear_velocity;
  Pose3 position;

  friend bool operator==(const AgentKinematics&, const AgentKinematics&) = default;
};

// ---------------------------------------------------------------------------
// Task states

/// Task-state keys in the fixed feature order.
enum class TaskKey : std::uint8_t { Grasp, FindGrasp, Move, Pick, Detect, Seg };
inline constexpr std::size_t kNumTaskKeys = 6;
inline constexpr std::array<TaskKey, kNumTaskKeys> kTaskKeys = {TaskKey::Grasp,  TaskKey::FindGrasp,
                                                                TaskKey::Move,   TaskKey::Pick,
                                                                TaskKey::Detect, TaskKey::Seg};
std::string_view to_string(TaskKey key);
std::optional<TaskKey> parse_task_key(std::string_view name);

enum class TaskStatus : std::uint8_t { Undefined, Active, Completed, Errored };

/// Numeric code: Active 0, Completed 1, Errored -1, Undefined none.
std::optional<int> status_code(TaskStatus status);
TaskStatus status_from_code(std::optional<int> code);

struct TaskStates {
  std::array<TaskStatus, kNumTaskKeys> status{};

  TaskStatus& operator[](TaskKey key) { return status[static_cast<std::size_t>(key)]; }
  TaskStatus operator[](TaskKey key) const { return status[static_cast<std::size_t>(key)]; }
  friend bool operator==(const TaskStates&, const TaskStates&) = default;
};

// ---------------------------------------------------------------------------
// Plan actions and scenarios

enum class Action : std::uint8_t { Move, Segment, Detect, FindGrasp, Grasp, Lift, Place };
inline constexpr std::array<Action, 7> kDefaultPlan = {Action::Move,      Action::Segment, Action::Detect,
                                                       Action::FindGrasp, Action::Grasp,   Action::Lift,
                                                       Action::Place};
std::string_view to_string(Action action);
std::optional<Action> parse_action(std::string_view name);
/// lift and place both report through k_pick.
TaskKey task_key_of(Action action);

enum class FailureScenario : std::uint8_t {
  NoFailure,
  TooFarAway,
  CloseToOthers,
  NotPresent,
  Occluded,
  MisLocalization,
  Controller,
};
inline constexpr std::array<FailureScenario, 6> kFailingScenarios = {
    FailureScenario::TooFarAway, FailureScenario::CloseToOthers,   FailureScenario::NotPresent,
    FailureScenario::Occluded,   FailureScenario::MisLocalization, FailureScenario::Controller};

enum class FailureType : std::uint8_t { None, MotionPlanning, Detection, Navigation };

std::string_view to_string(FailureScenario scenario);
std::optional<FailureScenario> parse_scenario(std::string_view name);
std::string_view to_string(FailureType type);
FailureType failure_type(FailureScenario scenario);
/// The plan action that fails under `scenario`; none for NoFailure.
std::optional<Action> failed_action(FailureScenario scenario);

// ---------------------------------------------------------------------------
// Configuration

struct ActionDurations {
  int move = 10;  // timeout for a move that cannot make progress
  int segment = 3;
  int detect = 3;
  int findgrasp = 3;
  int grasp = 4;
  int lift = 2;
  int place = 3;

  int of(Action action) const;
  friend bool operator==(const ActionDurations&, const ActionDurations&) = default;
};

struct SimParams {
  double reach = 1.0;             // R_max
  double clutter_distance = 0.05;  // d_clutter
  double misloc_distance = 0.5;    // d_misloc
  double goal_radius = 1.0;
  double move_speed = 0.5;
  ActionDurations durations;

  void validate() const;
  friend bool operator==(const SimParams&, const SimParams&) = default;
};

struct EpisodeConfig {
  std::uint64_t seed = 0;
  std::string object = "milk";
  std::string goal_place = "dining table";
  FailureScenario scenario = FailureScenario::NoFailure;
  std::string layout = "kitchen";
  SimParams params;

  void validate() const;
  friend bool operator==(const EpisodeConfig&, const EpisodeConfig&) = default;
};

// ---------------------------------------------------------------------------
// World

struct WorldFlags {
  bool occluded = false;
  bool motor_fault = false;

  friend bool operator==(const WorldFlags&, const WorldFlags&) = default;
};

struct WorldLayout {
  std::string target;
  std::string goal_place;
  std::map<std::string, Pose3> entities;
  /// Where the base stops to manipulate at each place.
  std::map<std::string, Pose3> standpoints;
  Vec3 localization_offset;
  WorldFlags flags;

  /// Base standpoint lifted to the place's surface height; reach is measured from here.
  Pose3 manipulation_point() const;
  friend bool operator==(const WorldLayout&, const WorldLayout&) = default;
};

std::vector<std::string> layout_names();
/// Builds the named preset; non-target objects are scattered between places using `rng`.
WorldLayout make_layout(std::string_view name, std::string_view target, std::string_view goal_place,
                        std::mt19937_64& rng);
WorldLayout inject_fault(WorldLayout layout, FailureScenario scenario, const SimParams& params,
                         std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// Traces

struct Snapshot {
  int t = 0;
  std::map<std::string, Pose3> entity_locations;
  AgentKinematics kinematics;
  TaskStates task_states;
  Pose3 believed_position;
  WorldFlags flags;

  friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

struct Outcome {
  std::optional<Action> failed;  // none = success
  bool success() const { return !failed.has_value(); }
  friend bool operator==(const Outcome&, const Outcome&) = default;
};

struct Episode {
  EpisodeConfig config;
  std::vector<Snapshot> snapshots;
  Outcome outcome;

  friend bool operator==(const Episode&, const Episode&) = default;
};

bool is_failure(const Snapshot& snapshot);
bool is_success(const Snapshot& snapshot);
bool is_terminal(const Snapshot& snapshot);

/// Simulates one episode. Every value it produces is a pure function of the
/// EpisodeConfig, including per-tick jitter.
class Simulator {
 public:
  explicit Simulator(EpisodeConfig config, std::span<const Action> plan = kDefaultPlan);

  const EpisodeConfig& config() const { return config_; }
  const WorldLayout& world() const { return world_; }

  Snapshot initial_state() const;
  /// Advances one second. Throws a usage error on a terminal snapshot.
  Snapshot step(const Snapshot& snapshot) const;
  Episode run() const;

  /// Tick at which plan step `index` starts (all earlier steps succeeded).
  int start_tick(std::size_t index) const;
  int duration(std::size_t index) const;

 private:
  EpisodeConfig config_;
  std::vector<Action> plan_;
  WorldLayout world_;
  std::vector<int> durations_;
  Pose3 move_target_;
};

Snapshot init_state(const EpisodeConfig& config);
Episode run_episode(const EpisodeConfig& config);

/// Rounds to 9 significant digits, the precision used in trace files.
double quantize(double value);

}  // namespace fexp
