#include <algorithm>
#include <cmath>

#include "fexp/error.hpp"
#include "fexp/random.hpp"
#include "fexp/sim.hpp"

namespace fexp {

namespace {

constexpr double kLiftHeight = 0.1;
constexpr double kMotorLeak = 2e-4;  // per-component velocity bound under a motor fault

Pose3 quantized(const Pose3& p) { return {quantize(p.x), quantize(p.y), quantize(p.z)}; }

Pose3 lerp(const Pose3& a, const Pose3& b, double s)
{
  return {a.x + (b.x - a.x) * s, a.y + (b.y - a.y) * s, a.z + (b.z - a.z) * s};
}

std::mt19937_64 tick_rng(std::uint64_t seed, int t) { return derive_rng(seed, 0x7469636bULL + static_cast<std::uint64_t>(t)); }

}  // namespace

Simulator::Simulator(EpisodeConfig config, std::span<const Action> plan)
    : config_(std::move(config)), plan_(plan.begin(), plan.end())
{
  config_.validate();
  if (plan_.empty()) fail(ErrorKind::Usage, "plan must contain at least one action");

  std::mt19937_64 rng = derive_rng(config_.seed, 0);
  world_ = make_layout(config_.layout, config_.object, config_.goal_place, rng);
  world_ = inject_fault(std::move(world_), config_.scenario, config_.params, rng);
  move_target_ = world_.standpoints.at(config_.goal_place);

  const auto& params = config_.params;
  for (Action a : plan_) {
    int d = params.durations.of(a);
    if (a == Action::Move && !world_.flags.motor_fault) {
      const double dist = distance(Pose3{}, move_target_);
      d = std::max(1, static_cast<int>(std::ceil(dist / params.move_speed - 1e-9)));
    }
    durations_.push_back(d);
  }
}

int Simulator::start_tick(std::size_t index) const
{
  int t = 0;
  for (std::size_t i = 0; i < index && i < durations_.size(); ++i) t += durations_[i];
  return t;
}

int Simulator::duration(std::size_t index) const { return durations_.at(index); }

Snapshot Simulator::initial_state() const
{
  Snapshot s;
  s.t = 0;
  for (const auto& [name, pose] : world_.entities) s.entity_locations[name] = quantized(pose);
  s.flags = world_.flags;
  return s;
}

Snapshot Simulator::step(const Snapshot& snapshot) const
{
  if (is_terminal(snapshot)) fail(ErrorKind::Usage, "cannot step a terminal snapshot");

  const int t = snapshot.t + 1;
  std::size_t index = 0;
  int start = 0;
  while (index < plan_.size() && t > start + durations_[index]) start += durations_[index++];
  if (index == plan_.size()) fail(ErrorKind::Usage, "snapshot lies past the end of the plan");

  const Action action = plan_[index];
  const int elapsed = t - start;
  const bool finished = elapsed == durations_[index];
  const auto failing = failed_action(config_.scenario);
  const bool errored = finished && failing && *failing == action;

  Snapshot next;
  next.t = t;
  next.flags = world_.flags;

  // Task states follow from the plan position alone.
  for (std::size_t j = 0; j < index; ++j) next.task_states[task_key_of(plan_[j])] = TaskStatus::Completed;
  TaskStatus status = TaskStatus::Active;
  if (errored)
    status = TaskStatus::Errored;
  else if (finished && action != Action::Lift)
    status = TaskStatus::Completed;
  next.task_states[task_key_of(action)] = status;

  // Base motion.
  AgentKinematics kin;
  kin.position = snapshot.kinematics.position;
  Pose3 believed = snapshot.believed_position;
  if (action == Action::Move && !errored) {
    if (world_.flags.motor_fault) {
      auto rng = tick_rng(config_.seed, t);
      kin.linear_velocity = {uniform(rng, -kMotorLeak, kMotorLeak), uniform(rng, -kMotorLeak, kMotorLeak), 0.0};
      kin.angular_velocity = {0.0, 0.0, uniform(rng, -kMotorLeak, kMotorLeak)};
      kin.position = {kin.position.x + kin.linear_velocity.x, kin.position.y + kin.linear_velocity.y, 0.0};
      believed = kin.position;
    } else {
      const Pose3 origin{};
      const double total = distance(origin, move_target_);
      const double travelled = std::min(total, config_.params.move_speed * elapsed);
      const double fraction = total > 0.0 ? travelled / total : 1.0;
      kin.position = finished ? move_target_ : lerp(origin, move_target_, fraction);
      if (!finished && total > 0.0) {
        auto rng = tick_rng(config_.seed, t);
        const double speed = config_.params.move_speed;
        kin.linear_velocity = {speed * (move_target_.x - origin.x) / total,
                               speed * (move_target_.y - origin.y) / total, 0.0};
        kin.angular_velocity = {0.0, 0.0, uniform(rng, 0.05, 0.15)};
      }
      const Vec3& off = world_.localization_offset;
      believed = {kin.position.x + off.x * fraction, kin.position.y + off.y * fraction,
                  kin.position.z + off.z * fraction};
    }
  }
  next.kinematics = {quantized(kin.angular_velocity), quantized(kin.linear_velocity), quantized(kin.position)};
  next.believed_position = quantized(believed);

  // Entities; the target travels with the gripper during lift and place.
  for (const auto& [name, pose] : world_.entities) next.entity_locations[name] = quantized(pose);
  if (!errored && (action == Action::Lift || action == Action::Place)) {
    const Pose3 rest = world_.entities.at(world_.target);
    const Pose3 lifted{rest.x, rest.y, rest.z + kLiftHeight};
    const double s = static_cast<double>(elapsed) / durations_[index];
    next.entity_locations[world_.target] = quantized(action == Action::Lift ? lerp(rest, lifted, s)
                                                                             : lerp(lifted, rest, s));
  }
  return next;
}

Episode Simulator::run() const
{
  Episode episode;
  episode.config = config_;
  Snapshot s = initial_state();
  episode.snapshots.push_back(s);
  while (!is_terminal(s)) {
    s = step(s);
    episode.snapshots.push_back(s);
  }
  if (is_failure(s)) {
    // One more sampled tick after the failure; nothing changes once halted.
    Snapshot halted = s;
    halted.t += 1;
    halted.kinematics.angular_velocity = {};
    halted.kinematics.linear_velocity = {};
    episode.snapshots.push_back(halted);
    for (std::size_t i = 0; i < plan_.size(); ++i)
      if (s.task_states[task_key_of(plan_[i])] == TaskStatus::Errored) episode.outcome.failed = plan_[i];
  }
  return episode;
}

Snapshot init_state(const EpisodeConfig& config) { return Simulator(config).initial_state(); }

Episode run_episode(const EpisodeConfig& config) { return Simulator(config).run(); }

}  // namespace fexp
