#include "fexp/featurizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fexp/error.hpp"

namespace fexp {

std::vector<std::string> raw_feature_names()
{
  std::vector<std::string> names = {"rel_a_goal", "rel_o_objg", "rel_a_o", "v_ang", "v_lin"};
  for (TaskKey k : kTaskKeys) names.emplace_back(to_string(k));
  names.emplace_back("o_p");
  return names;
}

std::array<std::optional<double>, kNumRawFeatures> FeatureVector::raw() const
{
  std::array<std::optional<double>, kNumRawFeatures> r{};
  r[0] = rel_agent_goal;
  r[1] = rel_object_others;
  r[2] = rel_agent_object;
  r[3] = angular_speed;
  r[4] = linear_speed;
  for (std::size_t k = 0; k < kNumTaskKeys; ++k)
    if (task_states[k]) r[5 + k] = static_cast<double>(*task_states[k]);
  r[11] = object_present ? 1.0 : 0.0;
  return r;
}

FeatureVector FeatureVector::from_raw(std::vector<std::string> obj_g,
                                      const std::array<std::optional<double>, kNumRawFeatures>& raw,
                                      std::string object, std::string goal_place)
{
  auto need = [&](std::size_t i) {
    if (!raw[i]) fail(ErrorKind::Schema, "raw feature " + raw_feature_names()[i] + " cannot be Empty");
    return *raw[i];
  };
  FeatureVector f;
  f.objects_at_goal = std::move(obj_g);
  f.rel_agent_goal = raw[0];
  f.rel_object_others = raw[1];
  f.rel_agent_object = raw[2];
  f.angular_speed = need(3);
  f.linear_speed = need(4);
  for (std::size_t k = 0; k < kNumTaskKeys; ++k) {
    if (!raw[5 + k]) continue;
    const double v = *raw[5 + k];
    if (v != -1.0 && v != 0.0 && v != 1.0) fail(ErrorKind::Schema, "task state feature must be -1, 0 or 1");
    f.task_states[k] = static_cast<int>(v);
  }
  f.object_present = need(11) != 0.0;
  f.object = std::move(object);
  f.goal_place = std::move(goal_place);
  return f;
}

std::vector<std::string> objects_at_goal(const Snapshot& snapshot, std::string_view goal_place, double radius)
{
  auto goal = snapshot.entity_locations.find(std::string(goal_place));
  if (goal == snapshot.entity_locations.end())
    fail(ErrorKind::Usage, "goal place not in snapshot: " + std::string(goal_place));
  std::vector<std::string> out;
  // std::map iteration already yields names in sorted order.
  for (const auto& [name, pose] : snapshot.entity_locations) {
    if (is_place(name)) continue;
    if (distance(pose, goal->second) <= radius) out.push_back(name);
  }
  return out;
}

RelativeFeatures relative_features(const Snapshot& snapshot, std::string_view object, std::string_view goal_place,
                                   std::span<const std::string> obj_g)
{
  RelativeFeatures r;
  const auto& loc = snapshot.entity_locations;
  const auto goal = loc.find(std::string(goal_place));
  const auto obj = loc.find(std::string(object));
  if (goal != loc.end()) r.agent_goal = distance(snapshot.believed_position, goal->second);
  if (obj != loc.end()) r.agent_object = distance(snapshot.kinematics.position, obj->second);

  const bool object_at_goal = std::find(obj_g.begin(), obj_g.end(), object) != obj_g.end();
  if (obj != loc.end() && object_at_goal) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& name : obj_g) {
      if (name == object) continue;
      const auto other = loc.find(name);
      if (other != loc.end()) best = std::min(best, distance(obj->second, other->second));
    }
    if (std::isfinite(best)) r.object_others = best;
  }
  return r;
}

void forward_fill(std::span<TaskStates> column)
{
  TaskStates last{};
  for (auto& states : column) {
    for (TaskKey k : kTaskKeys) {
      if (states[k] == TaskStatus::Undefined)
        states[k] = last[k];
      else
        last[k] = states[k];
    }
  }
}

Episode forward_fill(Episode episode)
{
  std::vector<TaskStates> column;
  column.reserve(episode.snapshots.size());
  for (const auto& s : episode.snapshots) column.push_back(s.task_states);
  forward_fill(column);
  for (std::size_t i = 0; i < column.size(); ++i) episode.snapshots[i].task_states = column[i];
  return episode;
}

FeatureVector extract(const Snapshot& snapshot, std::string_view object, std::string_view goal_place, double radius)
{
  FeatureVector f;
  f.object = object;
  f.goal_place = goal_place;
  f.objects_at_goal = objects_at_goal(snapshot, goal_place, radius);
  const auto rel = relative_features(snapshot, object, goal_place, f.objects_at_goal);
  f.rel_agent_goal = rel.agent_goal;
  f.rel_object_others = rel.object_others;
  f.rel_agent_object = rel.agent_object;
  f.angular_speed = norm(snapshot.kinematics.angular_velocity);
  f.linear_speed = norm(snapshot.kinematics.linear_velocity);
  for (std::size_t k = 0; k < kNumTaskKeys; ++k) f.task_states[k] = status_code(snapshot.task_states.status[k]);
  f.object_present = std::find(f.objects_at_goal.begin(), f.objects_at_goal.end(), object) != f.objects_at_goal.end();
  return f;
}

// ---------------------------------------------------------------------------

std::vector<std::string> entity_tokens()
{
  std::vector<std::string> tokens = {std::string(kEmptyEntity)};
  for (auto& name : entity_catalog()) tokens.push_back(std::move(name));
  return tokens;
}

int entity_token(std::string_view name)
{
  static const std::vector<std::string> tokens = entity_tokens();
  auto it = std::find(tokens.begin(), tokens.end(), name);
  if (it == tokens.end()) fail(ErrorKind::Usage, "unknown entity: " + std::string(name));
  return static_cast<int>(it - tokens.begin());
}

Standardizer Standardizer::fit(std::span<const FeatureVector> features)
{
  Standardizer s;
  std::array<double, kNumRawFeatures> sum{}, sum_sq{};
  std::array<std::size_t, kNumRawFeatures> count{};
  for (const auto& f : features) {
    const auto raw = f.raw();
    for (std::size_t i = 0; i < kNumRawFeatures; ++i) {
      if (!raw[i]) continue;
      sum[i] += *raw[i];
      ++count[i];
    }
  }
  for (std::size_t i = 0; i < kNumRawFeatures; ++i) s.mean[i] = count[i] ? sum[i] / count[i] : 0.0;
  for (const auto& f : features) {
    const auto raw = f.raw();
    for (std::size_t i = 0; i < kNumRawFeatures; ++i)
      if (raw[i]) sum_sq[i] += (*raw[i] - s.mean[i]) * (*raw[i] - s.mean[i]);
  }
  for (std::size_t i = 0; i < kNumRawFeatures; ++i) {
    const double sd = count[i] ? std::sqrt(sum_sq[i] / count[i]) : 0.0;
    if (sd > 1e-12) {
      s.scale[i] = sd;
    } else {
      // constant features pass through unscaled
      s.mean[i] = 0.0;
      s.scale[i] = 1.0;
    }
  }
  return s;
}

MaskedInput Standardizer::encode(const FeatureVector& f) const
{
  MaskedInput in;
  if (f.objects_at_goal.empty())
    in.entities.push_back(entity_token(kEmptyEntity));
  else
    for (const auto& name : f.objects_at_goal) in.entities.push_back(entity_token(name));
  if (!f.goal_place.empty()) in.entities.push_back(entity_token(f.goal_place));
  in.object = static_cast<int>(object_index(f.object));
  const auto raw = f.raw();
  in.values.assign(kNumRawFeatures, 0.0);
  in.mask.assign(kNumRawFeatures, false);
  for (std::size_t i = 0; i < kNumRawFeatures; ++i) {
    if (!raw[i]) continue;
    in.values[i] = (*raw[i] - mean[i]) / scale[i];
    in.mask[i] = true;
  }
  return in;
}

}  // namespace fexp
