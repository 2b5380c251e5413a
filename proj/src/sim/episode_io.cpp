#include "fexp/episode_io.hpp"

#include <istream>
#include <ostream>

#include "fexp/error.hpp"
#include "fexp/io.hpp"

namespace fexp {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

ordered_json vec(const Pose3& p) { return ordered_json::array({p.x, p.y, p.z}); }

Pose3 pose_from(const json& j)
{
  if (!j.is_array() || j.size() != 3) fail(ErrorKind::Schema, "expected a 3-element coordinate array");
  Pose3 p{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
  if (!is_finite(p)) fail(ErrorKind::Schema, "non-finite coordinate");
  return p;
}

template <class T>
T required(const json& j, const char* key)
{
  if (!j.contains(key)) fail(ErrorKind::Schema, std::string("missing field: ") + key);
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorKind::Schema, std::string("bad field ") + key + ": " + e.what());
  }
}

}  // namespace

ordered_json to_json(const SimParams& p)
{
  ordered_json durations;
  for (Action a : kDefaultPlan) durations[std::string(to_string(a))] = p.durations.of(a);
  return {{"reach", p.reach},
          {"clutter_distance", p.clutter_distance},
          {"misloc_distance", p.misloc_distance},
          {"goal_radius", p.goal_radius},
          {"move_speed", p.move_speed},
          {"durations", durations}};
}

SimParams sim_params_from_json(const json& j)
{
  SimParams p;
  p.reach = required<double>(j, "reach");
  p.clutter_distance = required<double>(j, "clutter_distance");
  p.misloc_distance = required<double>(j, "misloc_distance");
  p.goal_radius = required<double>(j, "goal_radius");
  p.move_speed = required<double>(j, "move_speed");
  const json& d = j.at("durations");
  p.durations.move = required<int>(d, "move");
  p.durations.segment = required<int>(d, "segment");
  p.durations.detect = required<int>(d, "detect");
  p.durations.findgrasp = required<int>(d, "findgrasp");
  p.durations.grasp = required<int>(d, "grasp");
  p.durations.lift = required<int>(d, "lift");
  p.durations.place = required<int>(d, "place");
  return p;
}

ordered_json to_json(const EpisodeConfig& c)
{
  return {{"seed", c.seed},
          {"object", c.object},
          {"goal_place", c.goal_place},
          {"scenario", std::string(to_string(c.scenario))},
          {"sample_hz", 1},
          {"world_layout", c.layout},
          {"params", to_json(c.params)}};
}

EpisodeConfig episode_config_from_json(const json& j)
{
  EpisodeConfig c;
  c.seed = required<std::uint64_t>(j, "seed");
  c.object = required<std::string>(j, "object");
  c.goal_place = required<std::string>(j, "goal_place");
  const auto scenario = parse_scenario(required<std::string>(j, "scenario"));
  if (!scenario) fail(ErrorKind::Schema, "unknown scenario in episode header");
  c.scenario = *scenario;
  if (required<int>(j, "sample_hz") != 1) fail(ErrorKind::Schema, "only 1 Hz traces are supported");
  c.layout = required<std::string>(j, "world_layout");
  c.params = sim_params_from_json(j.at("params"));
  return c;
}

ordered_json to_json(const Snapshot& s)
{
  ordered_json entities = ordered_json::object();
  for (const auto& [name, pose] : s.entity_locations) entities[name] = vec(pose);
  ordered_json tasks = ordered_json::object();
  for (TaskKey k : kTaskKeys) {
    const auto code = status_code(s.task_states[k]);
    tasks[std::string(to_string(k))] = code ? ordered_json(*code) : ordered_json(nullptr);
  }
  return {{"t", s.t},
          {"entities", entities},
          {"vel_ang", vec(s.kinematics.angular_velocity)},
          {"vel_lin", vec(s.kinematics.linear_velocity)},
          {"pos", vec(s.kinematics.position)},
          {"task_states", tasks},
          {"believed_pos", vec(s.believed_position)},
          {"flags", {{"occluded", s.flags.occluded}, {"motor_fault", s.flags.motor_fault}}}};
}

Snapshot snapshot_from_json(const json& j)
{
  Snapshot s;
  s.t = required<int>(j, "t");
  for (const auto& [name, pose] : j.at("entities").items()) s.entity_locations[name] = pose_from(pose);
  s.kinematics.angular_velocity = pose_from(j.at("vel_ang"));
  s.kinematics.linear_velocity = pose_from(j.at("vel_lin"));
  s.kinematics.position = pose_from(j.at("pos"));
  const json& tasks = j.at("task_states");
  for (TaskKey k : kTaskKeys) {
    const auto key = std::string(to_string(k));
    if (!tasks.contains(key)) fail(ErrorKind::Schema, "missing task state " + key);
    const json& v = tasks.at(key);
    s.task_states[k] = status_from_code(v.is_null() ? std::nullopt : std::optional<int>(v.get<int>()));
  }
  s.believed_position = pose_from(j.at("believed_pos"));
  const json& flags = j.at("flags");
  s.flags.occluded = required<bool>(flags, "occluded");
  s.flags.motor_fault = required<bool>(flags, "motor_fault");
  return s;
}

void write_episode(std::ostream& out, const Episode& episode, const std::string& config_digest)
{
  ordered_json header = {{"schema_version", kEpisodeSchemaVersion}, {"config", to_json(episode.config)}};
  header["outcome"] = episode.outcome.failed ? std::string(to_string(*episode.outcome.failed)) : "success";
  if (!config_digest.empty()) header["config_digest"] = config_digest;
  out << header.dump() << '\n';
  for (const auto& s : episode.snapshots) out << to_json(s).dump() << '\n';
}

Episode read_episode(std::istream& in)
{
  Episode episode;
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::Schema, "empty episode file");
  try {
    const json header = json::parse(line);
    if (required<int>(header, "schema_version") != kEpisodeSchemaVersion)
      fail(ErrorKind::Schema, "unsupported episode schema_version");
    episode.config = episode_config_from_json(header.at("config"));
    const auto outcome = required<std::string>(header, "outcome");
    if (outcome != "success") {
      const auto action = parse_action(outcome);
      if (!action) fail(ErrorKind::Schema, "unknown outcome " + outcome);
      episode.outcome.failed = action;
    }
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      episode.snapshots.push_back(snapshot_from_json(json::parse(line)));
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::Schema, std::string("malformed episode JSON: ") + e.what());
  }
  if (episode.snapshots.empty()) fail(ErrorKind::Schema, "episode has no snapshots");
  return episode;
}

void save_episode(const std::filesystem::path& path, const Episode& episode, const std::string& config_digest)
{
  auto out = open_output(path);
  write_episode(out, episode, config_digest);
  if (!out) fail(ErrorKind::Io, "write failed: " + path.string());
}

Episode load_episode(const std::filesystem::path& path)
{
  auto in = open_input(path);
  try {
    return read_episode(in);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

}  // namespace fexp
