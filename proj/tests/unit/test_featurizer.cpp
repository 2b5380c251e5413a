#include <algorithm>
#include <cmath>

#include "doctest.h"

#include "fexp/error.hpp"
#include "fexp/featurizer.hpp"

using namespace fexp;

namespace {

Snapshot bare_snapshot()
{
  Snapshot s;
  s.entity_locations["dining table"] = {2.0, 0.0, 0.75};
  s.entity_locations["left kitchen counter"] = {-2.0, 0.0, 0.9};
  return s;
}

EpisodeConfig config_for(FailureScenario s, std::string_view object = "milk")
{
  EpisodeConfig c;
  c.seed = 17;
  c.object = std::string(object);
  c.scenario = s;
  return c;
}

const Snapshot& failure_tick(const Episode& ep)
{
  for (const auto& s : ep.snapshots)
    if (is_failure(s)) return s;
  FAIL("episode has no failure tick");
  return ep.snapshots.back();
}

std::optional<int> key(const FeatureVector& f, TaskKey k) { return f.task_states[static_cast<std::size_t>(k)]; }

}  // namespace

TEST_CASE("relative distances")
{
  auto s = bare_snapshot();
  s.entity_locations["milk"] = {3.0, 4.0, 0.0};
  const std::vector<std::string> none;
  const auto r = relative_features(s, "milk", "dining table", none);
  REQUIRE(r.agent_object);
  CHECK(*r.agent_object == doctest::Approx(5.0));
  CHECK_FALSE(r.object_others);
  REQUIRE(r.agent_goal);
  CHECK(*r.agent_goal == doctest::Approx(std::hypot(2.0, 0.75)));
}

TEST_CASE("object-to-others distance is empty when the object is alone")
{
  auto s = bare_snapshot();
  s.entity_locations["milk"] = {2.1, 0.0, 0.75};
  const auto obj_g = objects_at_goal(s, "dining table", 1.0);
  CHECK(obj_g == std::vector<std::string>{"milk"});
  CHECK_FALSE(relative_features(s, "milk", "dining table", obj_g).object_others);

  s.entity_locations["cup"] = {2.1, 0.3, 0.75};
  s.entity_locations["bowl"] = {2.1, -0.1, 0.75};
  const auto more = objects_at_goal(s, "dining table", 1.0);
  CHECK(more == std::vector<std::string>{"bowl", "cup", "milk"});
  const auto r = relative_features(s, "milk", "dining table", more);
  REQUIRE(r.object_others);
  CHECK(*r.object_others == doctest::Approx(0.1));
}

TEST_CASE("objects at goal exclude places and far entities")
{
  auto s = bare_snapshot();
  CHECK(objects_at_goal(s, "dining table", 1.0).empty());
  s.entity_locations["plate"] = {5.0, 0.0, 0.75};
  CHECK(objects_at_goal(s, "dining table", 1.0).empty());
  CHECK_THROWS_AS(objects_at_goal(s, "sofa", 1.0), Error);
}

TEST_CASE("believed position drives the goal distance")
{
  auto s = bare_snapshot();
  s.kinematics.position = {2.0, 0.0, 0.75};
  s.believed_position = {2.0, 0.6, 0.75};
  const auto r = relative_features(s, "milk", "dining table", {});
  REQUIRE(r.agent_goal);
  CHECK(*r.agent_goal == doctest::Approx(0.6));
}

TEST_CASE("forward fill")
{
  auto column_of = [](std::vector<std::optional<int>> codes) {
    std::vector<TaskStates> col(codes.size());
    for (std::size_t i = 0; i < codes.size(); ++i) col[i][TaskKey::Seg] = status_from_code(codes[i]);
    return col;
  };
  auto codes_of = [](const std::vector<TaskStates>& col) {
    std::vector<std::optional<int>> out;
    for (const auto& s : col) out.push_back(status_code(s[TaskKey::Seg]));
    return out;
  };
  auto col = column_of({std::nullopt, 0, std::nullopt, 1});
  forward_fill(col);
  CHECK(codes_of(col) == std::vector<std::optional<int>>{std::nullopt, 0, 0, 1});

  auto blank = column_of({std::nullopt, std::nullopt, std::nullopt});
  forward_fill(blank);
  CHECK(codes_of(blank) == std::vector<std::optional<int>>(3));
}

TEST_CASE("filled move column only rises from active to completed")
{
  for (auto s : {FailureScenario::NoFailure, FailureScenario::Occluded, FailureScenario::TooFarAway}) {
    const auto ep = forward_fill(run_episode(config_for(s)));
    int last = -2;
    for (const auto& snap : ep.snapshots) {
      const auto code = status_code(snap.task_states[TaskKey::Move]);
      if (!code) continue;
      CHECK(*code >= last);
      last = *code;
    }
  }
}

TEST_CASE("initial snapshot features")
{
  const auto ep = forward_fill(run_episode(config_for(FailureScenario::NoFailure)));
  const auto f = extract(ep.snapshots.front(), "milk", "dining table");
  CHECK(f.angular_speed == 0.0);
  CHECK(f.linear_speed == 0.0);
  for (const auto& k : f.task_states) CHECK_FALSE(k);
}

TEST_CASE("failure tick signatures")
{
  const SimParams p;
  for (auto object : kObjects) {
    CAPTURE(object);
    {
      const auto ep = forward_fill(run_episode(config_for(FailureScenario::Occluded, object)));
      const auto f = extract(failure_tick(ep), object, "dining table");
      CHECK(f.object_present);
      CHECK(key(f, TaskKey::Detect) == -1);
    }
    {
      const auto ep = forward_fill(run_episode(config_for(FailureScenario::NotPresent, object)));
      const auto f = extract(failure_tick(ep), object, "dining table");
      CHECK_FALSE(f.object_present);
      CHECK(std::find(f.objects_at_goal.begin(), f.objects_at_goal.end(), object) == f.objects_at_goal.end());
      CHECK(key(f, TaskKey::Detect) == -1);
    }
    {
      const auto ep = forward_fill(run_episode(config_for(FailureScenario::CloseToOthers, object)));
      const auto f = extract(failure_tick(ep), object, "dining table");
      REQUIRE(f.rel_object_others);
      CHECK(*f.rel_object_others < p.clutter_distance);
    }
    {
      const auto ep = forward_fill(run_episode(config_for(FailureScenario::TooFarAway, object)));
      const auto f = extract(failure_tick(ep), object, "dining table");
      REQUIRE(f.rel_agent_object);
      CHECK(*f.rel_agent_object > p.reach);
    }
    {
      const auto ep = forward_fill(run_episode(config_for(FailureScenario::MisLocalization, object)));
      const auto f = extract(failure_tick(ep), object, "dining table");
      REQUIRE(f.rel_agent_goal);
      CHECK(norm(Vec3{failure_tick(ep).believed_position.x - failure_tick(ep).kinematics.position.x,
                      failure_tick(ep).believed_position.y - failure_tick(ep).kinematics.position.y,
                      failure_tick(ep).believed_position.z - failure_tick(ep).kinematics.position.z}) >=
            p.misloc_distance);
    }
    {
      const auto ep = forward_fill(run_episode(config_for(FailureScenario::Controller, object)));
      const auto f = extract(failure_tick(ep), object, "dining table");
      CHECK(f.linear_speed < 1e-3);
      CHECK(key(f, TaskKey::Move) == -1);
    }
  }
}

TEST_CASE("object present matches goal membership and extract is pure")
{
  for (auto s : kFailingScenarios) {
    const auto ep = forward_fill(run_episode(config_for(s, "cup")));
    for (const auto& snap : ep.snapshots) {
      const auto f = extract(snap, "cup", "dining table");
      const bool member = std::find(f.objects_at_goal.begin(), f.objects_at_goal.end(), "cup") != f.objects_at_goal.end();
      CHECK(f.object_present == member);
      CHECK(f == extract(snap, "cup", "dining table"));
      CHECK(std::is_sorted(f.objects_at_goal.begin(), f.objects_at_goal.end()));
    }
  }
}

TEST_CASE("raw values round trip")
{
  const auto ep = forward_fill(run_episode(config_for(FailureScenario::CloseToOthers, "bottle")));
  const auto f = extract(ep.snapshots.back(), "bottle", "dining table");
  CHECK(FeatureVector::from_raw(f.objects_at_goal, f.raw(), f.object, f.goal_place) == f);
  CHECK(raw_feature_names().size() == kNumRawFeatures);
}

TEST_CASE("standardizer statistics ignore empty values")
{
  std::vector<FeatureVector> fs(4);
  const double speeds[] = {1.0, 2.0, 3.0, 4.0};
  for (int i = 0; i < 4; ++i) {
    fs[i].object = "milk";
    fs[i].linear_speed = speeds[i];
    if (i < 2) fs[i].rel_agent_goal = 10.0 * (i + 1);
  }
  const auto st = Standardizer::fit(fs);
  const auto lin = static_cast<std::size_t>(Raw::LinearSpeed);
  const auto goal = static_cast<std::size_t>(Raw::RelAgentGoal);
  CHECK(st.mean[lin] == doctest::Approx(2.5));
  CHECK(st.scale[lin] == doctest::Approx(std::sqrt(1.25)));
  CHECK(st.mean[goal] == doctest::Approx(15.0));
  CHECK(st.scale[goal] == doctest::Approx(5.0));
}

TEST_CASE("constant features keep their raw value instead of collapsing to the sentinel")
{
  std::vector<FeatureVector> fs(3);
  for (auto& f : fs) {
    f.object = "milk";
    f.task_states[0] = -1;
  }
  const auto st = Standardizer::fit(fs);
  CHECK(st.mean[static_cast<std::size_t>(Raw::TaskStates)] == 0.0);
  CHECK(st.scale[static_cast<std::size_t>(Raw::TaskStates)] == 1.0);
  const auto in = st.encode(fs[0]);
  CHECK(in.values[static_cast<std::size_t>(Raw::TaskStates)] == -1.0);
  CHECK(in.mask[static_cast<std::size_t>(Raw::TaskStates)]);
}

TEST_CASE("encoding tokens, object row and mask")
{
  FeatureVector f;
  f.object = "cup";
  f.goal_place = "dining table";
  const Standardizer st;
  auto in = st.encode(f);
  CHECK(in.entities == std::vector<int>{entity_token(kEmptyEntity), entity_token("dining table")});
  CHECK(in.object == static_cast<int>(object_index("cup")));
  CHECK(in.size() == kNumRawFeatures);
  CHECK(in.mask.size() == kNumRawFeatures);
  CHECK_FALSE(in.mask[static_cast<std::size_t>(Raw::RelAgentGoal)]);
  CHECK(in.values[static_cast<std::size_t>(Raw::RelAgentGoal)] == 0.0);
  CHECK(in.mask[static_cast<std::size_t>(Raw::LinearSpeed)]);

  f.objects_at_goal = {"bowl", "cup"};
  in = st.encode(f);
  CHECK(in.entities == std::vector<int>{entity_token("bowl"), entity_token("cup"), entity_token("dining table")});
  CHECK(entity_token(kEmptyEntity) == 0);
  CHECK_THROWS_AS(entity_token("sofa"), Error);
}

TEST_CASE("masked slots do not depend on the feature behind them")
{
  FeatureVector a;
  a.object = "milk";
  a.goal_place = "dining table";
  Standardizer st;
  st.mean.fill(3.0);
  st.scale.fill(2.0);
  const auto in = st.encode(a);
  for (std::size_t i = 0; i < kNumRawFeatures; ++i)
    if (!in.mask[i]) CHECK(in.values[i] == 0.0);
}
