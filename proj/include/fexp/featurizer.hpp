#pragma once

// Reduces simulator snapshots to the model's feature set: the objects found
// at the goal place (encoder input) and twelve raw scalars (decoder init).

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fexp/masked_input.hpp"
#include "fexp/sim.hpp"

namespace fexp {

/// Raw feature slots, in decoder-input order.
enum class Raw : std::size_t {
  RelAgentGoal = 0,
  RelObjectOthers = 1,
  RelAgentObject = 2,
  AngularSpeed = 3,
  LinearSpeed = 4,
  TaskStates = 5,  // 6 slots, S_k order
  ObjectPresent = 11,
};
inline constexpr std::size_t kNumRawFeatures = 12;
std::vector<std::string> raw_feature_names();

struct FeatureVector {
  std::vector<std::string> objects_at_goal;  // sorted by name
  std::optional<double> rel_agent_goal;
  std::optional<double> rel_object_others;
  std::optional<double> rel_agent_object;
  double angular_speed = 0.0;
  double linear_speed = 0.0;
  std::array<std::optional<int>, kNumTaskKeys> task_states{};
  bool object_present = false;
  std::string object;
  std::string goal_place;

  /// The twelve raw values; nullopt is the Empty marker.
  std::array<std::optional<double>, kNumRawFeatures> raw() const;
  static FeatureVector from_raw(std::vector<std::string> objects_at_goal,
                                const std::array<std::optional<double>, kNumRawFeatures>& raw,
                                std::string object, std::string goal_place);
  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

std::vector<std::string> objects_at_goal(const Snapshot& snapshot, std::string_view goal_place, double radius);

struct RelativeFeatures {
  std::optional<double> agent_goal;
  std::optional<double> object_others;
  std::optional<double> agent_object;
};

RelativeFeatures relative_features(const Snapshot& snapshot, std::string_view object, std::string_view goal_place,
                                   std::span<const std::string> obj_g);

/// Carries each key's last defined status forward over Undefined ticks.
Episode forward_fill(Episode episode);
void forward_fill(std::span<TaskStates> column);

FeatureVector extract(const Snapshot& snapshot, std::string_view object, std::string_view goal_place,
                      double radius = 1.0);

// ---------------------------------------------------------------------------
// Model-facing encoding

inline constexpr std::string_view kEmptyEntity = "<empty>";

/// Encoder token table: "<empty>" at 0, then the entity catalog.
std::vector<std::string> entity_tokens();
int entity_token(std::string_view name);

/// Per-feature z-scoring fitted over non-Empty values.
struct Standardizer {
  std::array<double, kNumRawFeatures> mean{};
  std::array<double, kNumRawFeatures> scale{};

  Standardizer() { scale.fill(1.0); }
  static Standardizer fit(std::span<const FeatureVector> features);
  /// Encoder tokens are Obj_G (or <empty>) followed by the goal place.
  MaskedInput encode(const FeatureVector& features) const;
  friend bool operator==(const Standardizer&, const Standardizer&) = default;
};

}  // namespace fexp
