#include <algorithm>

#include "fexp/dataset.hpp"
#include "fexp/error.hpp"

namespace fexp {

std::string_view to_string(ExplanationStyle style)
{
  switch (style) {
    case ExplanationStyle::None: return "none";
    case ExplanationStyle::ActionBased: return "action";
    case ExplanationStyle::ContextBased: return "context";
  }
  return "?";
}

std::optional<ExplanationStyle> parse_style(std::string_view name)
{
  for (auto s : {ExplanationStyle::None, ExplanationStyle::ActionBased, ExplanationStyle::ContextBased})
    if (to_string(s) == name) return s;
  return std::nullopt;
}

namespace {
constexpr std::array<ExplanationClass, kNumClasses> kClasses = {
    ExplanationClass::TooFar,       ExplanationClass::CloseTogether, ExplanationClass::NotPresent,
    ExplanationClass::Occluded,     ExplanationClass::Mislocalized,  ExplanationClass::Controller,
    ExplanationClass::Correct};
}  // namespace

std::string_view to_string(ExplanationClass cls)
{
  switch (cls) {
    case ExplanationClass::TooFar: return "too_far";
    case ExplanationClass::CloseTogether: return "close_together";
    case ExplanationClass::NotPresent: return "not_present";
    case ExplanationClass::Occluded: return "occluded";
    case ExplanationClass::Mislocalized: return "mislocalized";
    case ExplanationClass::Controller: return "controller";
    case ExplanationClass::Correct: return "correct";
  }
  return "?";
}

std::optional<ExplanationClass> parse_class(std::string_view name)
{
  for (auto c : kClasses)
    if (to_string(c) == name) return c;
  return std::nullopt;
}

ExplanationClass class_of(FailureScenario scenario)
{
  switch (scenario) {
    case FailureScenario::TooFarAway: return ExplanationClass::TooFar;
    case FailureScenario::CloseToOthers: return ExplanationClass::CloseTogether;
    case FailureScenario::NotPresent: return ExplanationClass::NotPresent;
    case FailureScenario::Occluded: return ExplanationClass::Occluded;
    case FailureScenario::MisLocalization: return ExplanationClass::Mislocalized;
    case FailureScenario::Controller: return ExplanationClass::Controller;
    case FailureScenario::NoFailure: break;
  }
  return ExplanationClass::Correct;
}

FailureType failure_type(ExplanationClass cls)
{
  for (auto s : kFailingScenarios)
    if (class_of(s) == cls) return failure_type(s);
  return FailureType::None;
}

std::string explanation_text(ExplanationStyle style, FailureScenario scenario)
{
  if (style == ExplanationStyle::None) fail(ErrorKind::Usage, "the baseline condition has no explanation text");
  const bool context = style == ExplanationStyle::ContextBased;
  switch (scenario) {
    case FailureScenario::TooFarAway:
      return context ? "could not move its arm to the desired object because the desired object is too far away"
                     : "could not move its arm to the desired object";
    case FailureScenario::CloseToOthers:
      return context ? "could not move its arm to the desired object because the desired object is too close to "
                       "other objects"
                     : "could not move its arm to the desired object";
    case FailureScenario::NotPresent:
      return context ? "could not detect the desired object because the desired object is not present where the "
                       "robot is looking"
                     : "could not detect the desired object";
    case FailureScenario::Occluded:
      return context ? "could not detect the desired object because the desired object is occluded"
                     : "could not detect the object";
    case FailureScenario::MisLocalization:
      return context ? "could not navigate to the desired object because the robot is lost"
                     : "could not navigate to the desired object";
    case FailureScenario::Controller:
      return context ? "could not navigate to the desired object because the robot’s motors are malfunctioning"
                     : "could not navigate to the desired object";
    case FailureScenario::NoFailure: break;
  }
  fail(ErrorKind::Usage, "no failure explanation exists for a successful episode");
}

std::string success_phrase(TaskKey milestone, std::string_view goal_place)
{
  switch (milestone) {
    case TaskKey::Move: return "robot moving to the " + std::string(goal_place);
    case TaskKey::Seg: return "robot has segmented objects in the scene";
    case TaskKey::Detect: return "robot has detected the desired object";
    case TaskKey::FindGrasp: return "robot has found grasps for the desired object";
    case TaskKey::Grasp: return "robot has grasped the desired object";
    case TaskKey::Pick: return "robot has picked and placed the desired object";
  }
  return {};
}

std::vector<std::string> canonical_phrases()
{
  std::vector<std::string> phrases;
  for (auto s : kFailingScenarios) phrases.push_back(explanation_text(ExplanationStyle::ContextBased, s));
  for (auto place : kPlaces) phrases.push_back(success_phrase(TaskKey::Move, place));
  for (auto k : {TaskKey::Seg, TaskKey::Detect, TaskKey::FindGrasp, TaskKey::Grasp, TaskKey::Pick})
    phrases.push_back(success_phrase(k, {}));
  return phrases;
}

std::optional<ExplanationClass> class_from_phrase(std::string_view phrase)
{
  for (auto s : kFailingScenarios)
    if (explanation_text(ExplanationStyle::ContextBased, s) == phrase) return class_of(s);
  const auto phrases = canonical_phrases();
  if (std::find(phrases.begin(), phrases.end(), phrase) != phrases.end()) return ExplanationClass::Correct;
  return std::nullopt;
}

}  // namespace fexp
