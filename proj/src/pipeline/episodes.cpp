#include <algorithm>
#include <cstdio>

#include "fexp/error.hpp"
#include "fexp/pipeline.hpp"
#include "fexp/random.hpp"

namespace fexp {

std::string_view to_string(Grouping grouping)
{
  return grouping == Grouping::Replicate ? "replicate" : "scenario";
}

std::optional<Grouping> parse_grouping(std::string_view name)
{
  if (name == "replicate") return Grouping::Replicate;
  if (name == "scenario") return Grouping::Scenario;
  return std::nullopt;
}

void DatasetSpec::validate() const
{
  if (episodes_per_scenario < 0 || nofailure_episodes < 0)
    fail(ErrorKind::Config, "episode counts must be non-negative");
  if (episodes_per_scenario == 0 && nofailure_episodes == 0) fail(ErrorKind::Config, "dataset has no episodes");
  if (objects.empty()) fail(ErrorKind::Config, "dataset.objects is empty");
  for (const auto& o : objects)
    if (!is_object(o)) fail(ErrorKind::Config, "unknown object: " + o);
  const auto layouts = layout_names();
  if (std::find(layouts.begin(), layouts.end(), layout) == layouts.end())
    fail(ErrorKind::Config, "unknown layout: " + layout);
  if (style == ExplanationStyle::None) fail(ErrorKind::Config, "dataset.style must be action or context");
  if (groups < 3) fail(ErrorKind::Config, "dataset.groups must be at least 3");
}

int group_of(const EpisodeConfig& config, int replicate, const DatasetSpec& spec)
{
  if (spec.grouping == Grouping::Scenario) return static_cast<int>(config.scenario);
  return replicate % spec.groups;
}

namespace {

std::string episode_id(FailureScenario scenario, int replicate)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%02d", std::string(to_string(scenario)).c_str(), replicate);
  return buf;
}

}  // namespace

std::vector<std::pair<std::string, EpisodeConfig>> plan_episodes(std::uint64_t seed, const DatasetSpec& spec,
                                                                  const SimParams& params)
{
  spec.validate();
  params.validate();
  std::vector<std::pair<std::string, EpisodeConfig>> out;
  auto add = [&](FailureScenario scenario, int count) {
    for (int i = 0; i < count; ++i) {
      EpisodeConfig c;
      auto rng = derive_rng(seed, (static_cast<std::uint64_t>(scenario) << 32) | static_cast<std::uint32_t>(i));
      c.seed = rng();
      c.object = spec.objects[static_cast<std::size_t>(i) % spec.objects.size()];
      // place alternates with replicate and scenario
      const auto turn = static_cast<std::size_t>(i) + static_cast<std::size_t>(scenario);
      c.goal_place = std::string(kPlaces[turn % kPlaces.size()]);
      c.scenario = scenario;
      c.layout = spec.layout;
      c.params = params;
      out.emplace_back(episode_id(scenario, i), std::move(c));
    }
  };
  for (auto s : kFailingScenarios) add(s, spec.episodes_per_scenario);
  add(FailureScenario::NoFailure, spec.nofailure_episodes);
  return out;
}

std::vector<EpisodeRecord> generate_episodes(std::uint64_t seed, const DatasetSpec& spec, const SimParams& params)
{
  std::vector<EpisodeRecord> out;
  std::map<FailureScenario, int> replicate;
  for (auto& [id, config] : plan_episodes(seed, spec, params)) {
    EpisodeRecord r;
    r.id = id;
    r.group = group_of(config, replicate[config.scenario]++, spec);
    r.episode = run_episode(config);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<LabeledExample> build_examples(std::span<const EpisodeRecord> episodes, const DatasetSpec& spec,
                                           double goal_radius)
{
  std::vector<LabeledExample> out;
  for (const auto& r : episodes) {
    AnnotateOptions options;
    options.episode_id = r.id;
    options.group = r.group;
    options.goal_radius = goal_radius;
    options.every_tick = spec.every_tick;
    auto labeled = annotate(r.episode, spec.style, options);
    std::move(labeled.begin(), labeled.end(), std::back_inserter(out));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<std::string> style_phrases(ExplanationStyle style)
{
  std::vector<std::string> phrases;
  for (auto s : kFailingScenarios) {
    auto p = explanation_text(style, s);
    if (std::find(phrases.begin(), phrases.end(), p) == phrases.end()) phrases.push_back(std::move(p));
  }
  for (auto place : kPlaces) phrases.push_back(success_phrase(TaskKey::Move, place));
  for (auto k : {TaskKey::Seg, TaskKey::Detect, TaskKey::FindGrasp, TaskKey::Grasp, TaskKey::Pick})
    phrases.push_back(success_phrase(k, {}));
  return phrases;
}

Vocab phrase_vocab(ExplanationStyle style)
{
  const auto phrases = style_phrases(style);
  return build_vocab(phrases);
}

std::optional<ExplanationClass> predict_class(std::string_view phrase, ExplanationStyle style)
{
  if (style == ExplanationStyle::ContextBased) return class_from_phrase(phrase);
  for (auto s : kFailingScenarios)
    if (explanation_text(style, s) == phrase) return class_of(s);
  const auto phrases = style_phrases(style);
  if (std::find(phrases.begin(), phrases.end(), phrase) != phrases.end()) return ExplanationClass::Correct;
  return std::nullopt;
}

}  // namespace fexp
