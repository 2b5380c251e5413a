#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "fexp/dataset.hpp"
#include "fexp/error.hpp"

namespace fexp {

std::vector<LabeledExample> annotate(const Episode& episode, ExplanationStyle style, const AnnotateOptions& options)
{
  if (style == ExplanationStyle::None) fail(ErrorKind::Usage, "the baseline condition is not annotatable");
  const Episode filled = forward_fill(episode);
  const auto& snaps = filled.snapshots;
  const auto& config = filled.config;

  std::vector<LabeledExample> out;
  auto emit = [&](const Snapshot& s, std::string phrase, ExplanationClass cls) {
    LabeledExample ex;
    ex.episode_id = options.episode_id;
    ex.t = s.t;
    ex.features = extract(s, config.object, config.goal_place, options.goal_radius);
    ex.target = std::move(phrase);
    ex.scenario = config.scenario;
    ex.group = options.group;
    ex.cls = cls;
    out.push_back(std::move(ex));
  };

  std::optional<std::string> current;
  for (std::size_t i = 1; i < snaps.size(); ++i) {
    const TaskStates& prev = snaps[i - 1].task_states;
    const TaskStates& cur = snaps[i].task_states;
    if (is_failure(snaps[i])) {
      emit(snaps[i], explanation_text(style, config.scenario), class_of(config.scenario));
      break;
    }
    std::optional<std::string> milestone;
    if (prev[TaskKey::Move] == TaskStatus::Undefined && cur[TaskKey::Move] == TaskStatus::Active)
      milestone = success_phrase(TaskKey::Move, config.goal_place);
    for (TaskKey k : kTaskKeys) {
      if (k == TaskKey::Move) continue;  // navigation is narrated while it happens
      if (cur[k] == TaskStatus::Completed && prev[k] != TaskStatus::Completed)
        milestone = success_phrase(k, config.goal_place);
    }
    if (milestone) {
      current = milestone;
      emit(snaps[i], *milestone, ExplanationClass::Correct);
    } else if (options.every_tick && current) {
      emit(snaps[i], *current, ExplanationClass::Correct);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

Vocab::Vocab(std::vector<std::string> words) : tokens_{"<sos>", "<eos>", "<pad>", "<empty>"}
{
  for (auto& w : words) {
    if (std::find(tokens_.begin(), tokens_.end(), w) != tokens_.end())
      fail(ErrorKind::Usage, "duplicate vocabulary token: " + w);
    tokens_.push_back(std::move(w));
  }
}

const std::string& Vocab::token(int id) const
{
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size())
    fail(ErrorKind::Usage, "token id out of range: " + std::to_string(id));
  return tokens_[static_cast<std::size_t>(id)];
}

int Vocab::id(std::string_view token) const
{
  auto it = std::find(tokens_.begin(), tokens_.end(), token);
  if (it == tokens_.end()) fail(ErrorKind::Usage, "out-of-vocabulary token: " + std::string(token));
  return static_cast<int>(it - tokens_.begin());
}

std::vector<int> Vocab::encode(std::string_view phrase) const
{
  std::vector<int> ids;
  for (const auto& w : tokenize(phrase)) ids.push_back(id(w));
  ids.push_back(kEos);
  return ids;
}

std::string Vocab::decode(std::span<const int> ids) const
{
  std::string out;
  for (int id : ids) {
    if (id == kEos) break;
    if (id == kSos || id == kPad || id == kEmpty) continue;
    if (!out.empty()) out += ' ';
    out += token(id);
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view phrase)
{
  std::vector<std::string> words;
  std::istringstream in{std::string(phrase)};
  for (std::string w; in >> w;) {
    std::transform(w.begin(), w.end(), w.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    words.push_back(std::move(w));
  }
  return words;
}

Vocab build_vocab(std::span<const std::string> phrases)
{
  if (phrases.empty()) fail(ErrorKind::Usage, "cannot build a vocabulary from an empty corpus");
  std::set<std::string> words;
  for (const auto& p : phrases)
    for (auto& w : tokenize(p)) words.insert(std::move(w));
  return Vocab({words.begin(), words.end()});
}

Vocab build_vocab(std::span<const LabeledExample> examples)
{
  std::vector<std::string> phrases;
  phrases.reserve(examples.size());
  for (const auto& ex : examples) phrases.push_back(ex.target);
  return build_vocab(phrases);
}

// ---------------------------------------------------------------------------

FoldPlan make_folds(std::span<const int> example_groups, std::size_t n_outer)
{
  const std::set<int> distinct(example_groups.begin(), example_groups.end());
  const std::vector<int> groups(distinct.begin(), distinct.end());
  if (groups.size() < 3) fail(ErrorKind::Usage, "grouped cross-validation needs at least 3 groups");
  if (n_outer == 0 || n_outer > groups.size())
    fail(ErrorKind::Config, "fold count " + std::to_string(n_outer) + " exceeds the " +
                                std::to_string(groups.size()) + " available groups");
  FoldPlan plan;
  for (std::size_t i = 0; i < n_outer; ++i) {
    Fold fold;
    fold.test_group = groups[i];
    fold.validation_group = groups[(i + 1) % groups.size()];
    for (int g : groups)
      if (g != fold.test_group && g != fold.validation_group) fold.training_groups.push_back(g);
    plan.folds.push_back(std::move(fold));
  }
  return plan;
}

FoldPlan make_folds(std::span<const LabeledExample> examples, std::size_t n_outer)
{
  std::vector<int> groups;
  groups.reserve(examples.size());
  for (const auto& ex : examples) groups.push_back(ex.group);
  return make_folds(groups, n_outer);
}

FoldSplit split(const Fold& fold, std::span<const LabeledExample> examples)
{
  FoldSplit s;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const int g = examples[i].group;
    // each role is tested on its own
    if (g == fold.test_group) s.test.push_back(i);
    if (g == fold.validation_group) s.validation.push_back(i);
    if (std::find(fold.training_groups.begin(), fold.training_groups.end(), g) != fold.training_groups.end())
      s.train.push_back(i);
  }
  return s;
}

FoldAudit audit_folds(const FoldPlan& plan, std::span<const LabeledExample> examples)
{
  FoldAudit audit;
  std::map<std::string, int> test_hits;
  for (const auto& ex : examples) test_hits[ex.id()] = 0;

  auto ids = [&](const std::vector<std::size_t>& idx) {
    std::set<std::string> out;
    for (auto i : idx) out.insert(examples[i].id());
    return out;
  };
  auto overlap = [](const std::set<std::string>& a, const std::set<std::string>& b) {
    std::size_t n = 0;
    for (const auto& x : a) n += b.count(x);
    return n;
  };

  for (const auto& fold : plan.folds) {
    const FoldSplit s = split(fold, examples);
    const auto train = ids(s.train), val = ids(s.validation), test = ids(s.test);
    audit.train_validation_overlap += overlap(train, val);
    audit.train_test_overlap += overlap(train, test);
    audit.validation_test_overlap += overlap(val, test);
    for (const auto& id : test) ++test_hits[id];
  }
  for (const auto& [id, hits] : test_hits) {
    if (hits == 0) ++audit.test_coverage_missing;
    if (hits > 1) ++audit.test_coverage_repeated;
  }
  return audit;
}

}  // namespace fexp
