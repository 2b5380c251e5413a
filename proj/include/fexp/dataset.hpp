#pragma once

// Target phrases, annotation of traces, vocabulary and grouped folds.

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fexp/featurizer.hpp"
#include "fexp/sim.hpp"

namespace fexp {

enum class ExplanationStyle { None, ActionBased, ContextBased };
std::string_view to_string(ExplanationStyle style);
std::optional<ExplanationStyle> parse_style(std::string_view name);

/// Output classes, in confusion-matrix order.
enum class ExplanationClass : std::uint8_t {
  TooFar,
  CloseTogether,
  NotPresent,
  Occluded,
  Mislocalized,
  Controller,
  Correct,
};
inline constexpr std::size_t kNumClasses = 7;
std::string_view to_string(ExplanationClass cls);
std::optional<ExplanationClass> parse_class(std::string_view name);
ExplanationClass class_of(FailureScenario scenario);  // NoFailure maps to Correct
FailureType failure_type(ExplanationClass cls);

/// Failure explanation for a failing scenario, lowercased.
std::string explanation_text(ExplanationStyle style, FailureScenario scenario);
/// Phrase annotating a plan milestone; only k_move depends on the place.
std::string success_phrase(TaskKey milestone, std::string_view goal_place);
/// Every context-based failure phrase and every success phrase, once each.
std::vector<std::string> canonical_phrases();
/// Exact-match lookup over canonical_phrases().
std::optional<ExplanationClass> class_from_phrase(std::string_view phrase);

struct LabeledExample {
  std::string episode_id;
  int t = 0;
  FeatureVector features;
  std::string target;
  FailureScenario scenario = FailureScenario::NoFailure;
  int group = 0;
  ExplanationClass cls = ExplanationClass::Correct;

  std::string id() const { return episode_id + "@" + std::to_string(t); }
};

struct AnnotateOptions {
  std::string episode_id;
  int group = 0;
  double goal_radius = 1.0;
  bool every_tick = false;  // also label ticks between milestones
};

/// Labels milestone ticks and the failure tick of a forward-filled episode.
std::vector<LabeledExample> annotate(const Episode& episode, ExplanationStyle style, const AnnotateOptions& options);

// ---------------------------------------------------------------------------

class Vocab {
 public:
  static constexpr int kSos = 0;
  static constexpr int kEos = 1;
  static constexpr int kPad = 2;
  static constexpr int kEmpty = 3;

  Vocab() = default;
  /// Reserved tokens followed by `words` in the given order.
  explicit Vocab(std::vector<std::string> words);

  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::string& token(int id) const;
  int id(std::string_view token) const;
  /// Token ids of `phrase` followed by <eos>.
  std::vector<int> encode(std::string_view phrase) const;
  /// Joins tokens up to the first <eos>; reserved tokens are skipped.
  std::string decode(std::span<const int> ids) const;

  friend bool operator==(const Vocab&, const Vocab&) = default;

 private:
  std::vector<std::string> tokens_;
};

std::vector<std::string> tokenize(std::string_view phrase);
Vocab build_vocab(std::span<const LabeledExample> examples);
Vocab build_vocab(std::span<const std::string> phrases);

// ---------------------------------------------------------------------------

struct Fold {
  int test_group = 0;
  int validation_group = 0;
  std::vector<int> training_groups;
};

struct FoldPlan {
  std::vector<Fold> folds;
};

/// Outer loop holds out group i for testing, inner step holds out the next
/// group (round robin) for validation.
FoldPlan make_folds(std::span<const int> example_groups, std::size_t n_outer);
FoldPlan make_folds(std::span<const LabeledExample> examples, std::size_t n_outer);

struct FoldSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};
FoldSplit split(const Fold& fold, std::span<const LabeledExample> examples);

struct FoldAudit {
  std::size_t train_validation_overlap = 0;
  std::size_t train_test_overlap = 0;
  std::size_t validation_test_overlap = 0;
  std::size_t test_coverage_missing = 0;   // examples in no test set
  std::size_t test_coverage_repeated = 0;  // examples in more than one test set
  bool clean() const
  {
    return train_validation_overlap + train_test_overlap + validation_test_overlap + test_coverage_missing +
               test_coverage_repeated ==
           0;
  }
};
/// Checks split hygiene by example id, independently of group bookkeeping.
FoldAudit audit_folds(const FoldPlan& plan, std::span<const LabeledExample> examples);

// ---------------------------------------------------------------------------

inline constexpr int kDatasetSchemaVersion = 1;

void save_dataset(const std::filesystem::path& path, std::span<const LabeledExample> examples,
                  ExplanationStyle style, const std::string& config_digest);
std::vector<LabeledExample> load_dataset(const std::filesystem::path& path);

void save_fold_plan(const std::filesystem::path& path, const FoldPlan& plan, const std::string& config_digest);
FoldPlan load_fold_plan(const std::filesystem::path& path);

}  // namespace fexp
