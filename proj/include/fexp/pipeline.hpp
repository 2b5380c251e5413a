#pragma once

// Episode generation, grouped cross-validated training, evaluation reports
// and the user-study ratios.

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "fexp/dataset.hpp"
#include "fexp/model.hpp"

namespace fexp {

// ---------------------------------------------------------------------------
// Episode matrix

enum class Grouping { Replicate, Scenario };
std::string_view to_string(Grouping grouping);
std::optional<Grouping> parse_grouping(std::string_view name);

struct DatasetSpec {
  int episodes_per_scenario = 9;
  int nofailure_episodes = 0;
  std::vector<std::string> objects{kObjects.begin(), kObjects.end()};
  std::string layout = "kitchen";
  ExplanationStyle style = ExplanationStyle::ContextBased;
  Grouping grouping = Grouping::Replicate;
  int groups = 6;
  bool every_tick = false;

  void validate() const;
};

struct EpisodeRecord {
  std::string id;
  int group = 0;
  Episode episode;
};

/// Episode configs only; nothing is simulated.
std::vector<std::pair<std::string, EpisodeConfig>> plan_episodes(std::uint64_t seed, const DatasetSpec& spec,
                                                                  const SimParams& params);
std::vector<EpisodeRecord> generate_episodes(std::uint64_t seed, const DatasetSpec& spec, const SimParams& params);
int group_of(const EpisodeConfig& config, int replicate, const DatasetSpec& spec);
std::vector<LabeledExample> build_examples(std::span<const EpisodeRecord> episodes, const DatasetSpec& spec,
                                           double goal_radius);

// ---------------------------------------------------------------------------
// Phrases and classes

/// Every phrase the model may be asked to produce under `style`.
std::vector<std::string> style_phrases(ExplanationStyle style);
Vocab phrase_vocab(ExplanationStyle style);

/// Exact phrase match; nullopt is the malformed bucket. Action-based failure
/// phrases are shared by sibling scenarios and resolve to the first of them.
std::optional<ExplanationClass> predict_class(std::string_view phrase,
                                              ExplanationStyle style = ExplanationStyle::ContextBased);

// ---------------------------------------------------------------------------
// Models

struct Checkpoint {
  ModelDims dims;
  Vocab vocab;
  ExplanationStyle style = ExplanationStyle::ContextBased;
  Standardizer standardizer;
  ModelParams params;
  std::size_t max_decode_length = 24;

  std::string explain(const FeatureVector& features) const;
  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

inline constexpr int kCheckpointSchemaVersion = 1;

nlohmann::ordered_json to_json(const Checkpoint& checkpoint, const std::string& config_digest);
Checkpoint checkpoint_from_json(const nlohmann::json& j);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint,
                     const std::string& config_digest);
Checkpoint load_checkpoint(const std::filesystem::path& path);

struct ModelSpec {
  std::size_t entity_dim = 20;
  std::size_t encoder_hidden = 20;
  std::size_t object_dim = 17;
  std::size_t word_dim = 16;
  std::size_t attention_dim = 20;
  AttentionKeys keys = AttentionKeys::Encoder;
  double init_scale = 0.08;
  std::size_t max_decode_length = 24;

  ModelDims dims(std::size_t vocab) const;
};

struct TrainConfig {
  AdamConfig adam{.learning_rate = 2e-3};
  std::size_t batch_size = 20;
  int patience = 50;  // epochs without a validation improvement
  int max_epochs = 400;
};

enum class StopReason { Patience, EpochCap, FixedEpochs };
std::string_view to_string(StopReason reason);

struct TrainRun {
  int fold = 0;
  std::vector<double> train_loss;
  std::vector<double> validation_loss;
  int best_epoch = 0;  // 1-based; 0 when no validation set was used
  StopReason stop = StopReason::EpochCap;
  Checkpoint model;

  int epochs() const { return static_cast<int>(train_loss.size()); }
};

nlohmann::ordered_json to_json(const TrainRun& run);

struct TrainSetup {
  ModelSpec model;
  TrainConfig train;
  ExplanationStyle style = ExplanationStyle::ContextBased;
  std::uint64_t seed = 0;
};

/// Mean loss over `indices`, for a fixed model.
double mean_loss(const Checkpoint& model, std::span<const LabeledExample> examples,
                 std::span<const std::size_t> indices);

/// Trains on the fold's training groups and keeps the parameters of the
/// epoch with the lowest validation loss.
TrainRun train_fold(const Fold& fold, int fold_id, std::span<const LabeledExample> examples,
                    const TrainSetup& setup);
/// Trains on every example for a fixed number of epochs.
TrainRun train_final(std::span<const LabeledExample> examples, const TrainSetup& setup, int epochs);

/// Runs `job(i)` for i in [0, n) on up to `threads` workers; results must be written by index.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& job);

// ---------------------------------------------------------------------------
// Evaluation

struct Prediction {
  std::string id;
  int fold = 0;
  std::string target;
  std::string predicted;
  ExplanationClass true_class = ExplanationClass::Correct;
  std::optional<ExplanationClass> predicted_class;  // none = malformed
};

using ConfusionMatrix = std::array<std::array<std::size_t, kNumClasses>, kNumClasses>;

struct ClassMetrics {
  std::optional<double> precision;  // absent when nothing was predicted as the class
  std::optional<double> recall;     // absent when the class has no support
  std::size_t support = 0;
};

struct EvaluationReport {
  ConfusionMatrix matrix{};
  std::array<ClassMetrics, kNumClasses> per_class{};
  std::array<std::size_t, kNumClasses> malformed_by_class{};
  std::size_t malformed_count = 0;
  std::size_t total = 0;
  std::size_t exact_matches = 0;
  double accuracy = 0.0;              // matrix trace / total (malformed count as errors)
  double exact_match_accuracy = 0.0;  // decoded phrase identical to the target
  std::vector<Prediction> predictions;
};

/// Predicts every test example with the model of the fold that held it out.
std::vector<Prediction> predict_folds(const FoldPlan& plan, std::span<const Checkpoint> models,
                                      std::span<const LabeledExample> examples);
EvaluationReport evaluate(std::vector<Prediction> predictions);

struct ConfusionStructure {
  std::size_t failing_examples = 0;
  std::size_t failing_errors = 0;           // failing examples not predicted as their class
  std::size_t typed_errors = 0;             // errors on detection / motion-planning examples
  std::size_t sibling_errors = 0;           // ... predicted as the sibling of the same type
  std::optional<double> sibling_share;      // sibling / typed, absent when no typed errors
};
ConfusionStructure confusion_structure(const EvaluationReport& report);

nlohmann::ordered_json to_json(const EvaluationReport& report, const std::string& config_digest);
std::string render_text(const EvaluationReport& report);

// ---------------------------------------------------------------------------
// Study metrics

struct ResponseRecord {
  std::string participant;
  std::string trial;
  bool action_correct = false;
  bool solution_correct = false;
};

std::vector<ResponseRecord> parse_responses(std::string_view csv);
std::vector<ResponseRecord> load_responses(const std::filesystem::path& path);

struct StudyRatios {
  std::size_t trials = 0;
  std::optional<double> solution;  // Sol%
  std::optional<double> action;    // AId%
};

struct StudyMetrics {
  std::map<std::string, StudyRatios> per_participant;
  StudyRatios pooled;
};

StudyMetrics study_metrics(std::span<const ResponseRecord> records);
nlohmann::ordered_json to_json(const StudyMetrics& metrics, const std::string& config_digest);

}  // namespace fexp
