#pragma once

// The command-line workflow. Every command reads and writes under one output
// directory:
//
//   episodes/manifest.json, episodes/<id>.jsonl   simulate
//   dataset.jsonl, folds.jsonl                    annotate
//   model/fold_<k>.json, model/train_log.jsonl    train
//   model/final.json                              train --final
//   report.json, report.txt                       evaluate
//   metrics.json                                  metrics

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "fexp/config.hpp"

namespace fexp {

struct CommandContext {
  RunConfig config;
  std::filesystem::path out = "out";
  int threads = 1;
  std::ostream* log = nullptr;  // progress lines; null = silent
};

void cmd_simulate(const CommandContext& ctx);
void cmd_annotate(const CommandContext& ctx);
void cmd_train(const CommandContext& ctx);
/// Retrains on every example. Epochs default to the mean best epoch recorded
/// by `train`, or the epoch cap when no log exists.
void cmd_train_final(const CommandContext& ctx, std::optional<int> epochs = std::nullopt);
EvaluationReport cmd_evaluate(const CommandContext& ctx);
/// Explanation for tick `t` of a recorded episode.
std::string cmd_explain(const std::filesystem::path& checkpoint, const std::filesystem::path& episode, int t);
StudyMetrics cmd_metrics(const CommandContext& ctx, const std::filesystem::path& responses);

}  // namespace fexp
