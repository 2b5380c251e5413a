#include <cmath>
#include <ostream>
#include <sstream>

#include "fexp/commands.hpp"
#include "fexp/episode_io.hpp"
#include "fexp/error.hpp"
#include "fexp/io.hpp"

namespace fexp {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr int kManifestSchemaVersion = 1;

void note(const CommandContext& ctx, const std::string& line)
{
  if (ctx.log) *ctx.log << line << std::endl;
}

json read_json(const fs::path& path)
{
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    fail(ErrorKind::Schema, path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const ordered_json& j) { write_text(path, j.dump(2) + "\n"); }

fs::path fold_checkpoint(const fs::path& out, std::size_t fold)
{
  return out / "model" / ("fold_" + std::to_string(fold) + ".json");
}

struct ManifestEntry {
  std::string id;
  std::string file;
  int group = 0;
};

std::vector<ManifestEntry> read_manifest(const fs::path& path)
{
  const json j = read_json(path);
  try {
    if (j.at("kind") != "episode_manifest") fail(ErrorKind::Schema, path.string() + ": not an episode manifest");
    if (j.at("schema_version") != kManifestSchemaVersion)
      fail(ErrorKind::Schema, path.string() + ": unsupported schema_version");
    std::vector<ManifestEntry> out;
    for (const auto& e : j.at("episodes"))
      out.push_back({e.at("id").get<std::string>(), e.at("file").get<std::string>(), e.at("group").get<int>()});
    return out;
  } catch (const json::exception& e) {
    fail(ErrorKind::Schema, path.string() + ": " + e.what());
  }
}

}  // namespace

void cmd_simulate(const CommandContext& ctx)
{
  const auto& c = ctx.config;
  const std::string digest = c.digest();
  const auto records = generate_episodes(c.seed, c.dataset, c.sim);
  const fs::path dir = ctx.out / "episodes";

  ordered_json manifest;
  manifest["schema_version"] = kManifestSchemaVersion;
  manifest["kind"] = "episode_manifest";
  manifest["config_digest"] = digest;
  manifest["seed"] = c.seed;
  std::map<std::string, int> per_scenario;
  auto& list = manifest["episodes"] = ordered_json::array();
  for (const auto& r : records) {
    const std::string file = r.id + ".jsonl";
    save_episode(dir / file, r.episode, digest);
    const auto& e = r.episode;
    list.push_back({{"id", r.id},
                    {"file", file},
                    {"scenario", to_string(e.config.scenario)},
                    {"object", e.config.object},
                    {"goal_place", e.config.goal_place},
                    {"group", r.group},
                    {"outcome", e.outcome.failed ? std::string(to_string(*e.outcome.failed)) : "success"},
                    {"ticks", e.snapshots.size()}});
    ++per_scenario[std::string(to_string(e.config.scenario))];
  }
  auto& counts = manifest["scenarios"] = ordered_json::object();
  for (auto s : kFailingScenarios)
    if (per_scenario.count(std::string(to_string(s)))) counts[std::string(to_string(s))] = per_scenario[std::string(to_string(s))];
  if (per_scenario.count("no_failure")) counts["no_failure"] = per_scenario["no_failure"];
  write_json(dir / "manifest.json", manifest);
  note(ctx, "simulated " + std::to_string(records.size()) + " episodes into " + dir.string());
}

void cmd_annotate(const CommandContext& ctx)
{
  const auto& c = ctx.config;
  const std::string digest = c.digest();
  const fs::path dir = ctx.out / "episodes";
  std::vector<EpisodeRecord> records;
  for (const auto& m : read_manifest(dir / "manifest.json"))
    records.push_back({m.id, m.group, load_episode(dir / m.file)});
  const auto examples = build_examples(records, c.dataset, c.sim.goal_radius);
  const auto plan = make_folds(examples, c.folds);
  const auto audit = audit_folds(plan, examples);
  if (!audit.clean()) fail(ErrorKind::Usage, "fold audit found overlapping splits");
  save_dataset(ctx.out / "dataset.jsonl", examples, c.dataset.style, digest);
  save_fold_plan(ctx.out / "folds.jsonl", plan, digest);
  note(ctx, "annotated " + std::to_string(examples.size()) + " examples, " + std::to_string(plan.folds.size()) +
                " folds");
}

void cmd_train(const CommandContext& ctx)
{
  const auto& c = ctx.config;
  const std::string digest = c.digest();
  const auto examples = load_dataset(ctx.out / "dataset.jsonl");
  const auto plan = load_fold_plan(ctx.out / "folds.jsonl");
  if (!audit_folds(plan, examples).clean()) fail(ErrorKind::Usage, "fold audit found overlapping splits");
  const TrainSetup setup = c.train_setup();

  std::vector<TrainRun> runs(plan.folds.size());
  parallel_for(plan.folds.size(), ctx.threads, [&](std::size_t f) {
    runs[f] = train_fold(plan.folds[f], static_cast<int>(f), examples, setup);
  });

  std::string log;
  for (std::size_t f = 0; f < runs.size(); ++f) {
    save_checkpoint(fold_checkpoint(ctx.out, f), runs[f].model, digest);
    auto j = to_json(runs[f]);
    j["config_digest"] = digest;
    log += j.dump() + "\n";
    note(ctx, "fold " + std::to_string(f) + ": " + std::to_string(runs[f].epochs()) + " epochs, best " +
                  std::to_string(runs[f].best_epoch) + " (" + std::string(to_string(runs[f].stop)) + ")");
  }
  write_text(ctx.out / "model" / "train_log.jsonl", log);
}

void cmd_train_final(const CommandContext& ctx, std::optional<int> epochs)
{
  const auto& c = ctx.config;
  const auto examples = load_dataset(ctx.out / "dataset.jsonl");
  if (!epochs) {
    const fs::path log_path = ctx.out / "model" / "train_log.jsonl";
    epochs = c.train.max_epochs;
    if (fs::exists(log_path)) {
      double sum = 0.0;
      int n = 0;
      std::istringstream in(read_text(log_path));
      for (std::string line; std::getline(in, line);) {
        if (line.empty()) continue;
        try {
          sum += json::parse(line).at("best_epoch").get<int>();
        } catch (const json::exception& e) {
          fail(ErrorKind::Schema, log_path.string() + ": " + e.what());
        }
        ++n;
      }
      if (n) epochs = std::max(1, static_cast<int>(std::lround(sum / n)));
    }
  }
  const auto run = train_final(examples, c.train_setup(), *epochs);
  save_checkpoint(ctx.out / "model" / "final.json", run.model, c.digest());
  note(ctx, "final model trained for " + std::to_string(*epochs) + " epochs");
}

EvaluationReport cmd_evaluate(const CommandContext& ctx)
{
  const auto& c = ctx.config;
  const std::string digest = c.digest();
  const auto examples = load_dataset(ctx.out / "dataset.jsonl");
  const auto plan = load_fold_plan(ctx.out / "folds.jsonl");
  std::vector<Checkpoint> models;
  for (std::size_t f = 0; f < plan.folds.size(); ++f) {
    const fs::path path = fold_checkpoint(ctx.out, f);
    if (!fs::exists(path)) fail(ErrorKind::Usage, "fold " + std::to_string(f) + " is untrained: missing " + path.string());
    models.push_back(load_checkpoint(path));
  }
  auto report = evaluate(predict_folds(plan, models, examples));
  write_text(ctx.out / "report.json", to_json(report, digest).dump(2) + "\n");
  write_text(ctx.out / "report.txt", render_text(report));
  note(ctx, render_text(report));
  return report;
}

std::string cmd_explain(const fs::path& checkpoint, const fs::path& episode_path, int t)
{
  const Checkpoint model = load_checkpoint(checkpoint);
  const Episode episode = forward_fill(load_episode(episode_path));
  for (const auto& s : episode.snapshots)
    if (s.t == t)
      return model.explain(extract(s, episode.config.object, episode.config.goal_place, episode.config.params.goal_radius));
  fail(ErrorKind::Usage, "episode has no snapshot at t=" + std::to_string(t));
}

StudyMetrics cmd_metrics(const CommandContext& ctx, const fs::path& responses)
{
  const auto records = load_responses(responses);
  auto metrics = study_metrics(records);
  write_json(ctx.out / "metrics.json", to_json(metrics, ctx.config.digest()));
  return metrics;
}

}  // namespace fexp
