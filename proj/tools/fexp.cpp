#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"

#include "fexp/commands.hpp"
#include "fexp/error.hpp"

namespace {

int report_error(std::string_view kind, const std::string& message)
{
  nlohmann::ordered_json j;
  j["error"] = {{"kind", kind}, {"message", message}};
  std::cerr << j.dump() << "\n";
  return kind == "usage" ? 2 : 1;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Failure explanation pipeline: simulate, annotate, train, evaluate, explain"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  int threads = 1;
  app.add_option("--config", config_path, "YAML config file (defaults apply when omitted)");
  app.add_option("--seed", seed, "master seed, overrides the config");
  app.add_option("--out", out, "output directory")->capture_default_str();
  app.add_option("--threads", threads, "worker threads for training folds")->check(CLI::PositiveNumber);

  auto* simulate = app.add_subcommand("simulate", "run the episode matrix and write episode files");
  std::optional<int> per_scenario;
  simulate->add_option("--episodes-per-scenario", per_scenario, "overrides dataset.episodes_per_scenario")
      ->check(CLI::NonNegativeNumber);

  auto* annotate = app.add_subcommand("annotate", "label episodes and write the dataset and folds");

  auto* train = app.add_subcommand("train", "train one model per fold");
  bool final_model = false;
  std::optional<int> epochs;
  train->add_flag("--final", final_model, "train a single model on every example");
  train->add_option("--epochs", epochs, "epochs for --final")->check(CLI::PositiveNumber);

  auto* evaluate = app.add_subcommand("evaluate", "score fold models on their held-out examples");

  auto* explain = app.add_subcommand("explain", "print the explanation for one tick of an episode");
  std::string checkpoint, episode;
  int tick = 0;
  explain->add_option("--checkpoint", checkpoint)->required();
  explain->add_option("--episode", episode)->required();
  explain->add_option("--t", tick, "tick")->required();

  auto* metrics = app.add_subcommand("metrics", "solution and action identification ratios from responses");
  std::string responses;
  metrics->add_option("--responses", responses, "CSV: participant,trial,action_correct,solution_correct")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", e.what());
  }

  try {
    fexp::CommandContext ctx;
    if (!config_path.empty()) ctx.config = fexp::load_config(config_path);
    if (seed) ctx.config.seed = *seed;
    if (per_scenario) ctx.config.dataset.episodes_per_scenario = *per_scenario;
    ctx.config.validate();
    ctx.out = out;
    ctx.threads = threads;
    ctx.log = &std::cerr;

    if (*simulate) fexp::cmd_simulate(ctx);
    else if (*annotate) fexp::cmd_annotate(ctx);
    else if (*train && final_model) fexp::cmd_train_final(ctx, epochs);
    else if (*train) fexp::cmd_train(ctx);
    else if (*evaluate) fexp::cmd_evaluate(ctx);
    else if (*explain) std::cout << fexp::cmd_explain(checkpoint, episode, tick) << "\n";
    else if (*metrics) std::cout << fexp::to_json(fexp::cmd_metrics(ctx, responses), ctx.config.digest()).dump(2) << "\n";
  } catch (const fexp::Error& e) {
    return report_error(fexp::to_string(e.kind()), e.what());
  } catch (const std::exception& e) {
    return report_error("internal", e.what());
  }
  return 0;
}
