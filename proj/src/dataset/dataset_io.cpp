#include "json.hpp"

#include "fexp/dataset.hpp"
#include "fexp/error.hpp"
#include "fexp/io.hpp"

namespace fexp {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::vector<std::string> read_lines(const std::filesystem::path& path)
{
  auto in = open_input(path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) lines.push_back(std::move(line));
  if (lines.empty()) fail(ErrorKind::Schema, path.string() + ": empty file");
  return lines;
}

void check_header(const json& header, const std::string& kind, int version, const std::filesystem::path& path)
{
  if (header.value("kind", "") != kind) fail(ErrorKind::Schema, path.string() + ": not a " + kind + " file");
  if (header.value("schema_version", -1) != version)
    fail(ErrorKind::Schema, path.string() + ": unsupported schema_version");
}

}  // namespace

void save_dataset(const std::filesystem::path& path, std::span<const LabeledExample> examples,
                  ExplanationStyle style, const std::string& config_digest)
{
  auto out = open_output(path);
  const ordered_json header = {{"schema_version", kDatasetSchemaVersion},
                               {"kind", "dataset"},
                               {"style", std::string(to_string(style))},
                               {"config_digest", config_digest},
                               {"raw_features", raw_feature_names()}};
  out << header.dump() << '\n';
  for (const auto& ex : examples) {
    ordered_json n = ordered_json::array();
    for (const auto& v : ex.features.raw()) n.push_back(v ? ordered_json(*v) : ordered_json(nullptr));
    const ordered_json line = {{"episode_id", ex.episode_id},
                               {"t", ex.t},
                               {"X", ex.features.objects_at_goal},
                               {"N", n},
                               {"o", ex.features.object},
                               {"goal", ex.features.goal_place},
                               {"label", ex.target},
                               {"class", std::string(to_string(ex.cls))},
                               {"scenario", std::string(to_string(ex.scenario))},
                               {"group", ex.group}};
    out << line.dump() << '\n';
  }
  if (!out) fail(ErrorKind::Io, "write failed: " + path.string());
}

std::vector<LabeledExample> load_dataset(const std::filesystem::path& path)
{
  const auto lines = read_lines(path);
  std::vector<LabeledExample> examples;
  try {
    check_header(json::parse(lines.front()), "dataset", kDatasetSchemaVersion, path);
    for (std::size_t i = 1; i < lines.size(); ++i) {
      const json j = json::parse(lines[i]);
      LabeledExample ex;
      ex.episode_id = j.at("episode_id").get<std::string>();
      ex.t = j.at("t").get<int>();
      const json& n = j.at("N");
      if (!n.is_array() || n.size() != kNumRawFeatures)
        fail(ErrorKind::Schema, "N must hold " + std::to_string(kNumRawFeatures) + " values");
      std::array<std::optional<double>, kNumRawFeatures> raw{};
      for (std::size_t k = 0; k < kNumRawFeatures; ++k)
        if (!n[k].is_null()) raw[k] = n[k].get<double>();
      ex.features = FeatureVector::from_raw(j.at("X").get<std::vector<std::string>>(), raw,
                                            j.at("o").get<std::string>(), j.at("goal").get<std::string>());
      ex.target = j.at("label").get<std::string>();
      const auto cls = parse_class(j.at("class").get<std::string>());
      const auto scenario = parse_scenario(j.at("scenario").get<std::string>());
      if (!cls || !scenario) fail(ErrorKind::Schema, "unknown class or scenario name");
      ex.cls = *cls;
      ex.scenario = *scenario;
      ex.group = j.at("group").get<int>();
      examples.push_back(std::move(ex));
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::Schema, path.string() + ": " + e.what());
  }
  return examples;
}

void save_fold_plan(const std::filesystem::path& path, const FoldPlan& plan, const std::string& config_digest)
{
  auto out = open_output(path);
  out << ordered_json{{"schema_version", kDatasetSchemaVersion}, {"kind", "folds"}, {"config_digest", config_digest}}
             .dump()
      << '\n';
  for (std::size_t i = 0; i < plan.folds.size(); ++i) {
    const auto& f = plan.folds[i];
    out << ordered_json{{"fold", i},
                        {"test_group", f.test_group},
                        {"validation_group", f.validation_group},
                        {"training_groups", f.training_groups}}
               .dump()
        << '\n';
  }
  if (!out) fail(ErrorKind::Io, "write failed: " + path.string());
}

FoldPlan load_fold_plan(const std::filesystem::path& path)
{
  const auto lines = read_lines(path);
  FoldPlan plan;
  try {
    check_header(json::parse(lines.front()), "folds", kDatasetSchemaVersion, path);
    for (std::size_t i = 1; i < lines.size(); ++i) {
      const json j = json::parse(lines[i]);
      plan.folds.push_back({j.at("test_group").get<int>(), j.at("validation_group").get<int>(),
                            j.at("training_groups").get<std::vector<int>>()});
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::Schema, path.string() + ": " + e.what());
  }
  return plan;
}

}  // namespace fexp
