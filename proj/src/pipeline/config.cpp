#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include <cstdio>
#include <set>

#include "fexp/config.hpp"
#include "fexp/error.hpp"
#include "fexp/io.hpp"

namespace fexp {

namespace {

/// A YAML mapping whose keys must all be consumed.
class Section {
 public:
  Section(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path))
  {
    if (node_ && !node_.IsNull() && !node_.IsMap()) fail(ErrorKind::Config, where() + " must be a mapping");
  }

  template <class T>
  void read(const char* key, T& target)
  {
    seen_.insert(key);
    if (!node_ || node_.IsNull()) return;
    const YAML::Node v = node_[key];
    if (!v) return;
    try {
      target = v.as<T>();
    } catch (const YAML::Exception&) {
      fail(ErrorKind::Config, "invalid value for " + name(key));
    }
  }

  Section child(const char* key)
  {
    seen_.insert(key);
    return Section(node_ && !node_.IsNull() ? node_[key] : YAML::Node(), name(key));
  }

  void finish() const
  {
    if (!node_ || node_.IsNull()) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!seen_.count(key)) fail(ErrorKind::Config, "unknown config key: " + name(key.c_str()));
    }
  }

  std::string name(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  std::string where() const { return path_.empty() ? "config" : path_; }

  YAML::Node node_;
  std::string path_;
  std::set<std::string> seen_;
};

AttentionKeys parse_keys(const std::string& name, const std::string& key)
{
  if (name == "encoder") return AttentionKeys::Encoder;
  if (name == "encoder_and_initial") return AttentionKeys::EncoderAndInitial;
  fail(ErrorKind::Config, key + " must be encoder or encoder_and_initial");
}

std::string_view keys_name(AttentionKeys keys)
{
  return keys == AttentionKeys::Encoder ? "encoder" : "encoder_and_initial";
}

}  // namespace

void RunConfig::validate() const
{
  dataset.validate();
  sim.validate();
  if (model.entity_dim == 0 || model.encoder_hidden == 0 || model.object_dim == 0 || model.word_dim == 0 ||
      model.attention_dim == 0)
    fail(ErrorKind::Config, "model dimensions must be positive");
  if (!(model.init_scale > 0.0)) fail(ErrorKind::Config, "model.init_scale must be positive");
  if (model.max_decode_length == 0) fail(ErrorKind::Config, "model.max_decode_length must be positive");
  if (!(train.adam.learning_rate > 0.0)) fail(ErrorKind::Config, "train.learning_rate must be positive");
  if (!(train.adam.beta1 >= 0.0 && train.adam.beta1 < 1.0) || !(train.adam.beta2 >= 0.0 && train.adam.beta2 < 1.0))
    fail(ErrorKind::Config, "train.beta1 and train.beta2 must lie in [0, 1)");
  if (!(train.adam.epsilon > 0.0)) fail(ErrorKind::Config, "train.epsilon must be positive");
  if (train.batch_size == 0) fail(ErrorKind::Config, "train.batch_size must be positive");
  if (train.max_epochs < 1) fail(ErrorKind::Config, "train.max_epochs must be positive");
  if (train.patience < 0) fail(ErrorKind::Config, "train.patience must be non-negative");
  if (folds < 1) fail(ErrorKind::Config, "train.folds must be positive");
  if (dataset.grouping == Grouping::Replicate && folds > static_cast<std::size_t>(dataset.groups))
    fail(ErrorKind::Config, "train.folds exceeds dataset.groups");
}

TrainSetup RunConfig::train_setup() const
{
  TrainSetup s;
  s.model = model;
  s.train = train;
  s.style = dataset.style;
  s.seed = seed;
  return s;
}

nlohmann::ordered_json RunConfig::to_json() const
{
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["dataset"] = {{"episodes_per_scenario", dataset.episodes_per_scenario},
                  {"nofailure_episodes", dataset.nofailure_episodes},
                  {"objects", dataset.objects},
                  {"layout", dataset.layout},
                  {"style", to_string(dataset.style)},
                  {"group_by", to_string(dataset.grouping)},
                  {"groups", dataset.groups},
                  {"every_tick", dataset.every_tick}};
  const auto& d = sim.durations;
  j["sim"] = {{"reach", sim.reach},
              {"clutter_distance", sim.clutter_distance},
              {"misloc_distance", sim.misloc_distance},
              {"goal_radius", sim.goal_radius},
              {"move_speed", sim.move_speed},
              {"durations",
               {{"move", d.move},
                {"segment", d.segment},
                {"detect", d.detect},
                {"findgrasp", d.findgrasp},
                {"grasp", d.grasp},
                {"lift", d.lift},
                {"place", d.place}}}};
  j["model"] = {{"entity_dim", model.entity_dim},
                {"encoder_hidden", model.encoder_hidden},
                {"object_dim", model.object_dim},
                {"decoder_hidden", model.encoder_hidden + kNumRawFeatures + model.object_dim},
                {"word_dim", model.word_dim},
                {"attention_dim", model.attention_dim},
                {"attention_keys", keys_name(model.keys)},
                {"init_scale", model.init_scale},
                {"max_decode_length", model.max_decode_length}};
  j["train"] = {{"learning_rate", train.adam.learning_rate},
                {"beta1", train.adam.beta1},
                {"beta2", train.adam.beta2},
                {"epsilon", train.adam.epsilon},
                {"batch_size", train.batch_size},
                {"patience", train.patience},
                {"max_epochs", train.max_epochs},
                {"folds", folds}};
  return j;
}

std::string sha256_hex(std::string_view data)
{
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    fail(ErrorKind::Usage, "SHA-256 digest failed");
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

std::string RunConfig::digest() const { return sha256_hex(to_json().dump()); }

RunConfig parse_config(std::string_view yaml_text)
{
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    fail(ErrorKind::Config, std::string("config is not valid YAML: ") + e.what());
  }

  RunConfig c;
  Section top(root, "");
  top.read("seed", c.seed);

  auto ds = top.child("dataset");
  ds.read("episodes_per_scenario", c.dataset.episodes_per_scenario);
  ds.read("nofailure_episodes", c.dataset.nofailure_episodes);
  ds.read("objects", c.dataset.objects);
  ds.read("layout", c.dataset.layout);
  std::string style(to_string(c.dataset.style)), group_by(to_string(c.dataset.grouping));
  ds.read("style", style);
  ds.read("group_by", group_by);
  ds.read("groups", c.dataset.groups);
  ds.read("every_tick", c.dataset.every_tick);
  ds.finish();
  const auto parsed_style = parse_style(style);
  if (!parsed_style) fail(ErrorKind::Config, "dataset.style must be action or context");
  c.dataset.style = *parsed_style;
  const auto grouping = parse_grouping(group_by);
  if (!grouping) fail(ErrorKind::Config, "dataset.group_by must be replicate or scenario");
  c.dataset.grouping = *grouping;

  auto sim = top.child("sim");
  sim.read("reach", c.sim.reach);
  sim.read("clutter_distance", c.sim.clutter_distance);
  sim.read("misloc_distance", c.sim.misloc_distance);
  sim.read("goal_radius", c.sim.goal_radius);
  sim.read("move_speed", c.sim.move_speed);
  auto dur = sim.child("durations");
  dur.read("move", c.sim.durations.move);
  dur.read("segment", c.sim.durations.segment);
  dur.read("detect", c.sim.durations.detect);
  dur.read("findgrasp", c.sim.durations.findgrasp);
  dur.read("grasp", c.sim.durations.grasp);
  dur.read("lift", c.sim.durations.lift);
  dur.read("place", c.sim.durations.place);
  dur.finish();
  sim.finish();

  auto model = top.child("model");
  model.read("entity_dim", c.model.entity_dim);
  model.read("encoder_hidden", c.model.encoder_hidden);
  model.read("object_dim", c.model.object_dim);
  std::size_t decoder_hidden = 0;
  model.read("decoder_hidden", decoder_hidden);
  model.read("word_dim", c.model.word_dim);
  model.read("attention_dim", c.model.attention_dim);
  std::string keys(keys_name(c.model.keys));
  model.read("attention_keys", keys);
  c.model.keys = parse_keys(keys, model.name("attention_keys"));
  model.read("init_scale", c.model.init_scale);
  model.read("max_decode_length", c.model.max_decode_length);
  model.finish();
  const std::size_t implied = c.model.encoder_hidden + kNumRawFeatures + c.model.object_dim;
  if (decoder_hidden != 0 && decoder_hidden != implied)
    fail(ErrorKind::Config, "model.decoder_hidden is " + std::to_string(decoder_hidden) +
                                " but encoder_hidden + " + std::to_string(kNumRawFeatures) + " + object_dim = " +
                                std::to_string(implied));

  auto train = top.child("train");
  train.read("learning_rate", c.train.adam.learning_rate);
  train.read("beta1", c.train.adam.beta1);
  train.read("beta2", c.train.adam.beta2);
  train.read("epsilon", c.train.adam.epsilon);
  train.read("batch_size", c.train.batch_size);
  train.read("patience", c.train.patience);
  train.read("max_epochs", c.train.max_epochs);
  train.read("folds", c.folds);
  train.finish();
  top.finish();

  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path)
{
  try {
    return parse_config(read_text(path));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Io) throw;
    fail(e.kind(), path.string() + ": " + e.what());
  }
}

}  // namespace fexp
