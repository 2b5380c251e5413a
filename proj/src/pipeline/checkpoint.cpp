#include "fexp/error.hpp"
#include "fexp/io.hpp"
#include "fexp/pipeline.hpp"

namespace fexp {

namespace {

using ojson = nlohmann::ordered_json;

std::string_view to_string(AttentionKeys keys)
{
  return keys == AttentionKeys::Encoder ? "encoder" : "encoder_and_initial";
}

AttentionKeys parse_keys(const std::string& name)
{
  if (name == "encoder") return AttentionKeys::Encoder;
  if (name == "encoder_and_initial") return AttentionKeys::EncoderAndInitial;
  fail(ErrorKind::Schema, "unknown attention keys: " + name);
}

ojson dims_json(const ModelDims& d)
{
  ojson j;
  j["entity_vocab"] = d.entity_vocab;
  j["n_objects"] = d.n_objects;
  j["vocab"] = d.vocab;
  j["entity_dim"] = d.entity_dim;
  j["encoder_hidden"] = d.encoder_hidden;
  j["n_raw"] = d.n_raw;
  j["object_dim"] = d.object_dim;
  j["word_dim"] = d.word_dim;
  j["attention_dim"] = d.attention_dim;
  j["decoder_hidden"] = d.decoder_hidden();
  j["attention_keys"] = to_string(d.keys);
  return j;
}

ModelDims dims_from_json(const nlohmann::json& j)
{
  ModelDims d;
  d.entity_vocab = j.at("entity_vocab").get<std::size_t>();
  d.n_objects = j.at("n_objects").get<std::size_t>();
  d.vocab = j.at("vocab").get<std::size_t>();
  d.entity_dim = j.at("entity_dim").get<std::size_t>();
  d.encoder_hidden = j.at("encoder_hidden").get<std::size_t>();
  d.n_raw = j.at("n_raw").get<std::size_t>();
  d.object_dim = j.at("object_dim").get<std::size_t>();
  d.word_dim = j.at("word_dim").get<std::size_t>();
  d.attention_dim = j.at("attention_dim").get<std::size_t>();
  d.keys = parse_keys(j.at("attention_keys").get<std::string>());
  if (j.at("decoder_hidden").get<std::size_t>() != d.decoder_hidden())
    fail(ErrorKind::Schema, "decoder_hidden does not equal encoder_hidden + n_raw + object_dim");
  if (d.n_raw != kNumRawFeatures) fail(ErrorKind::Schema, "checkpoint expects a different raw feature count");
  return d;
}

}  // namespace

ojson to_json(const Checkpoint& c, const std::string& config_digest)
{
  ojson j;
  j["schema_version"] = kCheckpointSchemaVersion;
  j["kind"] = "checkpoint";
  j["config_digest"] = config_digest;
  j["style"] = to_string(c.style);
  j["dims"] = dims_json(c.dims);
  j["max_decode_length"] = c.max_decode_length;
  std::vector<std::string> words(c.vocab.tokens().begin() + 4, c.vocab.tokens().end());
  j["vocab"] = words;
  j["standardizer"] = {{"mean", c.standardizer.mean}, {"scale", c.standardizer.scale}};
  auto& tensors = j["tensors"] = ojson::array();
  for (const auto& [name, t] : c.params.tensors()) {
    ojson e;
    e["name"] = name;
    e["shape"] = t->shape();
    e["data"] = std::vector<double>(t->data().begin(), t->data().end());
    tensors.push_back(std::move(e));
  }
  return j;
}

Checkpoint checkpoint_from_json(const nlohmann::json& j)
{
  try {
    if (j.at("kind") != "checkpoint") fail(ErrorKind::Schema, "not a checkpoint");
    if (j.at("schema_version") != kCheckpointSchemaVersion)
      fail(ErrorKind::Schema, "unsupported checkpoint schema_version " + j.at("schema_version").dump());
    Checkpoint c;
    const auto style = parse_style(j.at("style").get<std::string>());
    if (!style || *style == ExplanationStyle::None) fail(ErrorKind::Schema, "invalid style in checkpoint");
    c.style = *style;
    c.dims = dims_from_json(j.at("dims"));
    c.max_decode_length = j.at("max_decode_length").get<std::size_t>();
    c.vocab = Vocab(j.at("vocab").get<std::vector<std::string>>());
    if (c.vocab.size() != c.dims.vocab) fail(ErrorKind::Schema, "vocabulary size does not match dims.vocab");
    c.standardizer.mean = j.at("standardizer").at("mean").get<std::array<double, kNumRawFeatures>>();
    c.standardizer.scale = j.at("standardizer").at("scale").get<std::array<double, kNumRawFeatures>>();

    c.params = ModelParams::zeros(c.dims);
    auto slots = c.params.tensors();
    const auto& tensors = j.at("tensors");
    if (tensors.size() != slots.size())
      fail(ErrorKind::Schema, "checkpoint holds " + std::to_string(tensors.size()) + " tensors, expected " +
                                  std::to_string(slots.size()));
    for (std::size_t i = 0; i < slots.size(); ++i) {
      const auto& e = tensors[i];
      const auto name = e.at("name").get<std::string>();
      if (name != slots[i].first) fail(ErrorKind::Schema, "unexpected tensor " + name + ", expected " + slots[i].first);
      if (e.at("shape").get<std::vector<std::size_t>>() != slots[i].second->shape())
        fail(ErrorKind::Schema, "shape mismatch for tensor " + name);
      const auto data = e.at("data").get<std::vector<double>>();
      if (data.size() != slots[i].second->size()) fail(ErrorKind::Schema, "data size mismatch for tensor " + name);
      std::copy(data.begin(), data.end(), slots[i].second->data().begin());
      require_finite(slots[i].second->data(), name);
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Schema, std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint, const std::string& config_digest)
{
  write_text(path, to_json(checkpoint, config_digest).dump() + "\n");
}

Checkpoint load_checkpoint(const std::filesystem::path& path)
{
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::Schema, path.string() + ": " + e.what());
  }
  try {
    return checkpoint_from_json(j);
  } catch (const Error& e) {
    fail(e.kind(), path.string() + ": " + e.what());
  }
}

}  // namespace fexp
