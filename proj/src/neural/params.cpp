#include <cmath>

#include "fexp/error.hpp"
#include "fexp/model.hpp"
#include "fexp/random.hpp"

namespace fexp {

void ModelDims::validate() const
{
  if (entity_vocab == 0 || n_objects == 0 || vocab < 5)
    fail(ErrorKind::Config, "model needs non-empty entity, object and word vocabularies");
  if (entity_dim == 0 || encoder_hidden == 0 || object_dim == 0 || word_dim == 0 || attention_dim == 0)
    fail(ErrorKind::Config, "model dimensions must be positive");
}

GruParams GruParams::zeros(std::size_t input, std::size_t hidden)
{
  GruParams p;
  p.w_z = Tensor({hidden, input});
  p.u_z = Tensor({hidden, hidden});
  p.b_z = Tensor({hidden});
  p.w_r = Tensor({hidden, input});
  p.u_r = Tensor({hidden, hidden});
  p.b_r = Tensor({hidden});
  p.w_h = Tensor({hidden, input});
  p.u_h = Tensor({hidden, hidden});
  p.b_h = Tensor({hidden});
  return p;
}

ModelParams ModelParams::zeros(const ModelDims& d)
{
  d.validate();
  ModelParams p;
  p.dims = d;
  p.entity_embed = Tensor({d.entity_vocab, d.entity_dim});
  p.object_embed = Tensor({d.n_objects, d.object_dim});
  p.word_embed = Tensor({d.vocab, d.word_dim});
  p.encoder = GruParams::zeros(d.entity_dim, d.encoder_hidden);
  p.decoder = GruParams::zeros(d.decoder_input(), d.decoder_hidden());
  p.attention.w_query = Tensor({d.attention_dim, d.decoder_hidden()});
  p.attention.w_key = Tensor({d.attention_dim, d.encoder_hidden});
  p.attention.score = Tensor({d.attention_dim});
  if (d.keys == AttentionKeys::EncoderAndInitial)
    p.attention.w_memory = Tensor({d.encoder_hidden, d.decoder_hidden()});
  p.out_w = Tensor({d.vocab, d.decoder_hidden()});
  p.out_b = Tensor({d.vocab});
  return p;
}

bool is_bias(const std::string& name) { return name.ends_with(".b_z") || name.ends_with(".b_r") || name.ends_with(".b_h") || name == "out.b"; }

ModelParams ModelParams::initialize(const ModelDims& dims, std::uint64_t seed, double scale)
{
  ModelParams p = zeros(dims);
  std::mt19937_64 rng = derive_rng(seed, 0x696e6974ULL);
  for (auto& [name, t] : p.tensors()) {
    if (is_bias(name)) continue;
    for (double& v : t->data()) v = uniform(rng, -scale, scale);
  }
  return p;
}

namespace {

template <class Self, class Ptr>
std::vector<std::pair<std::string, Ptr>> collect(Self& self)
{
  std::vector<std::pair<std::string, Ptr>> out;
  auto add = [&](const char* name, auto& t) {
    if (!t.empty()) out.emplace_back(name, &t);
  };
  add("entity_embed", self.entity_embed);
  add("object_embed", self.object_embed);
  add("word_embed", self.word_embed);
  add("encoder.w_z", self.encoder.w_z);
  add("encoder.u_z", self.encoder.u_z);
  add("encoder.b_z", self.encoder.b_z);
  add("encoder.w_r", self.encoder.w_r);
  add("encoder.u_r", self.encoder.u_r);
  add("encoder.b_r", self.encoder.b_r);
  add("encoder.w_h", self.encoder.w_h);
  add("encoder.u_h", self.encoder.u_h);
  add("encoder.b_h", self.encoder.b_h);
  add("decoder.w_z", self.decoder.w_z);
  add("decoder.u_z", self.decoder.u_z);
  add("decoder.b_z", self.decoder.b_z);
  add("decoder.w_r", self.decoder.w_r);
  add("decoder.u_r", self.decoder.u_r);
  add("decoder.b_r", self.decoder.b_r);
  add("decoder.w_h", self.decoder.w_h);
  add("decoder.u_h", self.decoder.u_h);
  add("decoder.b_h", self.decoder.b_h);
  add("attention.w_query", self.attention.w_query);
  add("attention.w_key", self.attention.w_key);
  add("attention.score", self.attention.score);
  add("attention.w_memory", self.attention.w_memory);
  add("out.w", self.out_w);
  add("out.b", self.out_b);
  return out;
}

}  // namespace

std::vector<std::pair<std::string, Tensor*>> ModelParams::tensors() { return collect<ModelParams, Tensor*>(*this); }

std::vector<std::pair<std::string, const Tensor*>> ModelParams::tensors() const
{
  return collect<const ModelParams, const Tensor*>(*this);
}

std::size_t ModelParams::parameter_count() const
{
  std::size_t n = 0;
  for (const auto& [name, t] : tensors()) n += t->size();
  return n;
}

void ModelParams::set_zero()
{
  for (auto& [name, t] : tensors()) t->fill(0.0);
}

void ModelParams::add_scaled(const ModelParams& other, double scale)
{
  auto mine = tensors();
  auto theirs = other.tensors();
  if (mine.size() != theirs.size()) fail(ErrorKind::Usage, "parameter sets differ in structure");
  for (std::size_t i = 0; i < mine.size(); ++i) {
    if (mine[i].second->shape() != theirs[i].second->shape())
      fail(ErrorKind::Usage, "shape mismatch in " + mine[i].first);
    la::axpy(scale, theirs[i].second->data(), mine[i].second->data());
  }
}

// ---------------------------------------------------------------------------

AdamState AdamState::for_params(const ModelParams& p, const AdamConfig& config)
{
  AdamState s;
  s.config = config;
  s.first_moment = ModelParams::zeros(p.dims);
  s.second_moment = ModelParams::zeros(p.dims);
  return s;
}

void adam_step(ModelParams& p, const ModelParams& grad, AdamState& state)
{
  auto params = p.tensors();
  auto grads = grad.tensors();
  auto m = state.first_moment.tensors();
  auto v = state.second_moment.tensors();
  if (params.size() != grads.size() || params.size() != m.size() || params.size() != v.size())
    fail(ErrorKind::Usage, "optimizer state does not match the parameters");

  const auto& c = state.config;
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);

  for (std::size_t i = 0; i < params.size(); ++i) {
    auto pd = params[i].second->data();
    auto gd = grads[i].second->data();
    auto md = m[i].second->data();
    auto vd = v[i].second->data();
    if (pd.size() != gd.size() || pd.size() != md.size() || pd.size() != vd.size())
      fail(ErrorKind::Usage, "shape mismatch in " + params[i].first);
    for (std::size_t k = 0; k < pd.size(); ++k) {
      const double g = gd[k];
      md[k] = c.beta1 * md[k] + (1.0 - c.beta1) * g;
      vd[k] = c.beta2 * vd[k] + (1.0 - c.beta2) * g * g;
      const double m_hat = md[k] / correction1;
      const double v_hat = vd[k] / correction2;
      pd[k] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
    require_finite(pd, params[i].first);
  }
}

}  // namespace fexp
