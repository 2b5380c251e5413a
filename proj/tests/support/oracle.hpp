#pragma once

// Test-only reference implementations. Written straight from the model
// definitions with plain loops and nested vectors; shares no arithmetic code
// with src/neural.

#include <cmath>
#include <random>
#include <vector>

#include "fexp/model.hpp"

namespace oracle {

using Mat = std::vector<std::vector<double>>;
using V = std::vector<double>;

inline Mat to_mat(const fexp::Tensor& t)
{
  Mat m(t.rows(), V(t.cols()));
  for (std::size_t r = 0; r < t.rows(); ++r)
    for (std::size_t c = 0; c < t.cols(); ++c) m[r][c] = t.data()[r * t.cols() + c];
  return m;
}

inline V to_vec(const fexp::Tensor& t) { return V(t.data().begin(), t.data().end()); }

inline V mv(const Mat& m, const V& x)
{
  V y(m.size(), 0.0);
  for (std::size_t r = 0; r < m.size(); ++r)
    for (std::size_t c = 0; c < x.size(); ++c) y[r] += m[r][c] * x[c];
  return y;
}

inline double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline V gru(const V& x, const V& h, const fexp::GruParams& p)
{
  const Mat wz = to_mat(p.w_z), uz = to_mat(p.u_z), wr = to_mat(p.w_r), ur = to_mat(p.u_r), wh = to_mat(p.w_h),
            uh = to_mat(p.u_h);
  const V bz = to_vec(p.b_z), br = to_vec(p.b_r), bh = to_vec(p.b_h);
  const V wzx = mv(wz, x), uzh = mv(uz, h), wrx = mv(wr, x), urh = mv(ur, h);
  const std::size_t n = h.size();
  V z(n), r(n), rh(n);
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = sig(wzx[i] + uzh[i] + bz[i]);
    r[i] = sig(wrx[i] + urh[i] + br[i]);
    rh[i] = r[i] * h[i];
  }
  const V whx = mv(wh, x), uhrh = mv(uh, rh);
  V out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double cand = std::tanh(whx[i] + uhrh[i] + bh[i]);
    out[i] = (1.0 - z[i]) * h[i] + z[i] * cand;
  }
  return out;
}

struct Attn {
  V weights;
  V context;
};

inline Attn attend(const V& s, const std::vector<V>& memory, const fexp::AttentionParams& p)
{
  const Mat wq = to_mat(p.w_query), wk = to_mat(p.w_key);
  const V v = to_vec(p.score);
  const V q = mv(wq, s);
  V e(memory.size());
  for (std::size_t j = 0; j < memory.size(); ++j) {
    const V k = mv(wk, memory[j]);
    double acc = 0.0;
    for (std::size_t a = 0; a < v.size(); ++a) acc += v[a] * std::tanh(q[a] + k[a]);
    e[j] = acc;
  }
  double mx = e[0];
  for (double x : e) mx = std::max(mx, x);
  double z = 0.0;
  for (double x : e) z += std::exp(x - mx);
  Attn out;
  out.context.assign(memory[0].size(), 0.0);
  for (std::size_t j = 0; j < memory.size(); ++j) {
    out.weights.push_back(std::exp(e[j] - mx) / z);
    for (std::size_t c = 0; c < memory[j].size(); ++c) out.context[c] += out.weights[j] * memory[j][c];
  }
  return out;
}

/// Teacher-forced mean cross-entropy, recomputed from scratch.
inline double loss(const fexp::MaskedInput& in, const std::vector<int>& target, const fexp::ModelParams& p)
{
  const auto& d = p.dims;
  const Mat ent = to_mat(p.entity_embed), obj = to_mat(p.object_embed), words = to_mat(p.word_embed);
  std::vector<V> states;
  V h(d.encoder_hidden, 0.0);
  for (int id : in.entities) {
    h = gru(ent[static_cast<std::size_t>(id)], h, p.encoder);
    states.push_back(h);
  }
  V s = h;
  for (std::size_t i = 0; i < in.values.size(); ++i) s.push_back(in.mask[i] ? in.values[i] : 0.0);
  for (double v : obj[static_cast<std::size_t>(in.object)]) s.push_back(v);
  if (d.keys == fexp::AttentionKeys::EncoderAndInitial) states.push_back(mv(to_mat(p.attention.w_memory), s));

  const Mat out_w = to_mat(p.out_w);
  const V out_b = to_vec(p.out_b);
  int prev = 0;
  double total = 0.0;
  int counted = 0;
  for (int y : target) {
    const Attn a = attend(s, states, p.attention);
    V x = words[static_cast<std::size_t>(prev)];
    x.insert(x.end(), a.context.begin(), a.context.end());
    s = gru(x, s, p.decoder);
    V logits = mv(out_w, s);
    for (std::size_t k = 0; k < logits.size(); ++k) logits[k] += out_b[k];
    if (y != 2) {
      double mx = logits[0];
      for (double l : logits) mx = std::max(mx, l);
      double z = 0.0;
      for (double l : logits) z += std::exp(l - mx);
      total += -(logits[static_cast<std::size_t>(y)] - mx - std::log(z));
      ++counted;
    }
    prev = y;
  }
  return total / counted;
}

// ---------------------------------------------------------------------------
// Random small instances

struct Instance {
  fexp::ModelParams params;
  fexp::MaskedInput input;
  std::vector<int> target;
};

inline fexp::ModelDims small_dims(fexp::AttentionKeys keys)
{
  fexp::ModelDims d;
  d.entity_vocab = 5;
  d.n_objects = 3;
  d.vocab = 7;
  d.entity_dim = 4;
  d.encoder_hidden = 3;
  d.n_raw = 2;
  d.object_dim = 1;
  d.word_dim = 3;
  d.attention_dim = 4;
  d.keys = keys;
  return d;
}

inline Instance random_instance(std::mt19937_64& rng, fexp::AttentionKeys keys, double scale = 0.5)
{
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Instance inst;
  inst.params = fexp::ModelParams::initialize(small_dims(keys), rng(), scale);
  for (auto& [name, t] : inst.params.tensors())
    if (fexp::is_bias(name))
      for (double& v : t->data()) v = scale * u(rng);
  const auto& d = inst.params.dims;
  const int n_ent = 1 + static_cast<int>(rng() % 3);
  for (int i = 0; i < n_ent; ++i) inst.input.entities.push_back(static_cast<int>(rng() % d.entity_vocab));
  inst.input.object = static_cast<int>(rng() % d.n_objects);
  for (std::size_t i = 0; i < d.n_raw; ++i) {
    inst.input.mask.push_back(rng() % 4 != 0);
    inst.input.values.push_back(inst.input.mask.back() ? 2.0 * u(rng) : 0.0);
  }
  const int len = 1 + static_cast<int>(rng() % 4);
  for (int i = 0; i < len; ++i) inst.target.push_back(3 + static_cast<int>(rng() % (d.vocab - 3)));
  inst.target.push_back(1);
  return inst;
}

}  // namespace oracle
