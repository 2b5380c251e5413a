#include <algorithm>
#include <cmath>
#include <limits>

#include "fexp/error.hpp"
#include "fexp/model.hpp"

namespace fexp {

namespace {

constexpr int kSos = 0;
constexpr int kEos = 1;
constexpr int kPad = 2;

void check_token(int id, std::size_t vocab)
{
  if (id < 0 || static_cast<std::size_t>(id) >= vocab)
    fail(ErrorKind::Usage, "token id out of range: " + std::to_string(id));
}

std::span<const double> row_of(const Tensor& table, int id) { return table.row(static_cast<std::size_t>(id)); }

Vec concat(std::span<const double> a, std::span<const double> b)
{
  Vec out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// GRU

GruStep gru_forward(std::span<const double> x, std::span<const double> h_prev, const GruParams& p)
{
  const std::size_t n = p.hidden_dim();
  if (x.size() != p.input_dim() || h_prev.size() != n) fail(ErrorKind::Usage, "gru_cell: shape mismatch");

  GruStep s;
  s.x.assign(x.begin(), x.end());
  s.h_prev.assign(h_prev.begin(), h_prev.end());

  Vec az(p.b_z.data().begin(), p.b_z.data().end());
  la::matvec_add(p.w_z, x, az);
  la::matvec_add(p.u_z, h_prev, az);
  Vec ar(p.b_r.data().begin(), p.b_r.data().end());
  la::matvec_add(p.w_r, x, ar);
  la::matvec_add(p.u_r, h_prev, ar);

  s.z.resize(n);
  s.r.resize(n);
  s.reset_h.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.z[i] = la::sigmoid(az[i]);
    s.r[i] = la::sigmoid(ar[i]);
    s.reset_h[i] = s.r[i] * h_prev[i];
  }

  Vec ah(p.b_h.data().begin(), p.b_h.data().end());
  la::matvec_add(p.w_h, x, ah);
  la::matvec_add(p.u_h, s.reset_h, ah);

  s.candidate.resize(n);
  s.h.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.candidate[i] = std::tanh(ah[i]);
    s.h[i] = (1.0 - s.z[i]) * h_prev[i] + s.z[i] * s.candidate[i];
  }
  return s;
}

Vec gru_cell(std::span<const double> x, std::span<const double> h_prev, const GruParams& p)
{
  return gru_forward(x, h_prev, p).h;
}

void gru_backward(const GruStep& s, std::span<const double> dh, const GruParams& p, GruParams& g,
                  std::span<double> dx, std::span<double> dh_prev)
{
  const std::size_t n = p.hidden_dim();
  Vec daz(n), dar(n), dah(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double dz = dh[i] * (s.candidate[i] - s.h_prev[i]);
    const double dcand = dh[i] * s.z[i];
    dh_prev[i] += dh[i] * (1.0 - s.z[i]);
    daz[i] = dz * s.z[i] * (1.0 - s.z[i]);
    dah[i] = dcand * (1.0 - s.candidate[i] * s.candidate[i]);
  }

  // candidate path: ah = W_h x + U_h (r * h_prev) + b_h
  la::outer_add(g.w_h, dah, s.x);
  la::outer_add(g.u_h, dah, s.reset_h);
  la::axpy(1.0, dah, g.b_h.data());
  la::matvec_t_add(p.w_h, dah, dx);
  Vec d_reset_h(n, 0.0);
  la::matvec_t_add(p.u_h, dah, d_reset_h);
  for (std::size_t i = 0; i < n; ++i) {
    const double dr = d_reset_h[i] * s.h_prev[i];
    dh_prev[i] += d_reset_h[i] * s.r[i];
    dar[i] = dr * s.r[i] * (1.0 - s.r[i]);
  }

  la::outer_add(g.w_r, dar, s.x);
  la::outer_add(g.u_r, dar, s.h_prev);
  la::axpy(1.0, dar, g.b_r.data());
  la::matvec_t_add(p.w_r, dar, dx);
  la::matvec_t_add(p.u_r, dar, dh_prev);

  la::outer_add(g.w_z, daz, s.x);
  la::outer_add(g.u_z, daz, s.h_prev);
  la::axpy(1.0, daz, g.b_z.data());
  la::matvec_t_add(p.w_z, daz, dx);
  la::matvec_t_add(p.u_z, daz, dh_prev);
}

// ---------------------------------------------------------------------------
// Attention

Vec softmax(std::span<const double> logits)
{
  const double mx = *std::max_element(logits.begin(), logits.end());
  Vec out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) sum += out[i] = std::exp(logits[i] - mx);
  for (double& v : out) v /= sum;
  return out;
}

Vec log_softmax(std::span<const double> logits)
{
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double l : logits) sum += std::exp(l - mx);
  const double lse = mx + std::log(sum);
  Vec out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
  return out;
}

std::size_t argmax(std::span<const double> values)
{
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

AttentionStep attend(std::span<const double> s_prev, const std::vector<Vec>& memory, const AttentionParams& p)
{
  if (memory.empty()) fail(ErrorKind::Usage, "attention over an empty memory");
  const std::size_t a = p.score.size();
  AttentionStep st;
  st.query.assign(a, 0.0);
  la::matvec_add(p.w_query, s_prev, st.query);

  Vec scores(memory.size());
  st.activations.resize(memory.size());
  for (std::size_t j = 0; j < memory.size(); ++j) {
    Vec act = st.query;
    la::matvec_add(p.w_key, memory[j], act);
    for (double& v : act) v = std::tanh(v);
    scores[j] = la::dot(p.score.data(), act);
    st.activations[j] = std::move(act);
  }
  st.weights = softmax(scores);
  st.context.assign(memory.front().size(), 0.0);
  for (std::size_t j = 0; j < memory.size(); ++j) la::axpy(st.weights[j], memory[j], st.context);
  return st;
}

namespace {

void attention_backward(const AttentionStep& st, std::span<const double> s_prev, const std::vector<Vec>& memory,
                        std::span<const double> d_context, const AttentionParams& p, AttentionParams& g,
                        std::span<double> ds_prev, std::vector<Vec>& d_memory)
{
  const std::size_t m = memory.size();
  const std::size_t a = p.score.size();
  Vec d_weight(m);
  double mean = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    d_weight[j] = la::dot(d_context, memory[j]);
    mean += st.weights[j] * d_weight[j];
    la::axpy(st.weights[j], d_context, d_memory[j]);
  }
  Vec d_query(a, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    const double d_score = st.weights[j] * (d_weight[j] - mean);
    if (d_score == 0.0) continue;
    const Vec& act = st.activations[j];
    la::axpy(d_score, act, g.score.data());
    Vec d_act(a);
    for (std::size_t k = 0; k < a; ++k) d_act[k] = d_score * p.score[k] * (1.0 - act[k] * act[k]);
    la::axpy(1.0, d_act, d_query);
    la::outer_add(g.w_key, d_act, memory[j]);
    la::matvec_t_add(p.w_key, d_act, d_memory[j]);
  }
  la::outer_add(g.w_query, d_query, s_prev);
  la::matvec_t_add(p.w_query, d_query, ds_prev);
}

}  // namespace

// ---------------------------------------------------------------------------
// Encoder / decoder

EncoderPass encode(std::span<const int> entities, const ModelParams& p)
{
  if (entities.empty()) fail(ErrorKind::Usage, "encoder input must hold at least one token");
  EncoderPass pass;
  Vec h(p.dims.encoder_hidden, 0.0);
  for (int id : entities) {
    check_token(id, p.dims.entity_vocab);
    pass.steps.push_back(gru_forward(row_of(p.entity_embed, id), h, p.encoder));
    h = pass.steps.back().h;
    pass.states.push_back(h);
  }
  return pass;
}

Vec init_decoder_state(std::span<const double> h_final, std::span<const double> raw, const std::vector<bool>& mask,
                       std::span<const double> object_embedding)
{
  if (raw.size() != mask.size()) fail(ErrorKind::Usage, "raw features and mask differ in length");
  Vec s0(h_final.begin(), h_final.end());
  for (std::size_t i = 0; i < raw.size(); ++i) s0.push_back(mask[i] ? raw[i] : 0.0);
  s0.insert(s0.end(), object_embedding.begin(), object_embedding.end());
  return s0;
}

DecodeStep decode_step(std::span<const double> s_prev, int y_prev, const std::vector<Vec>& memory,
                       const ModelParams& p)
{
  check_token(y_prev, p.dims.vocab);
  if (s_prev.size() != p.dims.decoder_hidden()) fail(ErrorKind::Usage, "decoder state has the wrong size");
  DecodeStep st;
  st.y_prev = y_prev;
  st.s_prev.assign(s_prev.begin(), s_prev.end());
  st.attention = attend(s_prev, memory, p.attention);
  const Vec input = concat(row_of(p.word_embed, y_prev), st.attention.context);
  st.gru = gru_forward(input, s_prev, p.decoder);
  st.logits.assign(p.out_b.data().begin(), p.out_b.data().end());
  la::matvec_add(p.out_w, st.gru.h, st.logits);
  return st;
}

namespace {

struct DecoderStart {
  EncoderPass encoder;
  Vec s0;
  std::vector<Vec> memory;
};

DecoderStart start_decoder(const MaskedInput& input, const ModelParams& p)
{
  if (input.values.size() != p.dims.n_raw) fail(ErrorKind::Usage, "raw feature vector has the wrong size");
  if (input.object < 0 || static_cast<std::size_t>(input.object) >= p.dims.n_objects)
    fail(ErrorKind::Usage, "object id out of range");
  DecoderStart d;
  d.encoder = encode(input.entities, p);
  d.s0 = init_decoder_state(d.encoder.final_state(), input.values, input.mask, row_of(p.object_embed, input.object));
  d.memory = d.encoder.states;
  if (p.dims.keys == AttentionKeys::EncoderAndInitial) {
    Vec m0(p.dims.encoder_hidden, 0.0);
    la::matvec_add(p.attention.w_memory, d.s0, m0);
    d.memory.push_back(std::move(m0));
  }
  return d;
}

}  // namespace

ForwardPass forward_loss(const MaskedInput& input, std::span<const int> target, const ModelParams& p)
{
  if (target.empty() || target.back() != kEos) fail(ErrorKind::Usage, "target must end with <eos>");
  ForwardPass f;
  f.input = input;
  f.target.assign(target.begin(), target.end());
  auto start = start_decoder(input, p);
  f.encoder = std::move(start.encoder);
  f.s0 = std::move(start.s0);
  f.memory = std::move(start.memory);

  std::size_t counted = 0;
  double total = 0.0;
  const Vec* s = &f.s0;
  int y_prev = kSos;
  for (int y : f.target) {
    check_token(y, p.dims.vocab);
    f.steps.push_back(decode_step(*s, y_prev, f.memory, p));
    const DecodeStep& st = f.steps.back();
    require_finite(st.logits, "decoder logits");
    const Vec logp = log_softmax(st.logits);
    Vec prob(logp.size());
    for (std::size_t k = 0; k < logp.size(); ++k) prob[k] = std::exp(logp[k]);
    f.probabilities.push_back(std::move(prob));
    if (y != kPad) {
      total -= logp[static_cast<std::size_t>(y)];
      ++counted;
    }
    s = &st.gru.h;
    y_prev = y;
  }
  f.loss = counted ? total / static_cast<double>(counted) : 0.0;
  if (!std::isfinite(f.loss)) fail(ErrorKind::Numeric, "non-finite loss");
  return f;
}

void backward_into(const ForwardPass& f, const ModelParams& p, ModelParams& g, Vec* d_raw)
{
  const auto& d = p.dims;
  const std::size_t hidden = d.decoder_hidden();
  std::size_t counted = 0;
  for (int y : f.target) counted += y != kPad;
  const double inv = counted ? 1.0 / static_cast<double>(counted) : 0.0;

  std::vector<Vec> d_memory(f.memory.size(), Vec(d.encoder_hidden, 0.0));
  Vec ds_next(hidden, 0.0);
  for (std::size_t i = f.steps.size(); i-- > 0;) {
    const DecodeStep& st = f.steps[i];
    const int y = f.target[i];

    Vec ds = ds_next;
    if (y != kPad) {
      Vec d_logits = f.probabilities[i];
      d_logits[static_cast<std::size_t>(y)] -= 1.0;
      for (double& v : d_logits) v *= inv;
      la::outer_add(g.out_w, d_logits, st.gru.h);
      la::axpy(1.0, d_logits, g.out_b.data());
      la::matvec_t_add(p.out_w, d_logits, ds);
    }

    Vec d_input(d.decoder_input(), 0.0);
    Vec ds_prev(hidden, 0.0);
    gru_backward(st.gru, ds, p.decoder, g.decoder, d_input, ds_prev);

    la::axpy(1.0, std::span<const double>(d_input).first(d.word_dim),
             g.word_embed.row(static_cast<std::size_t>(st.y_prev)));
    attention_backward(st.attention, st.s_prev, f.memory, std::span<const double>(d_input).subspan(d.word_dim),
                       p.attention, g.attention, ds_prev, d_memory);
    ds_next = std::move(ds_prev);
  }

  // ds_next now holds d loss / d s0.
  const std::size_t n_enc = f.encoder.states.size();
  if (d.keys == AttentionKeys::EncoderAndInitial) {
    const Vec& dm0 = d_memory.back();
    la::outer_add(g.attention.w_memory, dm0, f.s0);
    la::matvec_t_add(p.attention.w_memory, dm0, ds_next);
  }
  const std::span<const double> ds0(ds_next);
  if (d_raw) {
    d_raw->assign(d.n_raw, 0.0);
    for (std::size_t k = 0; k < d.n_raw; ++k)
      (*d_raw)[k] = f.input.mask[k] ? ds0[d.encoder_hidden + k] : 0.0;
  }
  la::axpy(1.0, ds0.subspan(d.encoder_hidden + d.n_raw), g.object_embed.row(static_cast<std::size_t>(f.input.object)));

  Vec dh(ds0.begin(), ds0.begin() + static_cast<std::ptrdiff_t>(d.encoder_hidden));
  for (std::size_t j = n_enc; j-- > 0;) {
    la::axpy(1.0, d_memory[j], dh);
    Vec dx(d.entity_dim, 0.0);
    Vec dh_prev(d.encoder_hidden, 0.0);
    gru_backward(f.encoder.steps[j], dh, p.encoder, g.encoder, dx, dh_prev);
    la::axpy(1.0, dx, g.entity_embed.row(static_cast<std::size_t>(f.input.entities[j])));
    dh = std::move(dh_prev);
  }
}

Gradients backward(const ForwardPass& pass, const ModelParams& p)
{
  Gradients g{ModelParams::zeros(p.dims), {}};
  backward_into(pass, p, g.params, &g.raw);
  return g;
}

std::vector<int> greedy_decode(const MaskedInput& input, const ModelParams& p, std::size_t max_len)
{
  const auto start = start_decoder(input, p);
  std::vector<int> out;
  Vec s = start.s0;
  int y = kSos;
  for (std::size_t i = 0; i < max_len; ++i) {
    DecodeStep st = decode_step(s, y, start.memory, p);
    require_finite(st.logits, "decoder logits");
    y = static_cast<int>(argmax(st.logits));
    if (y == kEos) break;
    out.push_back(y);
    s = std::move(st.gru.h);
  }
  return out;
}

}  // namespace fexp
