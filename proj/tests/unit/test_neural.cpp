#include "doctest.h"

#include <cmath>
#include <random>

#include "fexp/error.hpp"
#include "fexp/model.hpp"
#include "support/gradcheck.hpp"
#include "support/oracle.hpp"

using namespace fexp;

namespace {

ModelDims full_dims(std::size_t vocab = 40)
{
  ModelDims d;
  d.entity_vocab = 12;
  d.n_objects = 5;
  d.vocab = vocab;
  return d;
}

MaskedInput simple_input(const ModelDims& d)
{
  MaskedInput in;
  in.entities = {1, 2};
  in.object = 0;
  in.values.assign(d.n_raw, 0.3);
  in.mask.assign(d.n_raw, true);
  return in;
}

}  // namespace

TEST_CASE("gru_cell with zero parameters halves the previous state")
{
  const GruParams p = GruParams::zeros(3, 4);
  const Vec x = {0.5, -1.0, 2.0};
  const Vec h_prev = {1.0, -2.0, 0.25, 4.0};
  const auto step = gru_forward(x, h_prev, p);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(step.z[i] == 0.5);
    CHECK(step.candidate[i] == 0.0);
    CHECK(step.h[i] == 0.5 * h_prev[i]);
  }
}

TEST_CASE("gru_cell keeps a zero state at zero input with zero biases")
{
  std::mt19937_64 rng(3);
  auto inst = oracle::random_instance(rng, AttentionKeys::Encoder);
  auto p = inst.params.encoder;
  p.b_z.fill(0.0);
  p.b_r.fill(0.0);
  p.b_h.fill(0.0);
  const Vec h = gru_cell(Vec(p.input_dim(), 0.0), Vec(p.hidden_dim(), 0.0), p);
  for (double v : h) CHECK(v == 0.0);
}

TEST_CASE("gru_cell rejects mismatched shapes")
{
  const GruParams p = GruParams::zeros(3, 4);
  CHECK_THROWS_AS(gru_cell(Vec(2, 0.0), Vec(4, 0.0), p), Error);
}

TEST_CASE("gru_cell matches the reference implementation")
{
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    auto inst = oracle::random_instance(rng, AttentionKeys::Encoder);
    const auto& p = inst.params.decoder;
    Vec x(p.input_dim()), h(p.hidden_dim());
    for (double& v : x) v = u(rng);
    for (double& v : h) v = u(rng);
    const Vec got = gru_cell(x, h, p);
    const auto want = oracle::gru(x, h, p);
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::abs(got[i] - want[i]) <= 1e-12);
  }
}

TEST_CASE("encode")
{
  std::mt19937_64 rng(5);
  auto inst = oracle::random_instance(rng, AttentionKeys::Encoder);
  const auto& p = inst.params;

  SUBCASE("length-1 input")
  {
    const std::vector<int> one = {2};
    const auto pass = encode(one, p);
    REQUIRE(pass.states.size() == 1);
    CHECK(pass.final_state() == pass.states[0]);
  }

  SUBCASE("order matters")
  {
    const std::vector<int> ab = {1, 3};
    const std::vector<int> ba = {3, 1};
    CHECK(encode(ab, p).final_state() != encode(ba, p).final_state());
  }

  SUBCASE("zero embedding and zero parameters give a zero state")
  {
    ModelParams z = ModelParams::zeros(p.dims);
    const std::vector<int> empty_token = {0};
    const auto pass = encode(empty_token, z);
    for (double v : pass.final_state()) CHECK(v == 0.0);
  }

  SUBCASE("empty sequence is rejected")
  {
    CHECK_THROWS_AS(encode(std::vector<int>{}, p), Error);
  }
}

TEST_CASE("init_decoder_state concatenates encoder, raw and object blocks")
{
  const ModelDims d = full_dims();
  CHECK(d.decoder_hidden() == 49);

  const Vec s0 = init_decoder_state(Vec(20, 0.0), Vec(12, 0.0), std::vector<bool>(12, true), Vec(17, 0.0));
  CHECK(s0.size() == 49);
  for (double v : s0) CHECK(v == 0.0);

  Vec h(20), raw(12), obj(17);
  for (std::size_t i = 0; i < 20; ++i) h[i] = 1.0 + i;
  for (std::size_t i = 0; i < 12; ++i) raw[i] = 100.0 + i;
  for (std::size_t i = 0; i < 17; ++i) obj[i] = 200.0 + i;
  std::vector<bool> mask(12, true);
  mask[1] = false;
  const Vec a = init_decoder_state(h, raw, mask, obj);
  raw[1] = -123.0;
  const Vec b = init_decoder_state(h, raw, mask, obj);
  CHECK(a == b);
  CHECK(a[0] == 1.0);
  CHECK(a[20] == 100.0);
  CHECK(a[21] == 0.0);
  CHECK(a[32] == 200.0);
}

TEST_CASE("attend")
{
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto inst = oracle::random_instance(rng, AttentionKeys::Encoder);
  const auto& p = inst.params;
  Vec s(p.dims.decoder_hidden());
  for (double& v : s) v = u(rng);

  SUBCASE("single state")
  {
    const std::vector<Vec> memory = {{0.1, -0.2, 0.3}};
    const auto a = attend(s, memory, p.attention);
    CHECK(a.weights == Vec{1.0});
    CHECK(a.context == memory[0]);
  }

  SUBCASE("identical states give uniform weights")
  {
    const std::vector<Vec> memory(4, Vec{0.5, 0.5, -0.5});
    const auto a = attend(s, memory, p.attention);
    for (double w : a.weights) CHECK(w == doctest::Approx(0.25).epsilon(1e-15));
  }

  SUBCASE("weights sum to one and match the reference")
  {
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<Vec> memory(1 + rng() % 5, Vec(3));
      for (auto& m : memory)
        for (double& v : m) v = 2.0 * u(rng);
      const auto a = attend(s, memory, p.attention);
      double sum = 0.0;
      for (double w : a.weights) {
        CHECK(w > 0.0);
        CHECK(w < 1.0 + 1e-15);
        sum += w;
      }
      CHECK(std::abs(sum - 1.0) <= 1e-12);
      const auto want = oracle::attend(s, memory, p.attention);
      for (std::size_t j = 0; j < a.weights.size(); ++j) CHECK(std::abs(a.weights[j] - want.weights[j]) <= 1e-12);
      for (std::size_t c = 0; c < a.context.size(); ++c) CHECK(std::abs(a.context[c] - want.context[c]) <= 1e-12);
    }
  }
}

TEST_CASE("softmax and greedy word choice")
{
  const Vec logits = {0.3, -1.2, 2.5, 0.0, 2.4};
  const Vec p = softmax(logits);
  double sum = 0.0;
  for (double v : p) sum += v;
  CHECK(std::abs(sum - 1.0) <= 1e-12);

  const Vec flat(9, 3.7);
  for (double v : softmax(flat)) CHECK(v == doctest::Approx(1.0 / 9.0).epsilon(1e-14));

  Vec shifted = logits;
  for (double& v : shifted) v += 1e3;
  CHECK(argmax(shifted) == argmax(logits));
  CHECK(argmax(logits) == 2);
}

TEST_CASE("decode_step rejects invalid token ids")
{
  std::mt19937_64 rng(2);
  auto inst = oracle::random_instance(rng, AttentionKeys::Encoder);
  const Vec s(inst.params.dims.decoder_hidden(), 0.0);
  const std::vector<Vec> memory = {Vec(inst.params.dims.encoder_hidden, 0.0)};
  CHECK_THROWS_AS(decode_step(s, 99, memory, inst.params), Error);
  CHECK_THROWS_AS(decode_step(s, -1, memory, inst.params), Error);
}

TEST_CASE("forward_loss")
{
  SUBCASE("uniform logits give ln V per token")
  {
    const ModelDims d = full_dims(37);
    const ModelParams p = ModelParams::zeros(d);
    const auto pass = forward_loss(simple_input(d), std::vector<int>{5, 6, 1}, p);
    CHECK(pass.loss == doctest::Approx(std::log(37.0)).epsilon(1e-14));
  }

  SUBCASE("a dominant target logit drives the loss to zero")
  {
    const ModelDims d = full_dims(10);
    ModelParams p = ModelParams::zeros(d);
    p.out_b[1] = 60.0;  // <eos> always wins
    const auto pass = forward_loss(simple_input(d), std::vector<int>{1}, p);
    CHECK(pass.loss < 1e-20);
  }

  SUBCASE("padding positions are excluded")
  {
    std::mt19937_64 rng(8);
    auto inst = oracle::random_instance(rng, AttentionKeys::Encoder);
    std::vector<int> padded = inst.target;
    padded.insert(padded.end() - 1, 2);
    const double a = forward_loss(inst.input, padded, inst.params).loss;
    CHECK(std::abs(a - oracle::loss(inst.input, padded, inst.params)) <= 1e-10);
  }

  SUBCASE("target must end with <eos>")
  {
    const ModelDims d = full_dims(10);
    CHECK_THROWS_AS(forward_loss(simple_input(d), std::vector<int>{5, 6}, ModelParams::zeros(d)), Error);
  }

  SUBCASE("matches the reference for both attention variants")
  {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 40; ++trial) {
      const auto keys = trial % 2 ? AttentionKeys::EncoderAndInitial : AttentionKeys::Encoder;
      auto inst = oracle::random_instance(rng, keys);
      const double got = forward_loss(inst.input, inst.target, inst.params).loss;
      CHECK(std::abs(got - oracle::loss(inst.input, inst.target, inst.params)) <= 1e-10);
    }
  }
}

TEST_CASE("backward matches central finite differences")
{
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 6; ++trial) {
    const auto keys = trial % 2 ? AttentionKeys::EncoderAndInitial : AttentionKeys::Encoder;
    auto inst = oracle::random_instance(rng, keys);
    const auto r = oracle::gradient_check(inst.input, inst.target, inst.params);
    INFO("worst tensor: " << r.worst_tensor);
    CHECK(r.max_relative_error <= 1e-4);
    CHECK(r.checked == inst.params.parameter_count());
  }
}

TEST_CASE("backward at a zero-loss instance is zero")
{
  const ModelDims d = full_dims(10);
  ModelParams p = ModelParams::initialize(d, 4, 0.08);
  p.out_b[1] = 80.0;
  const auto pass = forward_loss(simple_input(d), std::vector<int>{1}, p);
  const auto g = backward(pass, p);
  for (const auto& [name, t] : g.params.tensors())
    for (double v : t->data()) CHECK(std::abs(v) <= 1e-10);
}

TEST_CASE("masked raw slots are opaque")
{
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    auto inst = oracle::random_instance(rng, trial % 2 ? AttentionKeys::EncoderAndInitial : AttentionKeys::Encoder);
    inst.input.mask[0] = false;
    inst.input.values[0] = 0.0;
    const auto a = forward_loss(inst.input, inst.target, inst.params);
    const auto ga = backward(a, inst.params);
    CHECK(ga.raw[0] == 0.0);

    inst.input.values[0] = 1e6 * (trial + 1);
    const auto b = forward_loss(inst.input, inst.target, inst.params);
    const auto gb = backward(b, inst.params);
    CHECK(a.loss == b.loss);
    for (std::size_t i = 0; i < a.steps.size(); ++i) CHECK(a.steps[i].logits == b.steps[i].logits);
    CHECK(ga.params == gb.params);
    CHECK(gb.raw[0] == 0.0);
  }
}

TEST_CASE("adam_step")
{
  const ModelDims d = full_dims(10);
  ModelParams p = ModelParams::initialize(d, 9, 0.08);

  SUBCASE("first step moves each weight by about lr against its gradient")
  {
    ModelParams g = ModelParams::zeros(d);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto& [name, t] : g.tensors())
      for (double& v : t->data()) v = u(rng);
    AdamState state = AdamState::for_params(p, {});
    ModelParams before = p;
    adam_step(p, g, state);
    CHECK(state.step == 1);
    auto pa = p.tensors();
    auto pb = before.tensors();
    auto gt = g.tensors();
    for (std::size_t i = 0; i < pa.size(); ++i)
      for (std::size_t k = 0; k < pa[i].second->size(); ++k) {
        const double delta = (*pa[i].second)[k] - (*pb[i].second)[k];
        const double g = (*gt[i].second)[k];
        const double expect = -1e-4 * (g > 0 ? 1.0 : -1.0);
        CHECK(std::abs(delta - expect) <= 1e-4 * (1e-8 / std::abs(g)) + 1e-15);
      }
  }

  SUBCASE("zero gradient leaves parameters unchanged")
  {
    AdamState state = AdamState::for_params(p, {});
    const ModelParams before = p;
    adam_step(p, ModelParams::zeros(d), state);
    CHECK(p == before);
  }

  SUBCASE("deterministic")
  {
    ModelParams q = p;
    AdamState sp = AdamState::for_params(p, {});
    AdamState sq = AdamState::for_params(q, {});
    const auto pass = forward_loss(simple_input(d), std::vector<int>{5, 1}, p);
    const auto g = backward(pass, p);
    for (int i = 0; i < 3; ++i) {
      adam_step(p, g.params, sp);
      adam_step(q, g.params, sq);
    }
    CHECK(p == q);
  }
}

TEST_CASE("fifty Adam steps on one example cut the loss by 90 percent of ln V")
{
  const ModelDims d = full_dims(40);
  ModelParams p = ModelParams::initialize(d, 12, 0.08);
  const std::vector<int> target = {7, 12, 9, 30, 4, 1};
  const MaskedInput in = simple_input(d);
  AdamState state = AdamState::for_params(p, {.learning_rate = 1e-2});
  for (int i = 0; i < 50; ++i) {
    const auto pass = forward_loss(in, target, p);
    adam_step(p, backward(pass, p).params, state);
  }
  CHECK(forward_loss(in, target, p).loss <= 0.1 * std::log(40.0));
}

TEST_CASE("greedy_decode")
{
  const ModelDims d = full_dims(12);
  ModelParams p = ModelParams::initialize(d, 21, 0.08);
  const MaskedInput in = simple_input(d);

  SUBCASE("bounded and deterministic")
  {
    for (std::size_t len : {1u, 5u, 24u}) {
      const auto a = greedy_decode(in, p, len);
      CHECK(a.size() <= len);
      CHECK(a == greedy_decode(in, p, len));
    }
  }

  SUBCASE("a memorized example is reproduced exactly")
  {
    const std::vector<int> target = {4, 8, 5, 11, 6, 1};
    AdamState state = AdamState::for_params(p, {.learning_rate = 1e-2});
    for (int i = 0; i < 200; ++i) {
      const auto pass = forward_loss(in, target, p);
      adam_step(p, backward(pass, p).params, state);
    }
    CHECK(greedy_decode(in, p) == std::vector<int>(target.begin(), target.end() - 1));
  }
}
