#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "fexp/error.hpp"
#include "fexp/pipeline.hpp"
#include "fexp/random.hpp"

namespace fexp {

ModelDims ModelSpec::dims(std::size_t vocab) const
{
  ModelDims d;
  d.entity_vocab = entity_tokens().size();
  d.n_objects = kObjects.size();
  d.vocab = vocab;
  d.entity_dim = entity_dim;
  d.encoder_hidden = encoder_hidden;
  d.n_raw = kNumRawFeatures;
  d.object_dim = object_dim;
  d.word_dim = word_dim;
  d.attention_dim = attention_dim;
  d.keys = keys;
  d.validate();
  return d;
}

std::string Checkpoint::explain(const FeatureVector& features) const
{
  return vocab.decode(greedy_decode(standardizer.encode(features), params, max_decode_length));
}

std::string_view to_string(StopReason reason)
{
  switch (reason) {
    case StopReason::Patience: return "patience";
    case StopReason::EpochCap: return "epoch_cap";
    case StopReason::FixedEpochs: return "fixed_epochs";
  }
  return "unknown";
}

nlohmann::ordered_json to_json(const TrainRun& run)
{
  nlohmann::ordered_json j;
  j["fold"] = run.fold;
  j["epochs"] = run.epochs();
  j["best_epoch"] = run.best_epoch;
  j["stop"] = to_string(run.stop);
  j["train_loss"] = run.train_loss;
  j["validation_loss"] = run.validation_loss;
  return j;
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& job)
{
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(threads, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

namespace {

struct Prepared {
  MaskedInput input;
  std::vector<int> target;
};

std::vector<Prepared> prepare(const Checkpoint& model, std::span<const LabeledExample> examples,
                              std::span<const std::size_t> indices)
{
  std::vector<Prepared> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back({model.standardizer.encode(examples[i].features), model.vocab.encode(examples[i].target)});
  return out;
}

double mean_loss(const Checkpoint& model, std::span<const Prepared> data)
{
  double total = 0.0;
  for (const auto& d : data) total += forward_loss(d.input, d.target, model.params).loss;
  return total / static_cast<double>(data.size());
}

Checkpoint fresh_model(std::span<const LabeledExample> examples, std::span<const std::size_t> train,
                       const TrainSetup& setup, std::uint64_t init_seed)
{
  Checkpoint model;
  model.style = setup.style;
  model.vocab = phrase_vocab(setup.style);
  model.dims = setup.model.dims(model.vocab.size());
  model.max_decode_length = setup.model.max_decode_length;
  std::vector<FeatureVector> features;
  features.reserve(train.size());
  for (auto i : train) features.push_back(examples[i].features);
  model.standardizer = Standardizer::fit(features);
  model.params = ModelParams::initialize(model.dims, init_seed, setup.model.init_scale);
  return model;
}

/// One pass over `data` in shuffled mini-batches; returns the mean training loss.
double run_epoch(Checkpoint& model, std::span<const Prepared> data, AdamState& adam, std::mt19937_64& rng,
                 std::size_t batch_size, ModelParams& grad)
{
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  shuffle(order, rng);
  double total = 0.0;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t end = std::min(order.size(), start + batch_size);
    grad.set_zero();
    for (std::size_t k = start; k < end; ++k) {
      const auto& d = data[order[k]];
      const auto pass = forward_loss(d.input, d.target, model.params);
      total += pass.loss;
      backward_into(pass, model.params, grad);
    }
    for (auto& [name, t] : grad.tensors())
      for (double& v : t->data()) v /= static_cast<double>(end - start);
    adam_step(model.params, grad, adam);
  }
  return total / static_cast<double>(data.size());
}

std::uint64_t fold_seed(std::uint64_t seed, int fold, std::uint64_t purpose)
{
  return derive_rng(seed, (static_cast<std::uint64_t>(fold + 1) << 8) | purpose)();
}

}  // namespace

double mean_loss(const Checkpoint& model, std::span<const LabeledExample> examples,
                 std::span<const std::size_t> indices)
{
  if (indices.empty()) fail(ErrorKind::Usage, "mean loss over an empty set");
  const auto data = prepare(model, examples, indices);
  return mean_loss(model, data);
}

TrainRun train_fold(const Fold& fold, int fold_id, std::span<const LabeledExample> examples,
                    const TrainSetup& setup)
{
  const FoldSplit s = split(fold, examples);
  if (s.train.empty()) fail(ErrorKind::Usage, "fold " + std::to_string(fold_id) + " has no training examples");
  if (s.validation.empty())
    fail(ErrorKind::Usage, "fold " + std::to_string(fold_id) + " has no validation examples");
  if (setup.train.batch_size == 0 || setup.train.max_epochs < 1)
    fail(ErrorKind::Config, "batch size and epoch cap must be positive");

  TrainRun run;
  run.fold = fold_id;
  run.model = fresh_model(examples, s.train, setup, fold_seed(setup.seed, fold_id, 1));
  const auto train = prepare(run.model, examples, s.train);
  const auto validation = prepare(run.model, examples, s.validation);

  AdamState adam = AdamState::for_params(run.model.params, setup.train.adam);
  ModelParams grad = ModelParams::zeros(run.model.dims);
  auto rng = derive_rng(fold_seed(setup.seed, fold_id, 2), 0);
  ModelParams best = run.model.params;
  double best_loss = mean_loss(run.model, validation);
  int no_improve = 0;
  const int patience = std::max(setup.train.patience, 1);

  for (int epoch = 1; epoch <= setup.train.max_epochs; ++epoch) {
    run.train_loss.push_back(run_epoch(run.model, train, adam, rng, setup.train.batch_size, grad));
    const double val = mean_loss(run.model, validation);
    run.validation_loss.push_back(val);
    if (!std::isfinite(val)) fail(ErrorKind::Numeric, "validation loss is not finite");
    if (val < best_loss) {
      best_loss = val;
      best = run.model.params;
      run.best_epoch = epoch;
      no_improve = 0;
    } else if (++no_improve >= patience) {
      run.stop = StopReason::Patience;
      break;
    }
  }
  run.model.params = std::move(best);
  return run;
}

TrainRun train_final(std::span<const LabeledExample> examples, const TrainSetup& setup, int epochs)
{
  if (examples.empty()) fail(ErrorKind::Usage, "no training examples");
  if (epochs < 1) fail(ErrorKind::Config, "final training needs at least one epoch");
  std::vector<std::size_t> all(examples.size());
  std::iota(all.begin(), all.end(), 0);

  TrainRun run;
  run.fold = -1;
  run.stop = StopReason::FixedEpochs;
  run.model = fresh_model(examples, all, setup, fold_seed(setup.seed, -1, 1));
  const auto train = prepare(run.model, examples, all);
  AdamState adam = AdamState::for_params(run.model.params, setup.train.adam);
  ModelParams grad = ModelParams::zeros(run.model.dims);
  auto rng = derive_rng(fold_seed(setup.seed, -1, 2), 0);
  for (int epoch = 1; epoch <= epochs; ++epoch)
    run.train_loss.push_back(run_epoch(run.model, train, adam, rng, setup.train.batch_size, grad));
  return run;
}

}  // namespace fexp
