#include "apiseq/seq2seq/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "apiseq/error.hpp"
#include "apiseq/random.hpp"

namespace apiseq::seq2seq {

int apply_freeze(Seq2SeqModel& model, double freeze_fraction) {
  const double f = std::clamp(freeze_fraction, 0.0, 1.0);
  const int frozen_layers = static_cast<int>(std::floor(f * model.config.layers + 1e-9));
  for (auto& p : model.params()) {
    p.frozen = (p.encoder_layer >= 0 && p.encoder_layer < frozen_layers) ||
               (p.encoder_embedding && f >= 1.0);
  }
  return frozen_layers;
}

void adamw_step(Seq2SeqModel& model, const TrainConfig& config, std::size_t step) {
  const auto& opt = config.optimizer;
  double scale = 1.0;
  if (config.grad_clip > 0.0) {
    double sq = 0.0;
    for (const auto& p : model.params()) {
      if (!p.frozen && p.grad.size() != 0) sq += p.grad.squaredNorm();
    }
    const double norm = std::sqrt(sq);
    if (norm > config.grad_clip) scale = config.grad_clip / norm;
  }
  const double t = static_cast<double>(step);
  const double c1 = 1.0 - std::pow(opt.beta1, t);
  const double c2 = 1.0 - std::pow(opt.beta2, t);
  const double lr = config.learning_rate;
  for (auto& p : model.params()) {
    if (p.frozen || p.grad.size() == 0) continue;
    if (p.adam_m.size() == 0) {
      p.adam_m = Matrix::Zero(p.value.rows(), p.value.cols());
      p.adam_v = Matrix::Zero(p.value.rows(), p.value.cols());
    }
    if (lr == 0.0) continue;
    const auto g = (p.grad * scale).array();
    p.adam_m.array() = opt.beta1 * p.adam_m.array() + (1.0 - opt.beta1) * g;
    p.adam_v.array() = opt.beta2 * p.adam_v.array() + (1.0 - opt.beta2) * g.square();
    auto update = (p.adam_m.array() / c1) / ((p.adam_v.array() / c2).sqrt() + opt.eps);
    if (p.decay && opt.weight_decay > 0.0) {
      p.value.array() -= lr * (update + opt.weight_decay * p.value.array());
    } else {
      p.value.array() -= lr * update;
    }
  }
}

namespace {

void check_finite(double loss, std::size_t epoch, std::size_t step) {
  if (std::isfinite(loss)) return;
  std::ostringstream msg;
  msg << "loss " << loss << " at epoch " << epoch << ", step " << step
      << "; lower the learning rate or enable gradient clipping";
  throw NonFiniteLoss(msg.str());
}

}  // namespace

double evaluate_loss(Seq2SeqModel& model, const std::vector<Example>& examples, double label_smoothing,
                     std::size_t batch_size) {
  if (examples.empty()) return 0.0;
  batch_size = std::max<std::size_t>(batch_size, 1);
  double total = 0.0;
  std::size_t positions = 0;
  for (std::size_t b = 0; b < examples.size(); b += batch_size) {
    const std::vector<Example> batch(examples.begin() + static_cast<long>(b),
                                     examples.begin() + static_cast<long>(std::min(b + batch_size, examples.size())));
    std::size_t n = 0;
    for (const auto& ex : batch) n += clip_example(model.config, ex).target.size() + 1;
    Tape tape(false);
    total += tape.scalar(batch_loss(tape, model, batch, label_smoothing)) * static_cast<double>(n);
    positions += n;
  }
  return total / static_cast<double>(positions);
}

TrainState train(Seq2SeqModel& model, const std::vector<Example>& examples, const TrainConfig& config,
                 const EpochCallback& on_epoch) {
  if (config.batch_size == 0) throw ShapeMismatch("batch_size must be at least 1");
  TrainState state;
  const double initial = evaluate_loss(model, examples, config.label_smoothing, config.batch_size);
  check_finite(initial, 0, 0);
  state.epoch_loss.push_back(initial);
  if (on_epoch) on_epoch(0, initial);

  Rng rng(derive_seed(config.seed, "train"));
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    double sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t b = 0; b < order.size(); b += config.batch_size) {
      std::vector<Example> batch;
      for (std::size_t i = b; i < std::min(b + config.batch_size, order.size()); ++i) batch.push_back(examples[order[i]]);
      model.clear_grads();
      Tape tape(true, &rng);
      Var loss = batch_loss(tape, model, batch, config.label_smoothing);
      const double value = tape.scalar(loss);
      check_finite(value, epoch, state.steps + 1);
      tape.backward(loss);
      adamw_step(model, config, ++state.steps);
      sum += value;
      ++batches;
    }
    model.clear_grads();
    const double mean = batches ? sum / static_cast<double>(batches) : initial;
    state.epoch_loss.push_back(mean);
    ++model.epoch;
    if (on_epoch) on_epoch(epoch, mean);
  }
  return state;
}

std::size_t mask_count(std::size_t n, double rate) {
  if (n == 0) return 0;
  const auto k = static_cast<std::size_t>(std::floor(rate * static_cast<double>(n) + 1e-9));
  return std::clamp<std::size_t>(k, 1, n);
}

std::vector<int> mask_tokens(const std::vector<int>& ids, double rate, Rng& rng) {
  std::vector<std::size_t> pos(ids.size());
  std::iota(pos.begin(), pos.end(), 0);
  rng.shuffle(pos.begin(), pos.end());
  std::vector<int> out = ids;
  for (std::size_t i = 0; i < mask_count(ids.size(), rate); ++i) out[pos[i]] = tokenizer::kMask;
  return out;
}

double token_accuracy(Seq2SeqModel& model, const std::vector<Example>& examples) {
  std::size_t hit = 0, total = 0;
  for (const auto& raw : examples) {
    const Example ex = clip_example(model.config, raw);
    Tape tape(false);
    std::vector<int> src = ex.source;
    src.push_back(tokenizer::kEos);
    std::vector<int> dec{tokenizer::kBos};
    dec.insert(dec.end(), ex.target.begin(), ex.target.end());
    const Matrix& logits = tape.value(decode_logits(tape, model, encode(tape, model, src), dec));
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
      Eigen::Index best = 0;
      logits.row(i).maxCoeff(&best);
      const int gold = static_cast<std::size_t>(i) < ex.target.size() ? ex.target[static_cast<std::size_t>(i)] : tokenizer::kEos;
      hit += best == gold;
      ++total;
    }
  }
  return total ? static_cast<double>(hit) / static_cast<double>(total) : 0.0;
}

DenoiseResult pretrain_denoise(Seq2SeqModel& model, const std::vector<std::vector<int>>& annotations,
                               const TrainConfig& config, double mask_rate) {
  if (annotations.empty()) throw EmptyCorpus("no annotations to pre-train on");
  if (!(mask_rate > 0.0 && mask_rate < 1.0)) throw ShapeMismatch("mask_rate must lie in (0, 1)");
  DenoiseResult result;
  Rng mask_rng(derive_seed(config.seed, "mask"));
  auto masked = [&] {
    std::vector<Example> out;
    for (const auto& a : annotations) out.push_back({mask_tokens(a, mask_rate, mask_rng), a});
    return out;
  };
  // One epoch at a time so that every epoch sees a fresh mask.
  TrainConfig one = config;
  one.epochs = 1;
  for (std::size_t e = 0; e < config.epochs; ++e) {
    one.seed = derive_seed(config.seed, "denoise-epoch-" + std::to_string(e));
    const auto state = train(model, masked(), one);
    if (e == 0) result.state.epoch_loss.push_back(state.epoch_loss.front());
    result.state.epoch_loss.push_back(state.epoch_loss.back());
    result.state.steps += state.steps;
  }
  if (config.epochs == 0) result.state.epoch_loss.push_back(evaluate_loss(model, masked(), config.label_smoothing));
  result.token_accuracy = token_accuracy(model, masked());
  return result;
}

std::vector<Example> make_examples(const javacorpus::Corpus& pairs, const tokenizer::SubwordVocab& vocab,
                                   const tokenizer::InjectionPlan& plan) {
  std::vector<Example> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    out.push_back({tokenizer::tokenize(p.annotation.normalized(), vocab, plan),
                   tokenizer::tokenize(javacorpus::render(p.sequence), vocab, plan)});
  }
  return out;
}

TrainState fine_tune(Seq2SeqModel& model, const javacorpus::Corpus& pairs, const tokenizer::SubwordVocab& vocab,
                     const tokenizer::InjectionPlan& plan, const TrainConfig& config, const EpochCallback& on_epoch) {
  if (model.tokenizer_fingerprint != vocab.fingerprint() || model.plan_fingerprint != plan.fingerprint()) {
    throw FingerprintMismatch("model was built for a different tokenizer or injection plan");
  }
  if (static_cast<std::size_t>(model.vocab_size()) != plan.extended_size()) {
    throw FingerprintMismatch("model vocabulary " + std::to_string(model.vocab_size()) + " != plan size " +
                              std::to_string(plan.extended_size()));
  }
  apply_freeze(model, config.freeze_fraction);
  return train(model, make_examples(pairs, vocab, plan), config, on_epoch);
}

}  // namespace apiseq::seq2seq
