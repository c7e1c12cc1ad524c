#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "apiseq/javacorpus/types.hpp"
#include "apiseq/seq2seq/model.hpp"
#include "apiseq/tokenizer/injection.hpp"

namespace apiseq::seq2seq {

struct AdamW {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

struct TrainConfig {
  std::size_t batch_size = 16;
  double learning_rate = 1e-3;
  std::size_t epochs = 10;
  double freeze_fraction = 0.0;
  AdamW optimizer;
  double label_smoothing = 0.1;
  double grad_clip = 1.0;  // global L2 norm; 0 disables
  std::uint64_t seed = 1;
};

struct TrainState {
  /// Index 0 is the loss before any update (dropout off); index e is the
  /// mean batch loss of epoch e.
  std::vector<double> epoch_loss;
  std::size_t steps = 0;
};

/// Marks the lowest floor(fraction * layers) encoder layers frozen, plus the
/// source embedding when fraction == 1. Returns the number of frozen layers.
int apply_freeze(Seq2SeqModel& model, double freeze_fraction);

/// One AdamW update over every non-frozen parameter with a gradient.
void adamw_step(Seq2SeqModel& model, const TrainConfig& config, std::size_t step);

using EpochCallback = std::function<void(std::size_t epoch, double loss)>;

/// Teacher-forcing training over `examples`, shuffled per epoch under the
/// config seed. Throws NonFiniteLoss.
TrainState train(Seq2SeqModel& model, const std::vector<Example>& examples, const TrainConfig& config,
                 const EpochCallback& on_epoch = {});

/// Mean loss over `examples` with dropout off.
double evaluate_loss(Seq2SeqModel& model, const std::vector<Example>& examples, double label_smoothing,
                     std::size_t batch_size = 16);

/// floor(rate * n), at least 1 (0 when n == 0).
std::size_t mask_count(std::size_t n, double rate);

/// Replaces mask_count(|ids|, rate) distinct positions with MASK.
std::vector<int> mask_tokens(const std::vector<int>& ids, double rate, Rng& rng);

struct DenoiseResult {
  TrainState state;
  double token_accuracy = 0.0;  // teacher-forced argmax accuracy on freshly masked inputs
};

/// Trains the model to reconstruct each annotation from a copy with
/// mask_rate of its tokens replaced by MASK (a fresh mask every epoch).
/// Throws EmptyCorpus.
DenoiseResult pretrain_denoise(Seq2SeqModel& model, const std::vector<std::vector<int>>& annotations,
                               const TrainConfig& config, double mask_rate);

/// Teacher-forced argmax accuracy over all target positions (EOS included).
double token_accuracy(Seq2SeqModel& model, const std::vector<Example>& examples);

/// Source = tokenized normalized annotation, target = tokenized API sequence.
std::vector<Example> make_examples(const javacorpus::Corpus& pairs, const tokenizer::SubwordVocab& vocab,
                                   const tokenizer::InjectionPlan& plan);

/// Checks fingerprints, applies the freeze schedule and trains.
/// Throws FingerprintMismatch, NonFiniteLoss.
TrainState fine_tune(Seq2SeqModel& model, const javacorpus::Corpus& pairs,
                     const tokenizer::SubwordVocab& vocab, const tokenizer::InjectionPlan& plan,
                     const TrainConfig& config, const EpochCallback& on_epoch = {});

}  // namespace apiseq::seq2seq
