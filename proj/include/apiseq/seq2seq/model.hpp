#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "apiseq/matrix.hpp"
#include "apiseq/seq2seq/tape.hpp"
#include "apiseq/tokenizer/injection.hpp"

namespace apiseq::seq2seq {

enum class Arch { kTransformer, kRnn };

std::string_view to_string(Arch a);
std::optional<Arch> parse_arch(std::string_view text);

struct ModelConfig {
  Arch arch = Arch::kTransformer;
  int d_model = 128;
  int layers = 2;
  int heads = 4;
  int ff_dim = 512;
  int max_len = 64;
  double dropout = 0.1;
  std::uint64_t seed = 1;
  int rnn_hidden = 256;  // RNN only
};

/// Encoder-decoder over one shared id space (subwords plus injected API
/// tokens). Parameters are stored in creation order, which is also the
/// checkpoint order.
class Seq2SeqModel {
 public:
  ModelConfig config;
  std::uint64_t tokenizer_fingerprint = 0;
  std::uint64_t plan_fingerprint = 0;
  std::uint64_t epoch = 0;

  int vocab_size() const;
  std::vector<Parameter>& params() { return params_; }
  const std::vector<Parameter>& params() const { return params_; }
  Parameter& param(std::string_view name);
  const Parameter& param(std::string_view name) const;
  std::size_t parameter_count() const;

  Parameter& add(std::string name, Matrix value, bool decay = true, int encoder_layer = -1);
  void clear_grads();

 private:
  std::vector<Parameter> params_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

/// Source, target and output embedding tables all start from `embeddings`
/// (rows = vocabulary incl. injected tokens, cols = d_model); other weights
/// are Xavier-uniform under `seed`. Throws ShapeMismatch.
Seq2SeqModel init_model(const ModelConfig& config, const Matrix& embeddings, std::uint64_t seed);

/// As above, additionally requiring one embedding row per id of `plan`
/// (base vocabulary plus injected tokens) and recording both fingerprints.
Seq2SeqModel init_model(const ModelConfig& config, const Matrix& embeddings, const tokenizer::SubwordVocab& vocab,
                        const tokenizer::InjectionPlan& plan, std::uint64_t seed);

/// N(0, 1/d_model) rows for a base vocabulary; a deterministic function of seed.
Matrix base_embeddings(std::size_t vocab_size, int d_model, std::uint64_t seed);

/// Appends one row per plan entry to the three embedding tables (and the
/// output bias), initialised by tokenizer::initial_embedding from the
/// current rows. The model must currently cover exactly the base vocabulary.
void extend_vocabulary(Seq2SeqModel& model, const tokenizer::InjectionPlan& plan);

/// Teacher-forcing batch. Decoder input is BOS + target, decoder output is
/// target + EOS; the encoder reads source + EOS.
struct Example {
  std::vector<int> source;
  std::vector<int> target;
};

/// Truncates to the model's max_len.
Example clip_example(const ModelConfig& config, Example ex);

/// Encoder states for one source (ids already include EOS).
struct Encoded {
  Var states;  // T×width
  Var init;    // RNN decoder start state (1×H); unused for transformers
  int length = 0;
};

Encoded encode(Tape& tape, Seq2SeqModel& model, const std::vector<int>& source_with_eos);

/// Logits (rows = decoder positions) for one decoder input prefix.
Var decode_logits(Tape& tape, Seq2SeqModel& model, const Encoded& enc,
                  const std::vector<int>& decoder_input);

/// Mean label-smoothed cross-entropy over every target position in the batch.
Var batch_loss(Tape& tape, Seq2SeqModel& model, const std::vector<Example>& batch,
               double label_smoothing);

}  // namespace apiseq::seq2seq
