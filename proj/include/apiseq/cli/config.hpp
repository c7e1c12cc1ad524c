#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "apiseq/baselines/systems.hpp"
#include "apiseq/seq2seq/decode.hpp"
#include "apiseq/seq2seq/model.hpp"
#include "apiseq/seq2seq/train.hpp"

namespace apiseq::cli {

/// The four neural arms, in report order.
inline const std::vector<std::string> kNeuralArms = {"rnn", "transformer-default", "transformer-ta1",
                                                     "transformer-ta2"};
/// All six report rows, in order.
inline const std::vector<std::string> kSystems = {"rnn",          "transformer-default", "transformer-ta1",
                                                  "transformer-ta2", "bm25+miner",       "swim"};

struct ExperimentConfig {
  // [corpus]
  std::string java_root;
  std::uint64_t split_seed = 1;
  std::size_t test_count = 200;
  double valid_fraction = 0.1;
  // [tokenizer]
  std::size_t vocab_size = 1000;
  // [model]
  seq2seq::ModelConfig transformer;  // arch fixed to TRANSFORMER
  int rnn_hidden = 256;
  std::size_t rnn_vocab_cap = 10000;  // APIs kept as atomic tokens on the RNN path
  // [pretrain]
  std::size_t pretrain_epochs = 0;
  double mask_rate = 0.15;
  // [train]
  seq2seq::TrainConfig train;
  std::vector<std::string> arms = kNeuralArms;
  // [decode]
  seq2seq::DecodeConfig decode;
  int report_beam = 3;  // extra beam rows in the report; 0 disables
  // [baselines]
  baselines::MinerParams miner;
  std::size_t em_iterations = 20;
  // [output]
  std::string out_dir = "apiseq-out";

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&);
};

/// Flat `key = value` text with [sections]. Every field is written, so
/// read(write(c)) == c.
std::string write_config(const ExperimentConfig& config);
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig read_config(const std::filesystem::path& path);

/// Applies `section.key=value` overrides through the same parser as the
/// file, so unknown keys and bad values are rejected the same way.
void apply_overrides(ExperimentConfig& config, const std::vector<std::string>& assignments);

/// APISEQ_SEED, when set, replaces the split, model and training seeds.
void apply_seed_override(ExperimentConfig& config);

/// Throws ConfigError describing the first invalid field.
void validate(const ExperimentConfig& config);

bool is_neural_arm(const std::string& arm);

}  // namespace apiseq::cli
