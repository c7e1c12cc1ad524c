#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "apiseq/javacorpus/types.hpp"
#include "apiseq/seq2seq/model.hpp"
#include "apiseq/tokenizer/injection.hpp"

namespace apiseq::seq2seq {

struct DecodeConfig {
  enum class Mode { kGreedy, kBeam };
  Mode mode = Mode::kGreedy;
  int width = 1;  // beam only
  int max_decode_len = 32;
  double length_penalty = 1.0;

  static DecodeConfig greedy(int max_len = 32) { return {Mode::kGreedy, 1, max_len, 1.0}; }
  static DecodeConfig beam(int width, int max_len = 32, double penalty = 1.0) {
    return {Mode::kBeam, width, max_len, penalty};
  }
};

struct Hypothesis {
  std::vector<int> ids;  // generated tokens, EOS excluded
  double log_prob = 0.0;
  bool finished = false;  // ended with EOS
  double score = 0.0;     // log_prob / len^p, len counting the EOS when finished
};

double normalized_score(double log_prob, std::size_t length, double length_penalty);

/// Next-token distribution after `prefix` (BOS is prepended internally).
RowVector next_token_probs(const Seq2SeqModel& model, const std::vector<int>& source, const std::vector<int>& prefix);

/// Autoregressive decode of one source (EOS appended internally). Greedy
/// breaks argmax ties toward the lowest id. Beam search keeps `width`
/// hypotheses by cumulative log-probability and returns the finished or
/// length-capped candidate with the best normalized score; the greedy
/// hypothesis is always among the candidates. Throws ShapeMismatch on width < 1.
Hypothesis decode_ids(const Seq2SeqModel& model, const std::vector<int>& source, const DecodeConfig& config);

/// Tokenizes the query, decodes, detokenizes and parses whitespace-separated
/// ApiCalls. Pieces that do not parse are skipped and, when `dropped` is
/// given, appended to it.
javacorpus::ApiSequence generate(const Seq2SeqModel& model, std::string_view query,
                                 const tokenizer::SubwordVocab& vocab, const tokenizer::InjectionPlan& plan,
                                 const DecodeConfig& config, std::vector<std::string>* dropped = nullptr);

}  // namespace apiseq::seq2seq
