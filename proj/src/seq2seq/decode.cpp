#include "apiseq/seq2seq/decode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "apiseq/error.hpp"

namespace apiseq::seq2seq {

namespace {

// The tape only reads parameters unless backward() is called, so decoding
// never mutates the model.
Seq2SeqModel& mutable_model(const Seq2SeqModel& m) { return const_cast<Seq2SeqModel&>(m); }

std::vector<int> clipped_source(const Seq2SeqModel& model, const std::vector<int>& source) {
  std::vector<int> src = source;
  const auto limit = static_cast<std::size_t>(model.config.max_len - 1);
  if (src.size() > limit) src.resize(limit);
  src.push_back(tokenizer::kEos);
  return src;
}

/// Log-softmax of the last logits row for BOS + prefix.
RowVector step_log_probs(Tape& tape, Seq2SeqModel& model, const Encoded& enc, const std::vector<int>& prefix) {
  std::vector<int> input{tokenizer::kBos};
  input.insert(input.end(), prefix.begin(), prefix.end());
  const Matrix& logits = tape.value(decode_logits(tape, model, enc, input));
  RowVector row = logits.row(logits.rows() - 1);
  const double mx = row.maxCoeff();
  const double lse = mx + std::log((row.array() - mx).exp().sum());
  return row.array() - lse;
}

struct Beam {
  std::vector<int> ids;
  double log_prob = 0.0;
};

Hypothesis finish(std::vector<int> ids, double log_prob, bool finished, double penalty) {
  Hypothesis h{std::move(ids), log_prob, finished, 0.0};
  h.score = normalized_score(log_prob, h.ids.size() + (finished ? 1 : 0), penalty);
  return h;
}

Hypothesis greedy(Seq2SeqModel& model, const Encoded& enc, Tape& tape, const DecodeConfig& config) {
  std::vector<int> ids;
  double lp = 0.0;
  for (int step = 0; step < config.max_decode_len; ++step) {
    const RowVector logp = step_log_probs(tape, model, enc, ids);
    Eigen::Index best = 0;
    logp.maxCoeff(&best);  // first maximum, i.e. lowest id
    lp += logp(best);
    if (best == tokenizer::kEos) return finish(std::move(ids), lp, true, config.length_penalty);
    ids.push_back(static_cast<int>(best));
  }
  return finish(std::move(ids), lp, false, config.length_penalty);
}

Hypothesis beam(Seq2SeqModel& model, const Encoded& enc, Tape& tape, const DecodeConfig& config) {
  const auto width = static_cast<std::size_t>(config.width);
  std::vector<Beam> alive{Beam{}};
  std::vector<Hypothesis> done;
  for (int step = 0; step < config.max_decode_len && !alive.empty() && done.size() < width; ++step) {
    std::vector<std::pair<Beam, bool>> cand;
    for (const auto& b : alive) {
      const RowVector logp = step_log_probs(tape, model, enc, b.ids);
      // Only the top `width` tokens of each beam can survive the cut.
      std::vector<int> order(static_cast<std::size_t>(logp.size()));
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
      std::partial_sort(order.begin(), order.begin() + static_cast<long>(std::min(width, order.size())), order.end(),
                        [&](int x, int y) { return logp(x) != logp(y) ? logp(x) > logp(y) : x < y; });
      for (std::size_t j = 0; j < std::min(width, order.size()); ++j) {
        Beam next = b;
        const int tok = order[j];
        next.log_prob += logp(tok);
        const bool eos = tok == tokenizer::kEos;
        if (!eos) next.ids.push_back(tok);
        cand.emplace_back(std::move(next), eos);
      }
    }
    std::stable_sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) {
      if (a.first.log_prob != b.first.log_prob) return a.first.log_prob > b.first.log_prob;
      if (a.first.ids != b.first.ids) return a.first.ids < b.first.ids;
      return a.second > b.second;
    });
    alive.clear();
    for (auto& [b, eos] : cand) {
      if (alive.size() + done.size() >= width) break;
      if (eos) {
        done.push_back(finish(std::move(b.ids), b.log_prob, true, config.length_penalty));
      } else {
        alive.push_back(std::move(b));
      }
    }
  }
  for (auto& b : alive) done.push_back(finish(std::move(b.ids), b.log_prob, false, config.length_penalty));
  done.push_back(greedy(model, enc, tape, config));
  return *std::min_element(done.begin(), done.end(), [](const Hypothesis& a, const Hypothesis& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.ids < b.ids;
  });
}

}  // namespace

double normalized_score(double log_prob, std::size_t length, double length_penalty) {
  if (length == 0) return log_prob;
  return log_prob / std::pow(static_cast<double>(length), length_penalty);
}

RowVector next_token_probs(const Seq2SeqModel& model, const std::vector<int>& source, const std::vector<int>& prefix) {
  Seq2SeqModel& m = mutable_model(model);
  Tape tape(false);
  const Encoded enc = encode(tape, m, clipped_source(model, source));
  return step_log_probs(tape, m, enc, prefix).array().exp();
}

Hypothesis decode_ids(const Seq2SeqModel& model, const std::vector<int>& source, const DecodeConfig& config) {
  if (config.width < 1) throw ShapeMismatch("beam width must be at least 1");
  if (config.max_decode_len <= 0) return Hypothesis{};
  Seq2SeqModel& m = mutable_model(model);
  Tape tape(false);
  const Encoded enc = encode(tape, m, clipped_source(model, source));
  return config.mode == DecodeConfig::Mode::kGreedy ? greedy(m, enc, tape, config) : beam(m, enc, tape, config);
}

javacorpus::ApiSequence generate(const Seq2SeqModel& model, std::string_view query,
                                 const tokenizer::SubwordVocab& vocab, const tokenizer::InjectionPlan& plan,
                                 const DecodeConfig& config, std::vector<std::string>* dropped) {
  const Hypothesis h = decode_ids(model, tokenizer::tokenize(query, vocab, plan), config);
  std::vector<int> ids;
  for (int id : h.ids) {
    if (id >= 0 && static_cast<std::size_t>(id) < plan.extended_size()) ids.push_back(id);
  }
  std::istringstream words(tokenizer::detokenize(ids, vocab, plan));
  javacorpus::ApiSequence out;
  for (std::string w; words >> w;) {
    if (auto call = javacorpus::ApiCall::parse(w)) {
      out.push_back(*call);
    } else if (dropped) {
      dropped->push_back(w);
    }
  }
  return out;
}

}  // namespace apiseq::seq2seq
