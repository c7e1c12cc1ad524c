#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <cstring>
#include <fstream>
#include <unistd.h>
#include <limits>

#include "apiseq/error.hpp"
#include "apiseq/javacorpus/corpus.hpp"
#include "apiseq/javacorpus/synthetic.hpp"
#include "apiseq/seq2seq/checkpoint.hpp"
#include "apiseq/seq2seq/decode.hpp"
#include "apiseq/seq2seq/gradcheck.hpp"
#include "apiseq/seq2seq/train.hpp"
#include "apiseq/tokenizer/bpe.hpp"

namespace apiseq::seq2seq {
namespace {

namespace fs = std::filesystem;
const fs::path kFixtures = APISEQ_FIXTURE_DIR;

Matrix random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c, double sd = 1.0) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal(0.0, sd);
  return m;
}

Parameter make_param(Rng& rng, const std::string& name, Eigen::Index r, Eigen::Index c, double sd = 1.0) {
  Parameter p;
  p.name = name;
  p.value = random_matrix(rng, r, c, sd);
  return p;
}

/// Projects an op output onto fixed random weights so every entry matters.
Var project(Tape& t, Var y, std::uint64_t seed = 99) {
  Rng rng(seed);
  const Matrix& v = t.value(y);
  return t.sum(t.mul(y, t.constant(random_matrix(rng, v.rows(), v.cols()))));
}

double check_op(const std::function<Var(Tape&)>& f, std::vector<Parameter*> params) {
  const auto r = grad_check([&](Tape& t) { return project(t, f(t)); }, params, 1e-5, 300, 3);
  return r.max_relative_error;
}

ModelConfig toy_config(Arch arch) {
  ModelConfig c;
  c.arch = arch;
  c.d_model = 32;
  c.layers = 2;
  c.heads = 4;
  c.ff_dim = 64;
  c.max_len = 16;
  c.dropout = 0.1;
  c.rnn_hidden = 24;
  return c;
}

constexpr int kToyVocab = 30;

Seq2SeqModel toy_model(Arch arch, std::uint64_t seed = 5, int layers = 2) {
  ModelConfig c = toy_config(arch);
  c.layers = layers;
  return init_model(c, base_embeddings(kToyVocab, c.d_model, seed), seed);
}

std::vector<Example> toy_batch(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Example> out;
  for (std::size_t i = 0; i < n; ++i) {
    Example ex;
    const std::size_t ls = 2 + rng.below(5), lt = 1 + rng.below(5);
    for (std::size_t j = 0; j < ls; ++j) ex.source.push_back(5 + static_cast<int>(rng.below(kToyVocab - 5)));
    for (std::size_t j = 0; j < lt; ++j) ex.target.push_back(5 + static_cast<int>(rng.below(kToyVocab - 5)));
    out.push_back(ex);
  }
  return out;
}

bool same_params(const Seq2SeqModel& a, const Seq2SeqModel& b) {
  if (a.params().size() != b.params().size()) return false;
  for (std::size_t i = 0; i < a.params().size(); ++i) {
    const auto& x = a.params()[i].value;
    const auto& y = b.params()[i].value;
    if (x.rows() != y.rows() || x.cols() != y.cols()) return false;
    if (std::memcmp(x.data(), y.data(), sizeof(double) * static_cast<std::size_t>(x.size())) != 0) return false;
  }
  return true;
}

// ---- tape ops ---------------------------------------------------------------

TEST(TapeGradients, DenseOps) {
  Rng rng(1);
  auto a = make_param(rng, "a", 3, 4), b = make_param(rng, "b", 4, 5), c = make_param(rng, "c", 6, 4);
  auto bias = make_param(rng, "bias", 1, 5), e = make_param(rng, "e", 3, 4);
  EXPECT_LT(check_op([&](Tape& t) { return t.matmul(t.param(a), t.param(b)); }, {&a, &b}), 1e-6);
  EXPECT_LT(check_op([&](Tape& t) { return t.matmul_nt(t.param(a), t.param(c)); }, {&a, &c}), 1e-6);
  EXPECT_LT(check_op([&](Tape& t) { return t.add_bias(t.matmul(t.param(a), t.param(b)), t.param(bias)); },
                     {&a, &b, &bias}),
            1e-6);
  EXPECT_LT(check_op([&](Tape& t) { return t.mul(t.param(a), t.tanh(t.param(e))); }, {&a, &e}), 1e-6);
  EXPECT_LT(check_op([&](Tape& t) { return t.add(t.sigmoid(t.param(a)), t.scale(t.param(e), -1.5)); }, {&a, &e}),
            1e-6);
  EXPECT_LT(check_op([&](Tape& t) { return t.softmax_rows(t.param(a)); }, {&a}), 1e-6);
  EXPECT_LT(check_op([&](Tape& t) { return t.mean_rows(t.param(c)); }, {&c}), 1e-6);
}

TEST(TapeGradients, ReluAwayFromKink) {
  Parameter a;
  a.name = "a";
  a.value = Matrix(2, 3);
  a.value << 0.5, -0.7, 1.2, -0.3, 0.9, -1.1;
  EXPECT_LT(check_op([&](Tape& t) { return t.relu(t.param(a)); }, {&a}), 1e-9);
}

TEST(TapeGradients, LayerNorm) {
  Rng rng(2);
  auto x = make_param(rng, "x", 4, 6), g = make_param(rng, "g", 1, 6), b = make_param(rng, "b", 1, 6);
  EXPECT_LT(check_op([&](Tape& t) { return t.layer_norm(t.param(x), t.param(g), t.param(b)); }, {&x, &g, &b}), 1e-6);
}

TEST(TapeGradients, ShapingOps) {
  Rng rng(3);
  auto table = make_param(rng, "table", 7, 3), a = make_param(rng, "a", 4, 3), b = make_param(rng, "b", 4, 2);
  EXPECT_LT(check_op([&](Tape& t) { return t.gather_rows(t.param(table), {1, 4, 1, 6, 0}); }, {&table}), 1e-6);
  EXPECT_LT(check_op([&](Tape& t) { return t.concat_cols(t.param(a), t.param(b)); }, {&a, &b}), 1e-6);
  EXPECT_LT(check_op([&](Tape& t) { return t.concat_rows({t.param(a), t.param(table), t.param(a)}); }, {&a, &table}),
            1e-6);
  EXPECT_LT(check_op([&](Tape& t) { return t.slice_rows(t.param(table), 2, 3); }, {&table}), 1e-6);
}

TEST(TapeGradients, PackedAttention) {
  Rng rng(4);
  auto q = make_param(rng, "q", 7, 8), k = make_param(rng, "k", 9, 8), v = make_param(rng, "v", 9, 8);
  const Segments qs{0, 3, 7}, ks{0, 5, 9};
  EXPECT_LT(check_op([&](Tape& t) { return t.attention(t.param(q), t.param(k), t.param(v), qs, ks, 2, false); },
                     {&q, &k, &v}),
            1e-6);
  auto s = make_param(rng, "s", 6, 8);
  const Segments ss{0, 3, 6};
  EXPECT_LT(check_op([&](Tape& t) {
              Var x = t.param(s);
              return t.attention(x, x, x, ss, ss, 4, true);
            },
                     {&s}),
            1e-6);
}

TEST(TapeGradients, AdditiveAttentionAndGru) {
  Rng rng(5);
  auto qp = make_param(rng, "qp", 3, 4), kp = make_param(rng, "kp", 5, 4), w = make_param(rng, "w", 1, 4);
  auto vals = make_param(rng, "vals", 5, 6);
  EXPECT_LT(check_op([&](Tape& t) { return t.additive_attention(t.param(qp), t.param(kp), t.param(w), t.param(vals)); },
                     {&qp, &kp, &w, &vals}),
            1e-6);
  auto x = make_param(rng, "x", 4, 3), h0 = make_param(rng, "h0", 1, 5, 0.5);
  auto wx = make_param(rng, "wx", 3, 15, 0.5), wh = make_param(rng, "wh", 5, 15, 0.5);
  auto bx = make_param(rng, "bx", 1, 15, 0.1), bh = make_param(rng, "bh", 1, 15, 0.1);
  EXPECT_LT(check_op([&](Tape& t) {
              return t.gru(t.param(x), t.param(h0), t.param(wx), t.param(wh), t.param(bx), t.param(bh));
            },
                     {&x, &h0, &wx, &wh, &bx, &bh}),
            1e-6);
}

TEST(TapeGradients, CrossEntropyWithIgnoredRows) {
  Rng rng(6);
  auto logits = make_param(rng, "logits", 4, 6);
  for (double smoothing : {0.0, 0.1}) {
    const auto r = grad_check([&](Tape& t) { return t.cross_entropy(t.param(logits), {2, -1, 5, 0}, smoothing); },
                              {&logits}, 1e-5, 200, 1);
    EXPECT_LT(r.max_relative_error, 1e-6) << smoothing;
  }
}

TEST(TapeGradients, CrossEntropyValue) {
  Tape t;
  Matrix z(1, 3);
  z << 1.0, 2.0, 4.0;
  const double lse = std::log(std::exp(1.0) + std::exp(2.0) + std::exp(4.0));
  EXPECT_NEAR(t.scalar(t.cross_entropy(t.constant(z), {1}, 0.0)), lse - 2.0, 1e-12);
  // Smoothing mixes the gold term with the uniform average over classes.
  const double smoothed = 0.9 * (lse - 2.0) + 0.1 * (lse - 7.0 / 3.0);
  EXPECT_NEAR(t.scalar(t.cross_entropy(t.constant(z), {1}, 0.1)), smoothed, 1e-12);
}

TEST(TapeGradients, LinearObjectiveIsExact) {
  Rng rng(7);
  auto w = make_param(rng, "w", 3, 2, 0.1);
  const Matrix x = random_matrix(rng, 1, 3, 0.1);
  const auto r = grad_check([&](Tape& t) { return t.sum(t.matmul(t.constant(x), t.param(w))); }, {&w}, 1e-5, 200, 1);
  EXPECT_LT(r.max_relative_error, 1e-10);
}

TEST(TapeGradients, ShapeErrors) {
  Tape t;
  Var a = t.constant(Matrix::Zero(2, 3));
  EXPECT_THROW(t.matmul(a, a), ShapeMismatch);
  EXPECT_THROW(t.add(a, t.constant(Matrix::Zero(3, 2))), ShapeMismatch);
}

// ---- model ----------------------------------------------------------------

TEST(InitModel, DeterministicUnderSeed) {
  EXPECT_TRUE(same_params(toy_model(Arch::kTransformer, 3), toy_model(Arch::kTransformer, 3)));
  EXPECT_FALSE(same_params(toy_model(Arch::kTransformer, 3), toy_model(Arch::kTransformer, 4)));
  EXPECT_TRUE(same_params(toy_model(Arch::kRnn, 3), toy_model(Arch::kRnn, 3)));
}

TEST(InitModel, ShapeErrors) {
  ModelConfig c = toy_config(Arch::kTransformer);
  c.heads = 5;
  EXPECT_THROW(init_model(c, base_embeddings(kToyVocab, 32, 1), 1), ShapeMismatch);
  c.heads = 4;
  EXPECT_THROW(init_model(c, base_embeddings(kToyVocab, 16, 1), 1), ShapeMismatch);

  const auto vocab = tokenizer::train_bpe({"read file", "write file"}, 20);
  const auto plan = tokenizer::build_injection({"File.read"}, vocab, tokenizer::InjectionStrategy::kTa2, 1);
  EXPECT_NO_THROW(init_model(c, base_embeddings(plan.extended_size(), 32, 1), vocab, plan, 1));
  EXPECT_THROW(init_model(c, base_embeddings(plan.extended_size() - 1, 32, 1), vocab, plan, 1), ShapeMismatch);
  EXPECT_THROW(init_model(c, base_embeddings(plan.extended_size() + 1, 32, 1), vocab, plan, 1), ShapeMismatch);
}

TEST(InitModel, ExtendVocabularyResizesAllTables) {
  const auto vocab = tokenizer::train_bpe({"read file", "write file"}, 20);
  const auto plan = tokenizer::build_injection({"File.read", "File.write"}, vocab, tokenizer::InjectionStrategy::kTa1);
  ModelConfig c = toy_config(Arch::kTransformer);
  auto m = init_model(c, base_embeddings(vocab.size(), 32, 1), 1);
  extend_vocabulary(m, plan);
  EXPECT_EQ(static_cast<std::size_t>(m.vocab_size()), plan.extended_size());
  for (const char* name : {"src_embed", "tgt_embed", "out_proj"}) {
    EXPECT_EQ(static_cast<std::size_t>(m.param(name).value.rows()), plan.extended_size());
  }
  EXPECT_EQ(static_cast<std::size_t>(m.param("out_bias").value.cols()), plan.extended_size());
  EXPECT_EQ(m.plan_fingerprint, plan.fingerprint());
  EXPECT_THROW(extend_vocabulary(m, plan), ShapeMismatch);
}

TEST(GradCheck, Transformer) {
  auto m = toy_model(Arch::kTransformer);
  const auto r = grad_check(m, toy_batch(3, 11), 1e-5, 200);
  EXPECT_EQ(r.samples, 200u);
  EXPECT_LT(r.max_relative_error, 1e-4) << "analytic " << r.worst_analytic << " numeric " << r.worst_numeric;
}

TEST(GradCheck, Rnn) {
  auto m = toy_model(Arch::kRnn);
  const auto r = grad_check(m, toy_batch(3, 12), 1e-5, 200);
  EXPECT_EQ(r.samples, 200u);
  EXPECT_LT(r.max_relative_error, 1e-4) << "analytic " << r.worst_analytic << " numeric " << r.worst_numeric;
}

TEST(Model, CausalMaskProbe) {
  auto m = toy_model(Arch::kTransformer);
  const std::vector<int> src{7, 8, 9, tokenizer::kEos};
  std::vector<int> dec{tokenizer::kBos, 10, 11, 12, 13, 14};
  Tape t1;
  const Matrix base = t1.value(decode_logits(t1, m, encode(t1, m, src), dec));
  for (std::size_t j = 1; j < dec.size(); ++j) {
    auto changed = dec;
    changed[j] = 20;
    Tape t2;
    const Matrix other = t2.value(decode_logits(t2, m, encode(t2, m, src), changed));
    for (std::size_t i = 0; i < j; ++i) {
      EXPECT_EQ(base.row(static_cast<Eigen::Index>(i)), other.row(static_cast<Eigen::Index>(i))) << i << " " << j;
    }
    EXPECT_NE(base.row(static_cast<Eigen::Index>(j)), other.row(static_cast<Eigen::Index>(j)));
  }
}

TEST(Model, PackedBatchMatchesSingleExamples) {
  auto m = toy_model(Arch::kTransformer);
  const auto batch = toy_batch(3, 4);
  Tape t;
  const double packed = t.scalar(batch_loss(t, m, batch, 0.0));
  double total = 0.0;
  std::size_t n = 0;
  for (const auto& ex : batch) {
    Tape one;
    const double l = one.scalar(batch_loss(one, m, {ex}, 0.0));
    total += l * static_cast<double>(ex.target.size() + 1);
    n += ex.target.size() + 1;
  }
  EXPECT_NEAR(packed, total / static_cast<double>(n), 1e-12);
}

TEST(Model, SoftmaxStepsSumToOne) {
  for (Arch arch : {Arch::kTransformer, Arch::kRnn}) {
    auto m = toy_model(arch);
    std::vector<int> prefix;
    for (int step = 0; step < 6; ++step) {
      const RowVector p = next_token_probs(m, {6, 7, 8}, prefix);
      EXPECT_NEAR(p.sum(), 1.0, 1e-6);
      EXPECT_GE(p.minCoeff(), 0.0);
      EXPECT_LE(p.maxCoeff(), 1.0);
      prefix.push_back(9 + step);
    }
  }
}

// ---- training ---------------------------------------------------------------

TrainConfig quick_train(std::size_t epochs, double lr = 1e-2) {
  TrainConfig c;
  c.epochs = epochs;
  c.learning_rate = lr;
  c.batch_size = 4;
  c.seed = 3;
  return c;
}

TEST(Train, DeterministicTrajectory) {
  for (Arch arch : {Arch::kTransformer, Arch::kRnn}) {
    auto a = toy_model(arch), b = toy_model(arch);
    const auto data = toy_batch(10, 1);
    const auto sa = train(a, data, quick_train(3));
    const auto sb = train(b, data, quick_train(3));
    EXPECT_EQ(sa.epoch_loss, sb.epoch_loss);
    EXPECT_TRUE(same_params(a, b));
  }
}

TEST(Train, LossDecreases) {
  auto m = toy_model(Arch::kTransformer);
  const auto s = train(m, toy_batch(8, 2), quick_train(15));
  ASSERT_EQ(s.epoch_loss.size(), 16u);
  EXPECT_LT(s.epoch_loss.back(), s.epoch_loss.front());
  EXPECT_EQ(m.epoch, 15u);
}

TEST(Train, ZeroLearningRateLeavesParameters) {
  auto m = toy_model(Arch::kTransformer);
  const auto before = m;
  train(m, toy_batch(6, 3), quick_train(2, 0.0));
  EXPECT_TRUE(same_params(m, before));
}

TEST(Train, ZeroEpochsLeavesParameters) {
  auto m = toy_model(Arch::kRnn);
  const auto before = m;
  const auto s = train(m, toy_batch(6, 3), quick_train(0));
  EXPECT_EQ(s.epoch_loss.size(), 1u);
  EXPECT_TRUE(same_params(m, before));
}

TEST(Train, FreezeTwoThirdsOfThreeLayers) {
  auto m = toy_model(Arch::kTransformer, 5, 3);
  EXPECT_EQ(apply_freeze(m, 2.0 / 3.0), 2);
  const auto before = m;
  train(m, toy_batch(6, 3), quick_train(2));
  for (std::size_t i = 0; i < m.params().size(); ++i) {
    const auto& p = m.params()[i];
    const bool equal = p.value == before.params()[i].value;
    if (p.encoder_layer == 0 || p.encoder_layer == 1) {
      EXPECT_TRUE(p.frozen) << p.name;
      EXPECT_TRUE(equal) << p.name;
    } else {
      EXPECT_FALSE(p.frozen) << p.name;
    }
  }
  EXPECT_FALSE(m.param("src_embed").frozen);
  EXPECT_NE(m.param("enc.2.attn.q.w").value, before.param("enc.2.attn.q.w").value);
}

TEST(Train, FreezeFractionProperty) {
  for (double f : {0.0, 0.2, 0.34, 0.5, 0.67, 0.99, 1.0}) {
    for (Arch arch : {Arch::kTransformer, Arch::kRnn}) {
      auto m = toy_model(arch, 5, 3);
      const int layers = apply_freeze(m, f);
      const int expected = static_cast<int>(std::floor(f * 3 + 1e-9));
      EXPECT_EQ(layers, expected);
      EXPECT_EQ(m.param("src_embed").frozen, f == 1.0);
      const auto before = m;
      train(m, toy_batch(4, 9), quick_train(1));
      for (std::size_t i = 0; i < m.params().size(); ++i) {
        if (m.params()[i].frozen) {
          EXPECT_EQ(m.params()[i].value, before.params()[i].value) << m.params()[i].name;
        }
      }
    }
  }
}

TEST(Train, NonFiniteLossAborts) {
  auto m = toy_model(Arch::kTransformer);
  m.param("out_bias").value(0, 7) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(train(m, toy_batch(4, 1), quick_train(1)), NonFiniteLoss);
}

TEST(Denoise, MaskCount) {
  EXPECT_EQ(mask_count(20, 0.15), 3u);
  EXPECT_EQ(mask_count(3, 0.15), 1u);
  EXPECT_EQ(mask_count(0, 0.15), 0u);
  Rng rng(1);
  std::vector<int> ids(20);
  for (int i = 0; i < 20; ++i) ids[static_cast<std::size_t>(i)] = 5 + i;
  const auto masked = mask_tokens(ids, 0.15, rng);
  EXPECT_EQ(std::count(masked.begin(), masked.end(), tokenizer::kMask), 3);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (masked[i] != tokenizer::kMask) {
      EXPECT_EQ(masked[i], ids[i]);
    }
  }
}

TEST(Denoise, ZeroEpochsAndErrors) {
  auto m = toy_model(Arch::kTransformer);
  const auto before = m;
  std::vector<std::vector<int>> ann{{5, 6, 7}, {8, 9}};
  pretrain_denoise(m, ann, quick_train(0), 0.15);
  EXPECT_TRUE(same_params(m, before));
  EXPECT_THROW(pretrain_denoise(m, {}, quick_train(1), 0.15), EmptyCorpus);
}

// 50 annotations, 80 epochs at batch 4 (30 epochs at batch 16 stops near 0.82).
TEST(Denoise, ReconstructsTrainingAnnotations) {
  javacorpus::SyntheticSpec spec;
  spec.pairs = 50;
  const auto corpus = javacorpus::synthetic_corpus(spec);
  std::vector<std::string> texts;
  for (const auto& p : corpus) texts.push_back(p.annotation.normalized());
  const auto vocab = tokenizer::train_bpe(texts, 400);
  const auto plan = tokenizer::build_injection({}, vocab, tokenizer::InjectionStrategy::kDefault);
  std::vector<std::vector<int>> ann;
  for (const auto& t : texts) ann.push_back(tokenizer::tokenize(t, vocab, plan));

  ModelConfig c;
  c.d_model = 64;
  c.ff_dim = 128;
  auto m = init_model(c, base_embeddings(vocab.size(), c.d_model, 1), vocab, plan, 1);
  TrainConfig tc;
  tc.epochs = 80;
  tc.batch_size = 4;
  const auto r = pretrain_denoise(m, ann, tc, 0.15);
  EXPECT_GE(r.token_accuracy, 0.95);
  const auto& loss = r.state.epoch_loss;
  ASSERT_EQ(loss.size(), 81u);
  // Fresh masks make single epochs noisy; every 5-epoch window of the first 30
  // must still end no higher than it starts (later the loss sits on its floor).
  for (std::size_t i = 0; i + 4 <= 30; ++i) EXPECT_LE(loss[i + 4], loss[i]) << "window at epoch " << i;
}

// ---- decoding ---------------------------------------------------------------

TEST(Decode, BeamOfOneEqualsGreedy) {
  for (Arch arch : {Arch::kTransformer, Arch::kRnn}) {
    auto m = toy_model(arch);
    train(m, toy_batch(8, 5), quick_train(3));
    for (const auto& ex : toy_batch(20, 6)) {
      const auto g = decode_ids(m, ex.source, DecodeConfig::greedy(10));
      const auto b = decode_ids(m, ex.source, DecodeConfig::beam(1, 10));
      EXPECT_EQ(g.ids, b.ids);
      EXPECT_EQ(g.log_prob, b.log_prob);
    }
  }
}

TEST(Decode, BeamScoreDominatesGreedy) {
  auto m = toy_model(Arch::kTransformer);
  train(m, toy_batch(8, 5), quick_train(3));
  for (const auto& ex : toy_batch(10, 7)) {
    for (double penalty : {0.0, 0.6, 1.0}) {
      const auto g = decode_ids(m, ex.source, DecodeConfig{DecodeConfig::Mode::kGreedy, 1, 8, penalty});
      for (int k : {2, 3, 5}) {
        const auto b = decode_ids(m, ex.source, DecodeConfig::beam(k, 8, penalty));
        EXPECT_GE(b.score, g.score) << k << " " << penalty;
      }
    }
  }
}

TEST(Decode, ZeroLengthAndBadWidth) {
  auto m = toy_model(Arch::kTransformer);
  EXPECT_TRUE(decode_ids(m, {5, 6}, DecodeConfig::greedy(0)).ids.empty());
  EXPECT_TRUE(decode_ids(m, {5, 6}, DecodeConfig::beam(3, 0)).ids.empty());
  EXPECT_THROW(decode_ids(m, {5, 6}, DecodeConfig::beam(0, 4)), ShapeMismatch);
}

struct SinglePair {
  tokenizer::SubwordVocab vocab;
  tokenizer::InjectionPlan plan;
  javacorpus::Corpus corpus;
};

SinglePair single_pair() {
  SinglePair s;
  javacorpus::AnnotatedPair p;
  p.annotation.text = "reads a file line by line";
  p.annotation.tokens = javacorpus::annotation_tokens(p.annotation.text);
  p.sequence = {{"FileReader", "new"}, {"BufferedReader", "new"}, {"BufferedReader", "readLine"}};
  s.corpus = {p};
  s.vocab = tokenizer::train_bpe({p.annotation.normalized(), javacorpus::render(p.sequence)}, 60);
  s.plan = tokenizer::build_injection({"FileReader.new", "BufferedReader.new", "BufferedReader.readLine"}, s.vocab,
                                      tokenizer::InjectionStrategy::kTa2, 1);
  return s;
}

TEST(Decode, MemorizesSinglePair) {
  const auto s = single_pair();
  for (Arch arch : {Arch::kTransformer, Arch::kRnn}) {
    ModelConfig c = toy_config(arch);
    auto m = init_model(c, tokenizer::initial_embedding(s.plan, base_embeddings(s.vocab.size(), c.d_model, 2)),
                        s.vocab, s.plan, 2);
    auto tc = quick_train(60);
    tc.batch_size = 1;
    fine_tune(m, s.corpus, s.vocab, s.plan, tc);
    std::vector<std::string> dropped;
    const auto out = generate(m, s.corpus[0].annotation.normalized(), s.vocab, s.plan, DecodeConfig::greedy(), &dropped);
    EXPECT_EQ(out, s.corpus[0].sequence) << to_string(arch);
    EXPECT_TRUE(dropped.empty());
  }
}

TEST(FineTune, FingerprintMismatch) {
  const auto s = single_pair();
  ModelConfig c = toy_config(Arch::kTransformer);
  auto m = init_model(c, tokenizer::initial_embedding(s.plan, base_embeddings(s.vocab.size(), 32, 2)), s.vocab, s.plan, 2);
  const auto other = tokenizer::build_injection({"FileReader.new"}, s.vocab, tokenizer::InjectionStrategy::kTa2, 1);
  EXPECT_THROW(fine_tune(m, s.corpus, s.vocab, other, quick_train(1)), FingerprintMismatch);
  const auto vocab2 = tokenizer::train_bpe({"something else"}, 30);
  EXPECT_THROW(fine_tune(m, s.corpus, vocab2, s.plan, quick_train(1)), FingerprintMismatch);
}

// ---- checkpoints ------------------------------------------------------------

class CheckpointTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("apiseq_ckpt_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

TEST_F(CheckpointTest, RoundTripGeneratesIdentically) {
  for (Arch arch : {Arch::kTransformer, Arch::kRnn}) {
    auto m = toy_model(arch);
    train(m, toy_batch(8, 5), quick_train(2));
    m.tokenizer_fingerprint = 11;
    m.plan_fingerprint = 22;
    apply_freeze(m, 0.5);
    const auto path = dir_ / "model.ckpt";
    save_checkpoint(m, path);
    const auto loaded = load_checkpoint(path);
    EXPECT_TRUE(same_params(m, loaded));
    EXPECT_EQ(loaded.epoch, m.epoch);
    EXPECT_EQ(loaded.tokenizer_fingerprint, 11u);
    EXPECT_EQ(loaded.plan_fingerprint, 22u);
    for (std::size_t i = 0; i < m.params().size(); ++i) {
      EXPECT_EQ(loaded.params()[i].name, m.params()[i].name);
      EXPECT_EQ(loaded.params()[i].frozen, m.params()[i].frozen);
    }
    EXPECT_EQ(serialize_checkpoint(loaded), serialize_checkpoint(m));
    for (const auto& ex : toy_batch(10, 8)) {
      const auto a = decode_ids(m, ex.source, DecodeConfig::beam(3, 8));
      const auto b = decode_ids(loaded, ex.source, DecodeConfig::beam(3, 8));
      EXPECT_EQ(a.ids, b.ids);
      EXPECT_EQ(a.log_prob, b.log_prob);
    }
  }
}

TEST_F(CheckpointTest, Errors) {
  const auto m = toy_model(Arch::kTransformer);
  const std::string bytes = serialize_checkpoint(m);
  EXPECT_THROW(deserialize_checkpoint(bytes.substr(0, bytes.size() / 2)), CorruptFile);
  EXPECT_THROW(deserialize_checkpoint(bytes.substr(0, 12)), CorruptFile);
  std::string flipped = bytes;
  flipped[bytes.size() - 100] ^= 0x10;
  EXPECT_THROW(deserialize_checkpoint(flipped), CorruptFile);
  std::string old = bytes;
  old[7] = 0;  // version 0 in the little-endian field after the magic
  EXPECT_THROW(deserialize_checkpoint(old), VersionMismatch);
  EXPECT_THROW(deserialize_checkpoint("NOTACKPT"), FormatError);
  EXPECT_THROW(load_checkpoint(dir_ / "missing.ckpt"), IoError);
}

}  // namespace
}  // namespace apiseq::seq2seq
