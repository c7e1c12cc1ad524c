#include "apiseq/seq2seq/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "apiseq/error.hpp"
#include "apiseq/random.hpp"
#include "apiseq/tokenizer/bpe.hpp"

namespace apiseq::seq2seq {

std::string_view to_string(Arch a) { return a == Arch::kRnn ? "rnn" : "transformer"; }

std::optional<Arch> parse_arch(std::string_view text) {
  std::string lower(text);
  for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "transformer") return Arch::kTransformer;
  if (lower == "rnn") return Arch::kRnn;
  return std::nullopt;
}

int Seq2SeqModel::vocab_size() const { return static_cast<int>(param("src_embed").value.rows()); }

Parameter& Seq2SeqModel::param(std::string_view name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ShapeMismatch("model has no parameter " + std::string(name));
  return params_[it->second];
}

const Parameter& Seq2SeqModel::param(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ShapeMismatch("model has no parameter " + std::string(name));
  return params_[it->second];
}

std::size_t Seq2SeqModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
  return n;
}

Parameter& Seq2SeqModel::add(std::string name, Matrix value, bool decay, int encoder_layer) {
  if (index_.count(name)) throw ShapeMismatch("duplicate parameter " + name);
  Parameter p;
  p.name = name;
  p.value = std::move(value);
  p.decay = decay;
  p.encoder_layer = encoder_layer;
  index_.emplace(std::move(name), params_.size());
  params_.push_back(std::move(p));
  return params_.back();
}

void Seq2SeqModel::clear_grads() {
  for (auto& p : params_) p.grad.resize(0, 0);
}

namespace {

Matrix xavier(Rng& rng, Eigen::Index in, Eigen::Index out) {
  const double a = std::sqrt(6.0 / static_cast<double>(in + out));
  Matrix m(in, out);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = (2.0 * rng.uniform() - 1.0) * a;
  return m;
}

void add_linear(Seq2SeqModel& m, Rng& rng, const std::string& prefix, Eigen::Index in, Eigen::Index out,
                int layer = -1) {
  m.add(prefix + ".w", xavier(rng, in, out), true, layer);
  m.add(prefix + ".b", Matrix::Zero(1, out), false, layer);
}

void add_norm(Seq2SeqModel& m, const std::string& prefix, Eigen::Index d, int layer = -1) {
  m.add(prefix + ".g", Matrix::Ones(1, d), false, layer);
  m.add(prefix + ".b", Matrix::Zero(1, d), false, layer);
}

// The key projection has no bias: softmax is invariant to it, so its
// gradient is identically zero.
void add_attention(Seq2SeqModel& m, Rng& rng, const std::string& prefix, Eigen::Index d, int layer) {
  add_linear(m, rng, prefix + ".q", d, d, layer);
  m.add(prefix + ".k.w", xavier(rng, d, d), true, layer);
  add_linear(m, rng, prefix + ".v", d, d, layer);
  add_linear(m, rng, prefix + ".o", d, d, layer);
}

void add_gru(Seq2SeqModel& m, Rng& rng, const std::string& prefix, Eigen::Index in, Eigen::Index h,
             int layer = -1) {
  m.add(prefix + ".wx", xavier(rng, in, 3 * h), true, layer);
  m.add(prefix + ".wh", xavier(rng, h, 3 * h), true, layer);
  m.add(prefix + ".bx", Matrix::Zero(1, 3 * h), false, layer);
  m.add(prefix + ".bh", Matrix::Zero(1, 3 * h), false, layer);
}

}  // namespace

Matrix base_embeddings(std::size_t vocab_size, int d_model, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "base_embeddings"));
  const double sd = 1.0 / std::sqrt(static_cast<double>(d_model));
  Matrix m(static_cast<Eigen::Index>(vocab_size), d_model);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal(0.0, sd);
  return m;
}

Seq2SeqModel init_model(const ModelConfig& config, const Matrix& embeddings, std::uint64_t seed) {
  const auto fail = [](const std::string& why) { throw ShapeMismatch(why); };
  if (config.d_model <= 0 || config.layers <= 0 || config.max_len < 3) fail("d_model, layers must be positive and max_len >= 3");
  if (embeddings.cols() != config.d_model) {
    fail("embedding width " + std::to_string(embeddings.cols()) + " != d_model " + std::to_string(config.d_model));
  }
  if (embeddings.rows() <= tokenizer::kNumSpecials) fail("embedding table has no non-special rows");
  if (config.arch == Arch::kTransformer) {
    if (config.heads <= 0 || config.d_model % config.heads != 0) {
      fail("heads " + std::to_string(config.heads) + " do not divide d_model " + std::to_string(config.d_model));
    }
    if (config.ff_dim <= 0) fail("ff_dim must be positive");
  } else if (config.rnn_hidden <= 0) {
    fail("rnn_hidden must be positive");
  }

  Seq2SeqModel m;
  m.config = config;
  m.config.seed = seed;
  Rng rng(derive_seed(seed, "init_model"));
  const Eigen::Index d = config.d_model;
  m.add("src_embed", embeddings, true).encoder_embedding = true;
  m.add("tgt_embed", embeddings, true);
  m.add("out_proj", embeddings, true);
  m.add("out_bias", Matrix::Zero(1, embeddings.rows()), false);

  if (config.arch == Arch::kTransformer) {
    for (int l = 0; l < config.layers; ++l) {
      const std::string p = "enc." + std::to_string(l);
      add_norm(m, p + ".ln1", d, l);
      add_attention(m, rng, p + ".attn", d, l);
      add_norm(m, p + ".ln2", d, l);
      add_linear(m, rng, p + ".ff1", d, config.ff_dim, l);
      add_linear(m, rng, p + ".ff2", config.ff_dim, d, l);
    }
    add_norm(m, "enc.ln", d);
    for (int l = 0; l < config.layers; ++l) {
      const std::string p = "dec." + std::to_string(l);
      add_norm(m, p + ".ln1", d);
      add_attention(m, rng, p + ".self", d, -1);
      add_norm(m, p + ".ln2", d);
      add_attention(m, rng, p + ".cross", d, -1);
      add_norm(m, p + ".ln3", d);
      add_linear(m, rng, p + ".ff1", d, config.ff_dim);
      add_linear(m, rng, p + ".ff2", config.ff_dim, d);
    }
    add_norm(m, "dec.ln", d);
  } else {
    const Eigen::Index h = config.rnn_hidden;
    add_gru(m, rng, "enc.0.gru", d, h, 0);
    add_linear(m, rng, "dec.init", h, h);
    add_gru(m, rng, "dec.gru", d, h);
    m.add("dec.attn.wq", xavier(rng, h, h), true);
    m.add("dec.attn.wk", xavier(rng, h, h), true);
    m.add("dec.attn.v", xavier(rng, 1, h), true);
    add_linear(m, rng, "dec.comb", 2 * h, d);
  }
  return m;
}

Seq2SeqModel init_model(const ModelConfig& config, const Matrix& embeddings, const tokenizer::SubwordVocab& vocab,
                        const tokenizer::InjectionPlan& plan, std::uint64_t seed) {
  if (plan.base_size() != vocab.size() || static_cast<std::size_t>(embeddings.rows()) != plan.extended_size()) {
    throw ShapeMismatch("embedding rows " + std::to_string(embeddings.rows()) + " != vocabulary " +
                        std::to_string(vocab.size()) + " + injected " + std::to_string(plan.entries().size()));
  }
  Seq2SeqModel m = init_model(config, embeddings, seed);
  m.tokenizer_fingerprint = vocab.fingerprint();
  m.plan_fingerprint = plan.fingerprint();
  return m;
}

void extend_vocabulary(Seq2SeqModel& model, const tokenizer::InjectionPlan& plan) {
  if (static_cast<std::size_t>(model.vocab_size()) != plan.base_size()) {
    throw ShapeMismatch("model covers " + std::to_string(model.vocab_size()) + " ids, plan base is " +
                        std::to_string(plan.base_size()));
  }
  for (const char* name : {"src_embed", "tgt_embed", "out_proj"}) {
    auto& p = model.param(name);
    p.value = tokenizer::initial_embedding(plan, p.value);
    p.adam_m.resize(0, 0);
    p.adam_v.resize(0, 0);
  }
  auto& bias = model.param("out_bias");
  Matrix column = bias.value.transpose();
  Matrix extended = tokenizer::initial_embedding(plan, column);
  // Fresh tokens start with a zero bias rather than a random one.
  for (const auto& e : plan.entries()) {
    if (e.init == tokenizer::PlanEntry::Init::kFreshRandom) extended(e.token_id, 0) = 0.0;
  }
  bias.value = extended.transpose();
  bias.adam_m.resize(0, 0);
  bias.adam_v.resize(0, 0);
  model.plan_fingerprint = plan.fingerprint();
}

Example clip_example(const ModelConfig& config, Example ex) {
  const std::size_t limit = static_cast<std::size_t>(config.max_len - 1);
  if (ex.source.size() > limit) ex.source.resize(limit);
  if (ex.target.size() > limit) ex.target.resize(limit);
  return ex;
}

namespace {

// ---- transformer ------------------------------------------------------------

Matrix positional_rows(const std::vector<int>& lengths, int d) {
  int total = 0;
  for (int n : lengths) total += n;
  Matrix pe(total, d);
  int row = 0;
  for (int n : lengths) {
    for (int pos = 0; pos < n; ++pos, ++row) {
      for (int i = 0; i < d; i += 2) {
        const double angle = pos / std::pow(10000.0, static_cast<double>(i) / d);
        pe(row, i) = std::sin(angle);
        if (i + 1 < d) pe(row, i + 1) = std::cos(angle);
      }
    }
  }
  return pe;
}

Segments offsets(const std::vector<int>& lengths) {
  Segments s{0};
  for (int n : lengths) s.push_back(s.back() + n);
  return s;
}

struct Ctx {
  Tape& tape;
  Seq2SeqModel& model;
  Var p(const std::string& name) { return tape.param(model.param(name)); }
  Var linear(Var x, const std::string& prefix) {
    return tape.add_bias(tape.matmul(x, p(prefix + ".w")), p(prefix + ".b"));
  }
  Var norm(Var x, const std::string& prefix) { return tape.layer_norm(x, p(prefix + ".g"), p(prefix + ".b")); }
  Var attend(Var xq, Var xkv, const std::string& prefix, const Segments& qs, const Segments& ks, bool causal) {
    Var q = linear(xq, prefix + ".q");
    Var k = tape.matmul(xkv, p(prefix + ".k.w"));
    Var v = linear(xkv, prefix + ".v");
    Var o = tape.attention(q, k, v, qs, ks, model.config.heads, causal);
    return linear(o, prefix + ".o");
  }
  Var ffn(Var x, const std::string& prefix) {
    return linear(tape.relu(linear(x, prefix + ".ff1")), prefix + ".ff2");
  }
  // Rows are drawn with sd 1/sqrt(d); the lookup rescales them to unit variance.
  Var lookup(const std::string& table, const std::vector<int>& ids) {
    return tape.scale(tape.gather_rows(p(table), ids), std::sqrt(static_cast<double>(model.config.d_model)));
  }
  Var embed(const std::string& table, const std::vector<int>& ids, const std::vector<int>& lengths) {
    Var e = lookup(table, ids);
    return tape.dropout(tape.add_const(e, positional_rows(lengths, model.config.d_model)), model.config.dropout);
  }
  Var logits(Var h) { return tape.add_bias(tape.matmul_nt(h, p("out_proj")), p("out_bias")); }
};

Var transformer_encode(Ctx& c, const std::vector<int>& ids, const std::vector<int>& lengths) {
  const Segments seg = offsets(lengths);
  const double drop = c.model.config.dropout;
  Var x = c.embed("src_embed", ids, lengths);
  for (int l = 0; l < c.model.config.layers; ++l) {
    const std::string p = "enc." + std::to_string(l);
    Var n1 = c.norm(x, p + ".ln1");
    x = c.tape.add(x, c.tape.dropout(c.attend(n1, n1, p + ".attn", seg, seg, false), drop));
    x = c.tape.add(x, c.tape.dropout(c.ffn(c.norm(x, p + ".ln2"), p), drop));
  }
  return c.norm(x, "enc.ln");
}

Var transformer_decode(Ctx& c, Var memory, const Segments& mem_seg, const std::vector<int>& ids,
                       const std::vector<int>& lengths) {
  const Segments seg = offsets(lengths);
  const double drop = c.model.config.dropout;
  Var y = c.embed("tgt_embed", ids, lengths);
  for (int l = 0; l < c.model.config.layers; ++l) {
    const std::string p = "dec." + std::to_string(l);
    Var n1 = c.norm(y, p + ".ln1");
    y = c.tape.add(y, c.tape.dropout(c.attend(n1, n1, p + ".self", seg, seg, true), drop));
    y = c.tape.add(y, c.tape.dropout(c.attend(c.norm(y, p + ".ln2"), memory, p + ".cross", seg, mem_seg, false), drop));
    y = c.tape.add(y, c.tape.dropout(c.ffn(c.norm(y, p + ".ln3"), p), drop));
  }
  return c.logits(c.norm(y, "dec.ln"));
}

// ---- RNN --------------------------------------------------------------------

Encoded rnn_encode(Ctx& c, const std::vector<int>& ids) {
  const Eigen::Index h = c.model.config.rnn_hidden;
  Var x = c.tape.dropout(c.lookup("src_embed", ids), c.model.config.dropout);
  Var states = c.tape.gru(x, c.tape.constant(Matrix::Zero(1, h)), c.p("enc.0.gru.wx"), c.p("enc.0.gru.wh"),
                          c.p("enc.0.gru.bx"), c.p("enc.0.gru.bh"));
  Var init = c.tape.tanh(c.linear(c.tape.mean_rows(states), "dec.init"));
  return Encoded{states, init, static_cast<int>(ids.size())};
}

Var rnn_decode(Ctx& c, const Encoded& enc, const std::vector<int>& ids) {
  Var y = c.tape.dropout(c.lookup("tgt_embed", ids), c.model.config.dropout);
  Var s = c.tape.gru(y, enc.init, c.p("dec.gru.wx"), c.p("dec.gru.wh"), c.p("dec.gru.bx"), c.p("dec.gru.bh"));
  Var ctx = c.tape.additive_attention(c.tape.matmul(s, c.p("dec.attn.wq")), c.tape.matmul(enc.states, c.p("dec.attn.wk")),
                                      c.p("dec.attn.v"), enc.states);
  Var o = c.tape.tanh(c.linear(c.tape.concat_cols(s, ctx), "dec.comb"));
  return c.logits(c.tape.dropout(o, c.model.config.dropout));
}

void check_ids(const Seq2SeqModel& m, const std::vector<int>& ids) {
  const int v = m.vocab_size();
  for (int id : ids) {
    if (id < 0 || id >= v) throw ShapeMismatch("token id " + std::to_string(id) + " outside model vocabulary " + std::to_string(v));
  }
}

}  // namespace

Encoded encode(Tape& tape, Seq2SeqModel& model, const std::vector<int>& source_with_eos) {
  check_ids(model, source_with_eos);
  Ctx c{tape, model};
  if (model.config.arch == Arch::kRnn) return rnn_encode(c, source_with_eos);
  const int n = static_cast<int>(source_with_eos.size());
  return Encoded{transformer_encode(c, source_with_eos, {n}), Var{}, n};
}

Var decode_logits(Tape& tape, Seq2SeqModel& model, const Encoded& enc, const std::vector<int>& decoder_input) {
  check_ids(model, decoder_input);
  Ctx c{tape, model};
  if (model.config.arch == Arch::kRnn) return rnn_decode(c, enc, decoder_input);
  return transformer_decode(c, enc.states, {0, enc.length}, decoder_input, {static_cast<int>(decoder_input.size())});
}

Var batch_loss(Tape& tape, Seq2SeqModel& model, const std::vector<Example>& batch, double label_smoothing) {
  if (batch.empty()) throw ShapeMismatch("empty batch");
  std::vector<int> src, dec_in, dec_out, src_len, dec_len;
  for (const auto& raw : batch) {
    const Example ex = clip_example(model.config, raw);
    src.insert(src.end(), ex.source.begin(), ex.source.end());
    src.push_back(tokenizer::kEos);
    dec_in.push_back(tokenizer::kBos);
    dec_in.insert(dec_in.end(), ex.target.begin(), ex.target.end());
    dec_out.insert(dec_out.end(), ex.target.begin(), ex.target.end());
    dec_out.push_back(tokenizer::kEos);
    src_len.push_back(static_cast<int>(ex.source.size()) + 1);
    dec_len.push_back(static_cast<int>(ex.target.size()) + 1);
  }
  check_ids(model, src);
  check_ids(model, dec_in);
  Ctx c{tape, model};
  Var logits;
  if (model.config.arch == Arch::kTransformer) {
    Var memory = transformer_encode(c, src, src_len);
    logits = transformer_decode(c, memory, offsets(src_len), dec_in, dec_len);
  } else {
    std::vector<Var> parts;
    std::size_t s0 = 0, d0 = 0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const std::vector<int> s(src.begin() + static_cast<long>(s0), src.begin() + static_cast<long>(s0 + src_len[i]));
      const std::vector<int> d(dec_in.begin() + static_cast<long>(d0), dec_in.begin() + static_cast<long>(d0 + dec_len[i]));
      parts.push_back(rnn_decode(c, rnn_encode(c, s), d));
      s0 += static_cast<std::size_t>(src_len[i]);
      d0 += static_cast<std::size_t>(dec_len[i]);
    }
    logits = parts.size() == 1 ? parts[0] : tape.concat_rows(parts);
  }
  return tape.cross_entropy(logits, dec_out, label_smoothing);
}

}  // namespace apiseq::seq2seq
