#include "apiseq/cli/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <tuple>
#include <type_traits>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "apiseq/error.hpp"

namespace apiseq::cli {

namespace pt = boost::property_tree;

namespace {

std::string fmt_double(double v) {
  std::ostringstream o;
  o.precision(17);
  o << v;
  return o.str();
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : ",") + p;
  return out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text + ",") {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ' && c != '\t') {
      cur += c;
    }
  }
  return out;
}

std::string decode_mode(const seq2seq::DecodeConfig& d) {
  return d.mode == seq2seq::DecodeConfig::Mode::kGreedy ? "greedy" : "beam";
}

auto model_tie(const seq2seq::ModelConfig& m) {
  return std::tie(m.arch, m.d_model, m.layers, m.heads, m.ff_dim, m.max_len, m.dropout, m.seed, m.rnn_hidden);
}

auto train_tie(const seq2seq::TrainConfig& t) {
  return std::tie(t.batch_size, t.learning_rate, t.epochs, t.freeze_fraction, t.optimizer.beta1, t.optimizer.beta2,
                  t.optimizer.eps, t.optimizer.weight_decay, t.label_smoothing, t.grad_clip, t.seed);
}

auto decode_tie(const seq2seq::DecodeConfig& d) {
  return std::tie(d.mode, d.width, d.max_decode_len, d.length_penalty);
}

auto miner_tie(const baselines::MinerParams& m) {
  return std::tie(m.top_docs, m.min_support, m.max_len, m.similarity_threshold);
}

template <typename T>
T get(const pt::ptree& tree, const std::string& key, const T& fallback) {
  const auto node = tree.get_child_optional(key);
  if (!node) return fallback;
  const std::string& raw = node->data();
  if constexpr (std::is_unsigned_v<T>) {
    if (raw.find('-') != std::string::npos) throw ConfigError("bad value for " + key + ": '" + raw + "'");
  }
  try {
    return node->get_value<T>();
  } catch (const pt::ptree_error&) {
    throw ConfigError("bad value for " + key + ": '" + raw + "'");
  }
}

}  // namespace

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return a.java_root == b.java_root && a.split_seed == b.split_seed && a.test_count == b.test_count &&
         a.valid_fraction == b.valid_fraction && a.vocab_size == b.vocab_size &&
         model_tie(a.transformer) == model_tie(b.transformer) && a.rnn_hidden == b.rnn_hidden &&
         a.rnn_vocab_cap == b.rnn_vocab_cap && a.pretrain_epochs == b.pretrain_epochs && a.mask_rate == b.mask_rate &&
         train_tie(a.train) == train_tie(b.train) && a.arms == b.arms && decode_tie(a.decode) == decode_tie(b.decode) &&
         a.report_beam == b.report_beam && miner_tie(a.miner) == miner_tie(b.miner) &&
         a.em_iterations == b.em_iterations && a.out_dir == b.out_dir;
}

std::string write_config(const ExperimentConfig& c) {
  std::ostringstream o;
  const auto& m = c.transformer;
  const auto& t = c.train;
  o << "[corpus]\n"
    << "java_root = " << c.java_root << "\n"
    << "split_seed = " << c.split_seed << "\n"
    << "test_count = " << c.test_count << "\n"
    << "valid_fraction = " << fmt_double(c.valid_fraction) << "\n\n"
    << "[tokenizer]\n"
    << "vocab_size = " << c.vocab_size << "\n\n"
    << "[model]\n"
    << "d_model = " << m.d_model << "\n"
    << "layers = " << m.layers << "\n"
    << "heads = " << m.heads << "\n"
    << "ff_dim = " << m.ff_dim << "\n"
    << "max_len = " << m.max_len << "\n"
    << "dropout = " << fmt_double(m.dropout) << "\n"
    << "seed = " << m.seed << "\n"
    << "rnn_hidden = " << c.rnn_hidden << "\n"
    << "rnn_vocab_cap = " << c.rnn_vocab_cap << "\n\n"
    << "[pretrain]\n"
    << "epochs = " << c.pretrain_epochs << "\n"
    << "mask_rate = " << fmt_double(c.mask_rate) << "\n\n"
    << "[train]\n"
    << "arms = " << join(c.arms) << "\n"
    << "batch_size = " << t.batch_size << "\n"
    << "learning_rate = " << fmt_double(t.learning_rate) << "\n"
    << "epochs = " << t.epochs << "\n"
    << "freeze_fraction = " << fmt_double(t.freeze_fraction) << "\n"
    << "beta1 = " << fmt_double(t.optimizer.beta1) << "\n"
    << "beta2 = " << fmt_double(t.optimizer.beta2) << "\n"
    << "adam_eps = " << fmt_double(t.optimizer.eps) << "\n"
    << "weight_decay = " << fmt_double(t.optimizer.weight_decay) << "\n"
    << "label_smoothing = " << fmt_double(t.label_smoothing) << "\n"
    << "grad_clip = " << fmt_double(t.grad_clip) << "\n"
    << "seed = " << t.seed << "\n\n"
    << "[decode]\n"
    << "mode = " << decode_mode(c.decode) << "\n"
    << "width = " << c.decode.width << "\n"
    << "max_decode_len = " << c.decode.max_decode_len << "\n"
    << "length_penalty = " << fmt_double(c.decode.length_penalty) << "\n"
    << "report_beam = " << c.report_beam << "\n\n"
    << "[baselines]\n"
    << "top_docs = " << c.miner.top_docs << "\n"
    << "min_support = " << c.miner.min_support << "\n"
    << "max_len = " << c.miner.max_len << "\n"
    << "threshold = " << fmt_double(c.miner.similarity_threshold) << "\n"
    << "em_iterations = " << c.em_iterations << "\n\n"
    << "[output]\n"
    << "dir = " << c.out_dir << "\n";
  return o.str();
}

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(e.what());
  }
  static const std::vector<std::pair<std::string, std::vector<std::string>>> kKnown = {
      {"corpus", {"java_root", "split_seed", "test_count", "valid_fraction"}},
      {"tokenizer", {"vocab_size"}},
      {"model", {"d_model", "layers", "heads", "ff_dim", "max_len", "dropout", "seed", "rnn_hidden", "rnn_vocab_cap"}},
      {"pretrain", {"epochs", "mask_rate"}},
      {"train",
       {"arms", "batch_size", "learning_rate", "epochs", "freeze_fraction", "beta1", "beta2", "adam_eps",
        "weight_decay", "label_smoothing", "grad_clip", "seed"}},
      {"decode", {"mode", "width", "max_decode_len", "length_penalty", "report_beam"}},
      {"baselines", {"top_docs", "min_support", "max_len", "threshold", "em_iterations"}},
      {"output", {"dir"}},
  };
  for (const auto& [section, body] : tree) {
    auto it = std::find_if(kKnown.begin(), kKnown.end(), [&](const auto& k) { return k.first == section; });
    if (it == kKnown.end()) throw ConfigError("unknown section [" + section + "]");
    for (const auto& [key, value] : body) {
      if (std::find(it->second.begin(), it->second.end(), key) == it->second.end()) {
        throw ConfigError("unknown key " + section + "." + key);
      }
    }
  }

  ExperimentConfig c;
  c.java_root = get<std::string>(tree, "corpus.java_root", c.java_root);
  c.split_seed = get(tree, "corpus.split_seed", c.split_seed);
  c.test_count = get(tree, "corpus.test_count", c.test_count);
  c.valid_fraction = get(tree, "corpus.valid_fraction", c.valid_fraction);
  c.vocab_size = get(tree, "tokenizer.vocab_size", c.vocab_size);
  auto& m = c.transformer;
  m.d_model = get(tree, "model.d_model", m.d_model);
  m.layers = get(tree, "model.layers", m.layers);
  m.heads = get(tree, "model.heads", m.heads);
  m.ff_dim = get(tree, "model.ff_dim", m.ff_dim);
  m.max_len = get(tree, "model.max_len", m.max_len);
  m.dropout = get(tree, "model.dropout", m.dropout);
  m.seed = get(tree, "model.seed", m.seed);
  c.rnn_hidden = get(tree, "model.rnn_hidden", c.rnn_hidden);
  c.rnn_vocab_cap = get(tree, "model.rnn_vocab_cap", c.rnn_vocab_cap);
  c.pretrain_epochs = get(tree, "pretrain.epochs", c.pretrain_epochs);
  c.mask_rate = get(tree, "pretrain.mask_rate", c.mask_rate);
  auto& t = c.train;
  if (auto arms = tree.get_optional<std::string>("train.arms")) c.arms = split_list(*arms);
  t.batch_size = get(tree, "train.batch_size", t.batch_size);
  t.learning_rate = get(tree, "train.learning_rate", t.learning_rate);
  t.epochs = get(tree, "train.epochs", t.epochs);
  t.freeze_fraction = get(tree, "train.freeze_fraction", t.freeze_fraction);
  t.optimizer.beta1 = get(tree, "train.beta1", t.optimizer.beta1);
  t.optimizer.beta2 = get(tree, "train.beta2", t.optimizer.beta2);
  t.optimizer.eps = get(tree, "train.adam_eps", t.optimizer.eps);
  t.optimizer.weight_decay = get(tree, "train.weight_decay", t.optimizer.weight_decay);
  t.label_smoothing = get(tree, "train.label_smoothing", t.label_smoothing);
  t.grad_clip = get(tree, "train.grad_clip", t.grad_clip);
  t.seed = get(tree, "train.seed", t.seed);
  const auto mode = get<std::string>(tree, "decode.mode", decode_mode(c.decode));
  if (mode == "greedy") {
    c.decode.mode = seq2seq::DecodeConfig::Mode::kGreedy;
  } else if (mode == "beam") {
    c.decode.mode = seq2seq::DecodeConfig::Mode::kBeam;
  } else {
    throw ConfigError("decode.mode must be greedy or beam, got " + mode);
  }
  c.decode.width = get(tree, "decode.width", c.decode.width);
  c.decode.max_decode_len = get(tree, "decode.max_decode_len", c.decode.max_decode_len);
  c.decode.length_penalty = get(tree, "decode.length_penalty", c.decode.length_penalty);
  c.report_beam = get(tree, "decode.report_beam", c.report_beam);
  c.miner.top_docs = get(tree, "baselines.top_docs", c.miner.top_docs);
  c.miner.min_support = get(tree, "baselines.min_support", c.miner.min_support);
  c.miner.max_len = get(tree, "baselines.max_len", c.miner.max_len);
  c.miner.similarity_threshold = get(tree, "baselines.threshold", c.miner.similarity_threshold);
  c.em_iterations = get(tree, "baselines.em_iterations", c.em_iterations);
  c.out_dir = get<std::string>(tree, "output.dir", c.out_dir);
  return c;
}

ExperimentConfig read_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

void apply_overrides(ExperimentConfig& config, const std::vector<std::string>& assignments) {
  if (assignments.empty()) return;
  pt::ptree tree;
  std::istringstream in(write_config(config));
  pt::read_ini(in, tree);
  for (const auto& a : assignments) {
    const auto eq = a.find('=');
    const auto dot = a.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
      throw ConfigError("override '" + a + "' is not section.key=value");
    }
    const std::string section = a.substr(0, dot);
    const std::string key = a.substr(dot + 1, eq - dot - 1);
    auto child = tree.get_child_optional(section);
    if (!child) throw ConfigError("unknown section [" + section + "]");
    if (!child->get_child_optional(key)) throw ConfigError("unknown key " + section + "." + key);
    child->put(key, a.substr(eq + 1));
  }
  std::ostringstream out;
  pt::write_ini(out, tree);
  config = parse_config(out.str());
}

void apply_seed_override(ExperimentConfig& config) {
  const char* env = std::getenv("APISEQ_SEED");
  if (!env || !*env) return;
  char* end = nullptr;
  const unsigned long long seed = std::strtoull(env, &end, 10);
  if (*end != '\0') throw ConfigError(std::string("APISEQ_SEED is not an unsigned integer: ") + env);
  config.split_seed = seed;
  config.transformer.seed = seed;
  config.train.seed = seed;
}

bool is_neural_arm(const std::string& arm) {
  return std::find(kNeuralArms.begin(), kNeuralArms.end(), arm) != kNeuralArms.end();
}

void validate(const ExperimentConfig& c) {
  const auto fail = [](const std::string& why) { throw ConfigError(why); };
  const auto& m = c.transformer;
  if (c.valid_fraction < 0.0 || c.valid_fraction >= 1.0) fail("corpus.valid_fraction must lie in [0, 1)");
  if (c.test_count == 0) fail("corpus.test_count must be at least 1");
  if (m.d_model <= 0 || m.layers <= 0 || m.ff_dim <= 0 || m.heads <= 0) fail("model sizes must be positive");
  if (m.d_model % m.heads != 0) fail("model.heads must divide model.d_model");
  if (m.max_len < 3) fail("model.max_len must be at least 3");
  if (m.dropout < 0.0 || m.dropout >= 1.0) fail("model.dropout must lie in [0, 1)");
  if (c.rnn_hidden <= 0) fail("model.rnn_hidden must be positive");
  if (!(c.mask_rate > 0.0 && c.mask_rate < 1.0)) fail("pretrain.mask_rate must lie in (0, 1)");
  if (c.train.batch_size == 0) fail("train.batch_size must be at least 1");
  if (!(c.train.learning_rate >= 0.0)) fail("train.learning_rate must be non-negative");
  if (c.train.freeze_fraction < 0.0 || c.train.freeze_fraction > 1.0) fail("train.freeze_fraction must lie in [0, 1]");
  if (c.train.label_smoothing < 0.0 || c.train.label_smoothing >= 1.0) fail("train.label_smoothing must lie in [0, 1)");
  if (c.arms.empty()) fail("train.arms is empty");
  for (const auto& a : c.arms) {
    if (!is_neural_arm(a)) fail("unknown arm '" + a + "' (expected rnn, transformer-default, transformer-ta1, transformer-ta2)");
  }
  if (c.decode.width < 1) fail("decode.width must be at least 1");
  if (c.decode.max_decode_len < 0) fail("decode.max_decode_len must be non-negative");
  if (c.report_beam < 0) fail("decode.report_beam must be non-negative");
  if (c.miner.min_support == 0 || c.miner.max_len == 0) fail("baselines.min_support and max_len must be positive");
  if (c.out_dir.empty()) fail("output.dir is empty");
}

}  // namespace apiseq::cli
