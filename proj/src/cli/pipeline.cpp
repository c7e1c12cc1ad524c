#include "apiseq/cli/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "apiseq/baselines/systems.hpp"
#include "apiseq/error.hpp"
#include "apiseq/javacorpus/corpus.hpp"
#include "apiseq/seq2seq/checkpoint.hpp"
#include "apiseq/seq2seq/decode.hpp"
#include "apiseq/seq2seq/train.hpp"
#include "apiseq/tokenizer/bpe.hpp"

namespace apiseq::cli {

namespace fs = std::filesystem;

namespace {

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

void require(const fs::path& p, const std::string& what, const std::string& hint) {
  if (!fs::exists(p)) throw IoError("missing " + what + " " + p.string() + " (run `" + hint + "` first)");
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

javacorpus::Corpus load_split(const ExperimentConfig& c, const std::string& part) {
  const auto path = layout(c).split(part);
  require(path, "split", "split");
  return javacorpus::read_corpus(path);
}

tokenizer::SubwordVocab load_vocab(const ExperimentConfig& c) {
  require(layout(c).vocab(), "vocabulary", "train-tokenizer");
  return tokenizer::SubwordVocab::load(layout(c).vocab());
}

tokenizer::InjectionPlan load_plan(const ExperimentConfig& c, const std::string& arm,
                                   const tokenizer::SubwordVocab& vocab) {
  require(layout(c).plan(arm), "injection plan", "train-tokenizer");
  return tokenizer::InjectionPlan::load(layout(c).plan(arm), arm_strategy(arm), vocab.size());
}

seq2seq::Seq2SeqModel load_model(const ExperimentConfig& c, const std::string& arm) {
  require(layout(c).checkpoint(arm), "checkpoint", "finetune");
  return seq2seq::load_checkpoint(layout(c).checkpoint(arm));
}

void write_loss_log(const fs::path& path, const std::vector<double>& losses) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "epoch\tloss\n";
  for (std::size_t e = 0; e < losses.size(); ++e) out << e << '\t' << fixed(losses[e], 9) << '\n';
}

std::vector<std::string> api_names(const javacorpus::Corpus& train) {
  std::set<std::string> names;
  for (const auto& p : train) {
    for (const auto& call : p.sequence) names.insert(call.render());
  }
  return {names.begin(), names.end()};
}

eval::ScoreReport score_system(const std::string& system, const javacorpus::Corpus& test,
                               const std::function<javacorpus::ApiSequence(const javacorpus::AnnotatedPair&)>& run) {
  std::vector<std::pair<eval::Tokens, eval::Tokens>> pairs;
  pairs.reserve(test.size());
  for (const auto& p : test) pairs.emplace_back(javacorpus::render_tokens(run(p)), javacorpus::render_tokens(p.sequence));
  return eval::corpus_score(pairs, system);
}

}  // namespace

tokenizer::InjectionStrategy arm_strategy(const std::string& arm) {
  if (arm == "transformer-default") return tokenizer::InjectionStrategy::kDefault;
  if (arm == "transformer-ta1") return tokenizer::InjectionStrategy::kTa1;
  if (arm == "transformer-ta2" || arm == "rnn") return tokenizer::InjectionStrategy::kTa2;
  throw ConfigError("unknown arm '" + arm + "'");
}

seq2seq::ModelConfig arm_model_config(const ExperimentConfig& config, const std::string& arm) {
  arm_strategy(arm);
  seq2seq::ModelConfig m = config.transformer;
  m.arch = arm == "rnn" ? seq2seq::Arch::kRnn : seq2seq::Arch::kTransformer;
  m.rnn_hidden = config.rnn_hidden;
  return m;
}

std::vector<std::string> capped_api_names(const javacorpus::Corpus& train, std::size_t cap) {
  std::map<std::string, std::size_t> freq;
  for (const auto& p : train) {
    for (const auto& call : p.sequence) ++freq[call.render()];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() > cap) ranked.resize(cap);
  std::vector<std::string> names;
  for (const auto& r : ranked) names.push_back(r.first);
  std::sort(names.begin(), names.end());
  return names;
}

std::vector<std::string> tokenizer_texts(const javacorpus::Corpus& train) {
  std::vector<std::string> texts;
  texts.reserve(2 * train.size());
  for (const auto& p : train) {
    texts.push_back(p.annotation.normalized());
    texts.push_back(javacorpus::render(p.sequence));
  }
  return texts;
}

void cmd_extract(const ExperimentConfig&, const fs::path& root, const fs::path& out, std::ostream& log) {
  javacorpus::CorpusStats stats;
  const auto corpus = javacorpus::build_corpus(root, &stats);
  ensure_parent(out);
  javacorpus::write_corpus(out, corpus);
  for (const auto& line : stats.log) log << "skipped: " << line << '\n';
  log << "extract: " << stats.files << " files, " << stats.methods << " methods, " << stats.documented
      << " documented, " << stats.pairs << " pairs, " << stats.empty_sequences << " without API calls, "
      << stats.skipped_files << " files skipped -> " << out.string() << '\n';
}

void cmd_split(const ExperimentConfig& c, const fs::path& corpus_path, std::ostream& log) {
  require(corpus_path, "corpus", "extract");
  const auto split = javacorpus::split_corpus(javacorpus::read_corpus(corpus_path), c.split_seed, c.test_count,
                                              c.valid_fraction);
  const Layout l = layout(c);
  ensure_parent(l.split("train"));
  javacorpus::write_corpus(l.split("train"), split.train);
  javacorpus::write_corpus(l.split("valid"), split.valid);
  javacorpus::write_corpus(l.split("test"), split.test);
  log << "split: seed " << c.split_seed << ", " << split.train.size() << " train / " << split.valid.size()
      << " valid / " << split.test.size() << " test\n";
}

void cmd_train_tokenizer(const ExperimentConfig& c, std::ostream& log) {
  const auto train = load_split(c, "train");
  const auto vocab = tokenizer::train_bpe(tokenizer_texts(train), c.vocab_size);
  const Layout l = layout(c);
  ensure_parent(l.vocab());
  vocab.save(l.vocab());
  const auto names = api_names(train);
  std::size_t split_names = 0;
  for (const auto& n : names) split_names += vocab.encode_word(n).size() > 1;
  for (const auto& arm : kNeuralArms) {
    const auto plan = tokenizer::build_injection(arm == "rnn" ? capped_api_names(train, c.rnn_vocab_cap) : names,
                                                 vocab, arm_strategy(arm), c.transformer.seed);
    plan.save(l.plan(arm));
  }
  log << "train-tokenizer: " << vocab.size() << " tokens, " << vocab.merges().size() << " merges; " << names.size()
      << " API names, " << split_names << " split into several subwords\n";
}

void cmd_pretrain(const ExperimentConfig& c, std::ostream& log) {
  const auto train = load_split(c, "train");
  const auto vocab = load_vocab(c);
  const auto plan = tokenizer::build_injection({}, vocab, tokenizer::InjectionStrategy::kDefault);
  const auto mc = arm_model_config(c, "transformer-default");
  auto model = seq2seq::init_model(mc, seq2seq::base_embeddings(vocab.size(), mc.d_model, mc.seed), vocab, plan, mc.seed);
  std::vector<std::vector<int>> annotations;
  for (const auto& p : train) annotations.push_back(tokenizer::tokenize(p.annotation.normalized(), vocab, plan));
  seq2seq::TrainConfig tc = c.train;
  tc.epochs = c.pretrain_epochs;
  tc.freeze_fraction = 0.0;
  const auto result = seq2seq::pretrain_denoise(model, annotations, tc, c.mask_rate);
  const Layout l = layout(c);
  ensure_parent(l.pretrained());
  seq2seq::save_checkpoint(model, l.pretrained());
  write_loss_log(l.train_log("pretrain"), result.state.epoch_loss);
  log << "pretrain: " << c.pretrain_epochs << " epochs, loss " << fixed(result.state.epoch_loss.front(), 4) << " -> "
      << fixed(result.state.epoch_loss.back(), 4) << ", reconstruction accuracy " << fixed(result.token_accuracy, 4)
      << '\n';
}

void cmd_finetune(const ExperimentConfig& c, std::ostream& log) {
  const auto train = load_split(c, "train");
  const auto vocab = load_vocab(c);
  const Layout l = layout(c);
  for (const auto& arm : c.arms) {
    const auto plan = load_plan(c, arm, vocab);
    const auto mc = arm_model_config(c, arm);
    seq2seq::Seq2SeqModel model;
    std::string origin = "scratch";
    if (mc.arch == seq2seq::Arch::kTransformer && fs::exists(l.pretrained())) {
      model = seq2seq::load_checkpoint(l.pretrained());
      if (model.tokenizer_fingerprint != vocab.fingerprint()) {
        throw FingerprintMismatch("pretrained checkpoint was built for another vocabulary");
      }
      seq2seq::extend_vocabulary(model, plan);
      model.epoch = 0;
      origin = "pretrained";
    } else {
      model = seq2seq::init_model(
          mc, tokenizer::initial_embedding(plan, seq2seq::base_embeddings(vocab.size(), mc.d_model, mc.seed)), vocab,
          plan, mc.seed);
    }
    const auto state = seq2seq::fine_tune(model, train, vocab, plan, c.train);
    ensure_parent(l.checkpoint(arm));
    seq2seq::save_checkpoint(model, l.checkpoint(arm));
    write_loss_log(l.train_log(arm), state.epoch_loss);
    log << "finetune " << arm << " (" << origin << ", " << model.parameter_count() << " parameters, "
        << plan.entries().size() << " injected tokens): loss " << fixed(state.epoch_loss.front(), 4) << " -> "
        << fixed(state.epoch_loss.back(), 4) << " after " << c.train.epochs << " epochs\n";
  }
}

javacorpus::ApiSequence cmd_generate(const ExperimentConfig& c, const std::string& arm, const std::string& query,
                                     std::ostream& log) {
  const auto vocab = load_vocab(c);
  const auto plan = load_plan(c, arm, vocab);
  const auto model = load_model(c, arm);
  std::vector<std::string> dropped;
  auto out = seq2seq::generate(model, query, vocab, plan, c.decode, &dropped);
  for (const auto& d : dropped) log << "warning: dropped '" << d << "' (not an API call)\n";
  return out;
}

void cmd_index(const ExperimentConfig& c, std::ostream& log) {
  const auto train = load_split(c, "train");
  const Layout l = layout(c);
  ensure_parent(l.search_index());
  const auto search = baselines::build_index(baselines::search_documents(train));
  search.save(l.search_index());
  baselines::build_index(baselines::api_documents(train)).save(l.api_index());
  log << "index: " << search.size() << " documents, " << search.postings().size() << " terms\n";
}

javacorpus::ApiSequence cmd_mine(const ExperimentConfig& c, const std::string& query, std::ostream& log) {
  require(layout(c).search_index(), "search index", "index");
  baselines::SearchMinerRecommender rec(baselines::InvertedIndex::load(layout(c).search_index()), c.miner);
  auto out = rec.recommend(query);
  if (out.empty()) log << "mine: no document matched the query\n";
  return out;
}

void cmd_align(const ExperimentConfig& c, std::ostream& log) {
  const auto train = load_split(c, "train");
  std::vector<double> ll;
  const auto table = baselines::train_ibm1(train, c.em_iterations, &ll);
  const Layout l = layout(c);
  ensure_parent(l.translation_table());
  table.save(l.translation_table());
  log << "align: " << c.em_iterations << " EM iterations, log-likelihood "
      << (ll.empty() ? std::string("n/a") : fixed(ll.front(), 4) + " -> " + fixed(ll.back(), 4)) << '\n';
}

std::vector<eval::ScoreReport> cmd_eval(const ExperimentConfig& c, std::ostream& log) {
  const auto train = load_split(c, "train");
  const auto test = load_split(c, "test");
  const Layout l = layout(c);
  std::vector<eval::ScoreReport> reports, beam_reports;

  // Load every artifact first so that a missing one fails before any work.
  const auto vocab = load_vocab(c);
  std::vector<std::pair<tokenizer::InjectionPlan, seq2seq::Seq2SeqModel>> arms;
  for (const auto& arm : c.arms) arms.emplace_back(load_plan(c, arm, vocab), load_model(c, arm));

  for (std::size_t i = 0; i < c.arms.size(); ++i) {
    const auto& [plan, model] = arms[i];
    const auto& arm = c.arms[i];
    std::size_t dropped = 0;
    auto run = [&](const seq2seq::DecodeConfig& dc) {
      return [&, dc](const javacorpus::AnnotatedPair& p) {
        std::vector<std::string> lost;
        auto out = seq2seq::generate(model, p.annotation.normalized(), vocab, plan, dc, &lost);
        dropped += lost.size();
        return out;
      };
    };
    reports.push_back(score_system(arm, test, run(c.decode)));
    if (dropped) log << "warning: " << arm << " produced " << dropped << " pieces that are not API calls\n";
    if (c.report_beam > 0 && c.decode.mode == seq2seq::DecodeConfig::Mode::kGreedy) {
      const auto beam = seq2seq::DecodeConfig::beam(c.report_beam, c.decode.max_decode_len, c.decode.length_penalty);
      beam_reports.push_back(score_system(arm + "+beam" + std::to_string(c.report_beam), test, run(beam)));
    }
  }

  const auto miner = fs::exists(l.search_index())
                         ? baselines::SearchMinerRecommender(baselines::InvertedIndex::load(l.search_index()), c.miner)
                         : baselines::SearchMinerRecommender(train, c.miner);
  reports.push_back(score_system("bm25+miner", test, [&](const auto& p) { return miner.recommend(p.annotation.text); }));
  const bool have_swim = fs::exists(l.translation_table()) && fs::exists(l.api_index());
  const auto swim = have_swim ? baselines::SwimRecommender(baselines::TranslationTable::load(l.translation_table()),
                                                           baselines::InvertedIndex::load(l.api_index()))
                              : baselines::SwimRecommender(train, c.em_iterations);
  reports.push_back(score_system("swim", test, [&](const auto& p) { return swim.recommend(p.annotation.text); }));

  reports.insert(reports.end(), beam_reports.begin(), beam_reports.end());
  for (const auto& r : reports) {
    ensure_parent(l.breakdown(r.system));
    eval::write_breakdown_jsonl(l.breakdown(r.system).string(), r);
    log << "eval " << r.system << ": BLEU " << fixed(r.bleu_percent, 2) << " over " << r.count << " test pairs\n";
  }
  eval::write_report_tsv(l.report_tsv().string(), reports);
  return reports;
}

std::string format_report(const std::vector<eval::ScoreReport>& reports) {
  std::map<std::string, const eval::ScoreReport*> by_name;
  for (const auto& r : reports) by_name[r.system] = &r;
  const auto rnn = by_name.find("rnn");
  auto row = [&](const eval::ScoreReport& r) {
    std::string delta;
    if (rnn != by_name.end() && r.system != "rnn") {
      const double d = r.bleu_percent - rnn->second->bleu_percent;
      delta = (d >= 0 ? "+" : "") + fixed(d, 2);
    }
    return "| " + r.system + " | " + fixed(r.bleu_percent, 2) + " | " + delta + " | " + std::to_string(r.count) + " |\n";
  };
  std::string out = "Results (BLEU, mean of sentence scores)\n\n";
  out += "| System | BLEU | vs rnn | Test pairs |\n|---|---:|---:|---:|\n";
  for (const auto& name : kSystems) {
    auto it = by_name.find(name);
    out += it == by_name.end() ? "| " + name + " | n/a | | |\n" : row(*it->second);
  }
  std::string extra;
  for (const auto& r : reports) {
    if (std::find(kSystems.begin(), kSystems.end(), r.system) == kSystems.end()) extra += row(r);
  }
  if (!extra.empty()) out += "\nBeam search\n\n| System | BLEU | vs rnn | Test pairs |\n|---|---:|---:|---:|\n" + extra;
  out +=
      "\nDesk scale: small models trained from scratch on a small corpus. These scores are not comparable to\n"
      "large-scale published numbers (e.g. 52.25 for the replicated RNN baseline, 63.19 for the best\n"
      "pretrained model with atomic API tokens).\n";
  return out;
}

std::string cmd_report(const ExperimentConfig& c, std::ostream& log) {
  const Layout l = layout(c);
  require(l.report_tsv(), "report", "eval");
  const std::string text = format_report(eval::read_report_tsv(l.report_tsv().string()));
  std::ofstream out(l.report_md(), std::ios::binary);
  if (!out) throw IoError("cannot write " + l.report_md().string());
  out << text;
  log << "report: " << l.report_md().string() << '\n';
  return text;
}

}  // namespace apiseq::cli
