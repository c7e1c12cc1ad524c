// Command-line driver for the corpus, training, baseline and evaluation pipeline.
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "apiseq/cli/pipeline.hpp"
#include "apiseq/error.hpp"
#include "apiseq/javacorpus/types.hpp"

namespace cli = apiseq::cli;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

void print_sequence(const apiseq::javacorpus::ApiSequence& seq) {
  std::cout << apiseq::javacorpus::render(seq) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"API sequence generation from natural-language queries"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "experiment config file (INI sections)");
  app.add_option("--out", out_dir, "output directory (overrides output.dir)");
  app.add_option("--set", overrides, "override a config field, e.g. --set train.epochs=5");

  auto* extract = app.add_subcommand("extract", "extract annotation/API pairs from Java sources");
  std::string root, corpus_out;
  extract->add_option("--root", root, "directory of .java files (defaults to corpus.java_root)");
  extract->add_option("--output", corpus_out, "corpus JSONL (defaults to <out>/corpus.jsonl)");

  auto* split = app.add_subcommand("split", "split the corpus into train/valid/test");
  std::string corpus_in;
  split->add_option("--corpus", corpus_in, "corpus JSONL (defaults to <out>/corpus.jsonl)");

  app.add_subcommand("train-tokenizer", "learn the subword vocabulary and injection plans");
  app.add_subcommand("pretrain", "denoising pretraining of the base transformer");

  std::vector<std::string> arms;
  std::string strategy;
  auto* finetune = app.add_subcommand("finetune", "train one checkpoint per arm");
  finetune->add_option("--arm", arms, "arm(s) to train (defaults to train.arms)");
  finetune->add_option("--strategy", strategy, "shorthand for --arm transformer-<default|ta1|ta2>");

  auto* generate = app.add_subcommand("generate", "generate an API sequence for a query");
  std::string gen_arm = "transformer-ta2", query;
  generate->add_option("--arm", gen_arm, "neural arm")->capture_default_str();
  generate->add_option("--strategy", strategy, "shorthand for --arm transformer-<default|ta1|ta2>");
  generate->add_option("query", query, "natural-language query")->required();

  app.add_subcommand("index", "build the BM25 indexes for the baselines");
  auto* mine = app.add_subcommand("mine", "search-and-mine baseline for a query");
  mine->add_option("query", query, "natural-language query")->required();
  app.add_subcommand("align", "train the IBM Model 1 translation table");
  app.add_subcommand("eval", "score every system on the test split");
  app.add_subcommand("report", "render report.md from report.tsv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    cli::ExperimentConfig config;
    if (!config_path.empty()) config = cli::read_config(config_path);
    cli::apply_overrides(config, overrides);
    if (!out_dir.empty()) config.out_dir = out_dir;
    apiseq::cli::apply_seed_override(config);
    auto strategy_arm = [&strategy]() {
      if (strategy != "default" && strategy != "ta1" && strategy != "ta2") {
        throw apiseq::ConfigError("unknown strategy '" + strategy + "' (expected default, ta1 or ta2)");
      }
      return "transformer-" + strategy;
    };
    if (finetune->parsed()) {
      if (!strategy.empty()) arms.push_back(strategy_arm());
      if (!arms.empty()) config.arms = arms;
    }
    if (generate->parsed()) {
      if (!strategy.empty()) gen_arm = strategy_arm();
      if (!cli::is_neural_arm(gen_arm)) throw apiseq::ConfigError("unknown arm '" + gen_arm + "'");
    }
    cli::validate(config);

    auto& log = std::cerr;
    const std::string sub = app.get_subcommands().front()->get_name();
    if (sub == "extract") {
      if (root.empty()) root = config.java_root;
      if (root.empty()) throw apiseq::ConfigError("extract needs --root or corpus.java_root");
      cli::cmd_extract(config, root, corpus_out.empty() ? cli::layout(config).corpus() : std::filesystem::path(corpus_out), log);
    } else if (sub == "split") {
      cli::cmd_split(config, corpus_in.empty() ? cli::layout(config).corpus() : std::filesystem::path(corpus_in), log);
    } else if (sub == "train-tokenizer") {
      cli::cmd_train_tokenizer(config, log);
    } else if (sub == "pretrain") {
      cli::cmd_pretrain(config, log);
    } else if (sub == "finetune") {
      cli::cmd_finetune(config, log);
    } else if (sub == "generate") {
      print_sequence(cli::cmd_generate(config, gen_arm, query, log));
    } else if (sub == "index") {
      cli::cmd_index(config, log);
    } else if (sub == "mine") {
      print_sequence(cli::cmd_mine(config, query, log));
    } else if (sub == "align") {
      cli::cmd_align(config, log);
    } else if (sub == "eval") {
      cli::cmd_eval(config, log);
    } else if (sub == "report") {
      std::cout << cli::cmd_report(config, log);
    }
  } catch (const apiseq::NonFiniteLoss& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return 0;
}
