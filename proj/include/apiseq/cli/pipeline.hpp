#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "apiseq/cli/config.hpp"
#include "apiseq/eval/bleu.hpp"
#include "apiseq/javacorpus/types.hpp"
#include "apiseq/tokenizer/injection.hpp"

namespace apiseq::cli {

/// Artifact locations under the output directory.
struct Layout {
  std::filesystem::path root;

  std::filesystem::path corpus() const { return root / "corpus.jsonl"; }
  std::filesystem::path split(const std::string& part) const { return root / "split" / (part + ".jsonl"); }
  std::filesystem::path vocab() const { return root / "tokenizer" / "vocab.txt"; }
  std::filesystem::path plan(const std::string& arm) const { return root / "tokenizer" / ("plan-" + arm + ".jsonl"); }
  std::filesystem::path pretrained() const { return root / "models" / "pretrained.ckpt"; }
  std::filesystem::path checkpoint(const std::string& arm) const { return root / "models" / (arm + ".ckpt"); }
  std::filesystem::path train_log(const std::string& arm) const { return root / "logs" / (arm + ".tsv"); }
  std::filesystem::path search_index() const { return root / "baselines" / "search_index.jsonl"; }
  std::filesystem::path api_index() const { return root / "baselines" / "api_index.jsonl"; }
  std::filesystem::path translation_table() const { return root / "baselines" / "ibm1.tsv"; }
  std::filesystem::path breakdown(const std::string& system) const { return root / "eval" / (system + ".jsonl"); }
  std::filesystem::path report_tsv() const { return root / "report.tsv"; }
  std::filesystem::path report_md() const { return root / "report.md"; }
};

inline Layout layout(const ExperimentConfig& c) { return Layout{c.out_dir}; }

/// Strategy and architecture behind a neural arm.
tokenizer::InjectionStrategy arm_strategy(const std::string& arm);
seq2seq::ModelConfig arm_model_config(const ExperimentConfig& config, const std::string& arm);

/// The RNN path keeps the `cap` most frequent training APIs (ties by name)
/// as atomic tokens; the rest stay subword-split.
std::vector<std::string> capped_api_names(const javacorpus::Corpus& train, std::size_t cap);

/// Texts the subword vocabulary is trained on: each annotation and each
/// rendered API sequence.
std::vector<std::string> tokenizer_texts(const javacorpus::Corpus& train);

void cmd_extract(const ExperimentConfig& config, const std::filesystem::path& root,
                 const std::filesystem::path& out, std::ostream& log);
void cmd_split(const ExperimentConfig& config, const std::filesystem::path& corpus, std::ostream& log);
void cmd_train_tokenizer(const ExperimentConfig& config, std::ostream& log);
void cmd_pretrain(const ExperimentConfig& config, std::ostream& log);
void cmd_finetune(const ExperimentConfig& config, std::ostream& log);
javacorpus::ApiSequence cmd_generate(const ExperimentConfig& config, const std::string& arm,
                                     const std::string& query, std::ostream& log);
void cmd_index(const ExperimentConfig& config, std::ostream& log);
javacorpus::ApiSequence cmd_mine(const ExperimentConfig& config, const std::string& query, std::ostream& log);
void cmd_align(const ExperimentConfig& config, std::ostream& log);
std::vector<eval::ScoreReport> cmd_eval(const ExperimentConfig& config, std::ostream& log);

/// Markdown table of the six systems (BLEU, improvement over the RNN row,
/// example count), any extra beam rows, and a desk-scale footnote.
std::string format_report(const std::vector<eval::ScoreReport>& reports);
std::string cmd_report(const ExperimentConfig& config, std::ostream& log);

}  // namespace apiseq::cli
