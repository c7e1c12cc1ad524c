#pragma once

#include <map>
#include <string>
#include <vector>

namespace apiseq::eval {

using Tokens = std::vector<std::string>;

/// Per-sentence BLEU with add-one smoothed n-gram precisions.
struct BleuBreakdown {
  std::vector<double> precisions;  // p_n for n = 1..N, each in (0, 1]
  std::vector<double> weights;     // w_n = 1/N
  double brevity_penalty = 1.0;
  std::size_t candidate_length = 0;
  std::size_t reference_length = 0;
  double bleu_percent = 0.0;
};

/// (clipped n-gram hits + 1) / (candidate n-grams + 1). Clipping credits each
/// candidate n-gram at most as often as it occurs in the reference.
double modified_precision(const Tokens& candidate, const Tokens& reference, int n);

/// 1 when c > r, otherwise exp(1 - r/c). An empty candidate gets 0.
double brevity_penalty(std::size_t c, std::size_t r);

/// Throws EmptyReference for an empty reference.
BleuBreakdown bleu(const Tokens& candidate, const Tokens& reference, int max_order = 4);

enum class Aggregation { kSentenceMean, kPooled };

struct ScoredExample {
  Tokens candidate;
  Tokens reference;
  BleuBreakdown breakdown;
};

struct ScoreReport {
  std::string system;
  double bleu_percent = 0.0;
  std::size_t count = 0;
  Aggregation aggregation = Aggregation::kSentenceMean;
  std::vector<ScoredExample> examples;
};

/// Mean of sentence-level BLEU by default. kPooled sums clipped hits and
/// totals across the corpus before smoothing. Throws EmptyList.
ScoreReport corpus_score(const std::vector<std::pair<Tokens, Tokens>>& pairs,
                         std::string system = "",
                         Aggregation aggregation = Aggregation::kSentenceMean,
                         int max_order = 4);

/// `system<TAB>bleu<TAB>n_examples` lines, one per report.
void write_report_tsv(const std::string& path, const std::vector<ScoreReport>& reports);
std::vector<ScoreReport> read_report_tsv(const std::string& path);

/// One JSON object per example with candidate, reference and breakdown.
void write_breakdown_jsonl(const std::string& path, const ScoreReport& report);
ScoreReport read_breakdown_jsonl(const std::string& path);

}  // namespace apiseq::eval
