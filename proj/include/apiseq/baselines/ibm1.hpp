#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "apiseq/baselines/bm25.hpp"
#include "apiseq/javacorpus/types.hpp"

namespace apiseq::baselines {

/// t(api | word). Only pairs that co-occur in some training pair are stored;
/// every stored row sums to 1.
struct TranslationTable {
  std::map<std::string, std::map<std::string, double>, std::less<>> t;
  std::set<std::string, std::less<>> vocab_words;
  std::set<std::string, std::less<>> vocab_apis;

  double prob(const std::string& word, const std::string& api) const;

  /// TSV `word<TAB>api<TAB>prob`, by word then descending prob.
  void save(const std::filesystem::path& path) const;
  static TranslationTable load(const std::filesystem::path& path);
};

/// Per-pair log-likelihood sum: sum_a log( (1/|W|) sum_w t(a|w) ).
double ibm1_log_likelihood(const TranslationTable& table, const javacorpus::Corpus& pairs);

/// IBM Model 1 EM over annotation tokens and API tokens, uniform start, no
/// NULL word. `log_likelihood`, when given, receives one value per
/// iteration (after its M-step). Throws EmptyCorpus.
TranslationTable train_ibm1(const javacorpus::Corpus& pairs, std::size_t iterations,
                            std::vector<double>* log_likelihood = nullptr);

inline constexpr double kSwimFloor = 1e-12;
inline constexpr std::size_t kSwimExpansion = 10;

/// APIs ranked by sum over query words of log max(t(a|w), floor). APIs that
/// no query word aligns to are left out, so the result is empty when no
/// query word is in the table's vocabulary.
std::vector<std::pair<std::string, double>> swim_expand(const TranslationTable& table,
                                                        const Terms& query, std::size_t m);

/// Expands the query into its top `m` APIs and runs BM25 over an index whose
/// documents are API tokens. Returns the payloads of the top k hits.
std::vector<javacorpus::ApiSequence> swim_rank(const TranslationTable& table,
                                               const InvertedIndex& index, const Terms& query,
                                               std::size_t k, std::size_t m = kSwimExpansion);

}  // namespace apiseq::baselines
