#pragma once

#include <string_view>

#include "apiseq/baselines/bm25.hpp"
#include "apiseq/baselines/ibm1.hpp"
#include "apiseq/baselines/patterns.hpp"
#include "apiseq/javacorpus/types.hpp"

namespace apiseq::baselines {

struct MinerParams {
  std::size_t top_docs = 10;
  std::size_t min_support = 2;
  std::size_t max_len = 6;
  double similarity_threshold = 0.5;
};

/// Code search followed by pattern mining over the retrieved sequences.
/// Documents are the annotation plus the API names of each training pair.
class SearchMinerRecommender {
 public:
  SearchMinerRecommender(const javacorpus::Corpus& train, MinerParams params = {});
  explicit SearchMinerRecommender(InvertedIndex index, MinerParams params = {});

  /// Top cluster representative; falls back to the best retrieved sequence
  /// when nothing reaches min_support.
  javacorpus::ApiSequence recommend(std::string_view query) const;

  const InvertedIndex& index() const { return index_; }

 private:
  InvertedIndex index_;
  MinerParams params_;
};

std::vector<IndexedDoc> search_documents(const javacorpus::Corpus& train);
/// Documents whose terms are the API tokens themselves.
std::vector<IndexedDoc> api_documents(const javacorpus::Corpus& train);

class SwimRecommender {
 public:
  SwimRecommender(const javacorpus::Corpus& train, std::size_t em_iterations = 20);
  SwimRecommender(TranslationTable table, InvertedIndex api_index);

  javacorpus::ApiSequence recommend(std::string_view query) const;

  const TranslationTable& table() const { return table_; }
  const InvertedIndex& index() const { return index_; }

 private:
  TranslationTable table_;
  InvertedIndex index_;
};

}  // namespace apiseq::baselines
