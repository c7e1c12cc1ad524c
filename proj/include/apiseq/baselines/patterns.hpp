#pragma once

#include <cstddef>
#include <vector>

#include "apiseq/javacorpus/types.hpp"

namespace apiseq::baselines {

struct MinedPattern {
  javacorpus::ApiSequence subsequence;
  std::size_t support = 0;
  int cluster_id = -1;
};

/// True when `a` should be listed before `b`: higher support, then longer,
/// then lexicographically smaller rendering.
bool pattern_before(const MinedPattern& a, const MinedPattern& b);

/// Closed frequent contiguous n-grams (1 <= n <= max_len). Support counts
/// containing sequences, not occurrences. A pattern is dropped when a
/// frequent super-pattern of length <= max_len has the same support.
/// Output is ordered by pattern_before.
std::vector<MinedPattern> mine_patterns(const std::vector<javacorpus::ApiSequence>& sequences,
                                        std::size_t min_support, std::size_t max_len);

/// Jaccard similarity of the sets of contiguous sub-n-grams of two patterns.
double ngram_jaccard(const javacorpus::ApiSequence& a, const javacorpus::ApiSequence& b);

/// Single-link clustering (edges where ngram_jaccard >= threshold). Returns
/// one representative per cluster, the member ordered first by
/// pattern_before, with cluster_id set; representatives keep that order.
std::vector<MinedPattern> cluster_patterns(const std::vector<MinedPattern>& patterns,
                                           double similarity_threshold);

}  // namespace apiseq::baselines
