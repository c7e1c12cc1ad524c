#include "apiseq/baselines/patterns.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

namespace apiseq::baselines {

using javacorpus::ApiSequence;

bool pattern_before(const MinedPattern& a, const MinedPattern& b) {
  if (a.support != b.support) return a.support > b.support;
  if (a.subsequence.size() != b.subsequence.size()) return a.subsequence.size() > b.subsequence.size();
  return javacorpus::render_tokens(a.subsequence) < javacorpus::render_tokens(b.subsequence);
}

std::vector<MinedPattern> mine_patterns(const std::vector<ApiSequence>& sequences,
                                        std::size_t min_support, std::size_t max_len) {
  if (min_support == 0) min_support = 1;
  // Support of every contiguous n-gram, counted once per sequence.
  std::map<ApiSequence, std::size_t> support;
  for (const auto& seq : sequences) {
    std::set<ApiSequence> present;
    for (std::size_t i = 0; i < seq.size(); ++i) {
      for (std::size_t n = 1; n <= max_len && i + n <= seq.size(); ++n) {
        present.emplace(seq.begin() + static_cast<std::ptrdiff_t>(i),
                        seq.begin() + static_cast<std::ptrdiff_t>(i + n));
      }
    }
    for (auto& p : present) ++support[p];
  }

  // A one-step extension with equal support is enough to rule out closure:
  // any equal-support super-pattern implies one.
  std::vector<MinedPattern> out;
  std::set<ApiSequence> not_closed;
  for (const auto& [pattern, sup] : support) {
    if (sup < min_support || pattern.size() < 2) continue;
    const ApiSequence prefix(pattern.begin(), pattern.end() - 1);
    const ApiSequence suffix(pattern.begin() + 1, pattern.end());
    if (support.at(prefix) == sup) not_closed.insert(prefix);
    if (support.at(suffix) == sup) not_closed.insert(suffix);
  }
  for (const auto& [pattern, sup] : support) {
    if (sup >= min_support && !not_closed.count(pattern)) out.push_back({pattern, sup, -1});
  }
  std::sort(out.begin(), out.end(), pattern_before);
  return out;
}

namespace {

std::set<ApiSequence> ngram_set(const ApiSequence& s) {
  std::set<ApiSequence> grams;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = i + 1; j <= s.size(); ++j) {
      grams.emplace(s.begin() + static_cast<std::ptrdiff_t>(i), s.begin() + static_cast<std::ptrdiff_t>(j));
    }
  }
  return grams;
}

}  // namespace

double ngram_jaccard(const ApiSequence& a, const ApiSequence& b) {
  const auto ga = ngram_set(a), gb = ngram_set(b);
  if (ga.empty() && gb.empty()) return 1.0;
  std::size_t inter = 0;
  for (const auto& g : ga) inter += gb.count(g);
  return static_cast<double>(inter) / static_cast<double>(ga.size() + gb.size() - inter);
}

std::vector<MinedPattern> cluster_patterns(const std::vector<MinedPattern>& patterns,
                                           double similarity_threshold) {
  const std::size_t n = patterns.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (ngram_jaccard(patterns[i].subsequence, patterns[j].subsequence) >= similarity_threshold) {
        parent[find(i)] = find(j);
      }
    }
  }
  std::map<std::size_t, std::size_t> best;  // root -> member index
  for (std::size_t i = 0; i < n; ++i) {
    auto [it, inserted] = best.emplace(find(i), i);
    if (!inserted && pattern_before(patterns[i], patterns[it->second])) it->second = i;
  }
  std::vector<MinedPattern> reps;
  for (const auto& [root, idx] : best) reps.push_back(patterns[idx]);
  std::sort(reps.begin(), reps.end(), pattern_before);
  for (std::size_t c = 0; c < reps.size(); ++c) reps[c].cluster_id = static_cast<int>(c);
  return reps;
}

}  // namespace apiseq::baselines
