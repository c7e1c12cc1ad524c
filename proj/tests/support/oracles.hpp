// Brute-force reference implementations shared by the unit and acceptance tests.
#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "apiseq/baselines/bm25.hpp"
#include "apiseq/baselines/patterns.hpp"
#include "apiseq/javacorpus/types.hpp"

namespace apiseq::oracles {

using baselines::DocId;
using baselines::IndexedDoc;
using baselines::MinedPattern;
using baselines::Terms;
using javacorpus::ApiSequence;

/// One call per letter: "AB" -> [A.m, B.m].
inline ApiSequence letter_seq(std::string_view letters) {
  ApiSequence s;
  for (char c : letters) s.push_back({std::string(1, c), "m"});
  return s;
}

// Direct evaluation of the scoring formula (k1 = 1.2, b = 0.75) by scanning
// every document.
inline double brute_bm25(const std::vector<IndexedDoc>& docs, const Terms& query, DocId id) {
  double total_len = 0;
  for (const auto& d : docs) total_len += static_cast<double>(d.terms.size());
  const double avg = total_len / static_cast<double>(docs.size());
  const IndexedDoc* doc = nullptr;
  for (const auto& d : docs) {
    if (d.doc_id == id) doc = &d;
  }
  std::set<std::string> seen;
  double score = 0.0;
  for (const auto& q : query) {
    if (!seen.insert(q).second) continue;
    double df = 0;
    for (const auto& d : docs) df += std::count(d.terms.begin(), d.terms.end(), q) > 0 ? 1 : 0;
    const double tf = static_cast<double>(std::count(doc->terms.begin(), doc->terms.end(), q));
    if (tf == 0) continue;
    const double n = static_cast<double>(docs.size());
    const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
    const double len = static_cast<double>(doc->terms.size());
    score += idf * (tf * 2.2) / (tf + 1.2 * (0.25 + 0.75 * len / avg));
  }
  return score;
}

/// Every positive brute-force score, best first, ties by ascending doc id.
inline std::vector<baselines::SearchHit> brute_ranking(const std::vector<IndexedDoc>& docs, const Terms& query) {
  std::vector<baselines::SearchHit> out;
  for (const auto& d : docs) {
    const double s = brute_bm25(docs, query, d.doc_id);
    if (s > 0) out.push_back({d.doc_id, s});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::abs(a.score - b.score) > 1e-12 ? a.score > b.score : a.doc_id < b.doc_id;
  });
  return out;
}

/// n documents with sparse, shuffled ids over a nine-word vocabulary.
inline std::vector<IndexedDoc> random_docs(std::mt19937& rng, std::size_t n) {
  std::vector<IndexedDoc> docs;
  std::vector<DocId> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<DocId>(i * 3 + rng() % 3);
  std::shuffle(ids.begin(), ids.end(), rng);  // insertion order must not matter
  for (auto id : ids) {
    IndexedDoc d;
    d.doc_id = id;
    const std::size_t len = rng() % 12;
    for (std::size_t k = 0; k < len; ++k) d.terms.push_back("w" + std::to_string(rng() % 9));
    d.payload = letter_seq(std::string(1, static_cast<char>('A' + id % 26)));
    docs.push_back(std::move(d));
  }
  return docs;
}

inline bool contains(const ApiSequence& hay, const ApiSequence& needle) {
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

// Enumerates every contiguous subsequence, counts support by scanning, and
// checks closure against every other frequent pattern.
inline std::vector<MinedPattern> brute_mine(const std::vector<ApiSequence>& seqs, std::size_t min_sup,
                                            std::size_t max_len) {
  std::set<ApiSequence> candidates;
  for (const auto& s : seqs) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      for (std::size_t j = i + 1; j <= s.size() && j - i <= max_len; ++j) {
        candidates.emplace(s.begin() + static_cast<long>(i), s.begin() + static_cast<long>(j));
      }
    }
  }
  std::vector<MinedPattern> frequent;
  for (const auto& c : candidates) {
    std::size_t sup = 0;
    for (const auto& s : seqs) sup += contains(s, c);
    if (sup >= min_sup) frequent.push_back({c, sup, -1});
  }
  std::vector<MinedPattern> closed;
  for (const auto& p : frequent) {
    bool is_closed = true;
    for (const auto& q : frequent) {
      if (q.subsequence.size() > p.subsequence.size() && q.support == p.support &&
          contains(q.subsequence, p.subsequence)) {
        is_closed = false;
      }
    }
    if (is_closed) closed.push_back(p);
  }
  std::sort(closed.begin(), closed.end(), baselines::pattern_before);
  return closed;
}

inline std::string show(const std::vector<MinedPattern>& ps) {
  std::string out;
  for (const auto& p : ps) out += javacorpus::render(p.subsequence) + ":" + std::to_string(p.support) + " ";
  return out;
}

/// The exhaustive mining grid: 1-8 sequences of length 0-6 over 1-3 letters,
/// six random draws each, min_support 1-4 and max_len 1-6. Calls
/// visit(seqs, min_sup, max_len) for every instance.
template <typename Visit>
void for_each_mining_instance(Visit&& visit) {
  std::mt19937 rng(17);
  for (std::size_t n_seq = 1; n_seq <= 8; ++n_seq) {
    for (std::size_t max_seq_len = 0; max_seq_len <= 6; ++max_seq_len) {
      for (int alphabet = 1; alphabet <= 3; ++alphabet) {
        for (int rep = 0; rep < 6; ++rep) {
          std::vector<ApiSequence> seqs;
          for (std::size_t i = 0; i < n_seq; ++i) {
            std::string s;
            for (std::size_t k = 0, len = rng() % (max_seq_len + 1); k < len; ++k) {
              s += static_cast<char>('A' + rng() % static_cast<unsigned>(alphabet));
            }
            seqs.push_back(letter_seq(s));
          }
          for (std::size_t min_sup = 1; min_sup <= 4; ++min_sup) {
            for (std::size_t max_len = 1; max_len <= 6; ++max_len) visit(seqs, min_sup, max_len);
          }
        }
      }
    }
  }
}

inline constexpr int kMiningGridSize = 8 * 7 * 3 * 6 * 4 * 6;

}  // namespace apiseq::oracles
