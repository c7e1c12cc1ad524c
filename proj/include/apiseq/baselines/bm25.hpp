#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "apiseq/javacorpus/types.hpp"

namespace apiseq::baselines {

using DocId = std::uint32_t;
using Terms = std::vector<std::string>;

/// Source text to search terms: newlines and tabs become spaces, text is cut
/// at non-alphanumerics, camelCase runs are split and everything is lowercased.
/// "readLine()\n" gives [read, line]; "HTTPServer" gives [http, server].
Terms preprocess_code_doc(std::string_view source_text);

struct IndexedDoc {
  DocId doc_id = 0;
  Terms terms;
  javacorpus::ApiSequence payload;
};

struct Posting {
  DocId doc_id;
  std::uint32_t tf;
  bool operator==(const Posting&) const = default;
};

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

class InvertedIndex {
 public:
  const std::map<std::string, std::vector<Posting>, std::less<>>& postings() const { return postings_; }
  const std::map<DocId, std::size_t>& doc_len() const { return doc_len_; }
  const std::map<DocId, javacorpus::ApiSequence>& payloads() const { return payload_; }
  double avg_len() const { return avg_len_; }
  std::size_t size() const { return doc_len_.size(); }

  void save(const std::filesystem::path& path) const;
  static InvertedIndex load(const std::filesystem::path& path);

 private:
  friend InvertedIndex build_index(const std::vector<IndexedDoc>& docs);

  std::map<std::string, std::vector<Posting>, std::less<>> postings_;
  std::map<DocId, std::size_t> doc_len_;
  std::map<DocId, javacorpus::ApiSequence> payload_;
  double avg_len_ = 0.0;
};

/// Throws DuplicateDocId.
InvertedIndex build_index(const std::vector<IndexedDoc>& docs);

struct SearchHit {
  DocId doc_id;
  double score;
};

/// ln((N - df + 0.5) / (df + 0.5) + 1)
double bm25_idf(std::size_t n_docs, std::size_t df);

/// Okapi BM25 over the distinct query terms. Descending score, ties by
/// ascending doc id, at most k hits, documents scoring zero are left out.
std::vector<SearchHit> bm25_search(const InvertedIndex& index, const Terms& query, std::size_t k,
                                   const Bm25Params& params = {});

}  // namespace apiseq::baselines
