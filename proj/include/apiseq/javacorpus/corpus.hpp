#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "apiseq/javacorpus/types.hpp"

namespace apiseq::javacorpus {

/// First sentence of a Javadoc body (the text between `/**` and `*/`):
/// leading `*` gutters, HTML tags and block tags (`@param ...` onward) are
/// removed, inline tags are replaced by their text. Returns nullopt when no
/// word survives.
std::optional<Annotation> extract_annotation(std::string_view doc_comment);

struct CorpusStats {
  std::size_t files = 0;
  std::size_t methods = 0;
  std::size_t documented = 0;
  std::size_t pairs = 0;
  std::size_t skipped_files = 0;
  std::size_t empty_sequences = 0;
  std::size_t unresolved_calls = 0;
  std::vector<std::string> log;  // one line per skipped file
};

/// Walks `root` for `.java` files in lexicographic path order and emits one
/// pair per documented method whose API sequence is non-empty. Files that
/// cannot be read or parsed are skipped and counted. Throws EmptyCorpus when
/// no pair is produced.
Corpus build_corpus(const std::filesystem::path& root, CorpusStats* stats = nullptr);

/// Extracts pairs from one source text; `file_id` prefixes the source ids.
/// Throws SyntaxError.
Corpus extract_pairs(std::string_view source, const std::string& file_id,
                     CorpusStats* stats = nullptr);

/// Seeded shuffle, then `test_count` test pairs, round(valid_fraction * rest)
/// validation pairs, and the remainder for training. Throws TooFewPairs.
CorpusSplit split_corpus(const Corpus& pairs, std::uint64_t seed, std::size_t test_count,
                         double valid_fraction);

/// JSONL, one `{"source_id", "annotation", "api_seq"}` object per line.
std::string to_jsonl_line(const AnnotatedPair& pair);
void write_corpus(const std::filesystem::path& path, const Corpus& corpus);
Corpus read_corpus(const std::filesystem::path& path);

}  // namespace apiseq::javacorpus
