#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace apiseq::tokenizer {

/// Word-start marker prepended to every whitespace-delimited word before
/// merging (U+2581, as in SentencePiece).
inline constexpr std::string_view kWordMarker = "\xE2\x96\x81";

enum SpecialId : int { kPad = 0, kBos = 1, kEos = 2, kUnk = 3, kMask = 4, kNumSpecials = 5 };

std::string_view special_token(int id);

/// Byte-pair vocabulary over UTF-8 code points. Ids: specials, then the
/// sorted alphabet, then one id per merge in merge order.
class SubwordVocab {
 public:
  using Merge = std::pair<std::string, std::string>;

  SubwordVocab() = default;
  SubwordVocab(std::vector<std::string> alphabet, std::vector<Merge> merges);

  std::size_t size() const { return id_to_token_.size(); }
  const std::vector<Merge>& merges() const { return merges_; }
  const std::vector<std::string>& tokens() const { return id_to_token_; }

  /// -1 when absent.
  int id(std::string_view token) const;
  const std::string& token(int id) const;  // throws UnknownId

  /// BPE pieces of one word (marker included), applying merges by rank.
  std::vector<std::string> split_word(std::string_view word) const;
  std::vector<int> encode_word(std::string_view word) const;

  /// FNV-1a over the serialized form.
  std::uint64_t fingerprint() const;

  void save(const std::filesystem::path& path) const;
  static SubwordVocab load(const std::filesystem::path& path);
  std::string serialize() const;

 private:
  std::vector<Merge> merges_;
  std::map<Merge, int> merge_rank_;
  std::vector<std::string> id_to_token_;
  std::map<std::string, int, std::less<>> token_to_id_;
};

/// UTF-8 code points of `text` (malformed bytes become single-byte symbols).
std::vector<std::string> code_points(std::string_view text);

/// Whitespace-split words.
std::vector<std::string> split_words(std::string_view text);

/// Learns merges from all whitespace-delimited words of `corpus_texts` until
/// the vocabulary holds `vocab_size` entries or fewer than `min_pair_count`
/// occurrences of the best pair remain. Ties go to the lexicographically
/// smallest pair. Throws VocabTooSmall.
SubwordVocab train_bpe(const std::vector<std::string>& corpus_texts, std::size_t vocab_size,
                       std::size_t min_pair_count = 1);

}  // namespace apiseq::tokenizer
