#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "apiseq/matrix.hpp"
#include "apiseq/tokenizer/bpe.hpp"

namespace apiseq::tokenizer {

enum class InjectionStrategy { kDefault, kTa1, kTa2 };

std::string_view to_string(InjectionStrategy s);
/// Accepts "default", "ta1", "ta2" (case-insensitive).
std::optional<InjectionStrategy> parse_strategy(std::string_view text);

struct PlanEntry {
  enum class Init { kMeanOfSlices, kFreshRandom };

  std::string api;
  int token_id = -1;
  Init init = Init::kMeanOfSlices;
  std::vector<int> slices;  // kMeanOfSlices only
  std::uint64_t seed = 0;   // kFreshRandom only
};

/// Extra atomic tokens appended after the base vocabulary.
class InjectionPlan {
 public:
  InjectionPlan() = default;
  InjectionPlan(InjectionStrategy strategy, std::size_t base_size, std::vector<PlanEntry> entries);

  InjectionStrategy strategy() const { return strategy_; }
  std::size_t base_size() const { return base_size_; }
  std::size_t extended_size() const { return base_size_ + entries_.size(); }
  const std::vector<PlanEntry>& entries() const { return entries_; }

  /// -1 when `word` is not injected.
  int lookup(std::string_view word) const;
  /// nullptr for base-vocabulary ids.
  const PlanEntry* entry_for_id(int id) const;

  std::uint64_t fingerprint() const;

  void save(const std::filesystem::path& path) const;
  static InjectionPlan load(const std::filesystem::path& path, InjectionStrategy strategy,
                            std::size_t base_size);

 private:
  InjectionStrategy strategy_ = InjectionStrategy::kDefault;
  std::size_t base_size_ = 0;
  std::vector<PlanEntry> entries_;
  std::map<std::string, int, std::less<>> by_name_;
};

/// DEFAULT gives an empty plan; TA1 records the BPE slices of each name;
/// TA2 gives each name its own seed derived from (global_seed, name).
/// Throws DuplicateName.
InjectionPlan build_injection(const std::vector<std::string>& api_names, const SubwordVocab& vocab,
                              InjectionStrategy strategy, std::uint64_t global_seed = 0);

/// Base rows followed by one row per plan entry. Throws DimensionMismatch.
Matrix initial_embedding(const InjectionPlan& plan, const Matrix& base_embeddings);

inline constexpr double kFreshInitStddev = 0.02;

/// Plan lookup first, then BPE. Characters outside the alphabet map to UNK.
std::vector<int> tokenize(std::string_view text, const SubwordVocab& vocab,
                          const InjectionPlan& plan, bool add_bos_eos = false);

/// Concatenates pieces, turning word markers into spaces; injected ids
/// render as their API name. PAD/BOS/EOS are dropped. Throws UnknownId.
std::string detokenize(const std::vector<int>& ids, const SubwordVocab& vocab,
                       const InjectionPlan& plan);

}  // namespace apiseq::tokenizer
