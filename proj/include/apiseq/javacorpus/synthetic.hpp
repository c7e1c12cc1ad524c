#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "apiseq/javacorpus/types.hpp"

namespace apiseq::javacorpus {

struct SyntheticSpec {
  std::size_t pairs = 2000;
  std::size_t api_names = 150;  // classes * methods per class, rounded up to whole classes
  std::size_t methods_per_class = 5;
  std::size_t max_actions = 3;  // calls after the constructor
  std::uint64_t seed = 1;
};

/// The API vocabulary of a synthetic corpus: compound Java-style class names
/// (for example `BufferedFileReader`) each with a constructor and
/// methods_per_class − 1 compound method names. Deterministic in the seed.
std::vector<ApiCall> synthetic_apis(const SyntheticSpec& spec);

/// Annotated pairs over synthetic_apis(spec). Each pair picks one class and
/// one to max_actions of its methods; the API sequence is the constructor
/// followed by those calls, and the annotation verbalises the same intent
/// with per-word synonyms and optional filler, so the mapping is learnable
/// but not a string copy. Source ids are `synthetic#<index>`.
Corpus synthetic_corpus(const SyntheticSpec& spec);

}  // namespace apiseq::javacorpus
