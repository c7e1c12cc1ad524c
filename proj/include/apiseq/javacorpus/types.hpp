#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace apiseq::javacorpus {

/// One API invocation, rendered `Class.method` or `Class.new`.
struct ApiCall {
  std::string class_name;
  std::string member;

  std::string render() const { return class_name + "." + member; }

  /// Inverse of render(). Rejects anything that is not exactly two
  /// non-empty, whitespace-free parts around a single dot.
  static std::optional<ApiCall> parse(std::string_view text);

  friend bool operator==(const ApiCall&, const ApiCall&) = default;
  friend auto operator<=>(const ApiCall&, const ApiCall&) = default;
};

using ApiSequence = std::vector<ApiCall>;

std::string render(const ApiSequence& seq);
std::vector<std::string> render_tokens(const ApiSequence& seq);

struct Annotation {
  std::string text;
  std::vector<std::string> tokens;

  /// Tokens joined by single spaces; the canonical model input.
  std::string normalized() const;
};

struct AnnotatedPair {
  Annotation annotation;
  ApiSequence sequence;
  std::string source_id;
};

using Corpus = std::vector<AnnotatedPair>;

struct CorpusSplit {
  Corpus train;
  Corpus valid;
  Corpus test;
  std::uint64_t seed = 0;
};

/// Lowercase, split on non-alphanumerics, drop empties.
std::vector<std::string> annotation_tokens(std::string_view text);

}  // namespace apiseq::javacorpus
