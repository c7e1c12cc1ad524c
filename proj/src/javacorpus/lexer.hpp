#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace apiseq::javacorpus::detail {

enum class TokKind { kIdent, kNumber, kString, kChar, kOp, kDoc, kEnd };

struct Token {
  TokKind kind = TokKind::kEnd;
  std::string text;  // string literals keep their quotes
  int line = 1;
  int col = 1;
  std::size_t offset = 0;
  std::size_t end = 0;
};

/// Splits Java source into tokens. Ordinary comments are dropped; `/** */`
/// comments become kDoc tokens holding the text between the delimiters.
/// `>` is always a single-character token so that nested type arguments
/// close cleanly; the parser reassembles shift and comparison operators.
/// Throws SyntaxError on unterminated literals/comments or stray bytes.
std::vector<Token> lex(std::string_view src);

}  // namespace apiseq::javacorpus::detail
