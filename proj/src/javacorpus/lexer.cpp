#include "lexer.hpp"

#include <array>
#include <cctype>

#include "apiseq/javacorpus/parser.hpp"

namespace apiseq::javacorpus::detail {
namespace {

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c == '$' || c >= 0x80; }
bool ident_part(unsigned char c) { return ident_start(c) || std::isdigit(c); }

// Longest first; nothing here starts with '>'.
constexpr std::array<std::string_view, 38> kOps = {
    "<<=", "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=", "+=", "-=",
    "*=",  "/=",  "&=", "|=", "^=", "%=", "<<", "(",  ")",  "{",  "}",  "[",  "]",
    ";",   ",",   ".",  "@",  "=",  "<",  "!",  "~",  "?",  ":",  "+",  "-"};
constexpr std::string_view kSingleOps = "*/&|^%>";

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space_and_comments(out);
      Token tok;
      tok.line = line_;
      tok.col = col_;
      tok.offset = pos_;
      if (pos_ >= src_.size()) {
        tok.kind = TokKind::kEnd;
        tok.end = pos_;
        out.push_back(tok);
        return out;
      }
      const auto c = static_cast<unsigned char>(src_[pos_]);
      if (ident_start(c)) {
        while (pos_ < src_.size() && ident_part(static_cast<unsigned char>(src_[pos_]))) advance();
        tok.kind = TokKind::kIdent;
      } else if (std::isdigit(c) || (c == '.' && pos_ + 1 < src_.size() &&
                                     std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
        lex_number();
        tok.kind = TokKind::kNumber;
      } else if (c == '"') {
        lex_string(tok);
        tok.kind = TokKind::kString;
      } else if (c == '\'') {
        lex_quoted('\'', tok);
        tok.kind = TokKind::kChar;
      } else {
        lex_op(tok);
        tok.kind = TokKind::kOp;
      }
      tok.end = pos_;
      tok.text = std::string(src_.substr(tok.offset, pos_ - tok.offset));
      out.push_back(std::move(tok));
    }
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  bool starts_with(std::string_view s) const { return src_.substr(pos_, s.size()) == s; }

  void skip_space_and_comments(std::vector<Token>& out) {
    while (pos_ < src_.size()) {
      const auto c = static_cast<unsigned char>(src_[pos_]);
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f') {
        advance();
      } else if (starts_with("//")) {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (starts_with("/*")) {
        const bool doc = starts_with("/**") && !starts_with("/**/");
        Token tok;
        tok.line = line_;
        tok.col = col_;
        tok.offset = pos_;
        const auto close = src_.find("*/", pos_ + 2);
        if (close == std::string_view::npos) throw SyntaxError(line_, col_, "end of comment");
        const auto body_start = pos_ + (doc ? 3 : 2);
        while (pos_ < close + 2) advance();
        if (doc) {
          tok.kind = TokKind::kDoc;
          tok.text = std::string(src_.substr(body_start, close - body_start));
          tok.end = pos_;
          out.push_back(std::move(tok));
        }
      } else if (c < 0x20 || c == 0x7f) {
        throw SyntaxError(line_, col_, "printable character");
      } else {
        return;
      }
    }
  }

  void lex_number() {
    while (pos_ < src_.size()) {
      const auto c = static_cast<unsigned char>(src_[pos_]);
      if (std::isalnum(c) || c == '_' || c == '.') {
        // exponent signs: 1e-5, 0x1p+3
        const bool exp = (c == 'e' || c == 'E' || c == 'p' || c == 'P');
        advance();
        if (exp && pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) advance();
      } else {
        break;
      }
    }
  }

  void lex_string(Token& tok) {
    if (starts_with("\"\"\"")) {
      const auto close = src_.find("\"\"\"", pos_ + 3);
      if (close == std::string_view::npos) throw SyntaxError(tok.line, tok.col, "end of text block");
      while (pos_ < close + 3) advance();
      return;
    }
    lex_quoted('"', tok);
  }

  void lex_quoted(char quote, const Token& tok) {
    advance();
    while (true) {
      if (pos_ >= src_.size() || src_[pos_] == '\n') {
        throw SyntaxError(tok.line, tok.col, std::string("closing ") + quote);
      }
      if (src_[pos_] == '\\') {
        advance();
        if (pos_ >= src_.size()) throw SyntaxError(tok.line, tok.col, "escape sequence");
        advance();
        continue;
      }
      if (src_[pos_] == quote) {
        advance();
        return;
      }
      advance();
    }
  }

  void lex_op(const Token& tok) {
    for (auto op : kOps) {
      if (starts_with(op)) {
        for (std::size_t i = 0; i < op.size(); ++i) advance();
        return;
      }
    }
    if (kSingleOps.find(src_[pos_]) != std::string_view::npos) {
      advance();
      return;
    }
    throw SyntaxError(tok.line, tok.col, "token");
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

}  // namespace

std::vector<Token> lex(std::string_view src) { return Lexer(src).run(); }

}  // namespace apiseq::javacorpus::detail
