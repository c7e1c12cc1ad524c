#pragma once

#include <string>
#include <string_view>

#include "apiseq/error.hpp"
#include "apiseq/javacorpus/ast.hpp"

namespace apiseq::javacorpus {

/// Input outside the supported Java subset, with the position of the
/// offending token and what the parser was looking for.
class SyntaxError : public Error {
 public:
  SyntaxError(int line, int col, std::string expected)
      : Error("SyntaxError", std::to_string(line) + ":" + std::to_string(col) +
                                 ": expected " + expected),
        line_(line),
        col_(col),
        expected_(std::move(expected)) {}

  int line() const { return line_; }
  int col() const { return col_; }
  const std::string& expected() const { return expected_; }

 private:
  int line_;
  int col_;
  std::string expected_;
};

/// Parses a whole `.java` file: package/imports, then class, interface and
/// enum declarations. Type arguments are erased and qualified type names
/// reduced to their last segment.
CompilationUnit parse_compilation_unit(std::string_view source);

/// Parses a bare member list (field declarations plus exactly one method,
/// optionally preceded by a doc comment) as if it were a class body.
/// Fields seed the method's type environment.
MethodAst parse_method(std::string_view source);

/// Reduces a declared type to the class name used in API calls:
/// `java.util.List<String>` -> `List`, `String[]` stays `String[]`.
std::string erase_type(std::string_view type);

}  // namespace apiseq::javacorpus
