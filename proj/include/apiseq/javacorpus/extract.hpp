#pragma once

#include <string>
#include <vector>

#include "apiseq/javacorpus/ast.hpp"
#include "apiseq/javacorpus/types.hpp"

namespace apiseq::javacorpus {

/// A call that was skipped because its receiver type is unknown.
struct UnresolvedReceiver {
  std::string name;  // receiver spelling, or "<expr>.m" for chain tails
  int line = 0;
};

/// Context for resolving receiver types while walking one method.
struct ExtractionContext {
  const TypeEnv* env = nullptr;
  const MemberTypes* members = nullptr;  // may be null
  std::string this_class;
};

/// API usage sequence of a method body, in evaluation order:
///   - arguments (and receiver sub-expressions) before the call itself;
///   - `new T(..)` emits `T.new`, a call on a receiver of type T emits `T.m`,
///     a call on a class name emits `Class.m`;
///   - statements concatenated; if/else emits condition, then, else;
///     loops emit header expressions then the body once.
/// Calls on `this`/`super` and unqualified calls are not API calls and are
/// dropped silently; calls on unknown receivers are reported in `warnings`.
ApiSequence extract_api_sequence(const MethodAst& method,
                                 std::vector<UnresolvedReceiver>* warnings = nullptr);

/// Extraction of a single statement; extraction of a block equals the
/// concatenation over its statements.
ApiSequence extract_statement(const Stmt& stmt, const ExtractionContext& ctx,
                              std::vector<UnresolvedReceiver>* warnings = nullptr);

/// Distinct receiver names that do not resolve, in first-use order.
std::vector<std::string> find_unresolved_receivers(const MethodAst& method);

}  // namespace apiseq::javacorpus
