#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace apiseq::javacorpus {

enum class ExprKind {
  kLiteral,      // text = literal spelling; type = "String" for string literals
  kName,         // text = identifier
  kThis,
  kSuper,
  kFieldAccess,  // target.text
  kCall,         // [target.]text(args)
  kNew,          // new type(args)
  kNewArray,     // new type[..] or array initializer; args = dims and elements
  kUnary,        // text = operator; operands[0]
  kBinary,       // text = operator; operands[0], operands[1]
  kAssign,       // text = operator; operands[0] = lhs, operands[1] = rhs
  kConditional,  // operands = cond, then, else
  kCast,         // type; operands[0]
  kInstanceOf,   // type; operands[0]
  kArrayAccess,  // operands = array, index
  kClassLiteral, // type.class
};

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Expr {
  ExprKind kind = ExprKind::kLiteral;
  std::string text;
  std::string type;
  ExprPtr target;
  std::vector<ExprPtr> operands;
  std::vector<ExprPtr> args;
  int line = 0;
  int col = 0;
};

enum class StmtKind {
  kBlock,
  kLocalVar,
  kExpr,
  kIf,
  kFor,
  kForEach,
  kWhile,
  kDoWhile,
  kReturn,
  kThrow,
  kBreak,
  kContinue,
  kEmpty,
  kTry,
  kSynchronized,
  kAssert,
};

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;

struct Declarator {
  std::string name;
  ExprPtr init;  // may be null
};

/// One statement. Which members are used depends on `kind`:
///   kBlock: body.  kLocalVar: type, declarators.  kExpr/kReturn/kThrow: expr.
///   kIf: expr, then_branch, else_branch.  kWhile/kDoWhile: expr, then_branch.
///   kFor: init, expr (condition), updates, then_branch.
///   kForEach: type, declarators[0].name, expr (iterable), then_branch.
///   kTry: init (resources), body (try block), catches, else_branch (finally).
///   kSynchronized: expr, then_branch.  kAssert: expr, updates (message).
struct Stmt {
  StmtKind kind = StmtKind::kEmpty;
  std::string type;
  std::vector<Declarator> declarators;
  ExprPtr expr;
  StmtPtr then_branch;
  StmtPtr else_branch;
  std::vector<StmtPtr> init;
  std::vector<ExprPtr> updates;
  std::vector<StmtPtr> body;
  std::vector<StmtPtr> catches;
  int line = 0;
};

/// Variable name -> declared (erased, simple) class name.
using TypeEnv = std::map<std::string, std::string>;

/// Class -> member (method or field) -> declared type, for every class
/// declared in the same source. Used to follow chained calls.
using MemberTypes = std::map<std::string, std::map<std::string, std::string>>;

struct MethodAst {
  std::string name;
  std::string class_name;
  std::string return_type;
  std::optional<std::string> doc_comment;
  Stmt body;  // kBlock; empty for abstract/interface methods
  bool has_body = false;
  TypeEnv type_env;
  std::shared_ptr<const MemberTypes> member_types;
  /// Receivers of invocations that resolve neither through type_env nor as
  /// a class name; calls on them are not emitted.
  std::vector<std::string> unresolved_receivers;
  int line = 0;
};

struct ClassDecl {
  std::string name;
  TypeEnv fields;
  std::vector<MethodAst> methods;
};

struct CompilationUnit {
  std::vector<ClassDecl> classes;  // nested classes flattened, in source order
  std::shared_ptr<const MemberTypes> member_types;
};

}  // namespace apiseq::javacorpus
