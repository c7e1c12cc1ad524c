#include "apiseq/javacorpus/parser.hpp"

#include <cctype>
#include <set>
#include <unordered_map>

#include "apiseq/javacorpus/extract.hpp"
#include "lexer.hpp"

namespace apiseq::javacorpus {
namespace {

using detail::Token;
using detail::TokKind;

const std::set<std::string, std::less<>> kKeywords = {
    "abstract", "assert",     "boolean",  "break",     "byte",      "case",    "catch",
    "char",     "class",      "const",    "continue",  "default",   "do",      "double",
    "else",     "enum",       "extends",  "final",     "finally",   "float",   "for",
    "goto",     "if",         "implements", "import",  "instanceof", "int",    "interface",
    "long",     "native",     "new",      "package",   "private",   "protected", "public",
    "return",   "short",      "static",   "strictfp",  "super",     "switch",  "synchronized",
    "this",     "throw",      "throws",   "transient", "try",       "void",    "volatile",
    "while",    "true",       "false",    "null"};

const std::set<std::string, std::less<>> kPrimitives = {"boolean", "byte", "char",  "short", "int",
                                                        "long",    "float", "double", "void"};

const std::set<std::string, std::less<>> kModifiers = {
    "public",    "private",  "protected", "static", "final",    "abstract", "native",
    "synchronized", "transient", "volatile", "strictfp", "default", "sealed"};

const std::set<std::string, std::less<>> kAssignOps = {"=",  "+=", "-=", "*=",  "/=",  "&=",
                                                       "|=", "^=", "%=", "<<=", ">>=", ">>>="};

int binary_precedence(std::string_view op) {
  static const std::unordered_map<std::string_view, int> table = {
      {"||", 1}, {"&&", 2}, {"|", 3},  {"^", 4},  {"&", 5},  {"==", 6}, {"!=", 6},
      {"<", 7},  {">", 7},  {"<=", 7}, {">=", 7}, {"<<", 8}, {">>", 8}, {">>>", 8},
      {"+", 9},  {"-", 9},  {"*", 10}, {"/", 10}, {"%", 10}};
  auto it = table.find(op);
  return it == table.end() ? -1 : it->second;
}

class Parser {
 public:
  explicit Parser(std::string_view src) {
    std::string pending_doc;
    bool has_doc = false;
    for (auto& tok : detail::lex(src)) {
      if (tok.kind == TokKind::kDoc) {
        pending_doc = tok.text;
        has_doc = true;
        continue;
      }
      if (has_doc) docs_[toks_.size()] = pending_doc;
      has_doc = false;
      toks_.push_back(std::move(tok));
    }
  }

  CompilationUnit parse_unit() {
    if (is_ident("package")) {
      while (!is_op(";")) take();
      expect(";");
    }
    while (is_ident("import")) {
      while (!is_op(";")) {
        if (at_end()) fail("';'");
        take();
      }
      expect(";");
    }
    while (!at_end()) {
      if (accept(";")) continue;
      skip_modifiers();
      parse_type_decl();
    }
    return finish();
  }

  MethodAst parse_method_snippet() {
    ClassDecl cls;
    cls.name = "";
    while (!at_end()) parse_member(cls);
    if (cls.methods.size() != 1) {
      fail("exactly one method declaration");
    }
    unit_.classes.push_back(std::move(cls));
    auto unit = finish();
    return std::move(unit.classes.front().methods.front());
  }

 private:
  // ---- token helpers ------------------------------------------------------
  const Token& peek(std::size_t k = 0) const {
    const auto i = std::min(pos_ + k, toks_.size() - 1);
    return toks_[i];
  }
  bool at_end() const { return peek().kind == TokKind::kEnd; }
  bool is_op(std::string_view op, std::size_t k = 0) const {
    return peek(k).kind == TokKind::kOp && peek(k).text == op;
  }
  bool is_ident(std::string_view word, std::size_t k = 0) const {
    return peek(k).kind == TokKind::kIdent && peek(k).text == word;
  }
  bool is_name(std::size_t k = 0) const {
    return peek(k).kind == TokKind::kIdent && !kKeywords.contains(peek(k).text);
  }
  // Adjacent tokens with no whitespace between them.
  bool glued(std::size_t k) const { return peek(k).end == peek(k + 1).offset; }

  const Token& take() {
    const Token& t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }
  bool accept(std::string_view op) {
    if (!is_op(op)) return false;
    take();
    return true;
  }
  bool accept_ident(std::string_view word) {
    if (!is_ident(word)) return false;
    take();
    return true;
  }
  [[noreturn]] void fail(const std::string& expected) const {
    throw SyntaxError(peek().line, peek().col, expected);
  }
  void expect(std::string_view op) {
    if (!accept(op)) fail("'" + std::string(op) + "'");
  }
  std::string expect_name() {
    if (!is_name()) fail("identifier");
    return take().text;
  }

  // ---- declarations -------------------------------------------------------
  void skip_annotation() {
    expect("@");
    expect_name();
    while (is_op(".") && peek(1).kind == TokKind::kIdent) {
      take();
      take();
    }
    if (is_op("(")) skip_balanced("(", ")");
  }

  void skip_balanced(std::string_view open, std::string_view close) {
    int depth = 0;
    do {
      if (at_end()) fail("'" + std::string(close) + "'");
      if (is_op(open)) ++depth;
      if (is_op(close)) --depth;
      take();
    } while (depth > 0);
  }

  void skip_modifiers() {
    while (true) {
      if (is_op("@") && !is_ident("interface", 1)) {
        skip_annotation();
      } else if (peek().kind == TokKind::kIdent && kModifiers.contains(peek().text) &&
                 !is_op("(", 1)) {
        take();
      } else if (is_ident("non") && is_op("-", 1)) {
        take();
        take();
        take();
      } else {
        return;
      }
    }
  }

  void parse_type_decl() {
    if (is_op("@") && is_ident("interface", 1)) fail("class declaration (annotation types unsupported)");
    if (is_ident("record")) fail("class declaration (records unsupported)");
    const bool is_enum = is_ident("enum");
    if (!accept_ident("class") && !accept_ident("interface") && !accept_ident("enum")) {
      fail("class, interface or enum");
    }
    ClassDecl cls;
    cls.name = expect_name();
    if (is_op("<")) skip_type_args_or_fail();
    while (!is_op("{")) {
      if (at_end()) fail("'{'");
      take();  // extends/implements/permits clauses
    }
    expect("{");
    if (is_enum) parse_enum_constants();
    const auto index = unit_.classes.size();
    unit_.classes.emplace_back();
    while (!accept("}")) {
      if (at_end()) fail("'}'");
      parse_member(cls);
    }
    unit_.classes[index] = std::move(cls);
  }

  void parse_enum_constants() {
    while (!is_op(";") && !is_op("}")) {
      if (is_op("@")) skip_annotation();
      expect_name();
      if (is_op("(")) {
        take();
        parse_args_tail();
      }
      if (is_op("{")) fail("enum constant without body");
      if (!accept(",")) break;
    }
    accept(";");
  }

  void parse_member(ClassDecl& cls) {
    std::optional<std::string> doc;
    if (auto it = docs_.find(pos_); it != docs_.end()) doc = it->second;
    const int line = peek().line;
    if (accept(";")) return;
    skip_modifiers();
    if (is_op("{")) {
      Stmt ignored = parse_block();
      return;
    }
    if (is_ident("class") || is_ident("interface") || is_ident("enum") || is_ident("record") ||
        (is_op("@") && is_ident("interface", 1))) {
      parse_type_decl();
      return;
    }
    if (is_op("<")) skip_type_args_or_fail();

    MethodAst method;
    method.doc_comment = doc;
    method.class_name = cls.name;
    method.line = line;
    if (is_name() && peek().text == cls.name && is_op("(", 1)) {
      method.name = take().text;
      method.return_type = cls.name;
    } else {
      std::string type = parse_type();
      std::string name = expect_name();
      if (!is_op("(")) {
        parse_field_rest(cls, type, std::move(name));
        return;
      }
      method.name = std::move(name);
      method.return_type = std::move(type);
    }
    env_ = &method.type_env;
    parse_params();
    while (accept("[")) {
      expect("]");
      method.return_type += "[]";
    }
    if (accept_ident("throws")) {
      parse_type();
      while (accept(",")) parse_type();
    }
    if (accept(";")) {
      method.has_body = false;
      method.body.kind = StmtKind::kBlock;
    } else if (is_op("{")) {
      method.body = parse_block();
      method.has_body = true;
    } else {
      fail("method body");
    }
    env_ = nullptr;
    cls.methods.push_back(std::move(method));
  }

  void parse_field_rest(ClassDecl& cls, const std::string& type, std::string name) {
    while (true) {
      std::string declared = type;
      while (accept("[")) {
        expect("]");
        declared += "[]";
      }
      cls.fields[name] = declared;
      if (accept("=")) ExprPtr ignored = parse_var_init();
      if (accept(";")) return;
      expect(",");
      name = expect_name();
    }
  }

  void parse_params() {
    expect("(");
    if (accept(")")) return;
    while (true) {
      skip_modifiers();
      std::string type = parse_type();
      if (accept("...")) type += "[]";
      if (is_ident("this")) {
        take();
      } else {
        std::string name = expect_name();
        while (accept("[")) {
          expect("]");
          type += "[]";
        }
        bind(name, type);
      }
      if (accept(")")) return;
      expect(",");
    }
  }

  void bind(const std::string& name, const std::string& type) {
    if (env_ != nullptr && !type.empty() && type != "var") (*env_)[name] = type;
  }

  // ---- types --------------------------------------------------------------
  // Parses a type and returns its erased spelling. Throws on failure.
  std::string parse_type() {
    auto t = try_parse_type();
    if (!t) fail("type");
    return *t;
  }

  std::optional<std::string> try_parse_type() {
    const auto save = pos_;
    while (is_op("@")) {
      try {
        skip_annotation();
      } catch (const SyntaxError&) {
        pos_ = save;
        return std::nullopt;
      }
    }
    if (peek().kind != TokKind::kIdent) {
      pos_ = save;
      return std::nullopt;
    }
    std::string name;
    if (kPrimitives.contains(peek().text)) {
      name = take().text;
    } else if (is_name()) {
      name = take().text;
      if (is_op("<") && !skip_type_args()) {
        pos_ = save;
        return std::nullopt;
      }
      while (is_op(".") && is_name(1)) {
        take();
        name = take().text;
        if (is_op("<") && !skip_type_args()) {
          pos_ = save;
          return std::nullopt;
        }
      }
    } else {
      pos_ = save;
      return std::nullopt;
    }
    while (is_op("[") && is_op("]", 1)) {
      take();
      take();
      name += "[]";
    }
    return name;
  }

  void skip_type_args_or_fail() {
    if (!skip_type_args()) fail("type arguments");
  }

  // Skips `<...>` if its contents look like type arguments; restores on failure.
  bool skip_type_args() {
    const auto save = pos_;
    int depth = 0;
    do {
      const Token& t = peek();
      if (t.kind == TokKind::kOp) {
        if (t.text == "<") {
          ++depth;
        } else if (t.text == ">") {
          --depth;
        } else if (t.text != "," && t.text != "." && t.text != "?" && t.text != "[" &&
                   t.text != "]" && t.text != "&" && t.text != "@") {
          pos_ = save;
          return false;
        }
      } else if (t.kind != TokKind::kIdent ||
                 (kKeywords.contains(t.text) && !kPrimitives.contains(t.text) &&
                  t.text != "extends" && t.text != "super")) {
        pos_ = save;
        return false;
      }
      take();
    } while (depth > 0);
    return true;
  }

  // ---- statements ---------------------------------------------------------
  Stmt parse_block() {
    Stmt block;
    block.kind = StmtKind::kBlock;
    block.line = peek().line;
    expect("{");
    while (!accept("}")) {
      if (at_end()) fail("'}'");
      block.body.push_back(std::make_unique<Stmt>(parse_statement()));
    }
    return block;
  }

  StmtPtr parse_statement_ptr() { return std::make_unique<Stmt>(parse_statement()); }

  bool looks_like_local_var() {
    const auto save = pos_;
    while (is_ident("final") || (is_op("@") && !is_ident("interface", 1))) {
      if (is_op("@")) {
        try {
          skip_annotation();
        } catch (const SyntaxError&) {
          pos_ = save;
          return false;
        }
      } else {
        take();
      }
    }
    bool result = false;
    if (try_parse_type() && is_name()) {
      result = is_op("=", 1) || is_op(";", 1) || is_op(",", 1) || is_op("[", 1) || is_op(":", 1);
    }
    pos_ = save;
    return result;
  }

  Stmt parse_local_var() {
    Stmt s;
    s.kind = StmtKind::kLocalVar;
    s.line = peek().line;
    while (is_ident("final") || is_op("@")) {
      if (is_op("@")) {
        skip_annotation();
      } else {
        take();
      }
    }
    s.type = parse_type();
    while (true) {
      Declarator d;
      d.name = expect_name();
      std::string declared = s.type;
      while (accept("[")) {
        expect("]");
        declared += "[]";
      }
      if (accept("=")) d.init = parse_var_init();
      if (declared == "var" && d.init) {
        if (d.init->kind == ExprKind::kNew || d.init->kind == ExprKind::kCast) {
          declared = d.init->type;
        } else if (d.init->kind == ExprKind::kLiteral && !d.init->type.empty()) {
          declared = d.init->type;
        }
      }
      bind(d.name, declared);
      s.declarators.push_back(std::move(d));
      if (!accept(",")) break;
    }
    return s;
  }

  Stmt parse_statement() {
    const int line = peek().line;
    if (is_op("{")) return parse_block();
    Stmt s;
    s.line = line;
    if (accept(";")) {
      s.kind = StmtKind::kEmpty;
      return s;
    }
    if (peek().kind == TokKind::kIdent) {
      const std::string& word = peek().text;
      if (word == "if") {
        take();
        s.kind = StmtKind::kIf;
        s.expr = parse_paren_expr();
        s.then_branch = parse_statement_ptr();
        if (accept_ident("else")) s.else_branch = parse_statement_ptr();
        return s;
      }
      if (word == "while") {
        take();
        s.kind = StmtKind::kWhile;
        s.expr = parse_paren_expr();
        s.then_branch = parse_statement_ptr();
        return s;
      }
      if (word == "do") {
        take();
        s.kind = StmtKind::kDoWhile;
        s.then_branch = parse_statement_ptr();
        if (!accept_ident("while")) fail("'while'");
        s.expr = parse_paren_expr();
        expect(";");
        return s;
      }
      if (word == "for") return parse_for();
      if (word == "return" || word == "throw") {
        take();
        s.kind = word == "return" ? StmtKind::kReturn : StmtKind::kThrow;
        if (!is_op(";")) s.expr = parse_expr();
        expect(";");
        return s;
      }
      if (word == "break" || word == "continue") {
        s.kind = word == "break" ? StmtKind::kBreak : StmtKind::kContinue;
        take();
        if (is_name()) take();
        expect(";");
        return s;
      }
      if (word == "try") return parse_try();
      if (word == "synchronized") {
        take();
        s.kind = StmtKind::kSynchronized;
        s.expr = parse_paren_expr();
        s.then_branch = std::make_unique<Stmt>(parse_block());
        return s;
      }
      if (word == "assert") {
        take();
        s.kind = StmtKind::kAssert;
        s.expr = parse_expr();
        if (accept(":")) s.updates.push_back(parse_expr());
        expect(";");
        return s;
      }
      if (word == "switch") fail("statement (switch unsupported)");
      if (word == "class" || word == "interface" || word == "enum" || word == "record") {
        fail("statement (local type declarations unsupported)");
      }
      if (is_name() && is_op(":", 1)) {  // labeled statement
        take();
        take();
        return parse_statement();
      }
    }
    if (looks_like_local_var()) {
      s = parse_local_var();
      expect(";");
      return s;
    }
    s.kind = StmtKind::kExpr;
    s.expr = parse_expr();
    expect(";");
    return s;
  }

  Stmt parse_for() {
    Stmt s;
    s.line = peek().line;
    take();
    expect("(");
    if (looks_like_local_var()) {
      const auto save = pos_;
      while (is_ident("final") || is_op("@")) {
        if (is_op("@")) {
          skip_annotation();
        } else {
          take();
        }
      }
      std::string type = parse_type();
      std::string name = expect_name();
      if (accept(":")) {
        s.kind = StmtKind::kForEach;
        s.type = type;
        bind(name, type);
        s.declarators.push_back({name, nullptr});
        s.expr = parse_expr();
        expect(")");
        s.then_branch = parse_statement_ptr();
        return s;
      }
      pos_ = save;
      s.init.push_back(std::make_unique<Stmt>(parse_local_var()));
    } else if (!is_op(";")) {
      while (true) {
        auto e = std::make_unique<Stmt>();
        e->kind = StmtKind::kExpr;
        e->line = peek().line;
        e->expr = parse_expr();
        s.init.push_back(std::move(e));
        if (!accept(",")) break;
      }
    }
    s.kind = StmtKind::kFor;
    expect(";");
    if (!is_op(";")) s.expr = parse_expr();
    expect(";");
    if (!is_op(")")) {
      s.updates.push_back(parse_expr());
      while (accept(",")) s.updates.push_back(parse_expr());
    }
    expect(")");
    s.then_branch = parse_statement_ptr();
    return s;
  }

  Stmt parse_try() {
    Stmt s;
    s.kind = StmtKind::kTry;
    s.line = peek().line;
    take();
    if (accept("(")) {
      while (!accept(")")) {
        if (looks_like_local_var()) {
          s.init.push_back(std::make_unique<Stmt>(parse_local_var()));
        } else {
          auto e = std::make_unique<Stmt>();
          e->kind = StmtKind::kExpr;
          e->expr = parse_expr();
          s.init.push_back(std::move(e));
        }
        if (!accept(";")) {
          expect(")");
          break;
        }
      }
    }
    Stmt block = parse_block();
    s.body = std::move(block.body);
    bool handled = false;
    while (accept_ident("catch")) {
      handled = true;
      expect("(");
      while (is_ident("final") || is_op("@")) {
        if (is_op("@")) {
          skip_annotation();
        } else {
          take();
        }
      }
      std::string type = parse_type();
      while (accept("|")) parse_type();
      bind(expect_name(), type);
      expect(")");
      s.catches.push_back(std::make_unique<Stmt>(parse_block()));
    }
    if (accept_ident("finally")) {
      handled = true;
      s.else_branch = std::make_unique<Stmt>(parse_block());
    }
    if (!handled && s.init.empty()) fail("'catch' or 'finally'");
    return s;
  }

  // ---- expressions --------------------------------------------------------
  ExprPtr make(ExprKind kind, const Token& at) {
    auto e = std::make_unique<Expr>();
    e->kind = kind;
    e->line = at.line;
    e->col = at.col;
    return e;
  }

  ExprPtr parse_paren_expr() {
    expect("(");
    auto e = parse_expr();
    expect(")");
    return e;
  }

  ExprPtr parse_var_init() {
    if (is_op("{")) return parse_array_init();
    return parse_expr();
  }

  ExprPtr parse_array_init() {
    auto e = make(ExprKind::kNewArray, peek());
    expect("{");
    while (!accept("}")) {
      e->args.push_back(parse_var_init());
      if (!accept(",")) {
        expect("}");
        break;
      }
    }
    return e;
  }

  ExprPtr parse_expr() { return parse_assignment(); }

  // Reads an operator that may be spelled with several '>' tokens.
  std::string peek_operator(std::size_t* width) const {
    *width = 0;
    if (peek().kind != TokKind::kOp) return {};
    if (peek().text != ">") {
      *width = 1;
      return peek().text;
    }
    std::string op = ">";
    std::size_t k = 0;
    while (k < 2 && is_op(">", k + 1) && glued(k)) {
      op += ">";
      ++k;
    }
    if (is_op("=", k + 1) && glued(k)) {
      op += "=";
      ++k;
    }
    *width = k + 1;
    return op;
  }

  ExprPtr parse_assignment() {
    auto lhs = parse_conditional();
    std::size_t width = 0;
    auto op = peek_operator(&width);
    if (kAssignOps.contains(op)) {
      const Token& at = peek();
      auto e = make(ExprKind::kAssign, at);
      for (std::size_t i = 0; i < width; ++i) take();
      e->text = op;
      e->operands.push_back(std::move(lhs));
      e->operands.push_back(parse_assignment());
      return e;
    }
    if (is_op("->")) fail("expression (lambdas unsupported)");
    return lhs;
  }

  ExprPtr parse_conditional() {
    auto cond = parse_binary(1);
    if (!is_op("?")) return cond;
    auto e = make(ExprKind::kConditional, take());
    e->operands.push_back(std::move(cond));
    e->operands.push_back(parse_expr());
    expect(":");
    e->operands.push_back(parse_conditional());
    return e;
  }

  ExprPtr parse_binary(int min_prec) {
    auto lhs = parse_unary();
    while (true) {
      if (is_ident("instanceof")) {
        if (7 < min_prec) break;
        auto e = make(ExprKind::kInstanceOf, take());
        accept_ident("final");
        e->type = parse_type();
        if (is_name()) bind(take().text, e->type);
        e->operands.push_back(std::move(lhs));
        lhs = std::move(e);
        continue;
      }
      std::size_t width = 0;
      auto op = peek_operator(&width);
      const int prec = binary_precedence(op);
      if (prec < 0 || prec < min_prec) break;
      const Token& at = peek();
      auto e = make(ExprKind::kBinary, at);
      for (std::size_t i = 0; i < width; ++i) take();
      e->text = op;
      e->operands.push_back(std::move(lhs));
      e->operands.push_back(parse_binary(prec + 1));
      lhs = std::move(e);
    }
    return lhs;
  }

  bool starts_operand(std::size_t k) const {
    const Token& t = peek(k);
    switch (t.kind) {
      case TokKind::kNumber:
      case TokKind::kString:
      case TokKind::kChar:
        return true;
      case TokKind::kIdent:
        return !kKeywords.contains(t.text) || t.text == "this" || t.text == "new" ||
               t.text == "super" || t.text == "true" || t.text == "false" || t.text == "null";
      case TokKind::kOp:
        return t.text == "(" || t.text == "!" || t.text == "~";
      default:
        return false;
    }
  }

  // At '(': a cast if a type is followed by ')' and an operand.
  std::optional<std::string> try_cast_prefix() {
    const auto save = pos_;
    take();
    auto type = try_parse_type();
    if (type && is_op(")")) {
      const bool primitive = kPrimitives.contains(type->substr(0, type->find('[')));
      const bool operand = starts_operand(1) ||
                           (primitive && (is_op("+", 1) || is_op("-", 1)));
      if (operand) {
        take();
        return type;
      }
    }
    pos_ = save;
    return std::nullopt;
  }

  ExprPtr parse_unary() {
    const Token& at = peek();
    if (at.kind == TokKind::kOp &&
        (at.text == "+" || at.text == "-" || at.text == "++" || at.text == "--" ||
         at.text == "!" || at.text == "~")) {
      auto e = make(ExprKind::kUnary, at);
      e->text = take().text;
      e->operands.push_back(parse_unary());
      return e;
    }
    if (is_op("(")) {
      if (auto type = try_cast_prefix()) {
        auto e = make(ExprKind::kCast, at);
        e->type = *type;
        e->operands.push_back(parse_unary());
        return e;
      }
    }
    return parse_postfix(parse_primary());
  }

  ExprPtr parse_postfix(ExprPtr e) {
    while (true) {
      if (is_op(".")) {
        const Token& dot = take();
        if (is_op("<")) fail("member name (explicit type arguments unsupported)");
        if (is_ident("new")) fail("member name (inner class creation unsupported)");
        if (accept_ident("class")) {
          auto lit = make(ExprKind::kClassLiteral, dot);
          lit->type = "Class";
          lit->operands.push_back(std::move(e));
          e = std::move(lit);
          continue;
        }
        if (is_ident("this")) {
          take();
          e = make(ExprKind::kThis, dot);
          continue;
        }
        const Token& name = peek();
        std::string member = expect_name();
        if (is_op("(")) {
          auto call = make(ExprKind::kCall, name);
          call->text = std::move(member);
          call->target = std::move(e);
          take();
          call->args = parse_args_tail();
          e = std::move(call);
        } else {
          auto access = make(ExprKind::kFieldAccess, name);
          access->text = std::move(member);
          access->target = std::move(e);
          e = std::move(access);
        }
      } else if (is_op("[")) {
        auto idx = make(ExprKind::kArrayAccess, take());
        idx->operands.push_back(std::move(e));
        idx->operands.push_back(parse_expr());
        expect("]");
        e = std::move(idx);
      } else if (is_op("++") || is_op("--")) {
        auto u = make(ExprKind::kUnary, peek());
        u->text = "post" + take().text;
        u->operands.push_back(std::move(e));
        e = std::move(u);
      } else if (is_op("::")) {
        fail("expression (method references unsupported)");
      } else {
        return e;
      }
    }
  }

  // After '(' has been consumed.
  std::vector<ExprPtr> parse_args_tail() {
    std::vector<ExprPtr> args;
    if (accept(")")) return args;
    while (true) {
      args.push_back(parse_expr());
      if (accept(")")) return args;
      expect(",");
    }
  }

  bool paren_is_lambda() const {
    int depth = 0;
    for (std::size_t k = 0;; ++k) {
      const Token& t = peek(k);
      if (t.kind == TokKind::kEnd) return false;
      if (t.kind != TokKind::kOp) continue;
      if (t.text == "(") ++depth;
      if (t.text == ")" && --depth == 0) return is_op("->", k + 1);
    }
  }

  ExprPtr parse_primary() {
    const Token& at = peek();
    switch (at.kind) {
      case TokKind::kNumber: {
        auto e = make(ExprKind::kLiteral, take());
        e->text = at.text;
        return e;
      }
      case TokKind::kString: {
        auto e = make(ExprKind::kLiteral, at);
        e->text = take().text;
        e->type = "String";
        return e;
      }
      case TokKind::kChar: {
        auto e = make(ExprKind::kLiteral, at);
        e->text = take().text;
        e->type = "char";
        return e;
      }
      case TokKind::kOp:
        if (at.text == "(") {
          if (paren_is_lambda()) fail("expression (lambdas unsupported)");
          take();
          auto inner = parse_expr();
          expect(")");
          return inner;
        }
        fail("expression");
      case TokKind::kIdent:
        break;
      default:
        fail("expression");
    }
    const std::string word = at.text;
    if (word == "true" || word == "false" || word == "null") {
      auto e = make(ExprKind::kLiteral, take());
      e->text = word;
      return e;
    }
    if (word == "this" || word == "super") {
      auto e = make(word == "this" ? ExprKind::kThis : ExprKind::kSuper, take());
      if (is_op("(")) {  // this(...) / super(...) constructor delegation
        auto call = make(ExprKind::kCall, at);
        call->text = word;
        call->target = std::move(e);
        take();
        call->args = parse_args_tail();
        return call;
      }
      return e;
    }
    if (word == "new") return parse_creator();
    if (word == "switch") fail("expression (switch unsupported)");
    if (kPrimitives.contains(word)) {
      auto type = parse_type();
      if (!is_op(".") || !is_ident("class", 1)) fail("'.class'");
      auto e = make(ExprKind::kClassLiteral, at);
      e->type = "Class";
      take();
      take();
      return e;
    }
    if (!is_name()) fail("expression");
    if (is_op("->", 1)) fail("expression (lambdas unsupported)");
    take();
    if (is_op("(")) {
      auto call = make(ExprKind::kCall, at);
      call->text = word;
      take();
      call->args = parse_args_tail();
      return call;
    }
    auto e = make(ExprKind::kName, at);
    e->text = word;
    return e;
  }

  ExprPtr parse_creator() {
    const Token& at = take();
    if (is_op("<")) skip_type_args_or_fail();
    while (is_op("@")) skip_annotation();
    if (peek().kind != TokKind::kIdent) fail("type after 'new'");
    std::string name = take().text;
    const bool primitive = kPrimitives.contains(name);
    if (!primitive) {
      if (is_op("<")) skip_type_args_or_fail();
      while (is_op(".") && is_name(1)) {
        take();
        name = take().text;
        if (is_op("<")) skip_type_args_or_fail();
      }
    }
    if (is_op("[")) {
      auto e = make(ExprKind::kNewArray, at);
      e->type = name;
      while (accept("[")) {
        e->type += "[]";
        if (!is_op("]")) e->args.push_back(parse_expr());
        expect("]");
      }
      if (is_op("{")) {
        auto init = parse_array_init();
        for (auto& a : init->args) e->args.push_back(std::move(a));
      }
      return e;
    }
    if (primitive) fail("'['");
    auto e = make(ExprKind::kNew, at);
    e->type = name;
    expect("(");
    e->args = parse_args_tail();
    if (is_op("{")) fail("expression (anonymous classes unsupported)");
    return e;
  }

  // ---- finishing ----------------------------------------------------------
  CompilationUnit finish() {
    auto members = std::make_shared<MemberTypes>();
    for (const auto& cls : unit_.classes) {
      auto& table = (*members)[cls.name];
      for (const auto& [field, type] : cls.fields) table[field] = type;
      for (const auto& m : cls.methods) {
        if (m.return_type != "void") table.emplace(m.name, m.return_type);
      }
    }
    for (auto& cls : unit_.classes) {
      for (auto& m : cls.methods) {
        TypeEnv env = cls.fields;
        for (const auto& [name, type] : m.type_env) env[name] = type;
        m.type_env = std::move(env);
        m.member_types = members;
      }
    }
    unit_.member_types = members;
    for (auto& cls : unit_.classes) {
      for (auto& m : cls.methods) m.unresolved_receivers = find_unresolved_receivers(m);
    }
    return std::move(unit_);
  }

  std::vector<Token> toks_;
  std::unordered_map<std::size_t, std::string> docs_;
  std::size_t pos_ = 0;
  TypeEnv* env_ = nullptr;
  CompilationUnit unit_;
};

}  // namespace

CompilationUnit parse_compilation_unit(std::string_view source) {
  return Parser(source).parse_unit();
}

MethodAst parse_method(std::string_view source) { return Parser(source).parse_method_snippet(); }

std::string erase_type(std::string_view type) {
  std::string out;
  int depth = 0;
  for (char c : type) {
    if (c == '<') {
      ++depth;
    } else if (c == '>') {
      --depth;
    } else if (depth == 0 && !std::isspace(static_cast<unsigned char>(c))) {
      out += c;
    }
  }
  const auto dims = out.find('[');
  std::string base = out.substr(0, dims);
  std::string suffix = dims == std::string::npos ? "" : out.substr(dims);
  if (auto dot = base.rfind('.'); dot != std::string::npos) base = base.substr(dot + 1);
  return base + suffix;
}

}  // namespace apiseq::javacorpus
