#include "apiseq/javacorpus/extract.hpp"

#include <algorithm>
#include <cctype>
#include <optional>

namespace apiseq::javacorpus {
namespace {

bool is_class_like(const std::string& name) {
  return !name.empty() && std::isupper(static_cast<unsigned char>(name.front()));
}

bool is_primitive(const std::string& type) {
  static const char* const kNames[] = {"boolean", "byte",  "char",   "short", "int",
                                       "long",    "float", "double", "void"};
  return std::any_of(std::begin(kNames), std::end(kNames),
                     [&](const char* p) { return type == p; });
}

std::string spell(const Expr& e) {
  switch (e.kind) {
    case ExprKind::kName:
      return e.text;
    case ExprKind::kThis:
      return "this";
    case ExprKind::kFieldAccess:
      return (e.target ? spell(*e.target) : std::string("<expr>")) + "." + e.text;
    case ExprKind::kCall:
      return (e.target ? spell(*e.target) + "." : std::string()) + e.text + "()";
    default:
      return "<expr>";
  }
}

class Walker {
 public:
  Walker(const ExtractionContext& ctx, std::vector<UnresolvedReceiver>* warnings)
      : ctx_(ctx), warnings_(warnings) {}

  ApiSequence take() { return std::move(out_); }

  void stmt(const Stmt& s) {
    switch (s.kind) {
      case StmtKind::kBlock:
        for (const auto& child : s.body) stmt(*child);
        break;
      case StmtKind::kLocalVar:
        for (const auto& d : s.declarators) opt_expr(d.init.get());
        break;
      case StmtKind::kExpr:
      case StmtKind::kReturn:
      case StmtKind::kThrow:
        opt_expr(s.expr.get());
        break;
      case StmtKind::kIf:
        opt_expr(s.expr.get());
        opt_stmt(s.then_branch.get());
        opt_stmt(s.else_branch.get());
        break;
      case StmtKind::kFor:
        for (const auto& init : s.init) stmt(*init);
        opt_expr(s.expr.get());
        opt_stmt(s.then_branch.get());
        for (const auto& upd : s.updates) expr(*upd);
        break;
      case StmtKind::kForEach:
      case StmtKind::kWhile:
      case StmtKind::kSynchronized:
        opt_expr(s.expr.get());
        opt_stmt(s.then_branch.get());
        break;
      case StmtKind::kDoWhile:
        opt_stmt(s.then_branch.get());
        opt_expr(s.expr.get());
        break;
      case StmtKind::kTry:
        for (const auto& res : s.init) stmt(*res);
        for (const auto& child : s.body) stmt(*child);
        for (const auto& c : s.catches) stmt(*c);
        opt_stmt(s.else_branch.get());
        break;
      case StmtKind::kAssert:
        opt_expr(s.expr.get());
        for (const auto& msg : s.updates) expr(*msg);
        break;
      case StmtKind::kBreak:
      case StmtKind::kContinue:
      case StmtKind::kEmpty:
        break;
    }
  }

  void expr(const Expr& e) {
    switch (e.kind) {
      case ExprKind::kCall:
        call(e);
        return;
      case ExprKind::kNew:
        for (const auto& a : e.args) expr(*a);
        out_.push_back({e.type, "new"});
        return;
      case ExprKind::kNewArray:
        for (const auto& a : e.args) expr(*a);
        return;
      case ExprKind::kFieldAccess:
        if (e.target) expr(*e.target);
        return;
      default:
        if (e.target) expr(*e.target);
        for (const auto& op : e.operands) expr(*op);
        for (const auto& a : e.args) expr(*a);
        return;
    }
  }

  std::optional<std::string> type_of(const Expr& e) const {
    switch (e.kind) {
      case ExprKind::kLiteral:
        if (e.type.empty()) return std::nullopt;
        return e.type;
      case ExprKind::kName:
        if (auto it = ctx_.env->find(e.text); it != ctx_.env->end()) return it->second;
        if (is_class_like(e.text)) return e.text;
        return std::nullopt;
      case ExprKind::kThis:
        if (ctx_.this_class.empty()) return std::nullopt;
        return ctx_.this_class;
      case ExprKind::kNew:
      case ExprKind::kNewArray:
      case ExprKind::kCast:
        return e.type;
      case ExprKind::kClassLiteral:
        return std::string("Class");
      case ExprKind::kCall: {
        std::optional<std::string> owner;
        if (!e.target || e.target->kind == ExprKind::kThis) {
          owner = ctx_.this_class;
        } else {
          owner = type_of(*e.target);
        }
        if (!owner) return std::nullopt;
        return member_type(*owner, e.text);
      }
      case ExprKind::kFieldAccess: {
        if (!e.target) return std::nullopt;
        if (e.target->kind == ExprKind::kThis) {
          if (auto it = ctx_.env->find(e.text); it != ctx_.env->end()) return it->second;
          return member_type(ctx_.this_class, e.text);
        }
        if (auto owner = type_of(*e.target)) {
          if (auto t = member_type(*owner, e.text)) return t;
        }
        // java.io.File.separator style: a lowercase package path then a class.
        if (is_class_like(e.text) && is_package_path(*e.target)) return e.text;
        return std::nullopt;
      }
      case ExprKind::kArrayAccess: {
        auto t = type_of(*e.operands[0]);
        if (t && t->size() > 2 && t->ends_with("[]")) return t->substr(0, t->size() - 2);
        return std::nullopt;
      }
      case ExprKind::kConditional:
        return type_of(*e.operands[1]);
      case ExprKind::kAssign:
        return type_of(*e.operands[0]);
      case ExprKind::kBinary:
        if (e.text == "+") {
          auto l = type_of(*e.operands[0]);
          auto r = type_of(*e.operands[1]);
          if ((l && *l == "String") || (r && *r == "String")) return std::string("String");
        }
        return std::nullopt;
      default:
        return std::nullopt;
    }
  }

 private:
  void opt_expr(const Expr* e) {
    if (e) expr(*e);
  }
  void opt_stmt(const Stmt* s) {
    if (s) stmt(*s);
  }

  bool is_package_path(const Expr& e) const {
    if (e.kind == ExprKind::kName) {
      return !ctx_.env->contains(e.text) && !is_class_like(e.text);
    }
    if (e.kind == ExprKind::kFieldAccess && e.target) {
      return !is_class_like(e.text) && is_package_path(*e.target);
    }
    return false;
  }

  std::optional<std::string> member_type(const std::string& owner, const std::string& member) const {
    if (!ctx_.members) return std::nullopt;
    auto cls = ctx_.members->find(owner);
    if (cls == ctx_.members->end()) return std::nullopt;
    auto it = cls->second.find(member);
    if (it == cls->second.end()) return std::nullopt;
    return it->second;
  }

  void call(const Expr& e) {
    if (e.target) expr(*e.target);
    for (const auto& a : e.args) expr(*a);
    if (!e.target || e.target->kind == ExprKind::kThis || e.target->kind == ExprKind::kSuper) {
      return;  // same-class call, not an API use
    }
    auto owner = type_of(*e.target);
    if (!owner || owner->empty() || is_primitive(*owner) || owner->ends_with("[]") ||
        owner->find('.') != std::string::npos) {
      if (warnings_) {
        warnings_->push_back({e.target->kind == ExprKind::kName ? e.target->text
                                                                : spell(*e.target) + "." + e.text,
                              e.line});
      }
      return;
    }
    out_.push_back({*owner, e.text});
  }

  const ExtractionContext& ctx_;
  std::vector<UnresolvedReceiver>* warnings_;
  ApiSequence out_;
};

}  // namespace

ApiSequence extract_statement(const Stmt& stmt, const ExtractionContext& ctx,
                              std::vector<UnresolvedReceiver>* warnings) {
  Walker walker(ctx, warnings);
  walker.stmt(stmt);
  return walker.take();
}

ApiSequence extract_api_sequence(const MethodAst& method,
                                 std::vector<UnresolvedReceiver>* warnings) {
  ExtractionContext ctx;
  ctx.env = &method.type_env;
  ctx.members = method.member_types.get();
  ctx.this_class = method.class_name;
  return extract_statement(method.body, ctx, warnings);
}

std::vector<std::string> find_unresolved_receivers(const MethodAst& method) {
  std::vector<UnresolvedReceiver> warnings;
  extract_api_sequence(method, &warnings);
  std::vector<std::string> names;
  for (const auto& w : warnings) {
    if (std::find(names.begin(), names.end(), w.name) == names.end()) names.push_back(w.name);
  }
  return names;
}

}  // namespace apiseq::javacorpus
