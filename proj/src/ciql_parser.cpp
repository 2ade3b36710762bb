#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>

#include "ciq/ciql.hpp"

namespace ciq::ciql {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

bool is_cosine_valued(const Expr& e) {
  if (e.kind != ExprKind::FuncCall) return false;
  return e.text == "cosineDistance" || e.text == "proximityMax" ||
         e.text == "proximityAvg" || e.text == "proximityTop2Avg" ||
         e.text == "subsetProximityAvg";
}

const std::set<std::string>& known_functions() {
  static const std::set<std::string> fns = {
      "contains",       "cosineDistance",     "proximityMax",
      "proximityAvg",   "proximityTop2Avg",   "subsetProximityAvg",
      "vec",            "int",                "argmaxCosine"};
  return fns;
}

class Parser {
 public:
  explicit Parser(std::vector<Lexeme> toks) : toks_(std::move(toks)) {}

  QueryAst run() {
    QueryAst ast;
    expect_keyword("select");
    parse_select_list(ast);
    expect_keyword("from");
    parse_from_list(ast);
    if (at_keyword("where")) {
      next();
      ast.where = parse_or();
    }
    if (at_keyword("order")) {
      next();
      expect_keyword("by");
      ast.orderBy = parse_or();
      if (at_keyword("desc")) {
        ast.orderDesc = true;
        next();
      } else if (at_keyword("asc")) {
        next();
      }
    }
    if (at_keyword("limit")) {
      next();
      const Lexeme& lx = peek();
      if (lx.kind != TokKind::Number || lx.number < 0 ||
          lx.number != std::floor(lx.number))
        throw SyntaxError("LIMIT expects a non-negative integer", lx.line,
                          lx.col);
      ast.limit = static_cast<long>(lx.number);
      next();
    }
    if (peek().kind == TokKind::Punct && peek().text == ";") next();
    if (peek().kind != TokKind::End)
      throw SyntaxError("unexpected input after query: \"" + peek().text + "\"",
                        peek().line, peek().col);
    validate(ast);
    return ast;
  }

 private:
  std::vector<Lexeme> toks_;
  std::size_t pos_ = 0;

  const Lexeme& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  const Lexeme& next() { return toks_[pos_++]; }
  bool at_keyword(const std::string& kw) const {
    return peek().kind == TokKind::Ident && lower(peek().text) == kw;
  }
  void expect_keyword(const std::string& kw) {
    if (!at_keyword(kw))
      throw SyntaxError("expected " + kw, peek().line, peek().col);
    next();
  }
  bool at_punct(const std::string& p) const {
    return peek().kind == TokKind::Punct && peek().text == p;
  }
  void expect_punct(const std::string& p) {
    if (!at_punct(p))
      throw SyntaxError("expected '" + p + "'", peek().line, peek().col);
    next();
  }
  bool at_clause_boundary() const {
    return peek().kind == TokKind::End || at_keyword("where") ||
           at_keyword("order") || at_keyword("limit") ||
           (peek().kind == TokKind::Punct && peek().text == ";" &&
            peek(1).kind != TokKind::Ident);
  }

  void parse_select_list(QueryAst& ast) {
    if (at_punct("*")) {
      ast.selectStar = true;
      next();
      return;
    }
    while (true) {
      SelectItem item;
      item.expr = parse_or();
      if (at_keyword("as")) {
        next();
        const Lexeme& lx = peek();
        if (lx.kind != TokKind::Ident)
          throw SyntaxError("expected label after AS", lx.line, lx.col);
        item.label = lx.text;
        next();
      } else {
        item.label = to_string(*item.expr);
      }
      ast.select.push_back(std::move(item));
      if (at_punct(",")) {
        next();
        continue;
      }
      break;
    }
  }

  std::vector<std::string> parse_ident_list() {
    std::vector<std::string> names;
    while (true) {
      const Lexeme& lx = peek();
      if (lx.kind != TokKind::Ident)
        throw SyntaxError("expected identifier", lx.line, lx.col);
      names.push_back(lx.text);
      next();
      if (at_punct(",") && peek(1).kind == TokKind::Ident &&
          lower(peek(1).text) != "token" && lower(peek(1).text) != "entity" &&
          lower(peek(1).text) != "relation" && lower(peek(1).text) != "column") {
        next();
        continue;
      }
      break;
    }
    return names;
  }

  void parse_from_list(QueryAst& ast) {
    bool sawDeclaration = false;
    while (true) {
      const Lexeme& lx = peek();
      if (lx.kind != TokKind::Ident)
        throw SyntaxError("expected table name or declaration in FROM",
                          lx.line, lx.col);
      std::string kw = lower(lx.text);
      if (kw == "token" || kw == "entity") {
        next();
        for (auto& n : parse_ident_list()) ast.tokenVars.push_back(n);
        sawDeclaration = true;
      } else if (kw == "relation") {
        next();
        for (auto& n : parse_ident_list()) ast.relationVars.push_back(n);
        sawDeclaration = true;
      } else if (kw == "column") {
        next();
        for (auto& n : parse_ident_list()) ast.columnVars.push_back(n);
        sawDeclaration = true;
      } else {
        if (sawDeclaration)
          throw SyntaxError(
              "table references must precede Token/Relation/column "
              "declarations",
              lx.line, lx.col);
        TableRef ref;
        ref.table = lx.text;
        next();
        if (peek().kind == TokKind::Ident && !at_clause_boundary() &&
            lower(peek().text) != "token" && lower(peek().text) != "entity" &&
            lower(peek().text) != "relation" && lower(peek().text) != "column") {
          ref.alias = peek().text;
          next();
        } else {
          ref.alias = ref.table;
        }
        ast.tables.push_back(std::move(ref));
      }
      if (at_punct(",") || at_punct(";")) {
        if (at_punct(";") && at_clause_boundary()) break;
        next();
        continue;
      }
      break;
    }
  }

  ExprPtr make(ExprKind kind, const Lexeme& at) {
    auto e = std::make_shared<Expr>();
    e->kind = kind;
    e->line = at.line;
    e->col = at.col;
    return e;
  }

  ExprPtr parse_or() {
    ExprPtr lhs = parse_and();
    while (at_keyword("or")) {
      const Lexeme& lx = peek();
      next();
      auto e = make(ExprKind::Binary, lx);
      e->op = BinOp::Or;
      e->lhs = lhs;
      e->rhs = parse_and();
      lhs = e;
    }
    return lhs;
  }

  ExprPtr parse_and() {
    ExprPtr lhs = parse_not();
    while (at_keyword("and")) {
      const Lexeme& lx = peek();
      next();
      auto e = make(ExprKind::Binary, lx);
      e->op = BinOp::And;
      e->lhs = lhs;
      e->rhs = parse_not();
      lhs = e;
    }
    return lhs;
  }

  ExprPtr parse_not() {
    if (at_keyword("not")) {
      const Lexeme& lx = peek();
      next();
      auto e = make(ExprKind::Not, lx);
      e->lhs = parse_not();
      return e;
    }
    return parse_comparison();
  }

  ExprPtr parse_comparison() {
    ExprPtr lhs = parse_additive();
    if (peek().kind == TokKind::Relop) {
      const Lexeme& lx = peek();
      next();
      auto e = make(ExprKind::Binary, lx);
      if (lx.text == "<") e->op = BinOp::Lt;
      else if (lx.text == "<=") e->op = BinOp::Le;
      else if (lx.text == ">") e->op = BinOp::Gt;
      else if (lx.text == ">=") e->op = BinOp::Ge;
      else if (lx.text == "=") e->op = BinOp::Eq;
      else e->op = BinOp::Ne;
      e->lhs = lhs;
      e->rhs = parse_additive();
      check_cosine_range(*e);
      return e;
    }
    return lhs;
  }

  void check_cosine_range(const Expr& cmp) {
    auto check = [&](const Expr& fn, const Expr& other) {
      if (!is_cosine_valued(fn)) return;
      if (other.kind == ExprKind::NumberLit &&
          (other.number < -1.0 || other.number > 1.0))
        throw SyntaxError("comparison constant " + other.text +
                              " outside [-1, 1] for cosine-valued expression",
                          other.line, other.col);
    };
    check(*cmp.lhs, *cmp.rhs);
    check(*cmp.rhs, *cmp.lhs);
  }

  ExprPtr parse_additive() {
    ExprPtr lhs = parse_unary();
    while (at_punct("+") || at_punct("-")) {
      const Lexeme& lx = peek();
      next();
      auto e = make(ExprKind::Binary, lx);
      e->op = lx.text == "+" ? BinOp::Add : BinOp::Sub;
      e->lhs = lhs;
      e->rhs = parse_unary();
      lhs = e;
    }
    return lhs;
  }

  ExprPtr parse_unary() {
    if (at_punct("-")) {
      const Lexeme& lx = peek();
      next();
      auto zero = make(ExprKind::NumberLit, lx);
      zero->number = 0;
      zero->text = "0";
      auto e = make(ExprKind::Binary, lx);
      e->op = BinOp::Sub;
      e->lhs = zero;
      e->rhs = parse_unary();
      return e;
    }
    return parse_primary();
  }

  ExprPtr parse_primary() {
    const Lexeme& lx = peek();
    switch (lx.kind) {
      case TokKind::Number: {
        auto e = make(ExprKind::NumberLit, lx);
        e->number = lx.number;
        e->text = lx.text;
        next();
        return e;
      }
      case TokKind::String: {
        auto e = make(ExprKind::StringLit, lx);
        e->text = lx.text;
        next();
        return e;
      }
      case TokKind::Punct:
        if (lx.text == "(") {
          next();
          ExprPtr inner = parse_or();
          expect_punct(")");
          return inner;
        }
        break;
      case TokKind::Ident: {
        std::string kw = lower(lx.text);
        if (kw == "true" || kw == "false") {
          auto e = make(ExprKind::BoolLit, lx);
          e->boolean = kw == "true";
          next();
          return e;
        }
        std::string name = lx.text;
        next();
        if (at_punct("(")) {
          next();
          auto e = make(ExprKind::FuncCall, lx);
          e->text = name;
          if (!at_punct(")")) {
            while (true) {
              e->args.push_back(parse_or());
              if (at_punct(",")) {
                next();
                continue;
              }
              break;
            }
          }
          expect_punct(")");
          if (!known_functions().count(name) &&
              !ops::ClosenessScale::is_scale_name(name))
            throw SyntaxError("unknown function \"" + name + "\"", lx.line,
                              lx.col);
          return e;
        }
        if (at_punct(".")) {
          next();
          auto e = make(ExprKind::ColRef, lx);
          e->alias = name;
          if (at_punct("*")) {
            e->member = "*";
            next();
          } else if (peek().kind == TokKind::Ident) {
            e->member = peek().text;
            next();
          } else {
            throw SyntaxError("expected column name or * after '.'",
                              peek().line, peek().col);
          }
          return e;
        }
        auto e = make(ExprKind::Ident, lx);
        e->text = name;
        return e;
      }
      default:
        break;
    }
    throw SyntaxError("unexpected token \"" + lx.text + "\"", lx.line, lx.col);
  }

  // ---- static validation ------------------------------------------------

  void walk(const ExprPtr& e, const std::function<void(const Expr&)>& fn) {
    if (!e) return;
    fn(*e);
    walk(e->lhs, fn);
    walk(e->rhs, fn);
    for (const auto& a : e->args) walk(a, fn);
  }

  void validate(QueryAst& ast) {
    std::set<std::string> aliases, tokenVars(ast.tokenVars.begin(),
                                             ast.tokenVars.end());
    for (const auto& t : ast.tables) aliases.insert(t.alias);
    for (const auto& r : ast.relationVars) aliases.insert(r);
    std::set<std::string> labels;
    for (const auto& s : ast.select) labels.insert(s.label);

    auto check_expr = [&](const ExprPtr& root, bool labelsAllowed) {
      walk(root, [&](const Expr& e) {
        if (e.kind == ExprKind::ColRef && !aliases.count(e.alias))
          throw SyntaxError("undeclared identifier \"" + e.alias + "\"",
                            e.line, e.col);
        if (e.kind == ExprKind::Ident) {
          if (tokenVars.count(e.text) || e.text == "database") return;
          if (labelsAllowed && labels.count(e.text)) return;
          if (aliases.count(e.text)) return;  // bare table scope
          throw SyntaxError("undeclared identifier \"" + e.text + "\"", e.line,
                            e.col);
        }
        if (e.kind == ExprKind::FuncCall) check_arity(e);
      });
    };
    for (const auto& s : ast.select) check_expr(s.expr, false);
    check_expr(ast.where, false);
    check_expr(ast.orderBy, true);

    // Every Token variable needs a contains() occurrence to bound its
    // domain; anything else would leave the domain unspecified.
    for (const auto& var : ast.tokenVars) {
      bool bound = false;
      walk(ast.where, [&](const Expr& e) {
        if (e.kind == ExprKind::FuncCall && e.text == "contains" &&
            e.args.size() == 2 && e.args[1]->kind == ExprKind::Ident &&
            e.args[1]->text == var)
          bound = true;
      });
      if (!bound)
        throw Error("unbound token variable \"" + var +
                    "\": declare its domain with contains(scope, " + var + ")");
    }

    // Column variables must be used with a declared Relation variable.
    std::set<std::string> colVars(ast.columnVars.begin(),
                                  ast.columnVars.end());
    std::set<std::string> relVars(ast.relationVars.begin(),
                                  ast.relationVars.end());
    auto check_rel_usage = [&](const ExprPtr& root) {
      walk(root, [&](const Expr& e) {
        if (e.kind != ExprKind::ColRef) return;
        bool isRel = relVars.count(e.alias) > 0;
        bool isColVar = colVars.count(e.member) > 0;
        if (isRel && e.member != "*" && !isColVar)
          throw SyntaxError("relation variable \"" + e.alias +
                                "\" must be used with a declared column "
                                "variable",
                            e.line, e.col);
        if (!isRel && isColVar)
          throw SyntaxError("column variable \"" + e.member +
                                "\" used with non-relation alias",
                            e.line, e.col);
      });
    };
    for (const auto& s : ast.select) check_rel_usage(s.expr);
    check_rel_usage(ast.where);
    check_rel_usage(ast.orderBy);
  }

  void check_arity(const Expr& e) {
    auto need = [&](std::size_t n) {
      if (e.args.size() != n)
        throw SyntaxError("function \"" + e.text + "\" expects " +
                              std::to_string(n) + " arguments",
                          e.line, e.col);
    };
    if (e.text == "contains" || e.text == "cosineDistance" ||
        e.text == "proximityMax" || e.text == "proximityAvg" ||
        e.text == "proximityTop2Avg" || e.text == "argmaxCosine" ||
        ops::ClosenessScale::is_scale_name(e.text))
      need(2);
    else if (e.text == "subsetProximityAvg")
      need(3);
    else if (e.text == "vec" || e.text == "int")
      need(1);
  }
};

}  // namespace

QueryAst parse(const std::string& text) { return Parser(lex(text)).run(); }

std::string to_string(const Expr& e) {
  switch (e.kind) {
    case ExprKind::NumberLit:
      return e.text.empty() ? std::to_string(e.number) : e.text;
    case ExprKind::StringLit:
      return "\"" + e.text + "\"";
    case ExprKind::BoolLit:
      return e.boolean ? "TRUE" : "FALSE";
    case ExprKind::ColRef:
      return e.alias + "." + e.member;
    case ExprKind::Ident:
      return e.text;
    case ExprKind::FuncCall: {
      std::string s = e.text + "(";
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i) s += ", ";
        s += to_string(*e.args[i]);
      }
      return s + ")";
    }
    case ExprKind::Not:
      return "NOT " + to_string(*e.lhs);
    case ExprKind::Binary: {
      const char* op = "?";
      switch (e.op) {
        case BinOp::Add: op = "+"; break;
        case BinOp::Sub: op = "-"; break;
        case BinOp::And: op = "AND"; break;
        case BinOp::Or: op = "OR"; break;
        case BinOp::Lt: op = "<"; break;
        case BinOp::Le: op = "<="; break;
        case BinOp::Gt: op = ">"; break;
        case BinOp::Ge: op = ">="; break;
        case BinOp::Eq: op = "="; break;
        case BinOp::Ne: op = "!="; break;
      }
      return to_string(*e.lhs) + " " + op + " " + to_string(*e.rhs);
    }
  }
  return "?";
}

}  // namespace ciq::ciql
