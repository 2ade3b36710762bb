#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ciq/ciops.hpp"
#include "ciq/database.hpp"
#include "ciq/textify.hpp"
#include "ciq/vecstore.hpp"

namespace ciq::ciql {

struct SyntaxError : Error {
  SyntaxError(const std::string& msg, int line, int col)
      : Error(msg + " at line " + std::to_string(line) + ", column " +
              std::to_string(col)),
        line(line),
        col(col) {}
  int line, col;
};

// ---------------------------------------------------------------- lexing

enum class TokKind {
  Ident,
  Number,
  String,
  Punct,  // one of , ; ( ) . * + -
  Relop,  // < <= > >= = !=
  End,
};

struct Lexeme {
  TokKind kind;
  std::string text;  // idents keep original case
  double number = 0;
  int line = 1, col = 1;
};

std::vector<Lexeme> lex(const std::string& text);

// ------------------------------------------------------------------- AST

enum class ExprKind {
  NumberLit,
  StringLit,
  BoolLit,
  ColRef,    // alias.member, member "*" for the whole row
  Ident,     // token variable, label, or the bare `database` scope
  FuncCall,
  Binary,
  Not,
};

enum class BinOp { Add, Sub, And, Or, Lt, Le, Gt, Ge, Eq, Ne };

struct Expr;
using ExprPtr = std::shared_ptr<Expr>;

struct Expr {
  ExprKind kind{};
  double number = 0;
  bool boolean = false;
  std::string text;            // literal text / ident name / function name
  std::string alias, member;   // ColRef
  std::vector<ExprPtr> args;   // FuncCall
  BinOp op{};
  ExprPtr lhs, rhs;            // Binary; Not uses lhs
  int line = 1, col = 1;
};

std::string to_string(const Expr& e);

struct TableRef {
  std::string table;
  std::string alias;  // equals table when none given
};

struct SelectItem {
  ExprPtr expr;
  std::string label;
};

struct QueryAst {
  bool selectStar = false;
  std::vector<SelectItem> select;
  std::vector<TableRef> tables;
  std::vector<std::string> tokenVars;
  std::vector<std::string> relationVars;
  std::vector<std::string> columnVars;
  ExprPtr where;  // null means WHERE TRUE
  ExprPtr orderBy;
  bool orderDesc = false;
  std::optional<long> limit;
  // Filled by the relation-variable rewrite: alias -> (table, column).
  std::map<std::string, std::pair<std::string, std::string>> relVarBinding;
};

QueryAst parse(const std::string& text);

// One concrete query per assignment of Relation variables to catalog
// tables and Column variables to string-typed columns.
std::vector<QueryAst> rewrite_relation_vars(const QueryAst& ast,
                                            const Database& catalog);

struct ResultTable {
  std::vector<std::string> labels;
  std::vector<std::vector<std::string>> rows;
};

std::string render_result(const ResultTable& table, bool csv = false);

ResultTable execute(const QueryAst& ast, const Database& db,
                    const VectorStore& store, const TokenizationConfig& config,
                    const ops::ClosenessScale& scale = {});

// Semantics-by-definition oracle: full enumeration, no memoization or
// planning, canonical row ordering before ORDER BY / LIMIT. Intended
// for small instances.
ResultTable execute_reference(const QueryAst& ast, const Database& db,
                              const VectorStore& store,
                              const TokenizationConfig& config,
                              const ops::ClosenessScale& scale = {});

// Shared rendering helpers (6-decimal fixed reals).
std::string render_value(const Value& v);
std::string render_real(double d);

}  // namespace ciq::ciql
