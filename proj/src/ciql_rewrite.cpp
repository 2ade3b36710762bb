#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "ciq/ciql.hpp"

namespace ciq::ciql {

namespace {

ExprPtr clone(const ExprPtr& e) {
  if (!e) return nullptr;
  auto c = std::make_shared<Expr>(*e);
  c->lhs = clone(e->lhs);
  c->rhs = clone(e->rhs);
  c->args.clear();
  for (const auto& a : e->args) c->args.push_back(clone(a));
  return c;
}

void walk(const ExprPtr& e, const std::function<void(Expr&)>& fn) {
  if (!e) return;
  fn(*e);
  walk(e->lhs, fn);
  walk(e->rhs, fn);
  for (const auto& a : e->args) walk(a, fn);
}

}  // namespace

std::vector<QueryAst> rewrite_relation_vars(const QueryAst& ast,
                                            const Database& catalog) {
  if (ast.relationVars.empty()) return {ast};
  if (catalog.tables().empty())
    throw Error("relation variable with an empty catalog");

  // Which column variables does each relation variable use (via S.X)?
  std::set<std::string> relVars(ast.relationVars.begin(),
                                ast.relationVars.end());
  std::set<std::string> colVars(ast.columnVars.begin(), ast.columnVars.end());
  std::map<std::string, std::vector<std::string>> colsOf;
  std::map<std::string, std::string> colOwner;
  auto scan = [&](const ExprPtr& root) {
    walk(const_cast<ExprPtr&>(root), [&](Expr& e) {
      if (e.kind != ExprKind::ColRef || !relVars.count(e.alias)) return;
      if (e.member == "*" || !colVars.count(e.member)) return;
      auto owner = colOwner.find(e.member);
      if (owner != colOwner.end() && owner->second != e.alias)
        throw Error("column variable \"" + e.member +
                    "\" used with more than one relation variable");
      colOwner[e.member] = e.alias;
      auto& list = colsOf[e.alias];
      if (std::find(list.begin(), list.end(), e.member) == list.end())
        list.push_back(e.member);
    });
  };
  for (const auto& s : ast.select) scan(s.expr);
  scan(ast.where);
  scan(ast.orderBy);

  // Tables already named in FROM are excluded from assignment.
  std::set<std::string> fromTables;
  for (const auto& t : ast.tables) fromTables.insert(t.table);

  struct Assignment {
    std::string table;
    std::map<std::string, std::string> columns;  // colVar -> column name
  };

  // All (table, column...) assignments for one relation variable.
  auto assignments_for = [&](const std::string& relVar) {
    std::vector<Assignment> out;
    const auto& vars = colsOf[relVar];  // may be empty
    for (const auto& t : catalog.tables()) {
      if (fromTables.count(t.name)) continue;
      std::vector<std::string> stringCols;
      for (const auto& c : t.columns)
        if (c.type == ColumnType::String) stringCols.push_back(c.name);
      if (vars.empty()) {
        out.push_back(Assignment{t.name, {}});
        continue;
      }
      if (stringCols.empty()) continue;
      // Cartesian product over the column variables of this relation var.
      std::vector<std::map<std::string, std::string>> partial{{}};
      for (const auto& v : vars) {
        std::vector<std::map<std::string, std::string>> grown;
        for (const auto& p : partial)
          for (const auto& c : stringCols) {
            auto q = p;
            q[v] = c;
            grown.push_back(std::move(q));
          }
        partial = std::move(grown);
      }
      for (auto& p : partial) out.push_back(Assignment{t.name, std::move(p)});
    }
    return out;
  };

  std::vector<std::map<std::string, Assignment>> combos{{}};
  for (const auto& relVar : ast.relationVars) {
    auto options = assignments_for(relVar);
    std::vector<std::map<std::string, Assignment>> grown;
    for (const auto& c : combos)
      for (const auto& opt : options) {
        auto q = c;
        q[relVar] = opt;
        grown.push_back(std::move(q));
      }
    combos = std::move(grown);
  }

  std::vector<QueryAst> out;
  for (const auto& combo : combos) {
    QueryAst q;
    q.selectStar = ast.selectStar;
    q.tables = ast.tables;
    q.tokenVars = ast.tokenVars;
    q.limit = ast.limit;
    q.orderDesc = ast.orderDesc;
    for (const auto& [relVar, assign] : combo) {
      q.tables.push_back(TableRef{assign.table, relVar});
      std::string col = assign.columns.empty()
                            ? std::string()
                            : assign.columns.begin()->second;
      q.relVarBinding[relVar] = {assign.table, col};
    }
    auto substitute = [&](const ExprPtr& root) {
      ExprPtr copy = clone(root);
      walk(copy, [&](Expr& e) {
        if (e.kind != ExprKind::ColRef) return;
        auto it = combo.find(e.alias);
        if (it == combo.end()) return;
        if (e.member != "*" && it->second.columns.count(e.member)) {
          std::string concrete = it->second.columns.at(e.member);
          e.member = concrete;
          // Relation-variable cells render as "Table.Column:value".
          e.text = it->second.table + "." + concrete + ":";
        }
      });
      return copy;
    };
    for (const auto& s : ast.select)
      q.select.push_back(SelectItem{substitute(s.expr), s.label});
    q.where = substitute(ast.where);
    q.orderBy = substitute(ast.orderBy);
    out.push_back(std::move(q));
  }
  return out;
}

}  // namespace ciq::ciql
