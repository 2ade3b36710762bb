// Reference evaluator: semantics spelled out directly, with none of the
// memoization or rewrite machinery in ciql_eval.cpp. Slow on purpose;
// used to cross-check execute() on small instances.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <variant>

#include "ciq/ciql.hpp"

namespace ciq::ciql {

namespace {

using RVal =
    std::variant<std::monostate, long long, double, std::string, bool,
                 std::vector<double>>;

std::string render_rval(const RVal& v) {
  switch (v.index()) {
    case 0: return "Null";
    case 1: return std::to_string(std::get<long long>(v));
    case 2: return render_real(std::get<double>(v));
    case 3: return std::get<std::string>(v);
    case 4: return std::get<bool>(v) ? "TRUE" : "FALSE";
    default: return "<vector>";
  }
}

bool numeric(const RVal& v) { return v.index() == 1 || v.index() == 2; }

double as_real(const RVal& v) {
  return v.index() == 1 ? static_cast<double>(std::get<long long>(v))
                        : std::get<double>(v);
}

struct Env {
  // alias (FROM table or relation variable) -> bound table + row
  std::map<std::string, std::pair<const Table*, std::size_t>> rows;
  std::map<std::string, std::string> tokens;      // token var -> token
  std::map<std::string, std::string> columnVars;  // column var -> column name
};

struct Ref {
  const QueryAst& ast;
  const Database& db;
  const VectorStore& store;
  const TokenizationConfig& config;
  const ops::ClosenessScale& scale;

  std::vector<std::string> relVarsSorted = {};
  std::map<std::string, std::vector<std::string>> colVarsOf = {};  // relVar -> vars
  std::map<std::string, const Expr*> tokenScope = {};

  struct Row {
    std::vector<std::string> cells;
    bool hasKey = false;
    RVal key;
  };
  std::vector<Row> rows = {};

  void walk(const ExprPtr& e, const std::function<void(const Expr&)>& fn) {
    if (!e) return;
    fn(*e);
    walk(e->lhs, fn);
    walk(e->rhs, fn);
    for (const auto& a : e->args) walk(a, fn);
  }

  void prepare() {
    relVarsSorted = ast.relationVars;
    std::sort(relVarsSorted.begin(), relVarsSorted.end());
    std::set<std::string> relSet(relVarsSorted.begin(), relVarsSorted.end());
    std::set<std::string> colSet(ast.columnVars.begin(), ast.columnVars.end());
    auto scan = [&](const ExprPtr& root) {
      walk(root, [&](const Expr& e) {
        if (e.kind != ExprKind::ColRef || !relSet.count(e.alias)) return;
        if (!colSet.count(e.member)) return;
        auto& list = colVarsOf[e.alias];
        if (std::find(list.begin(), list.end(), e.member) == list.end())
          list.push_back(e.member);
      });
    };
    for (const auto& s : ast.select) scan(s.expr);
    scan(ast.where);
    scan(ast.orderBy);
    for (const auto& var : ast.tokenVars) {
      const Expr* scope = nullptr;
      walk(ast.where, [&](const Expr& e) {
        if (scope) return;
        if (e.kind == ExprKind::FuncCall && e.text == "contains" &&
            e.args.size() == 2 && e.args[1]->kind == ExprKind::Ident &&
            e.args[1]->text == var)
          scope = e.args[0].get();
      });
      if (!scope) throw Error("unbound token variable \"" + var + "\"");
      tokenScope[var] = scope;
    }
  }

  bool is_relation_var(const std::string& name) const {
    return std::find(relVarsSorted.begin(), relVarsSorted.end(), name) !=
           relVarsSorted.end();
  }

  // ---- enumeration ------------------------------------------------------

  void run() {
    prepare();
    Env env;
    assign_relations(0, env);
  }

  void assign_relations(std::size_t idx, Env& env) {
    if (idx == relVarsSorted.size()) {
      bind_from_rows(0, env);
      return;
    }
    const std::string& relVar = relVarsSorted[idx];
    std::set<std::string> fromTables;
    for (const auto& t : ast.tables) fromTables.insert(t.table);
    for (const auto& t : db.tables()) {
      if (fromTables.count(t.name)) continue;
      std::vector<std::string> stringCols;
      for (const auto& c : t.columns)
        if (c.type == ColumnType::String) stringCols.push_back(c.name);
      const auto& vars = colVarsOf[relVar];
      if (!vars.empty() && stringCols.empty()) continue;
      // every assignment of this rel var's column vars to string columns
      std::vector<std::map<std::string, std::string>> assignments{{}};
      for (const auto& v : vars) {
        std::vector<std::map<std::string, std::string>> grown;
        for (const auto& a : assignments)
          for (const auto& c : stringCols) {
            auto b = a;
            b[v] = c;
            grown.push_back(std::move(b));
          }
        assignments = std::move(grown);
      }
      for (const auto& a : assignments) {
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
          env.rows[relVar] = {&t, r};
          for (const auto& [cv, col] : a) env.columnVars[cv] = col;
          assign_relations(idx + 1, env);
          for (const auto& [cv, col] : a) env.columnVars.erase(cv);
        }
      }
      env.rows.erase(relVar);
    }
  }

  void bind_from_rows(std::size_t idx, Env& env) {
    if (idx == ast.tables.size()) {
      bind_tokens(0, env);
      return;
    }
    const TableRef& ref = ast.tables[idx];
    const Table* t = db.find_table(ref.table);
    if (!t) throw Error("unknown table: " + ref.table);
    for (std::size_t r = 0; r < t->rows.size(); ++r) {
      env.rows[ref.alias] = {t, r};
      bind_from_rows(idx + 1, env);
    }
    env.rows.erase(ref.alias);
  }

  void bind_tokens(std::size_t idx, Env& env) {
    if (idx == ast.tokenVars.size()) {
      emit(env);
      return;
    }
    const std::string& var = ast.tokenVars[idx];
    auto domain = scope_tokens(*tokenScope.at(var), env);
    std::vector<std::string> distinct;
    for (const auto& t : domain)
      if (std::find(distinct.begin(), distinct.end(), t) == distinct.end())
        distinct.push_back(t);
    for (const auto& tok : distinct) {
      env.tokens[var] = tok;
      bind_tokens(idx + 1, env);
    }
    env.tokens.erase(var);
  }

  void emit(const Env& env) {
    if (ast.where) {
      RVal v = eval(*ast.where, env);
      if (!truthy(v, *ast.where)) return;
    }
    Row row;
    if (ast.selectStar) {
      for (const auto& ref : ast.tables) {
        auto [t, r] = env.rows.at(ref.alias);
        for (const auto& cell : t->rows[r])
          row.cells.push_back(render_value(cell));
      }
      for (const auto& relVar : relVarsSorted) {
        auto [t, r] = env.rows.at(relVar);
        for (const auto& cell : t->rows[r])
          row.cells.push_back(render_value(cell));
      }
    } else {
      for (const auto& item : ast.select) {
        std::string prefix;
        const Expr& e = *item.expr;
        if (e.kind == ExprKind::ColRef && is_relation_var(e.alias)) {
          auto [t, r] = env.rows.at(e.alias);
          prefix = t->name + "." + resolve_column(e, env) + ":";
        }
        row.cells.push_back(prefix + render_rval(eval(*item.expr, env)));
      }
    }
    if (ast.orderBy) {
      row.hasKey = true;
      if (ast.orderBy->kind == ExprKind::Ident) {
        bool matched = false;
        for (const auto& item : ast.select)
          if (item.label == ast.orderBy->text) {
            row.key = eval(*item.expr, env);
            matched = true;
            break;
          }
        if (!matched) row.key = eval(*ast.orderBy, env);
      } else {
        row.key = eval(*ast.orderBy, env);
      }
    }
    rows.push_back(std::move(row));
  }

  // ---- helpers ----------------------------------------------------------

  std::string resolve_column(const Expr& colref, const Env& env) const {
    auto it = env.columnVars.find(colref.member);
    return it == env.columnVars.end() ? colref.member : it->second;
  }

  bool truthy(const RVal& v, const Expr& at) const {
    if (v.index() == 4) return std::get<bool>(v);
    if (numeric(v)) return as_real(v) > 0;
    if (v.index() == 0) return false;
    throw Error("expression is not a predicate: " + to_string(at));
  }

  std::vector<std::string> scope_tokens(const Expr& e, const Env& env) const {
    if (e.kind == ExprKind::ColRef) {
      auto it = env.rows.find(e.alias);
      if (it == env.rows.end()) throw Error("unbound alias \"" + e.alias + "\"");
      auto [t, r] = it->second;
      if (e.member == "*")
        return tokenize_row(t->name, r, db, config, config.maxHops);
      std::string col = resolve_column(e, env);
      int c = t->column_index(col);
      if (c < 0)
        throw Error("unknown column \"" + col + "\" in table " + t->name);
      return tokenize_value(t->rows[r][static_cast<std::size_t>(c)],
                            t->columns[static_cast<std::size_t>(c)], config,
                            t->name);
    }
    if (e.kind == ExprKind::Ident) {
      if (e.text == "database") return tokenize_database(db, config).tokens;
      if (auto it = env.rows.find(e.text); it != env.rows.end())
        return tokenize_row(it->second.first->name, it->second.second, db,
                            config, config.maxHops);
      if (auto it = env.tokens.find(e.text); it != env.tokens.end())
        return {it->second};
      throw Error("invalid scope \"" + e.text + "\"");
    }
    if (e.kind == ExprKind::StringLit) return tokenize_text(e.text, config);
    throw Error("invalid scope argument: " + to_string(e));
  }

  std::string token_of(const Expr& e, const Env& env) const {
    if (e.kind == ExprKind::StringLit) return e.text;
    if (e.kind == ExprKind::Ident) {
      if (auto it = env.tokens.find(e.text); it != env.tokens.end())
        return it->second;
      throw Error("expected a token-valued expression, got \"" + e.text + "\"");
    }
    auto toks = scope_tokens(e, env);
    if (toks.size() != 1)
      throw Error(to_string(e) + " does not tokenize to a single token (" +
                  std::to_string(toks.size()) + " tokens); use a proximity "
                  "UDF for multi-token scopes");
    return toks[0];
  }

  std::vector<double> vector_of(const Expr& e, const Env& env) const {
    if (e.kind == ExprKind::Binary &&
        (e.op == BinOp::Add || e.op == BinOp::Sub)) {
      auto lhs = vector_of(*e.lhs, env);
      auto rhs = vector_of(*e.rhs, env);
      if (lhs.size() != rhs.size())
        throw Error("vector dimension mismatch in " + to_string(e));
      for (std::size_t i = 0; i < lhs.size(); ++i)
        lhs[i] = e.op == BinOp::Add ? lhs[i] + rhs[i] : lhs[i] - rhs[i];
      return lhs;
    }
    if (e.kind == ExprKind::FuncCall && e.text == "vec") {
      auto v = ops::vec(token_of(*e.args[0], env), store);
      return {v.begin(), v.end()};
    }
    auto v = ops::vec(token_of(e, env), store);
    return {v.begin(), v.end()};
  }

  static bool mentions_vec(const Expr& e) {
    if (e.kind == ExprKind::FuncCall && e.text == "vec") return true;
    if (e.kind == ExprKind::Binary)
      return mentions_vec(*e.lhs) || mentions_vec(*e.rhs);
    return false;
  }

  RVal eval(const Expr& e, const Env& env) const {
    switch (e.kind) {
      case ExprKind::NumberLit:
        if (e.number == std::floor(e.number) && std::fabs(e.number) < 1e15 &&
            e.text.find('.') == std::string::npos)
          return static_cast<long long>(e.number);
        return e.number;
      case ExprKind::StringLit:
        return e.text;
      case ExprKind::BoolLit:
        return e.boolean;
      case ExprKind::Ident: {
        if (auto it = env.tokens.find(e.text); it != env.tokens.end())
          return it->second;
        throw Error("cannot evaluate identifier \"" + e.text + "\"");
      }
      case ExprKind::ColRef: {
        auto it = env.rows.find(e.alias);
        if (it == env.rows.end())
          throw Error("unbound alias \"" + e.alias + "\"");
        if (e.member == "*")
          throw Error("row reference " + to_string(e) +
                      " is only valid as a UDF scope argument");
        auto [t, r] = it->second;
        std::string col = resolve_column(e, env);
        int c = t->column_index(col);
        if (c < 0)
          throw Error("unknown column \"" + col + "\" in table " + t->name);
        const Value& cell = t->rows[r][static_cast<std::size_t>(c)];
        switch (cell.index()) {
          case 0: return {};
          case 1: return std::string(1, std::get<char>(cell));
          case 2: return std::get<std::string>(cell);
          case 3: return std::get<bool>(cell);
          case 4: return static_cast<long long>(std::get<std::int64_t>(cell));
          default: return std::get<double>(cell);
        }
      }
      case ExprKind::Not:
        return !truthy(eval(*e.lhs, env), *e.lhs);
      case ExprKind::FuncCall:
        return call(e, env);
      case ExprKind::Binary:
        return binary(e, env);
    }
    throw Error("unreachable expression kind");
  }

  RVal call(const Expr& e, const Env& env) const {
    if (e.text == "contains")
      return static_cast<long long>(ops::contains_count(
          scope_tokens(*e.args[0], env), token_of(*e.args[1], env)));
    if (e.text == "cosineDistance")
      return ops::cosine(vector_of(*e.args[0], env),
                         vector_of(*e.args[1], env));
    if (e.text == "proximityMax")
      return ops::proximity_max(scope_tokens(*e.args[0], env),
                                scope_tokens(*e.args[1], env), store);
    if (e.text == "proximityAvg")
      return ops::proximity_avg(scope_tokens(*e.args[0], env),
                                scope_tokens(*e.args[1], env), store);
    if (e.text == "proximityTop2Avg")
      return ops::proximity_top2_avg(scope_tokens(*e.args[0], env),
                                     scope_tokens(*e.args[1], env), store);
    if (e.text == "subsetProximityAvg") {
      RVal size = eval(*e.args[0], env);
      if (!numeric(size))
        throw Error("subsetProximityAvg: size must be numeric");
      return ops::subset_proximity_avg(static_cast<int>(as_real(size)),
                                       scope_tokens(*e.args[1], env),
                                       scope_tokens(*e.args[2], env), store);
    }
    if (e.text == "vec") return vector_of(e, env);
    if (e.text == "int") {
      RVal v = eval(*e.args[0], env);
      if (v.index() == 1) return v;
      if (v.index() == 2)
        return static_cast<long long>(std::trunc(std::get<double>(v)));
      if (v.index() == 3) {
        try {
          return static_cast<long long>(std::stoll(std::get<std::string>(v)));
        } catch (const std::exception&) {
          throw Error("int(): cannot parse \"" + std::get<std::string>(v) +
                      "\"");
        }
      }
      throw Error("int(): unsupported operand");
    }
    if (e.text == "argmaxCosine") {
      const Expr& col = *e.args[0];
      if (col.kind != ExprKind::ColRef)
        throw Error("argmaxCosine: first argument must be a column reference");
      auto target = vector_of(*e.args[1], env);
      auto it = env.rows.find(col.alias);
      if (it == env.rows.end())
        throw Error("unbound alias \"" + col.alias + "\"");
      const Table* t = it->second.first;
      std::string colName = resolve_column(col, env);
      int c = t->column_index(colName);
      if (c < 0) throw Error("unknown column \"" + colName + "\"");
      double best = -2.0;
      for (const auto& r : t->rows) {
        auto toks = tokenize_value(r[static_cast<std::size_t>(c)],
                                   t->columns[static_cast<std::size_t>(c)],
                                   config, t->name);
        if (toks.size() != 1) continue;
        auto v = store.get(toks[0]);
        if (!v) continue;
        best = std::max(best, ops::cosine(*v, target));
      }
      double mine = ops::cosine(ops::vec(token_of(col, env), store), target);
      return mine >= best - 1e-12;
    }
    if (ops::ClosenessScale::is_scale_name(e.text))
      return ops::cosine(vector_of(*e.args[0], env),
                         vector_of(*e.args[1], env)) >=
             scale.threshold(e.text);
    throw Error("unknown function \"" + e.text + "\"");
  }

  RVal binary(const Expr& e, const Env& env) const {
    switch (e.op) {
      case BinOp::And:
        return truthy(eval(*e.lhs, env), *e.lhs) &&
               truthy(eval(*e.rhs, env), *e.rhs);
      case BinOp::Or:
        return truthy(eval(*e.lhs, env), *e.lhs) ||
               truthy(eval(*e.rhs, env), *e.rhs);
      case BinOp::Add:
      case BinOp::Sub: {
        if (mentions_vec(e)) return vector_of(e, env);
        RVal a = eval(*e.lhs, env);
        RVal b = eval(*e.rhs, env);
        if (!numeric(a) || !numeric(b))
          throw Error("type mismatch in arithmetic: " + to_string(e));
        if (a.index() == 1 && b.index() == 1) {
          long long x = std::get<long long>(a), y = std::get<long long>(b);
          return e.op == BinOp::Add ? x + y : x - y;
        }
        return e.op == BinOp::Add ? as_real(a) + as_real(b)
                                  : as_real(a) - as_real(b);
      }
      default:
        break;
    }
    RVal a = eval(*e.lhs, env);
    RVal b = eval(*e.rhs, env);
    if (a.index() == 0 || b.index() == 0) return false;
    std::optional<int> cmp;
    if (numeric(a) && numeric(b)) {
      double x = as_real(a), y = as_real(b);
      cmp = x < y ? -1 : (x > y ? 1 : 0);
    } else if (a.index() == 3 && b.index() == 3) {
      int c = std::get<std::string>(a).compare(std::get<std::string>(b));
      cmp = c < 0 ? -1 : (c > 0 ? 1 : 0);
    } else if (a.index() == 4 && b.index() == 4) {
      int x = std::get<bool>(a), y = std::get<bool>(b);
      cmp = x < y ? -1 : (x > y ? 1 : 0);
    } else if ((numeric(a) && b.index() == 3) ||
               (a.index() == 3 && numeric(b))) {
      const std::string& s =
          std::get<std::string>(a.index() == 3 ? a : b);
      double parsed;
      try {
        parsed = std::stod(s);
      } catch (const std::exception&) {
        throw Error("type mismatch in comparison: " + to_string(e));
      }
      double x = a.index() == 3 ? parsed : as_real(a);
      double y = b.index() == 3 ? parsed : as_real(b);
      cmp = x < y ? -1 : (x > y ? 1 : 0);
    }
    if (!cmp) throw Error("type mismatch in comparison: " + to_string(e));
    switch (e.op) {
      case BinOp::Lt: return *cmp < 0;
      case BinOp::Le: return *cmp <= 0;
      case BinOp::Gt: return *cmp > 0;
      case BinOp::Ge: return *cmp >= 0;
      case BinOp::Eq: return *cmp == 0;
      case BinOp::Ne: return *cmp != 0;
      default: throw Error("unreachable comparison op");
    }
  }
};

std::string joined(const std::vector<std::string>& cells) {
  std::string s;
  for (const auto& c : cells) {
    s += c;
    s += '\x1f';
  }
  return s;
}

}  // namespace

ResultTable execute_reference(const QueryAst& ast, const Database& db,
                              const VectorStore& store,
                              const TokenizationConfig& config,
                              const ops::ClosenessScale& scale) {
  Ref ref{ast, db, store, config, scale};
  ref.run();

  ResultTable result;
  if (!ast.selectStar) {
    for (const auto& s : ast.select) result.labels.push_back(s.label);
  } else {
    auto add = [&](const std::string& alias, const std::string& table) {
      const Table* t = db.find_table(table);
      if (!t) throw Error("unknown table: " + table);
      for (const auto& c : t->columns) result.labels.push_back(alias + "." + c.name);
    };
    for (const auto& t : ast.tables) add(t.alias, t.table);
    // SELECT * with relation variables would need a fixed column set per
    // assignment, which varies; the parser rejects that combination, so
    // relVarsSorted is empty here.
  }

  bool projectsToken = false;
  if (!ast.selectStar) {
    std::function<void(const ExprPtr&)> look = [&](const ExprPtr& e) {
      if (!e) return;
      if (e->kind == ExprKind::Ident &&
          std::find(ast.tokenVars.begin(), ast.tokenVars.end(), e->text) !=
              ast.tokenVars.end())
        projectsToken = true;
      look(e->lhs);
      look(e->rhs);
      for (const auto& a : e->args) look(a);
    };
    for (const auto& s : ast.select) look(s.expr);
  }

  auto rows = std::move(ref.rows);
  if (!projectsToken) {
    std::set<std::string> seen;
    decltype(rows) unique;
    for (auto& r : rows)
      if (seen.insert(joined(r.cells)).second) unique.push_back(std::move(r));
    rows = std::move(unique);
  }

  // Canonical order first so ties and the no-ORDER-BY case are stable.
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return joined(a.cells) < joined(b.cells);
  });
  if (ast.orderBy) {
    bool desc = ast.orderDesc;
    auto less = [](const RVal& a, const RVal& b) {
      if (numeric(a) && numeric(b)) return as_real(a) < as_real(b);
      return render_rval(a) < render_rval(b);
    };
    std::stable_sort(rows.begin(), rows.end(),
                     [&](const auto& a, const auto& b) {
                       if (less(a.key, b.key)) return !desc;
                       if (less(b.key, a.key)) return desc;
                       return false;
                     });
  }
  if (ast.limit && rows.size() > static_cast<std::size_t>(*ast.limit))
    rows.resize(static_cast<std::size_t>(*ast.limit));
  for (auto& r : rows) result.rows.push_back(std::move(r.cells));
  return result;
}

}  // namespace ciq::ciql
