#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <variant>

#include "ciq/ciql.hpp"
#include "ciq/kernels.hpp"

namespace ciq::ciql {

std::string render_real(double d) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", d);
  return buf;
}

std::string render_value(const Value& v) {
  if (std::holds_alternative<double>(v)) return render_real(std::get<double>(v));
  return to_display_string(v);
}

namespace {

struct EvalValue {
  // Null, integer, real, string, bool, vector
  std::variant<std::monostate, long long, double, std::string, bool,
               std::vector<double>>
      v;

  bool is_null() const { return v.index() == 0; }
  bool is_int() const { return v.index() == 1; }
  bool is_real() const { return v.index() == 2; }
  bool is_string() const { return v.index() == 3; }
  bool is_bool() const { return v.index() == 4; }
  bool is_vector() const { return v.index() == 5; }
  bool is_numeric() const { return is_int() || is_real(); }
  double as_real() const {
    return is_int() ? static_cast<double>(std::get<long long>(v))
                    : std::get<double>(v);
  }
};

EvalValue from_cell(const Value& cell) {
  struct Visitor {
    EvalValue operator()(std::monostate) const { return {}; }
    EvalValue operator()(char c) const { return {std::string(1, c)}; }
    EvalValue operator()(const std::string& s) const { return {s}; }
    EvalValue operator()(bool b) const { return {b}; }
    EvalValue operator()(std::int64_t i) const {
      return {static_cast<long long>(i)};
    }
    EvalValue operator()(double d) const { return {d}; }
  };
  return std::visit(Visitor{}, cell);
}

std::string render_eval(const EvalValue& e) {
  struct Visitor {
    std::string operator()(std::monostate) const { return "Null"; }
    std::string operator()(long long i) const { return std::to_string(i); }
    std::string operator()(double d) const { return render_real(d); }
    std::string operator()(const std::string& s) const { return s; }
    std::string operator()(bool b) const { return b ? "TRUE" : "FALSE"; }
    std::string operator()(const std::vector<double>&) const {
      return "<vector>";
    }
  };
  return std::visit(Visitor{}, e.v);
}

bool truthy(const EvalValue& e, const Expr& at) {
  if (e.is_bool()) return std::get<bool>(e.v);
  if (e.is_numeric()) return e.as_real() > 0;
  if (e.is_null()) return false;
  throw Error("expression is not a predicate: " + to_string(at));
}

struct BoundRow {
  const Table* table;
  std::size_t row;
};

struct Binding {
  std::map<std::string, BoundRow> rows;      // alias -> row
  std::map<std::string, std::string> tokens; // token var -> token
};

// Shared execution state; caches are keyed independently of bindings.
class Engine {
 public:
  Engine(const QueryAst& ast, const Database& db, const VectorStore& store,
         const TokenizationConfig& config, const ops::ClosenessScale& scale)
      : ast_(ast), db_(db), store_(store), config_(config), scale_(scale) {}

  struct OutRow {
    std::vector<std::string> cells;
    bool hasKey = false;
    EvalValue key;
  };

  std::vector<OutRow> run() {
    for (const auto& ref : ast_.tables) {
      const Table* t = db_.find_table(ref.table);
      if (!t) throw Error("unknown table: " + ref.table);
      aliasOrder_.push_back(ref.alias);
      aliasTable_[ref.alias] = t;
    }
    resolve_token_var_scopes();
    Binding binding;
    std::vector<OutRow> out;
    enumerate_rows(0, binding, out);
    return out;
  }

  std::vector<std::string> labels() const {
    if (!ast_.selectStar) {
      std::vector<std::string> out;
      for (const auto& s : ast_.select) out.push_back(s.label);
      return out;
    }
    std::vector<std::string> out;
    for (const auto& alias : aliasOrder_) {
      const Table* t = aliasTable_.at(alias);
      for (const auto& c : t->columns) out.push_back(alias + "." + c.name);
    }
    return out;
  }

  bool projects_token_var() const {
    if (ast_.selectStar) return false;
    bool found = false;
    for (const auto& s : ast_.select)
      walk(s.expr, [&](const Expr& e) {
        if (e.kind == ExprKind::Ident &&
            std::find(ast_.tokenVars.begin(), ast_.tokenVars.end(), e.text) !=
                ast_.tokenVars.end())
          found = true;
      });
    return found;
  }

 private:
  const QueryAst& ast_;
  const Database& db_;
  const VectorStore& store_;
  const TokenizationConfig& config_;
  const ops::ClosenessScale& scale_;

  std::vector<std::string> aliasOrder_;
  std::map<std::string, const Table*> aliasTable_;
  std::map<std::string, const Expr*> tokenVarScope_;

  std::optional<std::vector<std::string>> dbTokens_;
  std::map<const Expr*, EvalValue> memo_;  // valid for the current binding

  static void walk(const ExprPtr& e, const std::function<void(const Expr&)>& fn) {
    if (!e) return;
    fn(*e);
    walk(e->lhs, fn);
    walk(e->rhs, fn);
    for (const auto& a : e->args) walk(a, fn);
  }

  void resolve_token_var_scopes() {
    for (const auto& var : ast_.tokenVars) {
      const Expr* scope = nullptr;
      walk(ast_.where, [&](const Expr& e) {
        if (scope) return;
        if (e.kind == ExprKind::FuncCall && e.text == "contains" &&
            e.args.size() == 2 && e.args[1]->kind == ExprKind::Ident &&
            e.args[1]->text == var)
          scope = e.args[0].get();
      });
      if (!scope) throw Error("unbound token variable \"" + var + "\"");
      tokenVarScope_[var] = scope;
    }
  }

  void enumerate_rows(std::size_t aliasIdx, Binding& binding,
                      std::vector<OutRow>& out) {
    if (aliasIdx == aliasOrder_.size()) {
      enumerate_tokens(0, binding, out);
      return;
    }
    const std::string& alias = aliasOrder_[aliasIdx];
    const Table* t = aliasTable_.at(alias);
    for (std::size_t r = 0; r < t->rows.size(); ++r) {
      binding.rows[alias] = BoundRow{t, r};
      enumerate_rows(aliasIdx + 1, binding, out);
    }
    binding.rows.erase(alias);
  }

  void enumerate_tokens(std::size_t varIdx, Binding& binding,
                        std::vector<OutRow>& out) {
    if (varIdx == ast_.tokenVars.size()) {
      emit_if_satisfied(binding, out);
      return;
    }
    const std::string& var = ast_.tokenVars[varIdx];
    auto domain = scope_tokens(*tokenVarScope_.at(var), binding);
    std::vector<std::string> distinct;
    for (const auto& t : domain)
      if (std::find(distinct.begin(), distinct.end(), t) == distinct.end())
        distinct.push_back(t);
    for (const auto& tok : distinct) {
      binding.tokens[var] = tok;
      enumerate_tokens(varIdx + 1, binding, out);
    }
    binding.tokens.erase(var);
  }

  void emit_if_satisfied(const Binding& binding, std::vector<OutRow>& out) {
    memo_.clear();
    if (ast_.where && !truthy(eval(*ast_.where, binding), *ast_.where)) return;
    OutRow row;
    if (ast_.selectStar) {
      for (const auto& alias : aliasOrder_) {
        const BoundRow& br = binding.rows.at(alias);
        for (const auto& cell : br.table->rows[br.row])
          row.cells.push_back(render_value(cell));
      }
    } else {
      for (const auto& item : ast_.select) {
        std::string prefix;
        if (item.expr->kind == ExprKind::ColRef && !item.expr->text.empty())
          prefix = item.expr->text;  // "Table.Column:" from the rewrite
        row.cells.push_back(prefix + render_eval(eval(*item.expr, binding)));
      }
    }
    if (ast_.orderBy) {
      row.hasKey = true;
      row.key = eval_order_key(binding);
    }
    out.push_back(std::move(row));
  }

  EvalValue eval_order_key(const Binding& binding) {
    // ORDER BY may name a select label (the Fig-13 pattern).
    if (ast_.orderBy->kind == ExprKind::Ident) {
      for (const auto& item : ast_.select)
        if (item.label == ast_.orderBy->text) return eval(*item.expr, binding);
    }
    return eval(*ast_.orderBy, binding);
  }

  // ---- expression evaluation -------------------------------------------

  const std::vector<std::string>& database_tokens() {
    if (!dbTokens_) dbTokens_ = tokenize_database(db_, config_).tokens;
    return *dbTokens_;
  }

  std::vector<std::string> row_tokens(const BoundRow& br) {
    return tokenize_row(br.table->name, br.row, db_, config_, config_.maxHops);
  }

  std::vector<std::string> cell_tokens(const BoundRow& br,
                                       const std::string& column) {
    int c = br.table->column_index(column);
    if (c < 0)
      throw Error("unknown column \"" + column + "\" in table " +
                  br.table->name);
    return tokenize_value(br.table->rows[br.row][static_cast<std::size_t>(c)],
                          br.table->columns[static_cast<std::size_t>(c)],
                          config_, br.table->name);
  }

  std::vector<std::string> scope_tokens(const Expr& e, const Binding& binding) {
    switch (e.kind) {
      case ExprKind::ColRef: {
        auto it = binding.rows.find(e.alias);
        if (it == binding.rows.end())
          throw Error("unbound alias \"" + e.alias + "\"");
        if (e.member == "*") return row_tokens(it->second);
        return cell_tokens(it->second, e.member);
      }
      case ExprKind::Ident: {
        if (e.text == "database") return database_tokens();
        if (auto it = binding.rows.find(e.text); it != binding.rows.end())
          return row_tokens(it->second);
        if (auto it = binding.tokens.find(e.text); it != binding.tokens.end())
          return {it->second};
        throw Error("invalid scope \"" + e.text + "\"");
      }
      case ExprKind::StringLit:
        return tokenize_text(e.text, config_);
      default:
        throw Error("invalid scope argument: " + to_string(e));
    }
  }

  // A single token out of an expression (for vec/cosineDistance args).
  std::string token_of(const Expr& e, const Binding& binding) {
    if (e.kind == ExprKind::StringLit) return e.text;
    if (e.kind == ExprKind::Ident) {
      if (auto it = binding.tokens.find(e.text); it != binding.tokens.end())
        return it->second;
      throw Error("expected a token-valued expression, got \"" + e.text + "\"");
    }
    if (e.kind == ExprKind::ColRef) {
      auto toks = scope_tokens(e, binding);
      if (toks.size() != 1)
        throw Error(to_string(e) + " does not tokenize to a single token (" +
                    std::to_string(toks.size()) + " tokens); use a proximity "
                    "UDF for multi-token scopes");
      return toks[0];
    }
    throw Error("expected a token-valued expression: " + to_string(e));
  }

  std::vector<double> vector_of(const Expr& e, const Binding& binding) {
    if (e.kind == ExprKind::Binary &&
        (e.op == BinOp::Add || e.op == BinOp::Sub)) {
      auto lhs = vector_of(*e.lhs, binding);
      auto rhs = vector_of(*e.rhs, binding);
      if (lhs.size() != rhs.size())
        throw Error("vector dimension mismatch in " + to_string(e));
      kernels::axpy(e.op == BinOp::Add ? 1.0 : -1.0, rhs.data(), lhs.data(),
                    lhs.size());
      return lhs;
    }
    if (e.kind == ExprKind::FuncCall && e.text == "vec") {
      auto v = ops::vec(token_of(*e.args[0], binding), store_);
      return {v.begin(), v.end()};
    }
    auto v = ops::vec(token_of(e, binding), store_);
    return {v.begin(), v.end()};
  }

  EvalValue eval(const Expr& e, const Binding& binding) {
    switch (e.kind) {
      case ExprKind::NumberLit: {
        double d = e.number;
        if (d == std::floor(d) && std::fabs(d) < 1e15 &&
            e.text.find('.') == std::string::npos)
          return {static_cast<long long>(d)};
        return {d};
      }
      case ExprKind::StringLit:
        return {e.text};
      case ExprKind::BoolLit:
        return {e.boolean};
      case ExprKind::Ident: {
        if (auto it = binding.tokens.find(e.text); it != binding.tokens.end())
          return {it->second};
        throw Error("cannot evaluate identifier \"" + e.text + "\"");
      }
      case ExprKind::ColRef: {
        auto it = binding.rows.find(e.alias);
        if (it == binding.rows.end())
          throw Error("unbound alias \"" + e.alias + "\"");
        if (e.member == "*")
          throw Error("row reference " + to_string(e) +
                      " is only valid as a UDF scope argument");
        const BoundRow& br = it->second;
        int c = br.table->column_index(e.member);
        if (c < 0)
          throw Error("unknown column \"" + e.member + "\" in table " +
                      br.table->name);
        return from_cell(br.table->rows[br.row][static_cast<std::size_t>(c)]);
      }
      case ExprKind::Not:
        return {!truthy(eval(*e.lhs, binding), *e.lhs)};
      case ExprKind::FuncCall: {
        auto it = memo_.find(&e);
        if (it != memo_.end()) return it->second;
        EvalValue v = eval_call(e, binding);
        memo_[&e] = v;
        return v;
      }
      case ExprKind::Binary:
        return eval_binary(e, binding);
    }
    throw Error("unreachable expression kind");
  }

  EvalValue eval_call(const Expr& e, const Binding& binding) {
    if (e.text == "contains") {
      auto scope = scope_tokens(*e.args[0], binding);
      std::string entity = token_of(*e.args[1], binding);
      return {static_cast<long long>(ops::contains_count(scope, entity))};
    }
    if (e.text == "cosineDistance") {
      auto v1 = vector_of(*e.args[0], binding);
      auto v2 = vector_of(*e.args[1], binding);
      return {ops::cosine(v1, v2)};
    }
    if (e.text == "proximityMax")
      return {ops::proximity_max(scope_tokens(*e.args[0], binding),
                                 scope_tokens(*e.args[1], binding), store_)};
    if (e.text == "proximityAvg")
      return {ops::proximity_avg(scope_tokens(*e.args[0], binding),
                                 scope_tokens(*e.args[1], binding), store_)};
    if (e.text == "proximityTop2Avg")
      return {ops::proximity_top2_avg(scope_tokens(*e.args[0], binding),
                                      scope_tokens(*e.args[1], binding),
                                      store_)};
    if (e.text == "subsetProximityAvg") {
      EvalValue size = eval(*e.args[0], binding);
      if (!size.is_numeric())
        throw Error("subsetProximityAvg: size must be numeric");
      return {ops::subset_proximity_avg(
          static_cast<int>(size.as_real()), scope_tokens(*e.args[1], binding),
          scope_tokens(*e.args[2], binding), store_)};
    }
    if (e.text == "vec") return {vector_of(e, binding)};
    if (e.text == "int") {
      EvalValue v = eval(*e.args[0], binding);
      if (v.is_int()) return v;
      if (v.is_real())
        return {static_cast<long long>(std::trunc(v.as_real()))};
      if (v.is_string()) {
        try {
          return {static_cast<long long>(std::stoll(std::get<std::string>(v.v)))};
        } catch (const std::exception&) {
          throw Error("int(): cannot parse \"" + std::get<std::string>(v.v) +
                      "\"");
        }
      }
      throw Error("int(): unsupported operand");
    }
    if (e.text == "argmaxCosine") {
      // True when the first argument's token maximizes cosine against
      // the target vector over every row of its table.
      const Expr& col = *e.args[0];
      if (col.kind != ExprKind::ColRef)
        throw Error("argmaxCosine: first argument must be a column reference");
      auto target = vector_of(*e.args[1], binding);
      auto it = binding.rows.find(col.alias);
      if (it == binding.rows.end())
        throw Error("unbound alias \"" + col.alias + "\"");
      const Table* t = it->second.table;
      int c = t->column_index(col.member);
      if (c < 0) throw Error("unknown column \"" + col.member + "\"");
      double best = -2.0;
      for (const auto& row : t->rows) {
        auto toks = tokenize_value(row[static_cast<std::size_t>(c)],
                                   t->columns[static_cast<std::size_t>(c)],
                                   config_, t->name);
        if (toks.size() != 1) continue;
        auto v = store_.get(toks[0]);
        if (!v) continue;
        best = std::max(best, ops::cosine(*v, target));
      }
      double mine = ops::cosine(
          ops::vec(token_of(col, binding), store_), target);
      return {mine >= best - 1e-12};
    }
    if (ops::ClosenessScale::is_scale_name(e.text)) {
      auto v1 = vector_of(*e.args[0], binding);
      auto v2 = vector_of(*e.args[1], binding);
      return {ops::cosine(v1, v2) >= scale_.threshold(e.text)};
    }
    throw Error("unknown function \"" + e.text + "\"");
  }

  EvalValue eval_binary(const Expr& e, const Binding& binding) {
    switch (e.op) {
      case BinOp::And: {
        if (!truthy(eval(*e.lhs, binding), *e.lhs)) return {false};
        return {truthy(eval(*e.rhs, binding), *e.rhs)};
      }
      case BinOp::Or: {
        if (truthy(eval(*e.lhs, binding), *e.lhs)) return {true};
        return {truthy(eval(*e.rhs, binding), *e.rhs)};
      }
      case BinOp::Add:
      case BinOp::Sub: {
        // Vector arithmetic only makes sense via vec(); detect it first.
        if (contains_vec(e)) return {vector_of(e, binding)};
        EvalValue a = eval(*e.lhs, binding);
        EvalValue b = eval(*e.rhs, binding);
        if (!a.is_numeric() || !b.is_numeric())
          throw Error("type mismatch in arithmetic: " + to_string(e));
        if (a.is_int() && b.is_int()) {
          long long x = std::get<long long>(a.v), y = std::get<long long>(b.v);
          return {e.op == BinOp::Add ? x + y : x - y};
        }
        return {e.op == BinOp::Add ? a.as_real() + b.as_real()
                                   : a.as_real() - b.as_real()};
      }
      default:
        return compare(e, binding);
    }
  }

  static bool contains_vec(const Expr& e) {
    bool found = false;
    std::function<void(const Expr&)> rec = [&](const Expr& x) {
      if (x.kind == ExprKind::FuncCall && x.text == "vec") found = true;
      if (x.kind == ExprKind::Binary) {
        rec(*x.lhs);
        rec(*x.rhs);
      }
    };
    rec(e);
    return found;
  }

  EvalValue compare(const Expr& e, const Binding& binding) {
    EvalValue a = eval(*e.lhs, binding);
    EvalValue b = eval(*e.rhs, binding);
    if (a.is_null() || b.is_null()) return {false};
    int cmp;
    if (a.is_numeric() && b.is_numeric()) {
      double x = a.as_real(), y = b.as_real();
      cmp = x < y ? -1 : (x > y ? 1 : 0);
    } else if (a.is_string() && b.is_string()) {
      cmp = std::get<std::string>(a.v).compare(std::get<std::string>(b.v));
      cmp = cmp < 0 ? -1 : (cmp > 0 ? 1 : 0);
    } else if (a.is_bool() && b.is_bool()) {
      int x = std::get<bool>(a.v), y = std::get<bool>(b.v);
      cmp = x < y ? -1 : (x > y ? 1 : 0);
    } else if ((a.is_numeric() && b.is_string()) ||
               (a.is_string() && b.is_numeric())) {
      // '471' vs an integer column: coerce the string side.
      const std::string& s =
          std::get<std::string>((a.is_string() ? a : b).v);
      double parsed;
      try {
        parsed = std::stod(s);
      } catch (const std::exception&) {
        throw Error("type mismatch in comparison: " + to_string(e));
      }
      double x = a.is_string() ? parsed : a.as_real();
      double y = b.is_string() ? parsed : b.as_real();
      cmp = x < y ? -1 : (x > y ? 1 : 0);
    } else {
      throw Error("type mismatch in comparison: " + to_string(e));
    }
    switch (e.op) {
      case BinOp::Lt: return {cmp < 0};
      case BinOp::Le: return {cmp <= 0};
      case BinOp::Gt: return {cmp > 0};
      case BinOp::Ge: return {cmp >= 0};
      case BinOp::Eq: return {cmp == 0};
      case BinOp::Ne: return {cmp != 0};
      default: throw Error("unreachable comparison op");
    }
  }
};

bool key_less(const EvalValue& a, const EvalValue& b) {
  if (a.is_numeric() && b.is_numeric()) return a.as_real() < b.as_real();
  return render_eval(a) < render_eval(b);
}

std::string row_text(const std::vector<std::string>& cells) {
  std::string s;
  for (const auto& c : cells) {
    s += c;
    s += '\x1f';
  }
  return s;
}

}  // namespace

ResultTable execute(const QueryAst& ast, const Database& db,
                    const VectorStore& store, const TokenizationConfig& config,
                    const ops::ClosenessScale& scale) {
  std::vector<QueryAst> concrete = rewrite_relation_vars(ast, db);
  ResultTable result;
  std::vector<Engine::OutRow> rows;
  bool projectsToken = false;
  for (std::size_t i = 0; i < concrete.size(); ++i) {
    Engine engine(concrete[i], db, store, config, scale);
    auto part = engine.run();
    if (i == 0) {
      result.labels = engine.labels();
      projectsToken = engine.projects_token_var();
    }
    for (auto& r : part) rows.push_back(std::move(r));
  }

  if (!projectsToken) {
    std::set<std::string> seen;
    std::vector<Engine::OutRow> unique;
    for (auto& r : rows)
      if (seen.insert(row_text(r.cells)).second) unique.push_back(std::move(r));
    rows = std::move(unique);
  }

  if (ast.orderBy) {
    bool desc = ast.orderDesc;
    std::stable_sort(rows.begin(), rows.end(),
                     [desc](const Engine::OutRow& a, const Engine::OutRow& b) {
                       if (key_less(a.key, b.key)) return !desc;
                       if (key_less(b.key, a.key)) return desc;
                       return row_text(a.cells) < row_text(b.cells);
                     });
  }
  if (ast.limit && rows.size() > static_cast<std::size_t>(*ast.limit))
    rows.resize(static_cast<std::size_t>(*ast.limit));
  for (auto& r : rows) result.rows.push_back(std::move(r.cells));
  return result;
}

std::string render_result(const ResultTable& table, bool csv) {
  std::ostringstream out;
  if (csv) {
    auto emit = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out << ',';
        const std::string& c = cells[i];
        if (c.find_first_of(",\"\n") != std::string::npos) {
          out << '"';
          for (char ch : c) {
            if (ch == '"') out << '"';
            out << ch;
          }
          out << '"';
        } else {
          out << c;
        }
      }
      out << '\n';
    };
    emit(table.labels);
    for (const auto& r : table.rows) emit(r);
    return out.str();
  }
  std::vector<std::size_t> widths(table.labels.size(), 0);
  auto widen = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size() && i < widths.size(); ++i)
      widths[i] = std::max(widths[i], cells[i].size());
  };
  widen(table.labels);
  for (const auto& r : table.rows) widen(r);
  auto emit = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << "  ";
      out << cells[i];
      if (i + 1 < cells.size())
        out << std::string(widths[i] - cells[i].size(), ' ');
    }
    out << '\n';
  };
  emit(table.labels);
  for (const auto& r : table.rows) emit(r);
  return out.str();
}

}  // namespace ciq::ciql
