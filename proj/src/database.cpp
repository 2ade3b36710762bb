#include "ciq/database.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace ciq {

int Table::column_index(const std::string& col) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i].name == col) return static_cast<int>(i);
  return -1;
}

void Database::add_table(Table t) {
  if (byName_.count(t.name)) throw Error("duplicate table: " + t.name);
  byName_[t.name] = tables_.size();
  tables_.push_back(std::move(t));
}

void Database::add_foreign_key(ForeignKey fk) { fks_.push_back(std::move(fk)); }

const Table* Database::find_table(const std::string& name) const {
  auto it = byName_.find(name);
  return it == byName_.end() ? nullptr : &tables_[it->second];
}

const Table& Database::table(const std::string& name) const {
  const Table* t = find_table(name);
  if (!t) throw Error("unknown table: " + name);
  return *t;
}

std::vector<const ForeignKey*> Database::foreign_keys_of(
    const std::string& table) const {
  std::vector<const ForeignKey*> out;
  for (const auto& fk : fks_)
    if (fk.sourceTable == table) out.push_back(&fk);
  return out;
}

namespace {
std::string key_of(const Row& row, const std::vector<int>& cols) {
  std::string k;
  for (int c : cols) {
    k += to_display_string(row[static_cast<std::size_t>(c)]);
    k += '\x1f';
  }
  return k;
}
}  // namespace

std::vector<std::string> Database::validate() const {
  std::vector<std::string> issues;
  for (const auto& t : tables_) {
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      if (t.rows[r].size() != t.columns.size())
        issues.push_back(t.name + " row " + std::to_string(r) +
                         ": arity mismatch");
    }
    if (!t.primaryKey.empty()) {
      std::vector<int> idx;
      for (const auto& c : t.primaryKey) {
        int i = t.column_index(c);
        if (i < 0) {
          issues.push_back(t.name + ": primary key column missing: " + c);
        } else {
          idx.push_back(i);
        }
      }
      if (idx.size() == t.primaryKey.size()) {
        std::set<std::string> seen;
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
          if (!seen.insert(key_of(t.rows[r], idx)).second)
            issues.push_back(t.name + " row " + std::to_string(r) +
                             ": duplicate primary key");
        }
      }
    }
  }
  for (const auto& fk : fks_) {
    const Table* src = find_table(fk.sourceTable);
    const Table* dst = find_table(fk.targetTable);
    if (!src) {
      issues.push_back("foreign key source table missing: " + fk.sourceTable);
      continue;
    }
    if (!dst) {
      issues.push_back("foreign key target table missing: " + fk.targetTable);
      continue;
    }
    if (dst->primaryKey.empty())
      issues.push_back("foreign key target has no primary key: " +
                       fk.targetTable);
    if (fk.sourceColumns.size() != dst->primaryKey.size())
      issues.push_back("foreign key " + fk.sourceTable + "->" + fk.targetTable +
                       ": column count does not match target primary key");
    for (const auto& c : fk.sourceColumns)
      if (src->column_index(c) < 0)
        issues.push_back("foreign key source column missing: " +
                         fk.sourceTable + "." + c);
  }
  return issues;
}

std::optional<std::size_t> Database::resolve_fk(const ForeignKey& fk,
                                                const Row& sourceRow) const {
  const Table& src = table(fk.sourceTable);
  const Table& dst = table(fk.targetTable);
  std::vector<int> srcIdx, dstIdx;
  for (const auto& c : fk.sourceColumns) srcIdx.push_back(src.column_index(c));
  for (const auto& c : dst.primaryKey) dstIdx.push_back(dst.column_index(c));
  if (srcIdx.size() != dstIdx.size()) return std::nullopt;
  const std::string want = key_of(sourceRow, srcIdx);
  for (std::size_t r = 0; r < dst.rows.size(); ++r)
    if (key_of(dst.rows[r], dstIdx) == want) return r;
  return std::nullopt;
}

std::string to_display_string(const Value& v) {
  struct Visitor {
    std::string operator()(std::monostate) const { return "Null"; }
    std::string operator()(char c) const { return std::string(1, c); }
    std::string operator()(const std::string& s) const { return s; }
    std::string operator()(bool b) const { return b ? "TRUE" : "FALSE"; }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(double d) const {
      std::ostringstream os;
      os << d;
      return os.str();
    }
  };
  return std::visit(Visitor{}, v);
}

const char* type_name(ColumnType t) {
  switch (t) {
    case ColumnType::Char: return "char";
    case ColumnType::String: return "string";
    case ColumnType::Boolean: return "boolean";
    case ColumnType::Integer: return "integer";
    case ColumnType::Real: return "real";
  }
  return "?";
}

ColumnType parse_type_name(const std::string& s) {
  if (s == "char") return ColumnType::Char;
  if (s == "string") return ColumnType::String;
  if (s == "boolean" || s == "bool") return ColumnType::Boolean;
  if (s == "integer" || s == "int") return ColumnType::Integer;
  if (s == "real" || s == "double" || s == "float") return ColumnType::Real;
  throw Error("unknown column type: " + s);
}

Value coerce_value(const std::string& raw, const Column& col) {
  if (raw.empty() || raw == "Null" || raw == "NULL") {
    if (col.nullable || raw.empty()) return std::monostate{};
  }
  switch (col.type) {
    case ColumnType::Char:
      if (raw.size() != 1)
        throw Error("expected single character, got \"" + raw + "\"");
      return raw[0];
    case ColumnType::String:
      return raw;
    case ColumnType::Boolean: {
      if (raw == "TRUE" || raw == "true" || raw == "1") return true;
      if (raw == "FALSE" || raw == "false" || raw == "0") return false;
      throw Error("expected boolean, got \"" + raw + "\"");
    }
    case ColumnType::Integer: {
      std::int64_t out{};
      auto [p, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), out);
      if (ec != std::errc{} || p != raw.data() + raw.size())
        throw Error("expected integer, got \"" + raw + "\"");
      return out;
    }
    case ColumnType::Real: {
      std::size_t pos = 0;
      double d;
      try {
        d = std::stod(raw, &pos);
      } catch (const std::exception&) {
        throw Error("expected real, got \"" + raw + "\"");
      }
      if (pos != raw.size() || !std::isfinite(d))
        throw Error("expected real, got \"" + raw + "\"");
      return d;
    }
  }
  throw Error("unreachable column type");
}

namespace {

nlohmann::json value_to_json(const Value& v) {
  struct Visitor {
    nlohmann::json operator()(std::monostate) const { return nullptr; }
    nlohmann::json operator()(char c) const { return std::string(1, c); }
    nlohmann::json operator()(const std::string& s) const { return s; }
    nlohmann::json operator()(bool b) const { return b; }
    nlohmann::json operator()(std::int64_t i) const { return i; }
    nlohmann::json operator()(double d) const { return d; }
  };
  return std::visit(Visitor{}, v);
}

Value value_from_json(const nlohmann::json& j, ColumnType t) {
  if (j.is_null()) return std::monostate{};
  switch (t) {
    case ColumnType::Char: {
      std::string s = j.get<std::string>();
      return s.empty() ? Value{std::monostate{}} : Value{s[0]};
    }
    case ColumnType::String: return j.get<std::string>();
    case ColumnType::Boolean: return j.get<bool>();
    case ColumnType::Integer: return j.get<std::int64_t>();
    case ColumnType::Real: return j.get<double>();
  }
  return std::monostate{};
}

}  // namespace

void save_catalog(const Database& db, const std::string& path) {
  nlohmann::json j;
  j["format"] = "ciq-catalog-v1";
  for (const auto& t : db.tables()) {
    nlohmann::json jt;
    jt["name"] = t.name;
    for (const auto& c : t.columns)
      jt["columns"].push_back(
          {{"name", c.name}, {"type", type_name(c.type)}, {"nullable", c.nullable}});
    jt["primaryKey"] = t.primaryKey;
    jt["rows"] = nlohmann::json::array();
    for (const auto& r : t.rows) {
      nlohmann::json jr = nlohmann::json::array();
      for (const auto& v : r) jr.push_back(value_to_json(v));
      jt["rows"].push_back(std::move(jr));
    }
    j["tables"].push_back(std::move(jt));
  }
  for (const auto& fk : db.foreign_keys())
    j["foreignKeys"].push_back({{"sourceTable", fk.sourceTable},
                                {"sourceColumns", fk.sourceColumns},
                                {"targetTable", fk.targetTable}});
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write catalog: " + path);
  os << j.dump(1, '\t') << "\n";
}

Database load_catalog(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot read catalog: " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const std::exception& e) {
    throw Error("malformed catalog " + path + ": " + e.what());
  }
  if (j.value("format", "") != "ciq-catalog-v1")
    throw Error("catalog format mismatch in " + path);
  Database db;
  for (const auto& jt : j.value("tables", nlohmann::json::array())) {
    Table t;
    t.name = jt.at("name").get<std::string>();
    for (const auto& jc : jt.value("columns", nlohmann::json::array())) {
      Column c;
      c.name = jc.at("name").get<std::string>();
      c.type = parse_type_name(jc.at("type").get<std::string>());
      c.nullable = jc.value("nullable", true);
      t.columns.push_back(std::move(c));
    }
    t.primaryKey = jt.value("primaryKey", std::vector<std::string>{});
    for (const auto& jr : jt.value("rows", nlohmann::json::array())) {
      Row r;
      for (std::size_t i = 0; i < jr.size(); ++i)
        r.push_back(value_from_json(jr[i], t.columns[i].type));
      t.rows.push_back(std::move(r));
    }
    db.add_table(std::move(t));
  }
  for (const auto& jf : j.value("foreignKeys", nlohmann::json::array())) {
    ForeignKey fk;
    fk.sourceTable = jf.at("sourceTable").get<std::string>();
    fk.sourceColumns = jf.at("sourceColumns").get<std::vector<std::string>>();
    fk.targetTable = jf.at("targetTable").get<std::string>();
    db.add_foreign_key(std::move(fk));
  }
  return db;
}

}  // namespace ciq
