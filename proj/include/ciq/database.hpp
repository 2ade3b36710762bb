#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

namespace ciq {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ColumnType { Char, String, Boolean, Integer, Real };

// Null is modelled as monostate regardless of declared type.
using Value = std::variant<std::monostate, char, std::string, bool,
                           std::int64_t, double>;

struct Column {
  std::string name;
  ColumnType type = ColumnType::String;
  bool nullable = true;
};

using Row = std::vector<Value>;

struct Table {
  std::string name;
  std::vector<Column> columns;
  std::vector<Row> rows;
  std::vector<std::string> primaryKey;  // column names, may be empty

  int column_index(const std::string& col) const;
};

struct ForeignKey {
  std::string sourceTable;
  std::vector<std::string> sourceColumns;
  std::string targetTable;  // resolved against the target's primary key
};

class Database {
 public:
  void add_table(Table t);
  void add_foreign_key(ForeignKey fk);

  const Table* find_table(const std::string& name) const;
  const Table& table(const std::string& name) const;
  const std::vector<Table>& tables() const { return tables_; }
  const std::vector<ForeignKey>& foreign_keys() const { return fks_; }
  std::vector<const ForeignKey*> foreign_keys_of(const std::string& table) const;

  // Checks row arity, FK target existence, and primary-key uniqueness.
  // Returns human-readable violation messages; empty means valid.
  std::vector<std::string> validate() const;

  // Looks up the target row of `fk` for the given source row values.
  // Returns row index in the target table, or nullopt when dangling.
  std::optional<std::size_t> resolve_fk(const ForeignKey& fk,
                                        const Row& sourceRow) const;

 private:
  std::vector<Table> tables_;
  std::unordered_map<std::string, std::size_t> byName_;
  std::vector<ForeignKey> fks_;
};

std::string to_display_string(const Value& v);
const char* type_name(ColumnType t);
ColumnType parse_type_name(const std::string& s);

// Parses a cell's raw text into a typed value; throws Error with a
// descriptive message on coercion failure. Empty text in a nullable
// column becomes Null.
Value coerce_value(const std::string& raw, const Column& col);

// JSON catalog snapshot (the on-disk form produced by `ci ingest`).
void save_catalog(const Database& db, const std::string& path);
Database load_catalog(const std::string& path);

}  // namespace ciq
