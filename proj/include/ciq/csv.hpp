#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "ciq/database.hpp"

namespace ciq {

// RFC-4180 parsing: quoted fields, embedded commas/newlines, "" escapes.
// Returns one record per row, including the header.
std::vector<std::vector<std::string>> parse_csv(std::istream& in);
std::vector<std::vector<std::string>> parse_csv_file(const std::string& path);

// Sidecar schema, flat key=value lines ('#' comments allowed):
//   type.<table>.<column> = char|string|boolean|integer|real  (suffix '?' => nullable)
//   pk.<table>            = <column>[,<column>...]
//   fk.<table>.<column>   = <targetTable>
// Undeclared columns default to nullable string.
struct Schema {
  struct ColumnDecl {
    ColumnType type = ColumnType::String;
    bool nullable = true;
  };
  std::map<std::string, std::map<std::string, ColumnDecl>> columnTypes;
  std::map<std::string, std::vector<std::string>> primaryKeys;
  std::vector<ForeignKey> foreignKeys;  // one source column per key
};

Schema parse_schema(std::istream& in);
Schema parse_schema_file(const std::string& path);

// Loads one CSV (header row required) as a table named `tableName`,
// typed per schema. Coercion failures carry the 1-based data row and
// column name.
Table load_csv_table(const std::string& csvPath, const std::string& tableName,
                     const Schema& schema);

// Full ingest: every CSV becomes a table named after its file stem.
Database ingest(const std::vector<std::string>& csvPaths,
                const std::string& schemaPath);

}  // namespace ciq
