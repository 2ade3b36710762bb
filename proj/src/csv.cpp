#include "ciq/csv.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace ciq {

std::vector<std::vector<std::string>> parse_csv(std::istream& in) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool inQuotes = false;
  bool fieldStarted = false;
  int c;
  auto endField = [&] {
    record.push_back(std::move(field));
    field.clear();
    fieldStarted = false;
  };
  auto endRecord = [&] {
    endField();
    records.push_back(std::move(record));
    record.clear();
  };
  while ((c = in.get()) != EOF) {
    if (inQuotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          field.push_back('"');
          in.get();
        } else {
          inQuotes = false;
        }
      } else {
        field.push_back(static_cast<char>(c));
      }
      continue;
    }
    switch (c) {
      case '"':
        inQuotes = true;
        fieldStarted = true;
        break;
      case ',':
        endField();
        break;
      case '\r':
        if (in.peek() == '\n') in.get();
        endRecord();
        break;
      case '\n':
        endRecord();
        break;
      default:
        field.push_back(static_cast<char>(c));
        fieldStarted = true;
        break;
    }
  }
  if (inQuotes) throw Error("csv: unterminated quoted field");
  if (fieldStarted || !field.empty() || !record.empty()) endRecord();
  return records;
}

std::vector<std::vector<std::string>> parse_csv_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot read csv: " + path);
  return parse_csv(is);
}

namespace {
std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, sep)) out.push_back(trim(part));
  return out;
}
}  // namespace

Schema parse_schema(std::istream& in) {
  Schema schema;
  std::string line;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    std::size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw Error("schema line " + std::to_string(lineNo) + ": expected key=value");
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    auto parts = split_on(key, '.');
    if (parts.size() == 3 && parts[0] == "type") {
      Schema::ColumnDecl decl;
      std::string tn = value;
      if (!tn.empty() && tn.back() == '?') {
        tn.pop_back();
        decl.nullable = true;
      } else {
        decl.nullable = false;
      }
      decl.type = parse_type_name(trim(tn));
      schema.columnTypes[parts[1]][parts[2]] = decl;
    } else if (parts.size() == 2 && parts[0] == "pk") {
      schema.primaryKeys[parts[1]] = split_on(value, ',');
    } else if (parts.size() == 3 && parts[0] == "fk") {
      schema.foreignKeys.push_back(ForeignKey{parts[1], {parts[2]}, value});
    } else {
      throw Error("schema line " + std::to_string(lineNo) + ": unknown key \"" +
                  key + "\"");
    }
  }
  return schema;
}

Schema parse_schema_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot read schema: " + path);
  return parse_schema(is);
}

Table load_csv_table(const std::string& csvPath, const std::string& tableName,
                     const Schema& schema) {
  auto records = parse_csv_file(csvPath);
  if (records.empty()) throw Error(csvPath + ": missing header row");
  Table t;
  t.name = tableName;
  const auto typeIt = schema.columnTypes.find(tableName);
  for (const auto& colName : records[0]) {
    Column c;
    c.name = colName;
    if (typeIt != schema.columnTypes.end()) {
      auto it = typeIt->second.find(colName);
      if (it != typeIt->second.end()) {
        c.type = it->second.type;
        c.nullable = it->second.nullable;
      }
    }
    t.columns.push_back(std::move(c));
  }
  if (auto pk = schema.primaryKeys.find(tableName); pk != schema.primaryKeys.end())
    t.primaryKey = pk->second;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() != t.columns.size())
      throw Error(csvPath + " row " + std::to_string(r) + ": expected " +
                  std::to_string(t.columns.size()) + " fields, got " +
                  std::to_string(rec.size()));
    Row row;
    for (std::size_t i = 0; i < rec.size(); ++i) {
      try {
        row.push_back(coerce_value(rec[i], t.columns[i]));
      } catch (const Error& e) {
        throw Error(csvPath + " row " + std::to_string(r) + ", column \"" +
                    t.columns[i].name + "\": " + e.what());
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

Database ingest(const std::vector<std::string>& csvPaths,
                const std::string& schemaPath) {
  Schema schema = parse_schema_file(schemaPath);
  Database db;
  for (const auto& path : csvPaths) {
    std::string stem = std::filesystem::path(path).stem().string();
    db.add_table(load_csv_table(path, stem, schema));
  }
  for (const auto& fk : schema.foreignKeys) db.add_foreign_key(fk);
  return db;
}

}  // namespace ciq
