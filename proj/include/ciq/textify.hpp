#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ciq/database.hpp"

namespace ciq {

enum class FieldNamePrefix { None, OncePerField, PerToken };
enum class FkExpansion { Off, AfterRow, Inline };

struct TokenizationConfig {
  FieldNamePrefix fieldNamePrefix = FieldNamePrefix::None;
  bool relationNamePrefix = false;
  bool phraseJoin = false;
  // Per-column overrides; entries are "column" or "table.column".
  std::set<std::string> phraseJoinColumns;
  std::string splitDelimiters = " \t\r\n";
  bool rangeDesignators = false;
  FkExpansion fkExpansion = FkExpansion::Off;
  int maxHops = 1;
  // Restricts which target-table columns an FK expansion tokenizes;
  // default is all non-key columns of the target.
  std::map<std::string, std::vector<std::string>> fkColumnsOfInterest;
  bool lowercase = false;
  bool strictDanglingFk = false;

  bool phrase_join_for(const std::string& table, const std::string& column) const;
};

struct TokenProvenance {
  std::string table;
  std::size_t rowIndex = 0;
  int column = -1;  // -1 for structural tokens (prefixes, relation names)
};

struct Document {
  std::vector<std::string> tokens;
  std::vector<TokenProvenance> provenance;       // empty or same size as tokens
  std::vector<std::size_t> rowBreaks;            // end offset of each row
};

// Bucket for the range designator of a finite nonzero magnitude.
// hiExclusive is the first value belonging to the next bucket.
struct RangeBucket {
  std::string token;
  double lo = 0;
  double hiExclusive = 0;
};
RangeBucket range_bucket(double x);

// [designator, literal]; throws on NaN/infinite input.
std::vector<std::string> encode_number(double x, const TokenizationConfig& config);

std::vector<std::string> tokenize_value(const Value& value, const Column& column,
                                        const TokenizationConfig& config,
                                        const std::string& tableName = "");

// Free text (query arguments, external corpora lines): delimiter split
// plus optional lowercasing; no prefixes, no designators.
std::vector<std::string> tokenize_text(const std::string& text,
                                       const TokenizationConfig& config);

std::vector<std::string> tokenize_row(const std::string& table,
                                      std::size_t rowIndex, const Database& db,
                                      const TokenizationConfig& config,
                                      int hopBudget,
                                      std::vector<std::string>* warnings = nullptr);

Document tokenize_database(const Database& db, const TokenizationConfig& config,
                           const std::optional<std::vector<std::string>>& tableOrder = std::nullopt,
                           std::vector<std::string>* warnings = nullptr);

// One row per line, tokens whitespace separated.
void export_document(const Document& doc, std::ostream& out);
Document import_document(std::istream& in);

}  // namespace ciq
