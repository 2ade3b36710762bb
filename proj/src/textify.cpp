#include "ciq/textify.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace ciq {

bool TokenizationConfig::phrase_join_for(const std::string& table,
                                         const std::string& column) const {
  if (phraseJoin) return true;
  if (phraseJoinColumns.count(column)) return true;
  return !table.empty() && phraseJoinColumns.count(table + "." + column) > 0;
}

namespace {

std::string render_real(double x) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  (void)ec;
  return std::string(buf, p);
}

std::string render_bound_int(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.0f", v);
  return buf;
}

void lowercase_in_place(std::string& s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
}

std::vector<std::string> split_words(const std::string& text,
                                     const std::string& delims) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (delims.find(c) != std::string::npos) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::string column_token(const std::string& name,
                         const TokenizationConfig& config) {
  auto words = split_words(name, config.splitDelimiters);
  std::string tok;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) tok += '_';
    tok += words[i];
  }
  if (config.lowercase) lowercase_in_place(tok);
  return tok;
}

}  // namespace

RangeBucket range_bucket(double x) {
  if (!std::isfinite(x) || x == 0.0)
    throw Error("range_bucket: requires finite nonzero input");
  const bool negative = x < 0;
  const double m = std::fabs(x);
  int d = static_cast<int>(std::floor(std::log10(m)));
  while (m < std::pow(10.0, d)) --d;
  while (m >= std::pow(10.0, d + 1)) ++d;
  const double decade = std::pow(10.0, d);
  const bool lowHalf = m < 5.0 * decade;

  RangeBucket b;
  b.lo = lowHalf ? decade : 5.0 * decade;
  b.hiExclusive = lowHalf ? 5.0 * decade : 10.0 * decade;
  std::string loStr, hiStr;
  if (d >= 0) {
    loStr = render_bound_int(b.lo);
    hiStr = render_bound_int(b.hiExclusive - 1.0);
  } else {
    // Fractional decades render as 0.1-0.49, 0.5-0.99, 0.01-0.049, ...
    std::string zeros(static_cast<std::size_t>(-d - 1), '0');
    loStr = "0." + zeros + (lowHalf ? "1" : "5");
    hiStr = "0." + zeros + (lowHalf ? "49" : "99");
  }
  b.token = (negative ? "neg" : "") + loStr + "-" + hiStr;
  return b;
}

std::vector<std::string> encode_number(double x,
                                       const TokenizationConfig& config) {
  (void)config;
  if (!std::isfinite(x)) throw Error("encode_number: non-finite input");
  std::string designator = x == 0.0 ? "0-0" : range_bucket(x).token;
  return {designator, render_real(x)};
}

namespace {

std::vector<std::string> value_tokens(const Value& value, const Column& column,
                                      const TokenizationConfig& config,
                                      const std::string& tableName) {
  struct Visitor {
    const Column& col;
    const TokenizationConfig& config;
    const std::string& tableName;

    std::vector<std::string> operator()(std::monostate) const {
      return {"Null"};
    }
    std::vector<std::string> operator()(char c) const {
      return {std::string(1, c)};
    }
    std::vector<std::string> operator()(bool b) const {
      return {b ? std::string("TRUE") : std::string("FALSE")};
    }
    std::vector<std::string> operator()(std::int64_t i) const {
      if (config.rangeDesignators)
        return encode_number(static_cast<double>(i), config);
      return {std::to_string(i)};
    }
    std::vector<std::string> operator()(double d) const {
      if (config.rangeDesignators) return encode_number(d, config);
      return {render_real(d)};
    }
    std::vector<std::string> operator()(const std::string& s) const {
      auto words = split_words(s, config.splitDelimiters);
      if (words.empty()) return {};
      if (config.phrase_join_for(tableName, col.name)) {
        std::string joined;
        for (std::size_t i = 0; i < words.size(); ++i) {
          if (i) joined += '_';
          joined += words[i];
        }
        return {joined};
      }
      return words;
    }
  };
  auto toks = std::visit(Visitor{column, config, tableName}, value);
  if (config.lowercase)
    for (auto& t : toks) lowercase_in_place(t);
  return toks;
}

}  // namespace

std::vector<std::string> tokenize_value(const Value& value, const Column& column,
                                        const TokenizationConfig& config,
                                        const std::string& tableName) {
  auto toks = value_tokens(value, column, config, tableName);
  if (toks.empty() || config.fieldNamePrefix == FieldNamePrefix::None)
    return toks;
  const std::string colTok = column_token(column.name, config);
  std::vector<std::string> out;
  if (config.fieldNamePrefix == FieldNamePrefix::OncePerField) {
    out.reserve(toks.size() + 1);
    out.push_back(colTok);
    for (auto& t : toks) out.push_back(std::move(t));
  } else {
    out.reserve(toks.size() * 2);
    for (auto& t : toks) {
      out.push_back(colTok);
      out.push_back(std::move(t));
    }
  }
  return out;
}

std::vector<std::string> tokenize_text(const std::string& text,
                                       const TokenizationConfig& config) {
  auto toks = split_words(text, config.splitDelimiters);
  if (config.lowercase)
    for (auto& t : toks) lowercase_in_place(t);
  return toks;
}

namespace {

struct Emitter {
  std::vector<std::string> tokens;
  std::vector<TokenProvenance> provenance;

  void emit(std::string tok, const std::string& table, std::size_t row,
            int col) {
    tokens.push_back(std::move(tok));
    provenance.push_back(TokenProvenance{table, row, col});
  }
};

// columnFilter non-null restricts to the named columns (FK expansion).
void emit_row(const std::string& tableName, std::size_t rowIndex,
              const Database& db, const TokenizationConfig& config,
              int hopBudget, const std::vector<std::string>* columnFilter,
              std::vector<std::string>* warnings, Emitter& out) {
  const Table& t = db.table(tableName);
  if (rowIndex >= t.rows.size())
    throw Error("row index out of range in table " + tableName);
  const Row& row = t.rows[rowIndex];

  if (config.relationNamePrefix)
    out.emit(column_token(t.name, config), tableName, rowIndex, -1);

  // Inline FK expansions attach after the tokens of the last source column.
  std::vector<const ForeignKey*> fks;
  if (config.fkExpansion != FkExpansion::Off && hopBudget > 0)
    fks = db.foreign_keys_of(tableName);
  std::vector<std::vector<const ForeignKey*>> inlineAfter(t.columns.size());
  std::vector<const ForeignKey*> afterRow;
  for (const ForeignKey* fk : fks) {
    if (config.fkExpansion == FkExpansion::Inline) {
      int last = -1;
      for (const auto& c : fk->sourceColumns)
        last = std::max(last, t.column_index(c));
      if (last >= 0)
        inlineAfter[static_cast<std::size_t>(last)].push_back(fk);
      else
        afterRow.push_back(fk);
    } else {
      afterRow.push_back(fk);
    }
  }

  auto expand_fk = [&](const ForeignKey& fk) {
    auto target = db.resolve_fk(fk, row);
    if (!target) {
      std::string msg = "dangling foreign key " + fk.sourceTable + "->" +
                        fk.targetTable + " at row " + std::to_string(rowIndex);
      if (config.strictDanglingFk) throw Error(msg);
      if (warnings) warnings->push_back(msg);
      return;
    }
    const Table& dst = db.table(fk.targetTable);
    std::vector<std::string> fields;
    if (auto it = config.fkColumnsOfInterest.find(fk.targetTable);
        it != config.fkColumnsOfInterest.end()) {
      fields = it->second;
    } else {
      for (const auto& c : dst.columns) {
        if (std::find(dst.primaryKey.begin(), dst.primaryKey.end(), c.name) ==
            dst.primaryKey.end())
          fields.push_back(c.name);
      }
    }
    emit_row(fk.targetTable, *target, db, config, hopBudget - 1, &fields,
             warnings, out);
  };

  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    if (columnFilter &&
        std::find(columnFilter->begin(), columnFilter->end(),
                  t.columns[c].name) == columnFilter->end())
      continue;
    auto toks = tokenize_value(row[c], t.columns[c], config, tableName);
    const bool prefixed = config.fieldNamePrefix != FieldNamePrefix::None;
    for (std::size_t i = 0; i < toks.size(); ++i) {
      int col = static_cast<int>(c);
      if (prefixed) {
        // prefix tokens sit at even offsets (perToken) or offset 0 (once)
        bool isPrefix = config.fieldNamePrefix == FieldNamePrefix::PerToken
                            ? (i % 2 == 0)
                            : (i == 0);
        if (isPrefix) col = -1;
      }
      out.emit(std::move(toks[i]), tableName, rowIndex, col);
    }
    for (const ForeignKey* fk : inlineAfter[c]) expand_fk(*fk);
  }
  for (const ForeignKey* fk : afterRow) expand_fk(*fk);
}

}  // namespace

std::vector<std::string> tokenize_row(const std::string& table,
                                      std::size_t rowIndex, const Database& db,
                                      const TokenizationConfig& config,
                                      int hopBudget,
                                      std::vector<std::string>* warnings) {
  if (hopBudget > config.maxHops)
    throw Error("hop budget exceeds configured maxHops");
  Emitter em;
  emit_row(table, rowIndex, db, config, hopBudget, nullptr, warnings, em);
  return std::move(em.tokens);
}

Document tokenize_database(const Database& db, const TokenizationConfig& config,
                           const std::optional<std::vector<std::string>>& tableOrder,
                           std::vector<std::string>* warnings) {
  std::vector<const Table*> order;
  if (tableOrder) {
    for (const auto& name : *tableOrder) order.push_back(&db.table(name));
  } else {
    for (const auto& t : db.tables()) order.push_back(&t);
  }
  Document doc;
  Emitter em;
  for (const Table* t : order) {
    for (std::size_t r = 0; r < t->rows.size(); ++r) {
      emit_row(t->name, r, db, config, config.maxHops, nullptr, warnings, em);
      doc.rowBreaks.push_back(em.tokens.size());
    }
  }
  doc.tokens = std::move(em.tokens);
  doc.provenance = std::move(em.provenance);
  return doc;
}

void export_document(const Document& doc, std::ostream& out) {
  std::size_t breakIdx = 0;
  std::size_t lineStart = 0;
  for (std::size_t i = 0; i <= doc.tokens.size(); ++i) {
    bool atBreak = breakIdx < doc.rowBreaks.size() && doc.rowBreaks[breakIdx] == i;
    if (atBreak || i == doc.tokens.size()) {
      if (i > lineStart) {
        for (std::size_t j = lineStart; j < i; ++j) {
          if (j > lineStart) out << ' ';
          out << doc.tokens[j];
        }
        out << '\n';
      }
      lineStart = i;
      while (breakIdx < doc.rowBreaks.size() && doc.rowBreaks[breakIdx] == i)
        ++breakIdx;
    }
    if (i == doc.tokens.size()) break;
  }
}

Document import_document(std::istream& in) {
  Document doc;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tok;
    bool any = false;
    while (ls >> tok) {
      doc.tokens.push_back(tok);
      any = true;
    }
    if (any) doc.rowBreaks.push_back(doc.tokens.size());
  }
  return doc;
}

}  // namespace ciq
