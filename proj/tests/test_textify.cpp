#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "ciq/textify.hpp"

using namespace ciq;

namespace {

Database fixture_db() {
  Database db;
  Table dept;
  dept.name = "Dept";
  dept.columns = {{"DNo", ColumnType::Integer, false},
                  {"DName", ColumnType::String, false},
                  {"Mgr", ColumnType::String, true}};
  dept.primaryKey = {"DNo"};
  dept.rows = {
      {std::int64_t{1}, std::string("Research"), std::string("Judy Smith")},
  };
  db.add_table(dept);

  Table emp;
  emp.name = "Emp";
  emp.columns = {{"Name", ColumnType::String, false},
                 {"Salary", ColumnType::Integer, true},
                 {"DNo", ColumnType::Integer, true}};
  emp.rows = {
      {std::string("John Smith"), std::int64_t{112000}, std::int64_t{1}},
  };
  db.add_table(emp);
  db.add_foreign_key({"Emp", {"DNo"}, "Dept"});
  return db;
}

}  // namespace

TEST_CASE("range designator worked example") {
  TokenizationConfig cfg;
  cfg.rangeDesignators = true;
  CHECK(encode_number(78.5, cfg) ==
        std::vector<std::string>{"50-99", "78.5"});
  CHECK(encode_number(7.0, cfg) == std::vector<std::string>{"5-9", "7"});
  CHECK(encode_number(3.0, cfg) == std::vector<std::string>{"1-4", "3"});
  CHECK(encode_number(112000, cfg) ==
        std::vector<std::string>{"100000-499999", "112000"});
  CHECK(encode_number(0.0, cfg) == std::vector<std::string>{"0-0", "0"});
  CHECK(encode_number(-42.0, cfg) == std::vector<std::string>{"neg10-49", "-42"});
  CHECK(encode_number(0.25, cfg) == std::vector<std::string>{"0.1-0.49", "0.25"});
  CHECK(encode_number(0.75, cfg) == std::vector<std::string>{"0.5-0.99", "0.75"});
  CHECK(encode_number(0.031, cfg) ==
        std::vector<std::string>{"0.01-0.049", "0.031"});
  CHECK_THROWS_AS(encode_number(std::nan(""), cfg), Error);
}

TEST_CASE("range buckets bracket their input") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> expDist(-6.0, 9.0);
  for (int i = 0; i < 5000; ++i) {
    double x = std::pow(10.0, expDist(rng));
    if (rng() % 2) x = -x;
    auto b = range_bucket(x);
    double m = std::fabs(x);
    CHECK(b.lo <= m);
    CHECK(m < b.hiExclusive);
    // the bucket token is lo-...: stable across calls
    CHECK(range_bucket(x).token == b.token);
  }
  // adjacent buckets tile without gaps
  for (double lo : {1.0, 5.0, 10.0, 50.0}) {
    auto b = range_bucket(lo);
    CHECK(b.lo == lo);
    auto next = range_bucket(b.hiExclusive);
    CHECK(next.lo == b.hiExclusive);
  }
}

TEST_CASE("tokenize_value per type") {
  TokenizationConfig cfg;
  Column name{"Name", ColumnType::String, false};
  CHECK(tokenize_value(Value{std::string("John Smith")}, name, cfg) ==
        std::vector<std::string>{"John", "Smith"});
  CHECK(tokenize_value(Value{std::monostate{}}, name, cfg) ==
        std::vector<std::string>{"Null"});
  CHECK(tokenize_value(Value{true}, name, cfg) ==
        std::vector<std::string>{"TRUE"});

  Column sal{"Salary", ColumnType::Integer, false};
  CHECK(tokenize_value(Value{std::int64_t{112000}}, sal, cfg) ==
        std::vector<std::string>{"112000"});
  cfg.rangeDesignators = true;
  CHECK(tokenize_value(Value{std::int64_t{112000}}, sal, cfg) ==
        std::vector<std::string>{"100000-499999", "112000"});
}

TEST_CASE("phrase join global and per-column") {
  TokenizationConfig cfg;
  Column author{"Author", ColumnType::String, false};
  Column title{"Title", ColumnType::String, false};
  Value jim{std::string("Jim Gray")};

  cfg.phraseJoin = true;
  CHECK(tokenize_value(jim, author, cfg) ==
        std::vector<std::string>{"Jim_Gray"});

  cfg.phraseJoin = false;
  cfg.phraseJoinColumns = {"Author"};
  CHECK(tokenize_value(jim, author, cfg) ==
        std::vector<std::string>{"Jim_Gray"});
  CHECK(tokenize_value(jim, title, cfg) ==
        std::vector<std::string>{"Jim", "Gray"});

  // table-qualified override
  cfg.phraseJoinColumns = {"Papers.Author"};
  CHECK(tokenize_value(jim, author, cfg, "Papers") ==
        std::vector<std::string>{"Jim_Gray"});
  CHECK(tokenize_value(jim, author, cfg, "Other") ==
        std::vector<std::string>{"Jim", "Gray"});
}

TEST_CASE("field name prefixes") {
  TokenizationConfig cfg;
  Column name{"Name", ColumnType::String, false};
  Value v{std::string("John Smith")};

  cfg.fieldNamePrefix = FieldNamePrefix::OncePerField;
  CHECK(tokenize_value(v, name, cfg) ==
        std::vector<std::string>{"Name", "John", "Smith"});

  cfg.fieldNamePrefix = FieldNamePrefix::PerToken;
  CHECK(tokenize_value(v, name, cfg) ==
        std::vector<std::string>{"Name", "John", "Name", "Smith"});

  // range designator tokens are prefixed individually as well
  Column sal{"Salary", ColumnType::Integer, false};
  cfg.rangeDesignators = true;
  CHECK(tokenize_value(Value{std::int64_t{78}}, sal, cfg) ==
        std::vector<std::string>{"Salary", "50-99", "Salary", "78"});

  // no value tokens -> no dangling prefix
  Column note{"Note", ColumnType::String, true};
  CHECK(tokenize_value(Value{std::string("  ")}, note, cfg).empty());
}

TEST_CASE("row tokenization and fk expansion") {
  Database db = fixture_db();
  TokenizationConfig cfg;
  cfg.phraseJoin = true;

  SUBCASE("off") {
    auto toks = tokenize_row("Emp", 0, db, cfg, cfg.maxHops);
    CHECK(toks == std::vector<std::string>{"John_Smith", "112000", "1"});
  }
  SUBCASE("afterRow appends the referenced row's non-key fields") {
    cfg.fkExpansion = FkExpansion::AfterRow;
    auto toks = tokenize_row("Emp", 0, db, cfg, cfg.maxHops);
    CHECK(toks == std::vector<std::string>{"John_Smith", "112000", "1",
                                           "Research", "Judy_Smith"});
  }
  SUBCASE("inline splices after the fk source column") {
    cfg.fkExpansion = FkExpansion::Inline;
    auto toks = tokenize_row("Emp", 0, db, cfg, cfg.maxHops);
    CHECK(toks == std::vector<std::string>{"John_Smith", "112000", "1",
                                           "Research", "Judy_Smith"});
  }
  SUBCASE("columns of interest restrict the expansion") {
    cfg.fkExpansion = FkExpansion::AfterRow;
    cfg.fkColumnsOfInterest["Dept"] = {"DName"};
    auto toks = tokenize_row("Emp", 0, db, cfg, cfg.maxHops);
    CHECK(toks ==
          std::vector<std::string>{"John_Smith", "112000", "1", "Research"});
  }
  SUBCASE("relation name prefix") {
    cfg.relationNamePrefix = true;
    auto toks = tokenize_row("Emp", 0, db, cfg, cfg.maxHops);
    CHECK(toks[0] == "Emp");
  }
}

TEST_CASE("dangling fk warns by default, throws in strict mode") {
  Database db = fixture_db();
  Table& emp = const_cast<Table&>(db.table("Emp"));
  emp.rows.push_back({std::string("Ghost"), std::int64_t{1}, std::int64_t{99}});
  TokenizationConfig cfg;
  cfg.fkExpansion = FkExpansion::AfterRow;

  std::vector<std::string> warnings;
  auto toks = tokenize_row("Emp", 1, db, cfg, cfg.maxHops, &warnings);
  CHECK(toks == std::vector<std::string>{"Ghost", "1", "99"});
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("dangling") != std::string::npos);

  cfg.strictDanglingFk = true;
  CHECK_THROWS_AS(tokenize_row("Emp", 1, db, cfg, cfg.maxHops), Error);
}

TEST_CASE("hop budget terminates fk cycles") {
  Database db;
  Table a;
  a.name = "A";
  a.columns = {{"Id", ColumnType::Integer, false},
               {"Tag", ColumnType::String, false},
               {"BId", ColumnType::Integer, false}};
  a.primaryKey = {"Id"};
  a.rows = {{std::int64_t{1}, std::string("atag"), std::int64_t{1}}};
  db.add_table(a);
  Table b = a;
  b.name = "B";
  b.columns[1].name = "Tag";
  b.columns[2].name = "AId";
  b.rows = {{std::int64_t{1}, std::string("btag"), std::int64_t{1}}};
  db.add_table(b);
  db.add_foreign_key({"A", {"BId"}, "B"});
  db.add_foreign_key({"B", {"AId"}, "A"});

  TokenizationConfig cfg;
  cfg.fkExpansion = FkExpansion::AfterRow;
  cfg.maxHops = 3;
  auto toks = tokenize_row("A", 0, db, cfg, cfg.maxHops);
  // 3 hops: A row, then B tag, A tag, B tag — and stop.
  CHECK(std::count(toks.begin(), toks.end(), "btag") == 2);
  CHECK(std::count(toks.begin(), toks.end(), "atag") == 2);

  cfg.maxHops = 1;
  toks = tokenize_row("A", 0, db, cfg, cfg.maxHops);
  CHECK(std::count(toks.begin(), toks.end(), "btag") == 1);
  CHECK(std::count(toks.begin(), toks.end(), "atag") == 1);
}

TEST_CASE("document assembly and round-trip") {
  Database db = fixture_db();
  TokenizationConfig cfg;
  cfg.phraseJoin = true;
  auto doc = tokenize_database(db, cfg);
  REQUIRE(doc.rowBreaks.size() == 2);  // one per row across both tables
  CHECK(doc.rowBreaks.back() == doc.tokens.size());
  CHECK(doc.provenance.size() == doc.tokens.size());

  // explicit table order flips the rows
  auto doc2 = tokenize_database(db, cfg, std::vector<std::string>{"Emp", "Dept"});
  CHECK(doc2.tokens.front() == "John_Smith");

  std::ostringstream out;
  export_document(doc, out);
  std::istringstream in(out.str());
  auto back = import_document(in);
  CHECK(back.tokens == doc.tokens);
  CHECK(back.rowBreaks == doc.rowBreaks);
}

TEST_CASE("tokenize_text is plain splitting") {
  TokenizationConfig cfg;
  CHECK(tokenize_text("data  mining\tpapers", cfg) ==
        std::vector<std::string>{"data", "mining", "papers"});
  cfg.lowercase = true;
  CHECK(tokenize_text("Data Mining", cfg) ==
        std::vector<std::string>{"data", "mining"});
}
