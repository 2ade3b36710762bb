// ci — cognitive-intelligence query engine driver.
//
// Pipeline: ingest CSVs into a catalog, tokenize, train (or load)
// vectors into a store, then query. Exit codes: 0 success, 1 I/O or
// config error, 2 query error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "ciq/ciops.hpp"
#include "ciq/ciql.hpp"
#include "ciq/csv.hpp"
#include "ciq/database.hpp"
#include "ciq/embed.hpp"
#include "ciq/textify.hpp"
#include "ciq/vecstore.hpp"

namespace {

struct Session {
  ciq::TokenizationConfig tok;
  ciq::Hyperparams hp;
  std::string storePath;
  std::string stoplistPath;
  ciq::ops::ClosenessScale scale;
};

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ciq::Error("config key \"" + key + "\": expected a boolean, got \"" +
                   v + "\"");
}

void apply_config_key(Session& s, const std::string& key,
                      const std::string& value) {
  auto& tok = s.tok;
  auto& hp = s.hp;
  if (key == "tokenize.fieldNamePrefix") {
    if (value == "none") tok.fieldNamePrefix = ciq::FieldNamePrefix::None;
    else if (value == "oncePerField")
      tok.fieldNamePrefix = ciq::FieldNamePrefix::OncePerField;
    else if (value == "perToken")
      tok.fieldNamePrefix = ciq::FieldNamePrefix::PerToken;
    else
      throw ciq::Error("config: unknown fieldNamePrefix \"" + value + "\"");
  } else if (key == "tokenize.relationNamePrefix") {
    tok.relationNamePrefix = parse_bool(value, key);
  } else if (key == "tokenize.phraseJoin") {
    tok.phraseJoin = parse_bool(value, key);
  } else if (key == "tokenize.phraseJoinColumns") {
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!item.empty()) tok.phraseJoinColumns.insert(item);
  } else if (key == "tokenize.splitDelimiters") {
    tok.splitDelimiters = value;
  } else if (key == "tokenize.rangeDesignators") {
    tok.rangeDesignators = parse_bool(value, key);
  } else if (key == "tokenize.fkExpansion") {
    if (value == "off") tok.fkExpansion = ciq::FkExpansion::Off;
    else if (value == "afterRow") tok.fkExpansion = ciq::FkExpansion::AfterRow;
    else if (value == "inline") tok.fkExpansion = ciq::FkExpansion::Inline;
    else
      throw ciq::Error("config: unknown fkExpansion \"" + value + "\"");
  } else if (key == "tokenize.maxHops") {
    tok.maxHops = std::stoi(value);
  } else if (key == "tokenize.lowercase") {
    tok.lowercase = parse_bool(value, key);
  } else if (key == "tokenize.strictDanglingFk") {
    tok.strictDanglingFk = parse_bool(value, key);
  } else if (key == "train.dim") {
    hp.dim = std::stoi(value);
  } else if (key == "train.window") {
    hp.window = std::stoi(value);
  } else if (key == "train.epochs") {
    hp.epochs = std::stoi(value);
  } else if (key == "train.negatives") {
    hp.negatives = std::stoi(value);
  } else if (key == "train.learningRate") {
    hp.learningRate = std::stod(value);
  } else if (key == "train.minCount") {
    hp.minCount = std::stoi(value);
  } else if (key == "train.mode") {
    if (value == "skipgram") hp.mode = ciq::TrainMode::SkipGram;
    else if (value == "cbow") hp.mode = ciq::TrainMode::Cbow;
    else
      throw ciq::Error("config: unknown train.mode \"" + value + "\"");
  } else if (key == "train.seed") {
    hp.seed = std::stoull(value);
  } else if (key == "train.unigramPower") {
    hp.unigramPower = std::stod(value);
  } else if (key == "train.threads") {
    hp.threads = std::stoi(value);
  } else if (key == "store.path") {
    s.storePath = value;
  } else if (key == "stoplist.path") {
    s.stoplistPath = value;
  } else if (key == "scale.very_strong") {
    s.scale.very_strong = std::stod(value);
  } else if (key == "scale.strong") {
    s.scale.strong = std::stod(value);
  } else if (key == "scale.moderate") {
    s.scale.moderate = std::stod(value);
  } else if (key == "scale.weak") {
    s.scale.weak = std::stod(value);
  } else if (key == "scale.very_weak") {
    s.scale.very_weak = std::stod(value);
  } else {
    throw ciq::Error("config: unknown key \"" + key + "\"");
  }
}

void load_session_config(Session& s, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ciq::Error("cannot open config file: " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ciq::Error(path + ":" + std::to_string(lineno) +
                       ": expected key = value");
    auto trim = [](std::string t) {
      auto b = t.find_first_not_of(" \t\r");
      auto e = t.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : t.substr(b, e - b + 1);
    };
    apply_config_key(s, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

// Tokenization flags shared by every subcommand that tokenizes.
void add_tokenize_flags(CLI::App* cmd, Session& s) {
  cmd->add_option_function<std::string>(
      "--field-prefix",
      [&s](const std::string& v) {
        apply_config_key(s, "tokenize.fieldNamePrefix", v);
      },
      "Field-name prefixing: none|oncePerField|perToken");
  cmd->add_flag_callback(
      "--relation-prefix",
      [&s] { s.tok.relationNamePrefix = true; },
      "Prepend the relation name to each row");
  cmd->add_flag_callback("--phrase-join", [&s] { s.tok.phraseJoin = true; },
                         "Join multi-word values with underscores");
  cmd->add_option_function<std::string>(
      "--phrase-join-columns",
      [&s](const std::string& v) {
        apply_config_key(s, "tokenize.phraseJoinColumns", v);
      },
      "Comma-separated column (or table.column) phrase-join overrides");
  cmd->add_flag_callback("--range-designators",
                         [&s] { s.tok.rangeDesignators = true; },
                         "Prepend range-bucket tokens to numeric values");
  cmd->add_option_function<std::string>(
      "--fk-expansion",
      [&s](const std::string& v) { apply_config_key(s, "tokenize.fkExpansion", v); },
      "Foreign-key expansion: off|afterRow|inline");
  cmd->add_option("--max-hops", s.tok.maxHops, "FK expansion hop budget");
  cmd->add_flag_callback("--lowercase", [&s] { s.tok.lowercase = true; },
                         "Lowercase all tokens");
  cmd->add_flag_callback("--strict-dangling-fk",
                         [&s] { s.tok.strictDanglingFk = true; },
                         "Treat dangling foreign keys as errors");
}

void add_train_flags(CLI::App* cmd, Session& s) {
  cmd->add_option("--dim", s.hp.dim, "Embedding dimension");
  cmd->add_option("--window", s.hp.window, "Max context window radius");
  cmd->add_option("--epochs", s.hp.epochs, "Training epochs");
  cmd->add_option("--negatives", s.hp.negatives, "Negative samples per pair");
  cmd->add_option("--learning-rate", s.hp.learningRate, "Initial learning rate");
  cmd->add_option("--min-count", s.hp.minCount, "Minimum token frequency");
  cmd->add_option_function<std::string>(
      "--mode",
      [&s](const std::string& v) { apply_config_key(s, "train.mode", v); },
      "Training mode: skipgram|cbow");
  cmd->add_option("--seed", s.hp.seed, "RNG seed");
  cmd->add_option("--threads", s.hp.threads, "Worker threads");
  cmd->add_option("--unigram-power", s.hp.unigramPower,
                  "Negative-distribution exponent");
}

std::set<std::string> load_stoplist_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ciq::Error("cannot open stoplist file: " + path);
  std::set<std::string> out;
  std::string word;
  while (in >> word) out.insert(word);
  return out;
}

ciq::VectorStore load_store(const Session& s) {
  if (s.storePath.empty()) throw ciq::Error("no store path given (--store)");
  auto store = ciq::VectorStore::load_file(s.storePath);
  if (!s.stoplistPath.empty())
    store.set_stoplist(load_stoplist_file(s.stoplistPath));
  return store;
}

std::string default_model_path(const std::string& storePath) {
  return storePath + ".model";
}

int run_query_text(const Session& s, const ciq::Database& db,
                   const ciq::VectorStore& store, const std::string& text,
                   bool csv) {
  try {
    auto ast = ciq::ciql::parse(text);
    auto result = ciq::ciql::execute(ast, db, store, s.tok, s.scale);
    std::cout << ciq::ciql::render_result(result, csv);
    return 0;
  } catch (const ciq::Error& e) {
    std::cerr << "query error: " << e.what() << "\n";
    return 2;
  }
}

int repl_loop(const Session& s, const ciq::Database& db,
              const ciq::VectorStore& store, bool csv) {
  std::string buffer, line;
  int worst = 0;
  std::cerr << "ci repl — statements end with ';', Ctrl-D exits\n";
  while (std::getline(std::cin, line)) {
    buffer += line;
    buffer += '\n';
    auto semi = buffer.find(';');
    while (semi != std::string::npos) {
      std::string stmt = buffer.substr(0, semi + 1);
      buffer.erase(0, semi + 1);
      if (stmt.find_first_not_of(" \t\r\n;") != std::string::npos)
        worst = std::max(worst, run_query_text(s, db, store, stmt, csv));
      semi = buffer.find(';');
    }
  }
  if (buffer.find_first_not_of(" \t\r\n") != std::string::npos)
    worst = std::max(worst, run_query_text(s, db, store, buffer, csv));
  return worst;
}

void report_fk_integrity(const ciq::Database& db) {
  for (const auto& fk : db.foreign_keys()) {
    const ciq::Table& src = db.table(fk.sourceTable);
    std::size_t dangling = 0;
    for (const auto& row : src.rows)
      if (!db.resolve_fk(fk, row)) ++dangling;
    std::cerr << "fk " << fk.sourceTable << "." << fk.sourceColumns[0]
              << " -> " << fk.targetTable << ": " << src.rows.size()
              << " rows, " << dangling << " dangling\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cognitive-intelligence query engine"};
  app.require_subcommand(1);

  Session s;
  // --config is honored before the other flags so they can override it.
  for (int i = 1; i < argc - 1; ++i) {
    if (std::string(argv[i]) == "--config") {
      try {
        load_session_config(s, argv[i + 1]);
      } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
      }
    }
  }
  std::string configPathSink;
  app.add_option("--config", configPathSink,
                 "Flat key=value session config (flags override it)");

  // ---- ingest ----------------------------------------------------------
  auto* ingest = app.add_subcommand("ingest", "Load CSVs into a catalog");
  std::vector<std::string> csvPaths;
  std::string schemaPath, catalogPath = "catalog.json";
  ingest->add_option("csvs", csvPaths, "CSV files (table per file stem)")
      ->required();
  ingest->add_option("--schema", schemaPath, "Sidecar schema file")->required();
  ingest->add_option("--out", catalogPath, "Catalog output path");

  // ---- tokenize --------------------------------------------------------
  auto* tokenize = app.add_subcommand("tokenize", "Dump the tokenized catalog");
  std::string tokCatalog, tokOut;
  tokenize->add_option("--catalog", tokCatalog, "Catalog path")->required();
  tokenize->add_option("--out", tokOut, "Output path (default stdout)");
  add_tokenize_flags(tokenize, s);

  // ---- train -----------------------------------------------------------
  auto* train = app.add_subcommand("train", "Train embeddings from a catalog");
  std::string trainCatalog, trainOut, trainModelOut, loadExternal;
  bool freezeExternal = false;
  train->add_option("--catalog", trainCatalog, "Catalog path")->required();
  train->add_option("--out", trainOut, "Vector store output path")->required();
  train->add_option("--model-out", trainModelOut,
                    "Model snapshot path (default: <store>.model)");
  train->add_option("--load-external", loadExternal,
                    "Pretrained word2vec text vectors to start from");
  train->add_flag("--freeze-external", freezeExternal,
                  "Keep externally loaded vectors fixed");
  add_tokenize_flags(train, s);
  add_train_flags(train, s);

  // ---- load-vectors ----------------------------------------------------
  auto* loadv = app.add_subcommand("load-vectors",
                                   "Build a store from word2vec text vectors");
  std::string lvIn, lvOut, lvTag = "external";
  loadv->add_option("vectors", lvIn, "word2vec text vector file")->required();
  loadv->add_option("--out", lvOut, "Vector store output path")->required();
  loadv->add_option("--source-tag", lvTag, "Provenance tag stored alongside");
  loadv->add_option("--stoplist", s.stoplistPath, "Stoplist override file");

  // ---- query / repl ----------------------------------------------------
  auto* query = app.add_subcommand("query", "Run one CI-SQL query");
  std::string qCatalog, qText, qFile;
  bool qCsv = false;
  query->add_option("--store", s.storePath, "Vector store path");
  query->add_option("--catalog", qCatalog, "Catalog path")->required();
  query->add_option("text", qText, "Query text");
  query->add_option("--file", qFile, "Read the query from a file");
  query->add_flag("--csv", qCsv, "CSV output instead of aligned columns");
  query->add_option("--stoplist", s.stoplistPath, "Stoplist override file");
  add_tokenize_flags(query, s);

  auto* repl = app.add_subcommand("repl", "Interactive query loop on stdin");
  std::string rCatalog;
  bool rCsv = false;
  repl->add_option("--store", s.storePath, "Vector store path");
  repl->add_option("--catalog", rCatalog, "Catalog path")->required();
  repl->add_flag("--csv", rCsv, "CSV output");
  repl->add_option("--stoplist", s.stoplistPath, "Stoplist override file");
  add_tokenize_flags(repl, s);

  // ---- neighbors -------------------------------------------------------
  auto* neighbors = app.add_subcommand("neighbors", "Nearest tokens by cosine");
  std::string nToken;
  std::size_t nK = 10;
  bool includeSelf = false;
  neighbors->add_option("--store", s.storePath, "Vector store path");
  neighbors->add_option("token", nToken, "Probe token")->required();
  neighbors->add_option("-k,--k", nK, "Neighbor count");
  neighbors->add_flag("--include-self", includeSelf,
                      "Allow the probe token in the output");
  neighbors->add_option("--stoplist", s.stoplistPath, "Stoplist override file");

  // ---- analogy ---------------------------------------------------------
  auto* analogy = app.add_subcommand("analogy", "a - b + c analogy query");
  std::string aA, aB, aC, aMethod = "3cosadd";
  std::size_t aK = 10;
  double aEps = 0.001;
  bool aShift = false;
  analogy->add_option("--store", s.storePath, "Vector store path");
  analogy->add_option("a", aA, "Token a")->required();
  analogy->add_option("b", aB, "Token b")->required();
  analogy->add_option("c", aC, "Token c")->required();
  analogy->add_option("-k,--k", aK, "Result count");
  analogy->add_option("--method", aMethod, "3cosadd|3cosmul");
  analogy->add_option("--epsilon", aEps, "3COSMUL denominator epsilon");
  analogy->add_flag("--shift", aShift, "Shift cosines to [0,1] for 3COSMUL");

  // ---- update ----------------------------------------------------------
  auto* update = app.add_subcommand("update", "Fine-tune the store on new data");
  std::string uCatalog, uDoc, uModel, uCorpus = "full";
  double alphaOld = 0.0, alphaNew = 1.0;
  update->add_option("--store", s.storePath, "Vector store path (rewritten)");
  update->add_option("--model", uModel,
                     "Model snapshot path (default: <store>.model)");
  update->add_option("--catalog", uCatalog, "Catalog with the new data");
  update->add_option("--doc", uDoc, "Tokenized document with the new data");
  update->add_option("--alpha-old", alphaOld,
                     "Update multiplier for pre-existing tokens (0 = frozen)");
  update->add_option("--alpha-new", alphaNew,
                     "Update multiplier for new tokens");
  update->add_option("--corpus", uCorpus,
                     "full: retrain over old+new doc; delta: new doc only");
  add_tokenize_flags(update, s);
  add_train_flags(update, s);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) {
      auto db = ciq::ingest(csvPaths, schemaPath);
      auto issues = db.validate();
      for (const auto& msg : issues) std::cerr << "warning: " << msg << "\n";
      report_fk_integrity(db);
      ciq::save_catalog(db, catalogPath);
      std::cerr << "catalog written: " << catalogPath << " ("
                << db.tables().size() << " tables)\n";
      return 0;
    }

    if (*tokenize) {
      auto db = ciq::load_catalog(tokCatalog);
      std::vector<std::string> warnings;
      auto doc = ciq::tokenize_database(db, s.tok, std::nullopt, &warnings);
      for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
      if (tokOut.empty()) {
        ciq::export_document(doc, std::cout);
      } else {
        std::ofstream out(tokOut, std::ios::binary);
        if (!out) throw ciq::Error("cannot open output file: " + tokOut);
        ciq::export_document(doc, out);
      }
      return 0;
    }

    if (*train) {
      s.hp.validate();
      auto db = ciq::load_catalog(trainCatalog);
      std::vector<std::string> warnings;
      auto doc = ciq::tokenize_database(db, s.tok, std::nullopt, &warnings);
      for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
      ciq::EmbeddingModel model;
      if (!loadExternal.empty()) {
        std::ifstream in(loadExternal);
        if (!in) throw ciq::Error("cannot open vector file: " + loadExternal);
        auto external = ciq::load_text_vectors(in);
        if (external.dim() != s.hp.dim)
          throw ciq::Error("external vectors are dim " +
                           std::to_string(external.dim()) + ", config says " +
                           std::to_string(s.hp.dim));
        std::set<std::string> frozen;
        if (freezeExternal)
          frozen.insert(external.tokens().begin(), external.tokens().end());
        model = ciq::finetune_frozen(std::move(external), doc, frozen,
                                     /*alphaOld=*/0.0, /*alphaNew=*/1.0, s.hp);
      } else {
        model = ciq::train(doc, s.hp);
      }
      std::cerr << "trained: vocab " << model.vocab_size() << ", dim "
                << model.dim() << "\n";
      auto store = ciq::VectorStore::from_model(model);
      if (!s.stoplistPath.empty())
        store.set_stoplist(load_stoplist_file(s.stoplistPath));
      store.save_file(trainOut);
      std::string modelPath =
          trainModelOut.empty() ? default_model_path(trainOut) : trainModelOut;
      std::ofstream mout(modelPath, std::ios::binary);
      if (!mout) throw ciq::Error("cannot open model output: " + modelPath);
      ciq::save_binary_model(model, mout);
      std::cerr << "store written: " << trainOut << "\n";
      return 0;
    }

    if (*loadv) {
      std::ifstream in(lvIn);
      if (!in) throw ciq::Error("cannot open vector file: " + lvIn);
      auto model = ciq::load_text_vectors(in);
      auto store = ciq::VectorStore::from_model(model, lvTag);
      if (!s.stoplistPath.empty())
        store.set_stoplist(load_stoplist_file(s.stoplistPath));
      store.save_file(lvOut);
      std::cerr << "store written: " << lvOut << " (" << store.size()
                << " tokens, dim " << store.dim() << ")\n";
      return 0;
    }

    if (*query) {
      auto db = ciq::load_catalog(qCatalog);
      auto store = load_store(s);
      std::string text = qText;
      if (!qFile.empty()) {
        std::ifstream in(qFile);
        if (!in) throw ciq::Error("cannot open query file: " + qFile);
        std::ostringstream ss;
        ss << in.rdbuf();
        text = ss.str();
      }
      if (text.empty()) throw ciq::Error("no query given");
      return run_query_text(s, db, store, text, qCsv);
    }

    if (*repl) {
      auto db = ciq::load_catalog(rCatalog);
      auto store = load_store(s);
      return repl_loop(s, db, store, rCsv);
    }

    if (*neighbors) {
      auto store = load_store(s);
      auto probe = store.get(nToken);
      if (!probe) throw ciq::Error("token not in store: " + nToken);
      std::set<std::string> exclude;
      if (!includeSelf) exclude.insert(nToken);
      for (const auto& n : store.nearest_k(*probe, nK, exclude))
        std::cout << n.token << "\t" << ciq::ciql::render_real(n.score) << "\n";
      return 0;
    }

    if (*analogy) {
      auto store = load_store(s);
      std::set<std::string> candidates(store.tokens().begin(),
                                       store.tokens().end());
      std::vector<ciq::Neighbor> ranked;
      if (aMethod == "3cosadd") {
        ranked = ciq::ops::analogy_3cosadd(aA, aB, aC, candidates, store);
      } else if (aMethod == "3cosmul") {
        ranked = ciq::ops::analogy_3cosmul(aA, aB, aC, candidates, store, aEps,
                                           aShift);
      } else {
        throw ciq::Error("unknown analogy method \"" + aMethod + "\"");
      }
      if (ranked.size() > aK) ranked.resize(aK);
      for (const auto& n : ranked)
        std::cout << n.token << "\t" << ciq::ciql::render_real(n.score) << "\n";
      return 0;
    }

    if (*update) {
      s.hp.validate();
      if (s.storePath.empty()) throw ciq::Error("no store path given (--store)");
      std::string modelPath =
          uModel.empty() ? default_model_path(s.storePath) : uModel;
      std::ifstream min(modelPath, std::ios::binary);
      if (!min) throw ciq::Error("cannot open model snapshot: " + modelPath);
      auto model = ciq::load_binary_model(min);
      if (model.dim() != s.hp.dim)
        throw ciq::Error("model is dim " + std::to_string(model.dim()) +
                         ", config says " + std::to_string(s.hp.dim));

      ciq::Document doc;
      if (!uDoc.empty()) {
        std::ifstream in(uDoc);
        if (!in) throw ciq::Error("cannot open document: " + uDoc);
        doc = ciq::import_document(in);
      } else if (!uCatalog.empty()) {
        auto db = ciq::load_catalog(uCatalog);
        doc = ciq::tokenize_database(db, s.tok);
      } else {
        throw ciq::Error("update needs --catalog or --doc");
      }
      if (uCorpus != "full" && uCorpus != "delta")
        throw ciq::Error("--corpus must be full or delta");
      // "full" means the caller passed the concatenated corpus; "delta"
      // the new rows only. Either way the doc is what we train on.

      std::set<std::string> preexisting(model.tokens().begin(),
                                        model.tokens().end());
      // Snapshot old coordinates to report drift.
      std::vector<std::vector<double>> before;
      for (std::size_t i = 0; i < model.vocab_size(); ++i)
        before.emplace_back(model.input(i).begin(), model.input(i).end());

      auto updated = ciq::finetune_frozen(std::move(model), doc, preexisting,
                                          alphaOld, alphaNew, s.hp);

      double maxDrift = 0;
      std::size_t newTokens = 0;
      for (std::size_t i = 0; i < updated.vocab_size(); ++i) {
        if (!preexisting.count(updated.token(i))) {
          ++newTokens;
          continue;
        }
        auto now = updated.input(i);
        const auto& then = before[i];
        for (std::size_t d = 0; d < then.size(); ++d)
          maxDrift = std::max(maxDrift, std::abs(now[d] - then[d]));
      }
      std::cerr << "update: " << newTokens << " new tokens, max old-vector "
                << "drift " << maxDrift << "\n";

      auto store = ciq::VectorStore::from_model(updated, "updated");
      if (!s.stoplistPath.empty())
        store.set_stoplist(load_stoplist_file(s.stoplistPath));
      store.save_file(s.storePath);
      std::ofstream mout(modelPath, std::ios::binary);
      if (!mout) throw ciq::Error("cannot open model output: " + modelPath);
      ciq::save_binary_model(updated, mout);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
