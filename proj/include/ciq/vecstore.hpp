#pragma once

#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "ciq/database.hpp"
#include "ciq/embed.hpp"

namespace ciq {

struct Neighbor {
  std::string token;
  double score;  // cosine in [-1, 1]
};

// High-frequency tokens the proximity UDFs ignore.
const std::set<std::string>& default_stoplist();

// Token -> input-vector catalog built from a trained model or loaded
// from disk. Immutable after the build phase; readers share freely.
class VectorStore {
 public:
  VectorStore() = default;
  explicit VectorStore(int dim) : dim_(dim) {}

  // Takes the input vectors of a model; the stoplist defaults to the
  // built-in list unless the model is accompanied by an override.
  static VectorStore from_model(const EmbeddingModel& model,
                                std::string sourceTag = "trained-on-db");

  int dim() const { return dim_; }
  std::size_t size() const { return tokens_.size(); }
  const std::string& source_tag() const { return sourceTag_; }
  void set_source_tag(std::string tag) { sourceTag_ = std::move(tag); }
  const std::set<std::string>& stoplist() const { return stoplist_; }
  void set_stoplist(std::set<std::string> sl) { stoplist_ = std::move(sl); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  void put(const std::string& token, std::span<const double> vector);
  std::optional<std::span<const double>> get(const std::string& token) const;
  bool is_stopped(const std::string& token) const {
    return stoplist_.count(token) > 0;
  }

  // Brute-force scan, cosine descending, ties by token. Stoplisted and
  // excluded tokens never appear; zero-norm entries are skipped.
  std::vector<Neighbor> nearest_k(std::span<const double> probe, std::size_t k,
                                  const std::set<std::string>& exclude = {}) const;

  void save(std::ostream& out) const;
  void save_file(const std::string& path) const;
  static VectorStore load(std::istream& in);
  static VectorStore load_file(const std::string& path);

 private:
  int dim_ = 0;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> data_;  // size x dim
  std::set<std::string> stoplist_ = default_stoplist();
  std::string sourceTag_;
};

}  // namespace ciq
