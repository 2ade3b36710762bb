#pragma once

#include <cstdint>
#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "ciq/textify.hpp"

namespace ciq {

enum class TrainMode { SkipGram, Cbow };

struct Hyperparams {
  int dim = 200;
  int window = 5;
  int epochs = 5;
  int negatives = 5;
  double learningRate = 0.025;  // linear decay to a tenth
  int minCount = 1;
  TrainMode mode = TrainMode::SkipGram;
  std::uint64_t seed = 1;
  double unigramPower = 0.75;
  int threads = 1;

  void validate() const;
};

class EmbeddingModel {
 public:
  EmbeddingModel() = default;
  EmbeddingModel(int dim) : dim_(dim) {}

  int dim() const { return dim_; }
  void set_dim(int d);
  std::size_t vocab_size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::string& token(std::size_t i) const { return tokens_[i]; }
  long long frequency(std::size_t i) const { return freq_[i]; }

  // Returns the token's index, or -1.
  long index_of(const std::string& token) const;
  bool contains(const std::string& token) const { return index_of(token) >= 0; }

  // Adds a token with zero vectors; returns its index.
  std::size_t add_token(const std::string& token, long long frequency = 0);

  std::span<double> input(std::size_t i);
  std::span<const double> input(std::size_t i) const;
  std::span<double> output(std::size_t i);
  std::span<const double> output(std::size_t i) const;

  bool frozen(std::size_t i) const { return freeze_[i] != 0; }
  void set_frozen(std::size_t i, bool f) { freeze_[i] = f ? 1 : 0; }
  double update_scale(std::size_t i) const { return scale_[i]; }
  void set_update_scale(std::size_t i, double s) { scale_[i] = s; }
  void set_frequency(std::size_t i, long long f) { freq_[i] = f; }

 private:
  int dim_ = 0;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<long long> freq_;
  std::vector<double> in_, out_;        // vocab x dim, row-major
  std::vector<std::uint8_t> freeze_;
  std::vector<double> scale_;
};

struct NegSample {
  std::size_t center;
  std::size_t context;
  std::vector<std::size_t> negatives;  // never contains `context`
};

double ns_loss(const EmbeddingModel& model, const NegSample& sample);
void ns_step(EmbeddingModel& model, const NegSample& sample, double eta);

EmbeddingModel train(const Document& doc, const Hyperparams& hp);

// Continued training over `doc`. Tokens in `frozenTokens` get update
// multiplier alphaOld (hard-frozen at 0); tokens absent from the model
// before the call are initialized via init_new_tokens and trained with
// multiplier alphaNew; everything else trains normally.
EmbeddingModel finetune_frozen(EmbeddingModel model, const Document& doc,
                               const std::set<std::string>& frozenTokens,
                               double alphaOld, double alphaNew,
                               const Hyperparams& hp);

// New vectors start at the mean of existing input vectors plus uniform
// noise in [-noiseScale, +noiseScale] per coordinate (mean of an empty
// vocabulary is zero). Pass noiseScale < 0 for the default 0.5/dim.
void init_new_tokens(EmbeddingModel& model,
                     const std::vector<std::string>& tokens, double noiseScale,
                     std::uint64_t seed);

// word2vec text format: "vocabSize dim" header then one token per line.
void save_text_vectors(const EmbeddingModel& model, std::ostream& out);
EmbeddingModel load_text_vectors(std::istream& in);

// Native snapshot: "CIV1", LE u32 vocabSize, u32 dim, then per token
// u16 byte length + UTF-8 token + dim f32 inputs + dim f32 outputs.
void save_binary_model(const EmbeddingModel& model, std::ostream& out);
EmbeddingModel load_binary_model(std::istream& in);

}  // namespace ciq
