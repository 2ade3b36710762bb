#include "ciq/embed.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

#include "ciq/kernels.hpp"

namespace ciq {

void Hyperparams::validate() const {
  if (dim < 1) throw Error("dim must be >= 1");
  if (window < 1) throw Error("window must be >= 1");
  if (epochs < 1) throw Error("epochs must be >= 1");
  if (negatives < 0) throw Error("negatives must be >= 0");
  if (!(learningRate > 0)) throw Error("learning rate must be positive");
  if (minCount < 1) throw Error("minCount must be >= 1");
  if (threads < 1) throw Error("threads must be >= 1");
}

void EmbeddingModel::set_dim(int d) {
  if (!tokens_.empty()) throw Error("cannot change dim of a populated model");
  dim_ = d;
}

long EmbeddingModel::index_of(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? -1 : static_cast<long>(it->second);
}

std::size_t EmbeddingModel::add_token(const std::string& token,
                                      long long frequency) {
  if (dim_ <= 0) throw Error("model dimension not set");
  if (index_.count(token)) throw Error("token already present: " + token);
  std::size_t idx = tokens_.size();
  index_[token] = idx;
  tokens_.push_back(token);
  freq_.push_back(frequency);
  in_.resize(in_.size() + dim_, 0.0);
  out_.resize(out_.size() + dim_, 0.0);
  freeze_.push_back(0);
  scale_.push_back(1.0);
  return idx;
}

std::span<double> EmbeddingModel::input(std::size_t i) {
  return {in_.data() + i * dim_, static_cast<std::size_t>(dim_)};
}
std::span<const double> EmbeddingModel::input(std::size_t i) const {
  return {in_.data() + i * dim_, static_cast<std::size_t>(dim_)};
}
std::span<double> EmbeddingModel::output(std::size_t i) {
  return {out_.data() + i * dim_, static_cast<std::size_t>(dim_)};
}
std::span<const double> EmbeddingModel::output(std::size_t i) const {
  return {out_.data() + i * dim_, static_cast<std::size_t>(dim_)};
}

namespace {

struct Rng {
  std::mt19937_64 gen;
  explicit Rng(std::uint64_t seed) : gen(seed) {}
  double uniform() { return (gen() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t next() { return gen(); }
};

double log_sigmoid(double x) {
  return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

double sigmoid(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x))
                : std::exp(x) / (1.0 + std::exp(x));
}

// Cumulative unigram^power table; sampled by binary search.
class NegativeSampler {
 public:
  NegativeSampler(const std::vector<double>& weights) {
    cum_.reserve(weights.size());
    double total = 0;
    for (double w : weights) {
      total += w;
      cum_.push_back(total);
    }
  }
  bool empty() const { return cum_.empty() || cum_.back() <= 0; }
  std::size_t sample(Rng& rng) const {
    double u = rng.uniform() * cum_.back();
    auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
    if (it == cum_.end()) --it;
    return static_cast<std::size_t>(it - cum_.begin());
  }

 private:
  std::vector<double> cum_;
};

// One skip-gram pair update. Gradients are taken at the current
// parameters, then applied with the per-token freeze/scale masks.
void pair_step(EmbeddingModel& model, std::size_t center, std::size_t context,
               std::span<const std::size_t> negatives, double eta,
               std::vector<double>& gradCenter) {
  const int dim = model.dim();
  gradCenter.assign(dim, 0.0);
  auto vin = model.input(center);

  struct OutUpdate {
    std::size_t idx;
    double g;
  };
  OutUpdate updates[64];
  std::size_t nUpdates = 0;
  auto push = [&](std::size_t idx, double g) {
    if (nUpdates < 64) updates[nUpdates++] = {idx, g};
  };

  double gPos = sigmoid(kernels::dot(model.output(context), vin)) - 1.0;
  kernels::axpy(gPos, model.output(context).data(), gradCenter.data(), dim);
  push(context, gPos);
  for (std::size_t n : negatives) {
    double gNeg = sigmoid(kernels::dot(model.output(n), vin));
    kernels::axpy(gNeg, model.output(n).data(), gradCenter.data(), dim);
    push(n, gNeg);
  }

  for (std::size_t u = 0; u < nUpdates; ++u) {
    std::size_t idx = updates[u].idx;
    if (model.frozen(idx)) continue;
    kernels::axpy(-eta * model.update_scale(idx) * updates[u].g, vin.data(),
                  model.output(idx).data(), dim);
  }
  if (!model.frozen(center))
    kernels::axpy(-eta * model.update_scale(center), gradCenter.data(),
                  model.input(center).data(), dim);
}

// One CBOW window update: the context mean predicts the center token.
void cbow_step(EmbeddingModel& model, std::span<const std::size_t> context,
               std::size_t center, std::span<const std::size_t> negatives,
               double eta, std::vector<double>& hidden,
               std::vector<double>& gradHidden) {
  if (context.empty()) return;
  const int dim = model.dim();
  hidden.assign(dim, 0.0);
  for (std::size_t c : context)
    kernels::axpy(1.0, model.input(c).data(), hidden.data(), dim);
  kernels::scale(1.0 / static_cast<double>(context.size()), hidden.data(), dim);

  gradHidden.assign(dim, 0.0);
  struct OutUpdate {
    std::size_t idx;
    double g;
  };
  OutUpdate updates[64];
  std::size_t nUpdates = 0;

  double gPos =
      sigmoid(kernels::dot(model.output(center).data(), hidden.data(), dim)) -
      1.0;
  kernels::axpy(gPos, model.output(center).data(), gradHidden.data(), dim);
  if (nUpdates < 64) updates[nUpdates++] = {center, gPos};
  for (std::size_t n : negatives) {
    double gNeg =
        sigmoid(kernels::dot(model.output(n).data(), hidden.data(), dim));
    kernels::axpy(gNeg, model.output(n).data(), gradHidden.data(), dim);
    if (nUpdates < 64) updates[nUpdates++] = {n, gNeg};
  }

  for (std::size_t u = 0; u < nUpdates; ++u) {
    std::size_t idx = updates[u].idx;
    if (model.frozen(idx)) continue;
    kernels::axpy(-eta * model.update_scale(idx) * updates[u].g, hidden.data(),
                  model.output(idx).data(), dim);
  }
  for (std::size_t c : context) {
    if (model.frozen(c)) continue;
    kernels::axpy(-eta * model.update_scale(c), gradHidden.data(),
                  model.input(c).data(), dim);
  }
}

struct Corpus {
  std::vector<std::vector<std::size_t>> sentences;
  long long totalTokens = 0;
};

// Maps document tokens to model indices, dropping unknown tokens.
Corpus build_corpus(const Document& doc, const EmbeddingModel& model) {
  Corpus corpus;
  std::vector<std::size_t> breaks = doc.rowBreaks;
  if (breaks.empty() || breaks.back() != doc.tokens.size())
    breaks.push_back(doc.tokens.size());
  std::size_t start = 0;
  for (std::size_t end : breaks) {
    std::vector<std::size_t> sent;
    for (std::size_t i = start; i < end; ++i) {
      long idx = model.index_of(doc.tokens[i]);
      if (idx >= 0) sent.push_back(static_cast<std::size_t>(idx));
    }
    corpus.totalTokens += static_cast<long long>(sent.size());
    if (!sent.empty()) corpus.sentences.push_back(std::move(sent));
    start = end;
  }
  return corpus;
}

void run_training(EmbeddingModel& model, const Corpus& corpus,
                  const Hyperparams& hp,
                  const std::vector<double>& negWeights) {
  NegativeSampler sampler(negWeights);
  const long long total =
      std::max<long long>(1, corpus.totalTokens * hp.epochs);
  std::atomic<long long> processed{0};

  auto worker = [&](int threadId, std::size_t sentBegin, std::size_t sentEnd) {
    Rng rng(hp.seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(threadId));
    std::vector<double> grad, hidden;
    std::vector<std::size_t> negatives, context;
    long long local = 0;
    for (int epoch = 0; epoch < hp.epochs; ++epoch) {
      for (std::size_t s = sentBegin; s < sentEnd; ++s) {
        const auto& sent = corpus.sentences[s];
        for (std::size_t i = 0; i < sent.size(); ++i) {
          long long done = processed.load(std::memory_order_relaxed) + local;
          double eta = hp.learningRate *
                       (1.0 - 0.9 * static_cast<double>(done) /
                                  static_cast<double>(total));
          eta = std::max(eta, hp.learningRate * 0.1);
          std::size_t radius =
              1 + static_cast<std::size_t>(rng.next() %
                                           static_cast<std::uint64_t>(hp.window));
          std::size_t lo = i >= radius ? i - radius : 0;
          std::size_t hi = std::min(sent.size(), i + radius + 1);
          auto draw_negatives = [&](std::size_t exclude) {
            negatives.clear();
            if (sampler.empty() || model.vocab_size() < 2) return;
            for (int k = 0; k < hp.negatives; ++k) {
              std::size_t n;
              int attempts = 0;
              do {
                n = sampler.sample(rng);
              } while (n == exclude && ++attempts < 32);
              if (n != exclude) negatives.push_back(n);
            }
          };
          if (hp.mode == TrainMode::SkipGram) {
            for (std::size_t j = lo; j < hi; ++j) {
              if (j == i) continue;
              draw_negatives(sent[j]);
              pair_step(model, sent[i], sent[j], negatives, eta, grad);
            }
          } else {
            context.clear();
            for (std::size_t j = lo; j < hi; ++j)
              if (j != i) context.push_back(sent[j]);
            draw_negatives(sent[i]);
            cbow_step(model, context, sent[i], negatives, eta, hidden, grad);
          }
          ++local;
          if (local % 1024 == 0) {
            processed.fetch_add(local, std::memory_order_relaxed);
            local = 0;
          }
        }
      }
      processed.fetch_add(local, std::memory_order_relaxed);
      local = 0;
    }
  };

  if (hp.threads <= 1 || corpus.sentences.size() < 2) {
    worker(0, 0, corpus.sentences.size());
    return;
  }
  // Opt-in racy parallel updates; sentence ranges are disjoint but the
  // model rows are shared without locks.
  std::vector<std::thread> pool;
  std::size_t nThreads =
      std::min<std::size_t>(hp.threads, corpus.sentences.size());
  std::size_t chunk = (corpus.sentences.size() + nThreads - 1) / nThreads;
  for (std::size_t t = 0; t < nThreads; ++t) {
    std::size_t b = t * chunk;
    std::size_t e = std::min(corpus.sentences.size(), b + chunk);
    pool.emplace_back(worker, static_cast<int>(t), b, e);
  }
  for (auto& th : pool) th.join();
}

std::vector<double> negative_weights(const Document& doc,
                                     const EmbeddingModel& model,
                                     double power) {
  std::vector<double> w(model.vocab_size(), 0.0);
  for (const auto& tok : doc.tokens) {
    long idx = model.index_of(tok);
    if (idx >= 0) w[static_cast<std::size_t>(idx)] += 1.0;
  }
  for (auto& x : w) x = x > 0 ? std::pow(x, power) : 0.0;
  return w;
}

}  // namespace

double ns_loss(const EmbeddingModel& model, const NegSample& sample) {
  if (sample.center >= model.vocab_size() ||
      sample.context >= model.vocab_size())
    throw Error("ns_loss: index out of range");
  auto vin = model.input(sample.center);
  double loss = -log_sigmoid(kernels::dot(model.output(sample.context), vin));
  for (std::size_t n : sample.negatives) {
    if (n >= model.vocab_size()) throw Error("ns_loss: index out of range");
    loss -= log_sigmoid(-kernels::dot(model.output(n), vin));
  }
  return loss;
}

void ns_step(EmbeddingModel& model, const NegSample& sample, double eta) {
  if (!(eta > 0)) throw Error("ns_step: eta must be positive");
  if (sample.center >= model.vocab_size() ||
      sample.context >= model.vocab_size())
    throw Error("ns_step: index out of range");
  for (std::size_t n : sample.negatives)
    if (n >= model.vocab_size()) throw Error("ns_step: index out of range");
  std::vector<double> grad;
  pair_step(model, sample.center, sample.context, sample.negatives, eta, grad);
}

EmbeddingModel train(const Document& doc, const Hyperparams& hp) {
  hp.validate();
  std::unordered_map<std::string, long long> counts;
  for (const auto& t : doc.tokens) ++counts[t];

  EmbeddingModel model(hp.dim);
  for (const auto& t : doc.tokens) {
    if (model.contains(t)) continue;
    auto it = counts.find(t);
    if (it->second >= hp.minCount) model.add_token(t, it->second);
  }
  if (model.vocab_size() == 0)
    throw Error("train: empty effective vocabulary after minCount filtering");

  Rng rng(hp.seed);
  const double bound = 0.5 / hp.dim;
  for (std::size_t i = 0; i < model.vocab_size(); ++i)
    for (double& x : model.input(i)) x = rng.uniform(-bound, bound);

  Corpus corpus = build_corpus(doc, model);
  run_training(model, corpus, hp,
               negative_weights(doc, model, hp.unigramPower));
  return model;
}

EmbeddingModel finetune_frozen(EmbeddingModel model, const Document& doc,
                               const std::set<std::string>& frozenTokens,
                               double alphaOld, double alphaNew,
                               const Hyperparams& hp) {
  hp.validate();
  // Dimension comes from the existing model; hp.dim is not consulted here.
  std::unordered_map<std::string, long long> counts;
  for (const auto& t : doc.tokens) ++counts[t];

  std::vector<std::string> fresh;
  for (const auto& t : doc.tokens) {
    if (model.contains(t)) continue;
    if (counts[t] >= hp.minCount &&
        std::find(fresh.begin(), fresh.end(), t) == fresh.end())
      fresh.push_back(t);
  }
  init_new_tokens(model, fresh, -1.0, hp.seed);
  for (const auto& t : fresh) {
    std::size_t i = static_cast<std::size_t>(model.index_of(t));
    model.set_frequency(i, counts[t]);
    model.set_update_scale(i, alphaNew);
  }
  for (const auto& t : frozenTokens) {
    long idx = model.index_of(t);
    if (idx < 0) continue;
    std::size_t i = static_cast<std::size_t>(idx);
    model.set_update_scale(i, alphaOld);
    model.set_frozen(i, alphaOld == 0.0);
  }

  Corpus corpus = build_corpus(doc, model);
  if (corpus.totalTokens > 0)
    run_training(model, corpus, hp,
                 negative_weights(doc, model, hp.unigramPower));
  return model;
}

void init_new_tokens(EmbeddingModel& model,
                     const std::vector<std::string>& tokens, double noiseScale,
                     std::uint64_t seed) {
  if (model.dim() <= 0) throw Error("init_new_tokens: model dimension not set");
  if (noiseScale < 0) noiseScale = 0.5 / model.dim();
  const int dim = model.dim();
  std::vector<double> mean(dim, 0.0);
  const std::size_t existing = model.vocab_size();
  for (std::size_t i = 0; i < existing; ++i)
    kernels::axpy(1.0, model.input(i).data(), mean.data(), dim);
  if (existing > 0)
    kernels::scale(1.0 / static_cast<double>(existing), mean.data(), dim);

  Rng rng(seed);
  for (const auto& t : tokens) {
    std::size_t i = model.add_token(t);  // throws if already present
    auto v = model.input(i);
    for (int d = 0; d < dim; ++d)
      v[d] = mean[d] + rng.uniform(-noiseScale, noiseScale);
  }
}

}  // namespace ciq
