#include "ciq/ciops.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include "ciq/kernels.hpp"

namespace ciq::ops {

double ClosenessScale::threshold(const std::string& name) const {
  if (name == "very_strong") return very_strong;
  if (name == "strong") return strong;
  if (name == "moderate") return moderate;
  if (name == "weak") return weak;
  if (name == "very_weak") return very_weak;
  throw Error("unknown closeness name: " + name);
}

bool ClosenessScale::is_scale_name(const std::string& name) {
  return name == "very_strong" || name == "strong" || name == "moderate" ||
         name == "weak" || name == "very_weak";
}

double cosine(std::span<const double> v1, std::span<const double> v2) {
  if (v1.size() != v2.size())
    throw Error("cosine: dimension mismatch (" + std::to_string(v1.size()) +
                " vs " + std::to_string(v2.size()) + ")");
  double n1 = kernels::norm_sq(v1);
  double n2 = kernels::norm_sq(v2);
  if (!(n1 > 0) || !(n2 > 0))
    throw Error("cosine: undefined distance for zero-norm vector");
  double c = kernels::dot(v1, v2) / (std::sqrt(n1) * std::sqrt(n2));
  return std::clamp(c, -1.0, 1.0);
}

std::span<const double> vec(const std::string& token,
                            const VectorStore& store) {
  auto v = store.get(token);
  if (!v) throw Error("out-of-vocabulary token: \"" + token + "\"");
  return *v;
}

long contains_count(const std::vector<std::string>& scopeTokens,
                    const std::string& token) {
  return static_cast<long>(
      std::count(scopeTokens.begin(), scopeTokens.end(), token));
}

std::vector<std::string> token_set(const std::vector<std::string>& sequence,
                                   const VectorStore& store) {
  std::set<std::string> uniq;
  for (const auto& t : sequence) {
    if (store.is_stopped(t)) continue;
    if (!store.get(t)) continue;
    uniq.insert(t);
  }
  return {uniq.begin(), uniq.end()};
}

namespace {

std::vector<std::span<const double>> resolve(
    const std::vector<std::string>& tokens, const VectorStore& store) {
  std::vector<std::span<const double>> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(*store.get(t));
  return out;
}

std::vector<double> mean_of(const std::vector<std::span<const double>>& vs,
                            const std::vector<std::size_t>& pick, int dim) {
  std::vector<double> m(static_cast<std::size_t>(dim), 0.0);
  for (std::size_t i : pick)
    kernels::axpy(1.0, vs[i].data(), m.data(), static_cast<std::size_t>(dim));
  kernels::scale(1.0 / static_cast<double>(pick.size()), m.data(),
                 static_cast<std::size_t>(dim));
  return m;
}

double combinations(std::size_t n, std::size_t k) {
  double c = 1.0;
  for (std::size_t i = 0; i < k; ++i)
    c = c * static_cast<double>(n - i) / static_cast<double>(i + 1);
  return c;
}

// Visits every k-subset of {0..n-1} in lexicographic order.
template <typename F>
void for_each_subset(std::size_t n, std::size_t k, F&& fn) {
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    fn(idx);
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
    if (i == 0) break;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace

double proximity_max(const std::vector<std::string>& s1,
                     const std::vector<std::string>& s2,
                     const VectorStore& store) {
  auto t1 = token_set(s1, store);
  auto t2 = token_set(s2, store);
  if (t1.empty() || t2.empty()) return -1.0;
  auto v1 = resolve(t1, store);
  auto v2 = resolve(t2, store);
  double best = -1.0;
  for (const auto& a : v1)
    for (const auto& b : v2) best = std::max(best, cosine(a, b));
  return best;
}

double proximity_avg(const std::vector<std::string>& s1,
                     const std::vector<std::string>& s2,
                     const VectorStore& store) {
  auto t1 = token_set(s1, store);
  auto t2 = token_set(s2, store);
  if (t1.empty() || t2.empty()) return -1.0;
  auto v1 = resolve(t1, store);
  auto v2 = resolve(t2, store);
  std::vector<std::size_t> all1(v1.size()), all2(v2.size());
  for (std::size_t i = 0; i < v1.size(); ++i) all1[i] = i;
  for (std::size_t i = 0; i < v2.size(); ++i) all2[i] = i;
  auto m1 = mean_of(v1, all1, store.dim());
  auto m2 = mean_of(v2, all2, store.dim());
  return cosine(m1, m2);
}

double proximity_top2_avg(const std::vector<std::string>& s1,
                          const std::vector<std::string>& s2,
                          const VectorStore& store) {
  auto t1 = token_set(s1, store);
  auto t2 = token_set(s2, store);
  if (t1.empty() || t2.empty()) return -1.0;
  auto v1 = resolve(t1, store);
  auto v2 = resolve(t2, store);
  double best = -2.0, second = -2.0;
  std::size_t pairs = 0;
  for (const auto& a : v1) {
    for (const auto& b : v2) {
      double c = cosine(a, b);
      ++pairs;
      if (c > best) {
        second = best;
        best = c;
      } else if (c > second) {
        second = c;
      }
    }
  }
  if (pairs == 1) return best;
  return (best + second) / 2.0;
}

double subset_proximity_avg(int size, const std::vector<std::string>& s1,
                            const std::vector<std::string>& s2,
                            const VectorStore& store) {
  if (size < 1) throw Error("subsetProximityAvg: size must be >= 1");
  auto t1 = token_set(s1, store);
  auto t2 = token_set(s2, store);
  if (t1.empty() || t2.empty()) return -1.0;
  auto v1 = resolve(t1, store);
  auto v2 = resolve(t2, store);
  std::size_t k1 = std::min<std::size_t>(static_cast<std::size_t>(size), v1.size());
  std::size_t k2 = std::min<std::size_t>(static_cast<std::size_t>(size), v2.size());
  if (combinations(v1.size(), k1) * combinations(v2.size(), k2) > 1e6)
    throw Error("subsetProximityAvg: subset enumeration exceeds 10^6 pairs");

  std::vector<std::vector<double>> means1, means2;
  for_each_subset(v1.size(), k1, [&](const std::vector<std::size_t>& pick) {
    means1.push_back(mean_of(v1, pick, store.dim()));
  });
  for_each_subset(v2.size(), k2, [&](const std::vector<std::size_t>& pick) {
    means2.push_back(mean_of(v2, pick, store.dim()));
  });
  double best = -1.0;
  for (const auto& a : means1)
    for (const auto& b : means2) best = std::max(best, cosine(a, b));
  return best;
}

namespace {

std::vector<Neighbor> rank_candidates(
    const std::set<std::string>& candidates,
    const std::set<std::string>& excluded, const VectorStore& store,
    const std::function<double(std::span<const double>)>& score) {
  std::vector<Neighbor> out;
  for (const auto& cand : candidates) {
    if (excluded.count(cand)) continue;
    auto v = store.get(cand);
    if (!v || !(kernels::norm_sq(*v) > 0)) continue;
    out.push_back(Neighbor{cand, score(*v)});
  }
  std::sort(out.begin(), out.end(), [](const Neighbor& a, const Neighbor& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.token < b.token;
  });
  return out;
}

}  // namespace

std::vector<Neighbor> analogy_3cosadd(const std::string& a, const std::string& b,
                                      const std::string& c,
                                      const std::set<std::string>& candidates,
                                      const VectorStore& store) {
  if (candidates.empty()) throw Error("analogy: empty candidate set");
  auto va = vec(a, store);
  auto vb = vec(b, store);
  auto vc = vec(c, store);
  std::vector<double> target(va.begin(), va.end());
  kernels::axpy(-1.0, vb.data(), target.data(), target.size());
  kernels::axpy(1.0, vc.data(), target.data(), target.size());
  if (!(kernels::norm_sq(target.data(), target.size()) > 0))
    throw Error("analogy: zero-norm target vector");
  return rank_candidates(candidates, {a, b, c}, store,
                         [&](std::span<const double> x) {
                           return cosine(x, target);
                         });
}

std::vector<Neighbor> analogy_3cosmul(const std::string& a, const std::string& b,
                                      const std::string& c,
                                      const std::set<std::string>& candidates,
                                      const VectorStore& store, double epsilon,
                                      bool shiftCosines) {
  if (candidates.empty()) throw Error("analogy: empty candidate set");
  auto va = vec(a, store);
  auto vb = vec(b, store);
  auto vc = vec(c, store);
  auto maybe_shift = [shiftCosines](double x) {
    return shiftCosines ? (x + 1.0) / 2.0 : x;
  };
  return rank_candidates(candidates, {a, b, c}, store,
                         [&](std::span<const double> x) {
                           double cosC = maybe_shift(cosine(x, vc));
                           double cosA = maybe_shift(cosine(x, va));
                           double cosB = maybe_shift(cosine(x, vb));
                           double denom = cosB + epsilon;
                           if (std::fabs(denom) < 1e-9)
                             throw Error("3COSMUL: vanishing denominator");
                           return cosC * cosA / denom;
                         });
}

}  // namespace ciq::ops
