#pragma once

#include <span>
#include <string>
#include <vector>

#include "ciq/vecstore.hpp"

namespace ciq::ops {

struct ClosenessScale {
  double very_strong = 0.95;
  double strong = 0.75;
  double moderate = 0.5;
  double weak = 0.25;
  double very_weak = 0.1;

  // Returns the threshold for a qualitative name, or throws.
  double threshold(const std::string& name) const;
  static bool is_scale_name(const std::string& name);
};

// dot(v1,v2)/(|v1||v2|), clamped to [-1,1]. Zero-norm input and length
// mismatch are errors, never a silent 0.
double cosine(std::span<const double> v1, std::span<const double> v2);

// Stored vector or an out-of-vocabulary error.
std::span<const double> vec(const std::string& token, const VectorStore& store);

// Occurrences of `token` in a token sequence.
long contains_count(const std::vector<std::string>& scopeTokens,
                    const std::string& token);

// Deduplicated tokens minus stoplist minus anything without a stored
// vector; sorted for deterministic iteration.
std::vector<std::string> token_set(const std::vector<std::string>& sequence,
                                   const VectorStore& store);

// The proximity family. Each builds token sets from its two sequences
// and returns -1.0 exactly when either set is empty.
double proximity_max(const std::vector<std::string>& s1,
                     const std::vector<std::string>& s2,
                     const VectorStore& store);
double proximity_avg(const std::vector<std::string>& s1,
                     const std::vector<std::string>& s2,
                     const VectorStore& store);
double proximity_top2_avg(const std::vector<std::string>& s1,
                          const std::vector<std::string>& s2,
                          const VectorStore& store);
double subset_proximity_avg(int size, const std::vector<std::string>& s1,
                            const std::vector<std::string>& s2,
                            const VectorStore& store);

// Analogy ranking: candidates minus {a,b,c}, score descending, ties by
// token. 3COSADD scores cosine(V_x, V_a - V_b + V_c).
std::vector<Neighbor> analogy_3cosadd(const std::string& a, const std::string& b,
                                      const std::string& c,
                                      const std::set<std::string>& candidates,
                                      const VectorStore& store);

// 3COSMUL: (cos(x,c) * cos(x,a)) / (cos(x,b) + epsilon) on normalized
// vectors. With shiftCosines the cosines are mapped to [0,1] first.
std::vector<Neighbor> analogy_3cosmul(const std::string& a, const std::string& b,
                                      const std::string& c,
                                      const std::set<std::string>& candidates,
                                      const VectorStore& store,
                                      double epsilon = 0.001,
                                      bool shiftCosines = false);

}  // namespace ciq::ops
