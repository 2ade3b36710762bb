#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "ciq/ciops.hpp"

using namespace ciq;
using namespace ciq::ops;

namespace {

double cosine_oracle(const std::vector<double>& a,
                     const std::vector<double>& b) {
  double d = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return d / std::sqrt(na * nb);
}

VectorStore axis_store() {
  VectorStore store(3);
  store.set_stoplist({});
  store.put("x", std::vector<double>{1, 0, 0});
  store.put("y", std::vector<double>{0, 1, 0});
  store.put("z", std::vector<double>{0, 0, 1});
  store.put("negx", std::vector<double>{-1, 0, 0});
  store.put("xy", std::vector<double>{1, 1, 0});
  return store;
}

VectorStore random_store(int dim, int n, std::uint64_t seed) {
  VectorStore store(dim);
  store.set_stoplist({});
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int i = 0; i < n; ++i) {
    std::vector<double> v(dim);
    for (auto& x : v) x = dist(rng);
    store.put("w" + std::to_string(i), v);
  }
  return store;
}

// brute-force oracle: token_set semantics transcribed independently
std::vector<std::string> set_oracle(std::vector<std::string> seq,
                                    const VectorStore& store) {
  std::sort(seq.begin(), seq.end());
  seq.erase(std::unique(seq.begin(), seq.end()), seq.end());
  std::vector<std::string> out;
  for (auto& t : seq)
    if (!store.is_stopped(t) && store.get(t).has_value()) out.push_back(t);
  return out;
}

double max_oracle(const std::vector<std::string>& s1,
                  const std::vector<std::string>& s2,
                  const VectorStore& store) {
  auto a = set_oracle(s1, store), b = set_oracle(s2, store);
  if (a.empty() || b.empty()) return -1.0;
  double best = -2;
  for (const auto& t1 : a)
    for (const auto& t2 : b) {
      auto v1 = *store.get(t1);
      auto v2 = *store.get(t2);
      best = std::max(best, cosine_oracle({v1.begin(), v1.end()},
                                          {v2.begin(), v2.end()}));
    }
  return best;
}

}  // namespace

TEST_CASE("closeness scale defaults and lookup") {
  ClosenessScale scale;
  CHECK(scale.very_strong == 0.95);
  CHECK(scale.strong == 0.75);
  CHECK(scale.moderate == 0.5);
  CHECK(scale.weak == 0.25);
  CHECK(scale.very_weak == 0.1);
  CHECK(scale.threshold("strong") == 0.75);
  CHECK(ClosenessScale::is_scale_name("very_weak"));
  CHECK(!ClosenessScale::is_scale_name("medium"));
  CHECK_THROWS_AS(scale.threshold("medium"), Error);
}

TEST_CASE("cosine basics") {
  std::vector<double> a{1, 2, 3}, b{4, 5, 6};
  CHECK(cosine(a, b) ==
        doctest::Approx(32.0 / (std::sqrt(14.0) * std::sqrt(77.0)))
            .epsilon(1e-12));
  CHECK(cosine(a, a) == 1.0);  // clamped self-similarity
  std::vector<double> e1{1, 0}, e2{0, 1};
  CHECK(cosine(e1, e2) == 0.0);
  CHECK(cosine(a, b) == cosine(b, a));

  std::vector<double> zero{0, 0, 0};
  CHECK_THROWS_AS(cosine(a, zero), Error);
  CHECK_THROWS_AS(cosine(a, e1), Error);  // dimension mismatch

  // scale invariance
  std::vector<double> a2{2, 4, 6};
  CHECK(std::fabs(cosine(a2, b) - cosine(a, b)) < 1e-12);
}

TEST_CASE("vec lookup") {
  auto store = axis_store();
  auto v = vec("x", store);
  CHECK(v[0] == 1.0);
  CHECK_THROWS_AS(vec("__nope__", store), Error);
}

TEST_CASE("contains_count") {
  std::vector<std::string> scope{"manager", "multimedia", "manager"};
  CHECK(contains_count(scope, "manager") == 2);
  CHECK(contains_count(scope, "expert") == 0);
  CHECK(contains_count({}, "x") == 0);
}

TEST_CASE("token_set dedupes, drops stoplist and OOV, sorts") {
  auto store = axis_store();
  store.set_stoplist({"the"});
  auto set = token_set({"y", "x", "the", "x", "ghost", "z"}, store);
  CHECK(set == std::vector<std::string>{"x", "y", "z"});
}

TEST_CASE("proximity empty-set convention") {
  auto store = axis_store();
  CHECK(proximity_max({}, {"x"}, store) == -1.0);
  CHECK(proximity_avg({"x"}, {}, store) == -1.0);
  CHECK(proximity_top2_avg({}, {}, store) == -1.0);
  CHECK(subset_proximity_avg(2, {}, {"x"}, store) == -1.0);
  // a sequence of only stoplisted/OOV tokens is empty after filtering
  store.set_stoplist({"noise"});
  CHECK(proximity_max({"noise", "ghost"}, {"x"}, store) == -1.0);
}

TEST_CASE("proximity_max on fixtures and against the oracle") {
  auto store = axis_store();
  CHECK(proximity_max({"x"}, {"negx"}, store) == doctest::Approx(-1.0));
  CHECK(proximity_max({"x", "y"}, {"x"}, store) == doctest::Approx(1.0));
  CHECK(proximity_max({"x"}, {"xy"}, store) ==
        doctest::Approx(1.0 / std::sqrt(2.0)));

  auto rs = random_store(6, 15, 77);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::string> s1, s2;
    for (int i = 0; i < 5; ++i) s1.push_back("w" + std::to_string(rng() % 18));
    for (int i = 0; i < 7; ++i) s2.push_back("w" + std::to_string(rng() % 18));
    CHECK(proximity_max(s1, s2, rs) ==
          doctest::Approx(max_oracle(s1, s2, rs)).epsilon(1e-12));
    // symmetry is exact
    CHECK(proximity_max(s1, s2, rs) == proximity_max(s2, s1, rs));
  }
}

TEST_CASE("proximity_avg is cosine of the set means") {
  auto store = axis_store();
  // singletons
  CHECK(proximity_avg({"x"}, {"y"}, store) == doctest::Approx(0.0));
  // mean of {x,y} is (.5,.5,0); against x gives 1/sqrt(2)
  CHECK(proximity_avg({"x", "y"}, {"x"}, store) ==
        doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(proximity_avg({"x", "y"}, {"x", "y"}, store) == doctest::Approx(1.0));
  // zero-norm mean: {x, negx}
  CHECK_THROWS_AS(proximity_avg({"x", "negx"}, {"y"}, store), Error);

  auto rs = random_store(4, 10, 3);
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::string> s1, s2;
    for (int i = 0; i < 5; ++i) s1.push_back("w" + std::to_string(rng() % 10));
    for (int i = 0; i < 7; ++i) s2.push_back("w" + std::to_string(rng() % 10));
    auto a = set_oracle(s1, rs), b = set_oracle(s2, rs);
    std::vector<double> m1(4, 0), m2(4, 0);
    for (const auto& t : a)
      for (int d = 0; d < 4; ++d) m1[d] += (*rs.get(t))[d] / a.size();
    for (const auto& t : b)
      for (int d = 0; d < 4; ++d) m2[d] += (*rs.get(t))[d] / b.size();
    CHECK(proximity_avg(s1, s2, rs) ==
          doctest::Approx(cosine_oracle(m1, m2)).epsilon(1e-9));
  }
}

TEST_CASE("proximity_top2_avg") {
  auto store = axis_store();
  // single cross pair equals max
  CHECK(proximity_top2_avg({"x"}, {"y"}, store) ==
        proximity_max({"x"}, {"y"}, store));
  // pair cosines with {x} vs {x, y, negx}: {1.0, 0.0, -1.0} -> top2 avg 0.5
  CHECK(proximity_top2_avg({"x"}, {"x", "y", "negx"}, store) ==
        doctest::Approx(0.5));
  // never exceeds max
  auto rs = random_store(5, 12, 11);
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> s1, s2;
    for (int i = 0; i < 4; ++i) s1.push_back("w" + std::to_string(rng() % 14));
    for (int i = 0; i < 4; ++i) s2.push_back("w" + std::to_string(rng() % 14));
    double m = proximity_max(s1, s2, rs);
    double t2 = proximity_top2_avg(s1, s2, rs);
    CHECK(t2 <= m);
    CHECK(t2 == proximity_top2_avg(s2, s1, rs));
  }
}

TEST_CASE("subset_proximity_avg interpolates between max and avg") {
  auto rs = random_store(5, 9, 23);
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::string> s1, s2;
    for (int i = 0; i < 4; ++i) s1.push_back("w" + std::to_string(rng() % 9));
    for (int i = 0; i < 5; ++i) s2.push_back("w" + std::to_string(rng() % 9));
    // size=1: exactly proximity_max, bit for bit
    CHECK(subset_proximity_avg(1, s1, s2, rs) == proximity_max(s1, s2, rs));
    // size >= cardinality: proximity_avg
    CHECK(subset_proximity_avg(10, s1, s2, rs) ==
          doctest::Approx(proximity_avg(s1, s2, rs)).epsilon(1e-12));
    CHECK(subset_proximity_avg(2, s1, s2, rs) ==
          subset_proximity_avg(2, s2, s1, rs));
  }
}

TEST_CASE("subset_proximity_avg size=2 exhaustive oracle") {
  auto rs = random_store(4, 6, 41);
  std::vector<std::string> s1{"w0", "w1", "w2"}, s2{"w3", "w4", "w5"};
  // oracle: all 2-subsets of each side, mean each, max cosine
  auto mean2 = [&](const std::string& a, const std::string& b) {
    std::vector<double> m(4);
    for (int d = 0; d < 4; ++d)
      m[d] = ((*rs.get(a))[d] + (*rs.get(b))[d]) / 2.0;
    return m;
  };
  double best = -2;
  const char* p1[][2] = {{"w0", "w1"}, {"w0", "w2"}, {"w1", "w2"}};
  const char* p2[][2] = {{"w3", "w4"}, {"w3", "w5"}, {"w4", "w5"}};
  for (auto& a : p1)
    for (auto& b : p2)
      best = std::max(best, cosine_oracle(mean2(a[0], a[1]), mean2(b[0], b[1])));
  CHECK(subset_proximity_avg(2, s1, s2, rs) ==
        doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("subset enumeration guard") {
  auto rs = random_store(2, 40, 1);
  std::vector<std::string> big;
  for (int i = 0; i < 40; ++i) big.push_back("w" + std::to_string(i));
  // C(40,20)^2 is astronomically over the 1e6 guard
  CHECK_THROWS_AS(subset_proximity_avg(20, big, big, rs), Error);
}

TEST_CASE("stoplist tokens never affect proximity values") {
  auto rs = random_store(5, 8, 13);
  rs.set_stoplist({"hum"});
  rs.put("hum", std::vector<double>{9, 9, 9, 9, 9});
  std::vector<std::string> s1{"w0", "w1"}, s2{"w2", "w3"};
  auto s1noisy = s1;
  s1noisy.push_back("hum");
  CHECK(proximity_max(s1, s2, rs) == proximity_max(s1noisy, s2, rs));
  CHECK(proximity_avg(s1, s2, rs) == proximity_avg(s1noisy, s2, rs));
  CHECK(proximity_top2_avg(s1, s2, rs) == proximity_top2_avg(s1noisy, s2, rs));
}

TEST_CASE("3cosadd on a planted parallelogram") {
  VectorStore store(4);
  store.set_stoplist({});
  store.put("a", std::vector<double>{1, 0, 0, 0});
  store.put("b", std::vector<double>{0, 1, 0, 0});
  store.put("c", std::vector<double>{0, 0, 1, 0});
  // answer := a - b + c exactly
  store.put("ans", std::vector<double>{1, -1, 1, 0});
  store.put("dud", std::vector<double>{0, 0, 0, 1});

  std::set<std::string> cands{"a", "b", "c", "ans", "dud"};
  auto ranked = analogy_3cosadd("a", "b", "c", cands, store);
  REQUIRE(!ranked.empty());
  CHECK(ranked[0].token == "ans");
  CHECK(ranked[0].score == doctest::Approx(1.0));
  // the three query tokens are excluded
  for (const auto& n : ranked) {
    CHECK(n.token != "a");
    CHECK(n.token != "b");
    CHECK(n.token != "c");
  }
}

TEST_CASE("3cosadd degenerate a=b reduces to neighbors of c") {
  auto store = axis_store();
  std::set<std::string> cands{"x", "y", "z", "xy", "negx"};
  auto ranked = analogy_3cosadd("y", "y", "x", cands, store);
  REQUIRE(ranked.size() >= 2);
  CHECK(ranked[0].token == "xy");  // cos with x: 0.707 beats the orthogonals
  CHECK_THROWS_AS(analogy_3cosadd("ghost", "y", "x", cands, store), Error);
}

TEST_CASE("3cosadd ranking invariant under global rescaling") {
  auto rs = random_store(6, 12, 55);
  std::set<std::string> cands;
  for (const auto& t : rs.tokens()) cands.insert(t);
  auto before = analogy_3cosadd("w0", "w1", "w2", cands, rs);

  VectorStore scaled(6);
  scaled.set_stoplist({});
  for (const auto& t : rs.tokens()) {
    auto v = *rs.get(t);
    std::vector<double> s(v.begin(), v.end());
    for (auto& x : s) x *= 3.5;
    scaled.put(t, s);
  }
  auto after = analogy_3cosadd("w0", "w1", "w2", cands, scaled);
  REQUIRE(before.size() == after.size());
  for (std::size_t i = 0; i < before.size(); ++i)
    CHECK(before[i].token == after[i].token);
}

TEST_CASE("3cosmul scores by the paper formula") {
  VectorStore store(3);
  store.set_stoplist({});
  store.put("a", std::vector<double>{1, 0.2, 0});
  store.put("b", std::vector<double>{0.1, 1, 0});
  store.put("c", std::vector<double>{0.3, 0.1, 1});
  store.put("cand1", std::vector<double>{0.9, 0.1, 0.6});
  store.put("cand2", std::vector<double>{0.1, 0.9, 0.2});

  std::set<std::string> cands{"cand1", "cand2"};
  auto ranked = analogy_3cosmul("a", "b", "c", cands, store);
  REQUIRE(ranked.size() == 2);

  auto cos_t = [&](const char* x, const char* y) {
    auto vx = *store.get(x);
    auto vy = *store.get(y);
    return cosine_oracle({vx.begin(), vx.end()}, {vy.begin(), vy.end()});
  };
  auto score = [&](const char* x) {
    return (cos_t(x, "c") * cos_t(x, "a")) / (cos_t(x, "b") + 0.001);
  };
  for (const auto& n : ranked) {
    double expect = score(n.token.c_str());
    CHECK(n.score == doctest::Approx(expect).epsilon(1e-9));
  }
  CHECK(ranked[0].score >= ranked[1].score);

  // shifted variant maps cosines to [0,1] first
  auto shifted = analogy_3cosmul("a", "b", "c", cands, store, 0.001, true);
  auto shift_score = [&](const char* x) {
    auto sc = [&](double v) { return (v + 1.0) / 2.0; };
    return (sc(cos_t(x, "c")) * sc(cos_t(x, "a"))) / (sc(cos_t(x, "b")) + 0.001);
  };
  for (const auto& n : shifted)
    CHECK(n.score == doctest::Approx(shift_score(n.token.c_str())).epsilon(1e-9));
}

TEST_CASE("3cosmul near-zero denominator is an error") {
  VectorStore store(2);
  store.set_stoplist({});
  store.put("a", std::vector<double>{1, 0});
  store.put("b", std::vector<double>{0, 1});
  store.put("c", std::vector<double>{1, 1});
  // candidate orthogonal to b: cos(x,b) = 0, epsilon 0 -> denominator 0
  store.put("x", std::vector<double>{1, 0});
  std::set<std::string> cands{"x"};
  CHECK_THROWS_AS(analogy_3cosmul("a", "b", "c", cands, store, 0.0), Error);
  CHECK_NOTHROW(analogy_3cosmul("a", "b", "c", cands, store, 0.001));
}
