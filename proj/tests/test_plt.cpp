#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace sigrecon;

namespace {

Parametrization random_sigma(std::mt19937_64& g, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> t{0.0, 1.0};
  while (t.size() < n) {
    const double x = u(g);
    if (std::find(t.begin(), t.end(), x) == t.end()) t.push_back(x);
  }
  std::sort(t.begin(), t.end());
  return Parametrization(t);
}

// random T2 with repeated last point, and an increasing index subset of (T2)^-
struct Nested {
  PLT T2;
  Parametrization s2;
  std::vector<std::size_t> idx1;  // positions of (T1)^- in T2
  std::vector<std::size_t> idx;   // positions of T in T2, a superset of idx1
};

Nested random_nested(std::mt19937_64& g, std::size_t m) {
  auto pts = oracle::random_points(g, m, 2);
  pts.push_back(pts.back());
  Nested n{PLT(pts), random_sigma(g, m + 1), {0}, {0}};
  std::bernoulli_distribution keep1(0.3), keep(0.6);
  for (std::size_t q = 1; q < m; ++q) {
    if (keep1(g)) {
      n.idx1.push_back(q);
      n.idx.push_back(q);
    } else if (keep(g)) {
      n.idx.push_back(q);
    }
  }
  return n;
}

PLT pick(const PLT& T, const std::vector<std::size_t>& idx, bool repeat_last) {
  std::vector<Point> pts;
  for (auto q : idx) pts.push_back(T[q]);
  if (repeat_last) pts.push_back(pts.back());
  return PLT(pts);
}

Parametrization pick_times(const Parametrization& s, const std::vector<std::size_t>& idx) {
  std::vector<double> t;
  for (auto q : idx) t.push_back(s[q]);
  t.push_back(1.0);
  return Parametrization(t);
}

}  // namespace

TEST(evaluate, examples) {
  const PLT seg({{0, 0}, {1, 0}});
  EXPECT_EQ(evaluate(seg, Parametrization({0, 1}), 0.5), (Point{0.5, 0}));
  const PLT T({{0, 0}, {1, 0}, {1, 1}});
  const Parametrization s({0, 0.25, 1});
  EXPECT_EQ(evaluate(T, s, 0.25), (Point{1, 0}));
  EXPECT_EQ(evaluate(T, s, 1.0), (Point{1, 1}));
  const auto p = evaluate(T, s, 0.625);
  EXPECT_DOUBLE_EQ(p[0], 1.0);
  EXPECT_DOUBLE_EQ(p[1], 0.5);
  EXPECT_THROW(evaluate(T, Parametrization({0, 1}), 0.5), InvalidInput);
  EXPECT_THROW(evaluate(T, s, 1.5), InvalidInput);
}

TEST(evaluate, exact_at_partition_times_and_continuous) {
  std::mt19937_64 g(1);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 2 + rep % 6;
    const PLT T(oracle::random_points(g, n, 3));
    const auto s = random_sigma(g, n);
    for (std::size_t k = 0; k < n; ++k) EXPECT_EQ(evaluate(T, s, s[k]), T[k]);
    for (std::size_t k = 1; k + 1 < n; ++k) {
      const auto left = evaluate(T, s, std::nextafter(s[k], 0.0));
      EXPECT_LT(distance(left, T[k]), 1e-9);
    }
  }
}

TEST(plt, singleton_is_promoted_and_bad_input_rejected) {
  const PLT T({{1, 2}});
  EXPECT_EQ(T.size(), 2u);
  EXPECT_EQ(T[0], T[1]);
  EXPECT_THROW(PLT({{0, 0}, {1}}), InvalidInput);
  EXPECT_THROW(PLT(std::vector<Point>{}), InvalidInput);
  EXPECT_THROW(Parametrization({0, 0.5, 0.5, 1}), InvalidInput);
  EXPECT_THROW(Parametrization({0.1, 1}), InvalidInput);
}

TEST(drop_last, examples) {
  const Point a{0, 0}, b{1, 0}, c{1, 1};
  EXPECT_EQ(drop_last(PLT({a, b, c})).points(), (std::vector<Point>{a, b}));
  EXPECT_EQ(drop_last(PLT({a, b, b})).points(), (std::vector<Point>{a, b}));
  EXPECT_THROW(drop_last(PLT({a, b})), InvalidInput);
}

TEST(is_sub_plt, examples) {
  const Point a{0, 0}, b{1, 0}, c{1, 1};
  EXPECT_TRUE(is_sub_plt(PLT({a, c}), PLT({a, b, c})));
  EXPECT_FALSE(is_sub_plt(PLT({c, a}), PLT({a, b, c})));
  EXPECT_TRUE(is_sub_plt(PLT({a, b, c}), PLT({a, b, c})));
  EXPECT_FALSE(is_sub_plt(PLT({a, a, a}), PLT({a, b, a})));
}

TEST(is_sub_plt, reflexive_and_transitive) {
  std::mt19937_64 g(2);
  std::bernoulli_distribution coin(0.6);
  std::uniform_int_distribution<int> small(0, 2);
  for (int rep = 0; rep < 200; ++rep) {
    // small alphabet so repeats occur
    std::vector<Point> c;
    for (int k = 0; k < 8; ++k) c.push_back(Point{static_cast<double>(small(g)), 0});
    std::vector<Point> b, a;
    for (const auto& p : c)
      if (coin(g)) b.push_back(p);
    for (const auto& p : b)
      if (coin(g)) a.push_back(p);
    if (a.empty() || b.empty()) continue;
    const PLT A(a), B(b), C(c);
    EXPECT_TRUE(is_sub_plt(C, C));
    if (a.size() >= 2 && b.size() >= 2) {
      EXPECT_TRUE(is_sub_plt(A, B));
      EXPECT_TRUE(is_sub_plt(B, C));
      EXPECT_TRUE(is_sub_plt(A, C));
    }
  }
}

TEST(sup_distance, matches_dense_evaluation) {
  std::mt19937_64 g(3);
  for (int rep = 0; rep < 20; ++rep) {
    const PLT T(oracle::random_points(g, 5, 2));
    const auto s = random_sigma(g, 5);
    const SamplePath gamma(uniform_times(7), oracle::random_points(g, 8, 2));
    double ref = 0;
    for (int i = 0; i <= 20000; ++i) {
      const double t = i / 20000.0;
      ref = std::max(ref, distance(evaluate(T, s, t), gamma.at(t)));
    }
    const double v = sup_distance(T, s, gamma);
    EXPECT_GE(v, ref - 1e-12);
    EXPECT_LE(v, ref + 1e-3);
  }
}

TEST(trajectory_distance, examples) {
  const PLT seg({{0, 0}, {1, 0}});
  EXPECT_NEAR(trajectory_distance(seg, oracle::line_path({1, 0}, 1000)), 0.0, 1e-3);
  const auto parabola = oracle::function_path([](double t) { return Point{t, t * (1 - t)}; }, 4000);
  EXPECT_NEAR(trajectory_distance(seg, parabola), 0.25, 1e-3);
  EXPECT_NEAR(trajectory_distance(PLT({{0, 0}, {0, 0}}), oracle::line_path({1, 0}, 100)), 1.0, 1e-12);
  EXPECT_THROW(trajectory_distance(PLT({{0, 0, 0}}), parabola), InvalidInput);
}

TEST(trajectory_distance, zero_on_reparametrized_copies) {
  std::mt19937_64 g(4);
  for (int rep = 0; rep < 10; ++rep) {
    const PLT T(oracle::random_points(g, 6, 2));
    const auto s = random_sigma(g, 6);
    const auto gamma = oracle::function_path([&](double t) { return evaluate(T, s, t); }, 3000);
    EXPECT_LE(trajectory_distance(T, gamma), 2 * max_step(gamma));
  }
}

TEST(trajectory_distance, translation_invariant) {
  std::mt19937_64 g(5);
  for (int rep = 0; rep < 10; ++rep) {
    auto pts = oracle::random_points(g, 5, 2);
    const SamplePath gamma(uniform_times(60), oracle::random_points(g, 61, 2, 0.5));
    const double d0 = trajectory_distance(PLT(pts), gamma);
    const Point shift{3.25, -1.5};
    for (auto& p : pts)
      for (std::size_t j = 0; j < 2; ++j) p[j] += shift[j];
    std::vector<Point> moved;
    for (std::size_t i = 0; i < gamma.size(); ++i) moved.push_back({gamma.coord(i, 0) + shift[0], gamma.coord(i, 1) + shift[1]});
    const double d1 = trajectory_distance(PLT(pts), SamplePath(gamma.times(), moved));
    EXPECT_NEAR(d0, d1, 1e-12);
  }
}

TEST(trajectory_distance, equals_dense_discrete_frechet) {
  std::mt19937_64 g(6);
  for (int rep = 0; rep < 100; ++rep) {
    const PLT T(oracle::random_points(g, 2 + rep % 5, 2));
    const SamplePath gamma(uniform_times(40), oracle::random_points(g, 41, 2, 0.7));
    const double delta = 0.05 + 0.01 * (rep % 7);
    EXPECT_NEAR(trajectory_distance(T, gamma, delta), oracle::dense_frechet(subdivide(T, delta), gamma), 1e-12);
  }
}

TEST(squeeze, maximal_case_reproduces_sigma2) {
  std::mt19937_64 g(7);
  for (int rep = 0; rep < 20; ++rep) {
    const auto n = random_nested(g, 4 + rep % 5);
    const PLT T1 = pick(n.T2, n.idx1, true);
    const auto s1 = pick_times(n.s2, n.idx1);
    const auto sigma = build_squeeze_parametrization(T1, s1, minus(n.T2), n.T2, n.s2);
    EXPECT_EQ(sigma, n.s2);
  }
}

TEST(squeeze, minimal_case_reproduces_sigma1) {
  std::mt19937_64 g(8);
  for (int rep = 0; rep < 20; ++rep) {
    const auto n = random_nested(g, 4 + rep % 5);
    const PLT T1 = pick(n.T2, n.idx1, true);
    const auto s1 = pick_times(n.s2, n.idx1);
    const auto sigma = build_squeeze_parametrization(T1, s1, minus(T1), n.T2, n.s2);
    EXPECT_EQ(sigma, s1);
  }
}

TEST(squeeze, random_nested_triples_satisfy_both_clauses) {
  std::mt19937_64 g(9);
  for (int rep = 0; rep < 300; ++rep) {
    const auto n = random_nested(g, 3 + rep % 10);
    const PLT T1 = pick(n.T2, n.idx1, true);
    const auto s1 = pick_times(n.s2, n.idx1);
    std::vector<Point> T;
    for (auto q : n.idx) T.push_back(n.T2[q]);
    const auto sigma = build_squeeze_parametrization(T1, s1, T, n.T2, n.s2);
    const PLT Tbar = with_repeated_last(T);
    ASSERT_EQ(sigma.order(), Tbar.size());
    const auto c = check_squeeze_clauses(T1, s1, Tbar, sigma, n.T2, n.s2);
    EXPECT_TRUE(c.clause1) << "rep " << rep;
    EXPECT_TRUE(c.clause2) << "rep " << rep;
    // direct pointwise check of both clauses
    for (std::size_t k = 0; k + 1 < s1.order(); ++k) EXPECT_EQ(evaluate(T1, s1, s1[k]), evaluate(Tbar, sigma, s1[k]));
    for (std::size_t k = 0; k + 1 < sigma.order(); ++k)
      EXPECT_EQ(evaluate(Tbar, sigma, sigma[k]), evaluate(n.T2, n.s2, sigma[k]));
  }
}

TEST(squeeze, repeated_points_need_the_anchored_embedding) {
  // T2 = (a, b, a, b, b): the greedy match of T = (a, b) must still reach the
  // anchor at position 2 of T1 = (a, a, a)
  const Point a{0, 0}, b{1, 0};
  const PLT T2({a, b, a, b, b});
  const Parametrization s2({0, 0.2, 0.4, 0.6, 1});
  const PLT T1({a, a, a});
  const Parametrization s1({0, 0.4, 1});
  const std::vector<Point> T{a, a, b};
  const auto sigma = build_squeeze_parametrization(T1, s1, T, T2, s2);
  EXPECT_EQ(sigma, Parametrization({0, 0.4, 0.6, 1}));
  EXPECT_TRUE(check_squeeze_clauses(T1, s1, with_repeated_last(T), sigma, T2, s2).ok());
}

TEST(squeeze, hypothesis_violations_name_the_clause) {
  const Point a{0, 0}, b{1, 0}, c{1, 1};
  const PLT T2({a, b, c, c});
  const Parametrization s2({0, 0.3, 0.6, 1});
  const PLT T1({a, c, c});
  const Parametrization s1({0, 0.6, 1});
  auto clause = [&](auto&& f) {
    try {
      f();
    } catch (const SqueezeHypothesisError& e) {
      return e.clause;
    }
    return std::string("none");
  };
  EXPECT_EQ(clause([&] { build_squeeze_parametrization(T1, s1, PLT({a, b, c}), T2, s2); }), "none");
  EXPECT_EQ(clause([&] { build_squeeze_parametrization(T1, s1, PLT({b, c}), T2, s2); }), "first points");
  EXPECT_EQ(clause([&] { build_squeeze_parametrization(PLT({a, c, b}), s1, PLT({a, c}), T2, s2); }),
            "last points of T1");
  EXPECT_EQ(clause([&] { build_squeeze_parametrization(T1, s1, PLT({a, c}), PLT({a, b, c, b}), s2); }),
            "last points of T2");
  EXPECT_EQ(clause([&] { build_squeeze_parametrization(T1, Parametrization({0, 0.5, 1}), PLT({a, c}), T2, s2); }),
            "sigma1 embeds in sigma2");
  EXPECT_EQ(clause([&] { build_squeeze_parametrization(T1, s1, PLT({a, b}), T2, s2); }), "(T1)^- < T");
  EXPECT_EQ(clause([&] { build_squeeze_parametrization(T1, s1, PLT({a, c, b}), T2, s2); }), "T < (T2)^-");
  EXPECT_EQ(clause([&] { build_squeeze_parametrization(T1, s1, PLT({a, b, c}), T2, Parametrization({0, 1})); }),
            "orders");
}
