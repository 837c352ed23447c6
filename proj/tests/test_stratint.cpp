#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace sigrecon;

namespace {

SamplePath square_loop(std::size_t samples) {
  return oracle::function_path(
      [](double t) {
        const double u = 4 * t;
        if (u <= 1) return Point{u, 0};
        if (u <= 2) return Point{1, u - 1};
        if (u <= 3) return Point{3 - u, 1};
        return Point{0, 4 - u};
      },
      samples - 1);
}

SamplePath circle(std::size_t steps) {
  return oracle::function_path(
      [](double t) { return Point{std::cos(2 * M_PI * t) - 1, std::sin(2 * M_PI * t)}; }, steps);
}

// eta * exp(-|x - xi|^2 / 2) evaluated from scratch
double bump_coefficient(const Point& x, const Point& xi, const AxisBox& in, const AxisBox& out) {
  auto step = [](double u) { return u <= 0 ? 0.0 : u >= 1 ? 1.0 : u * u * u * (10 - 15 * u + 6 * u * u); };
  double eta = 1;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] <= out.lo[i] || x[i] >= out.hi[i]) return 0;
    if (x[i] < in.lo[i]) eta *= step((x[i] - out.lo[i]) / (in.lo[i] - out.lo[i]));
    if (x[i] > in.hi[i]) eta *= step((out.hi[i] - x[i]) / (out.hi[i] - in.hi[i]));
  }
  double r = 0;
  for (std::size_t i = 0; i < x.size(); ++i) r += (x[i] - xi[i]) * (x[i] - xi[i]);
  return eta * std::exp(-0.5 * r);
}

OneForm bump(const Point& c, double inner, double outer, const Point& xi) {
  return OneForm(xi, AxisBox::centered(c, inner), AxisBox::centered(c, outer));
}

}  // namespace

TEST(strat_iterated_integral, single_letter_is_increment) {
  std::mt19937_64 g(1);
  auto pts = oracle::random_points(g, 51, 3);
  const SamplePath p(uniform_times(50), pts);
  EXPECT_DOUBLE_EQ(strat_iterated_integral(p, {2}), pts.back()[1] - pts.front()[1]);
  EXPECT_NEAR(strat_iterated_integral(p, {3}, 0.2, 0.6), pts[30][2] - pts[10][2], 1e-14);
}

TEST(strat_iterated_integral, empty_word_is_one) {
  const auto p = oracle::line_path({1, 2}, 10);
  EXPECT_EQ(strat_iterated_integral(p, TensorWord{}), 1.0);
}

TEST(strat_iterated_integral, linear_path) {
  const auto p = oracle::line_path({1, 2}, 999);
  EXPECT_NEAR(strat_iterated_integral(p, {1, 2}), 1.0, 1e-9);
  EXPECT_NEAR(strat_iterated_integral(p, {2, 1}), 1.0, 1e-9);
}

TEST(strat_iterated_integral, unit_square_levy_area) {
  const auto p = square_loop(4000);
  const double v = strat_iterated_integral(p, {1, 2});
  EXPECT_NEAR(v, 1.0, 2e-3);
  // Riemann sums on the same polyline at 10x resolution
  EXPECT_NEAR(oracle::riemann_word(p.as_plt().points(), {1, 2}, 10), v, 2e-3);
}

TEST(strat_iterated_integral, rejects_bad_input) {
  const auto p = oracle::line_path({1, 2}, 10);
  EXPECT_THROW(strat_iterated_integral(p, {3}), InvalidInput);
  EXPECT_THROW(strat_iterated_integral(p, {0}), InvalidInput);
  EXPECT_THROW(strat_iterated_integral(p, {1}, 0.5, 0.2), InvalidInput);
  EXPECT_THROW(strat_iterated_integral(p, {1}, -0.1, 0.5), InvalidInput);
  EXPECT_THROW(strat_iterated_integral(p, {1}, 0.0, 1.5), InvalidInput);
}

TEST(strat_iterated_integral, additive_in_first_level) {
  std::mt19937_64 g(2);
  const SamplePath p(uniform_times(40), oracle::random_points(g, 41, 2));
  const double whole = strat_iterated_integral(p, {1}, 0.1, 0.9);
  const double a = strat_iterated_integral(p, {1}, 0.1, 0.5);
  const double b = strat_iterated_integral(p, {1}, 0.5, 0.9);
  EXPECT_NEAR(whole, a + b, 1e-14);
}

TEST(strat_iterated_integral, running_values_start_at_zero) {
  const auto r = running_iterated_integral(oracle::line_path({1, 1}, 20), {1, 2}, 0.0, 1.0);
  EXPECT_EQ(r.values.front(), 0.0);
  EXPECT_EQ(r.values.size(), 21u);
}

TEST(strat_iterated_integral, levels_one_and_two_exact_on_sampled_plts) {
  std::mt19937_64 g(3);
  for (int rep = 0; rep < 20; ++rep) {
    const auto pts = oracle::random_points(g, 4, 2);
    const SamplePath p = sample_plt(PLT(pts), uniform_parametrization(4), 1000);
    for (const std::vector<int>& w : std::vector<std::vector<int>>{{1}, {2}, {1, 1}, {1, 2}, {2, 1}, {2, 2}})
      EXPECT_NEAR(strat_iterated_integral(p, TensorWord(w)), oracle::plt_coeff(pts, w), 1e-9);
  }
}

TEST(strat_iterated_integral, level_three_error_is_second_order) {
  // On one unit segment the trapezoid recursion misses v^3/6 by v^3/(12 n^2).
  for (std::size_t n : {10u, 100u, 1000u}) {
    const auto p = oracle::line_path({1, 0}, n);
    const double err = strat_iterated_integral(p, {1, 1, 1}) - 1.0 / 6.0;
    EXPECT_NEAR(err, 1.0 / (12.0 * n * n), 1e-3 / (n * n));
  }
}

TEST(strat_iterated_integral, refinement_ratio_on_smooth_path) {
  // exact Levy-type coefficient of the circle: S^{12} = pi
  std::vector<double> err;
  for (std::size_t n : {250u, 500u, 1000u, 2000u})
    err.push_back(std::abs(strat_iterated_integral(circle(n), {1, 2}) - M_PI));
  for (std::size_t k = 0; k + 1 < err.size(); ++k) {
    const double ratio = err[k] / err[k + 1];
    EXPECT_GT(ratio, 3.5);
    EXPECT_LT(ratio, 4.5);
  }
}

TEST(strat_line_integral, coordinate_form) {
  std::mt19937_64 g(4);
  auto pts = oracle::random_points(g, 21, 2);
  const SamplePath p(uniform_times(20), pts);
  const auto r = strat_line_integral(p, CoordinateForm(1));
  EXPECT_NEAR(r.final(), pts.back()[0] - pts.front()[0], 1e-14);
  EXPECT_EQ(r.values.front(), 0.0);
}

TEST(strat_line_integral, support_off_the_path_gives_zero) {
  const auto p = oracle::line_path({1, 0}, 100);
  const auto phi = bump({0, 5}, 0.2, 0.3, {0, 7});
  EXPECT_EQ(strat_line_integral(p, phi).final(), 0.0);
  EXPECT_EQ(clipped_extended_signature(p, std::vector<OneForm>{phi}), 0.0);
}

TEST(strat_line_integral, gaussian_form_matches_quadrature) {
  const Point v{1.0, 0.5};
  const auto p = oracle::line_path(v, 1000);
  const Point c{0.5, 0.25}, xi{1.5, 0.5};
  const auto phi = bump(c, 0.2, 0.35, xi);
  const auto in = AxisBox::centered(c, 0.2), out = AxisBox::centered(c, 0.35);
  const double ref = oracle::simpson(
      [&](double t) { return bump_coefficient({t * v[0], t * v[1]}, xi, in, out) * (v[0] + v[1]); }, 0, 1, 1e-13);
  EXPECT_NEAR(strat_line_integral(p, phi).final(), ref, 1e-6);
  EXPECT_NEAR(clipped_extended_signature(p, std::vector<OneForm>{phi}), ref, 1e-6);
  // the clipped engine stays accurate on a coarse grid
  EXPECT_NEAR(clipped_extended_signature(oracle::line_path(v, 16), std::vector<OneForm>{phi}), ref, 1e-4);
}

TEST(extended_signature, coordinate_forms_reduce_to_words) {
  const auto p = oracle::line_path({1, 2}, 1000);
  const std::vector<CoordinateForm> f{CoordinateForm(1), CoordinateForm(2)};
  EXPECT_NEAR(extended_signature(p, f), 1.0, 1e-9);
  EXPECT_THROW(extended_signature(p, std::vector<CoordinateForm>{}), InvalidInput);
}

TEST(extended_signature, single_form_equals_line_integral) {
  const auto p = circle(300);
  const auto phi = bump({-1, 1}, 0.5, 0.7, {2, 2});
  EXPECT_DOUBLE_EQ(extended_signature(p, std::vector<OneForm>{phi}), strat_line_integral(p, phi).final());
}

TEST(extended_signature, first_form_off_path_kills_everything) {
  const auto p = oracle::line_path({1, 0}, 200);
  const std::vector<AnyForm> f{AnyForm(bump({0, 3}, 0.2, 0.3, {0, 4})), AnyForm(CoordinateForm(1))};
  EXPECT_EQ(extended_signature(p, f), 0.0);
}

TEST(extended_signature, order_of_disjoint_supports) {
  // straight path through b = (0.25, 0) first, then a = (0.75, 0)
  const auto p = oracle::line_path({1, 0}, 2000);
  const auto a = bump({0.75, 0}, 0.1, 0.15, {1.75, 0});
  const auto b = bump({0.25, 0}, 0.1, 0.15, {1.25, 0});
  const double visit = extended_signature(p, std::vector<OneForm>{b, a});
  const double anti = extended_signature(p, std::vector<OneForm>{a, b});
  EXPECT_GT(std::abs(visit), 1e-3);
  EXPECT_LE(std::abs(anti), 1e-10);
  EXPECT_NEAR(clipped_extended_signature(p, std::vector<OneForm>{b, a}), visit, 1e-6);
  EXPECT_EQ(clipped_extended_signature(p, std::vector<OneForm>{a, b}), 0.0);
}

TEST(clipped_engine, agrees_with_dense_engine_on_a_wandering_path) {
  const auto p = oracle::function_path(
      [](double t) { return Point{0.8 * std::sin(6 * t), 0.6 * std::sin(11 * t)}; }, 20000);
  const std::vector<OneForm> f{bump({0.3, 0.3}, 0.2, 0.25, {2, 0.3}), bump({-0.3, 0.3}, 0.2, 0.25, {1.4, 0.3}),
                               bump({0.3, -0.3}, 0.2, 0.25, {2, -0.3})};
  for (std::size_t k = 1; k <= f.size(); ++k) {
    const std::vector<OneForm> pre(f.begin(), f.begin() + static_cast<std::ptrdiff_t>(k));
    const double dense = extended_signature(p, pre);
    EXPECT_NEAR(clipped_extended_signature(p, pre), dense, 1e-6 * std::max(1.0, std::abs(dense)));
  }
}

TEST(clipped_engine, tiny_values_keep_their_logarithm) {
  // xi far away: the raw values underflow, the scaled series does not
  const auto p = oracle::line_path({1, 0}, 500);
  const std::vector<OneForm> f{bump({0.25, 0}, 0.1, 0.15, {60.25, 0}), bump({0.75, 0}, 0.1, 0.15, {60.75, 0})};
  PathIndex index(p);
  const auto s = clipped_extended_series(index, std::span<const OneForm>(f));
  ASSERT_FALSE(s.empty());
  EXPECT_TRUE(std::isfinite(s.log_abs_final()));
  EXPECT_LT(s.log_abs_final(), -3000.0);
}
