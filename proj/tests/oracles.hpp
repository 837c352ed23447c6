#pragma once

// Reference computations used by the tests. Each one is written without
// calling the library routine it is compared against.

#include <cmath>
#include <functional>
#include <random>
#include <sigrecon/sigrecon.hpp>
#include <vector>

namespace oracle {

using sigrecon::Point;

inline double factorial(int n) {
  double f = 1;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

/// Coefficient of a word in the signature of the polyline through pts, by
/// splitting the word over segments: the last segment takes the last k
/// letters with weight prod(increments)/k!.
inline double plt_coeff(const std::vector<Point>& pts, const std::vector<int>& word) {
  std::function<double(std::size_t, std::size_t)> rec = [&](std::size_t segs, std::size_t len) -> double {
    if (len == 0) return 1.0;
    if (segs == 0) return 0.0;
    const auto& a = pts[segs - 1];
    const auto& b = pts[segs];
    double total = 0;
    double prod = 1;
    for (std::size_t k = 0; k <= len; ++k) {
      if (k > 0) {
        const int letter = word[len - k];
        prod *= b[letter - 1] - a[letter - 1];
      }
      total += rec(segs - 1, len - k) * prod / factorial(static_cast<int>(k));
    }
    return total;
  };
  return rec(pts.size() - 1, word.size());
}

/// Triple-loop convolution of two truncated tensors at a single level.
inline std::vector<double> convolve_level(const sigrecon::TruncatedTensor& a,
                                          const sigrecon::TruncatedTensor& b, std::size_t n) {
  const std::size_t d = a.dim();
  std::vector<double> out(static_cast<std::size_t>(std::pow(d, n)), 0.0);
  for (std::size_t i = 0; i <= n; ++i) {
    const auto A = a.coeffs(i);
    const auto B = b.coeffs(n - i);
    for (std::size_t p = 0; p < A.size(); ++p)
      for (std::size_t q = 0; q < B.size(); ++q) out[p * B.size() + q] += A[p] * B[q];
  }
  return out;
}

/// Left-point nested Riemann sum of a word along a polyline with every
/// segment split into `per_segment` pieces.
inline double riemann_word(const std::vector<Point>& pts, const std::vector<int>& word, int per_segment) {
  std::vector<Point> fine;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k)
    for (int s = 0; s < per_segment; ++s) {
      const double w = static_cast<double>(s) / per_segment;
      Point x(pts[k].size());
      for (std::size_t j = 0; j < x.size(); ++j) x[j] = (1 - w) * pts[k][j] + w * pts[k + 1][j];
      fine.push_back(x);
    }
  fine.push_back(pts.back());
  std::vector<double> F(fine.size(), 1.0);
  for (int letter : word) {
    std::vector<double> G(fine.size(), 0.0);
    for (std::size_t i = 0; i + 1 < fine.size(); ++i)
      G[i + 1] = G[i] + F[i] * (fine[i + 1][letter - 1] - fine[i][letter - 1]);
    F = std::move(G);
  }
  return F.back();
}

/// Adaptive Simpson on [a,b].
inline double simpson(const std::function<double(double)>& f, double a, double b, double tol, int depth = 40) {
  std::function<double(double, double, double, double, double, double, int)> rec =
      [&](double lo, double hi, double flo, double fmid, double fhi, double whole, int k) -> double {
    const double mid = 0.5 * (lo + hi);
    const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
    const double flm = f(lm), frm = f(rm);
    const double left = (mid - lo) / 6 * (flo + 4 * flm + fmid);
    const double right = (hi - mid) / 6 * (fmid + 4 * frm + fhi);
    if (k <= 0 || std::abs(left + right - whole) <= 15 * tol) return left + right + (left + right - whole) / 15;
    return rec(lo, mid, flo, flm, fmid, left, k - 1) + rec(mid, hi, fmid, frm, fhi, right, k - 1);
  };
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return rec(a, b, fa, fm, fb, (b - a) / 6 * (fa + 4 * fm + fb), depth);
}

/// Dense endpoint-pinned discrete Frechet distance.
inline double dense_frechet(const std::vector<Point>& P, const sigrecon::SamplePath& g) {
  const std::size_t n = P.size(), m = g.size();
  auto d = [&](std::size_t i, std::size_t j) {
    double s = 0;
    for (std::size_t k = 0; k < g.dim(); ++k) s += (P[i][k] - g.coord(j, k)) * (P[i][k] - g.coord(j, k));
    return std::sqrt(s);
  };
  std::vector<std::vector<double>> D(n, std::vector<double>(m));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      double best;
      if (i == 0 && j == 0) best = 0;
      else if (i == 0) best = D[0][j - 1];
      else if (j == 0) best = D[i - 1][0];
      else best = std::min({D[i - 1][j], D[i][j - 1], D[i - 1][j - 1]});
      D[i][j] = std::max(best, d(i, j));
    }
  return D[n - 1][m - 1];
}

/// Central-difference Jacobian times vector: (DW . V)(x).
inline Point jac_times(const sigrecon::VectorField& W, const Point& x, const Point& v, double h = 1e-5) {
  Point out(W.dim(), 0.0);
  for (std::size_t j = 0; j < x.size(); ++j) {
    Point xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    const Point a = W.eval(xp), b = W.eval(xm);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += (a[i] - b[i]) / (2 * h) * v[j];
  }
  return out;
}

inline std::vector<Point> random_points(std::mt19937_64& g, std::size_t n, std::size_t d, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  std::vector<Point> pts(n, Point(d));
  for (auto& p : pts)
    for (auto& c : p) c = nd(g);
  return pts;
}

/// Straight path x(t) = t * v from the origin, uniformly sampled.
inline sigrecon::SamplePath line_path(const Point& v, std::size_t steps) {
  std::vector<double> t = sigrecon::uniform_times(steps);
  std::vector<Point> pts;
  for (double s : t) {
    Point x(v.size());
    for (std::size_t j = 0; j < v.size(); ++j) x[j] = s * v[j];
    pts.push_back(x);
  }
  return sigrecon::SamplePath(t, pts);
}

inline sigrecon::SamplePath function_path(const std::function<Point(double)>& f, std::size_t steps) {
  std::vector<double> t = sigrecon::uniform_times(steps);
  std::vector<Point> pts;
  for (double s : t) pts.push_back(f(s));
  return sigrecon::SamplePath(t, pts);
}

inline sigrecon::FieldFamily family(const char* json) {
  return sigrecon::family_from_json(nlohmann::json::parse(json));
}

inline const char* kBrownian = R"({"N":2,"d":2,"fields":[{"name":"V1","components":["1","0"]},{"name":"V2","components":["0","1"]}]})";
inline const char* kHeisenberg = R"({"N":2,"d":2,"fields":[{"name":"V1","components":["1","0"]},{"name":"V2","components":["0","x1"]}]})";
inline const char* kDegenerate = R"({"N":2,"d":2,"fields":[{"name":"V1","components":["1","0"]},{"name":"V2","components":["1","0"]}]})";
inline const char* kDrift = R"({"N":2,"d":0,"fields":[{"name":"V0","components":["1","0"]}]})";

}  // namespace oracle
