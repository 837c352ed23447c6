#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "core.hpp"
#include "sample_path.hpp"
#include "trajectory.hpp"

namespace sigrecon {

/// T(t|sigma): linear interpolation of T with vertex k at time sigma_k.
/// At a partition time the vertex itself is returned.
inline Point evaluate(const PLT& T, const Parametrization& sigma, double t) {
  require(T.size() == sigma.order(), "evaluate: PLT has " + std::to_string(T.size()) +
                                         " points but the parametrization has order " +
                                         std::to_string(sigma.order()));
  require(t >= 0.0 && t <= 1.0, "evaluate: t outside [0,1]");
  const auto& ts = sigma.times();
  auto it = std::upper_bound(ts.begin(), ts.end(), t);
  std::size_t k = static_cast<std::size_t>(it - ts.begin()) - 1;
  if (ts[k] == t || k + 1 == ts.size()) return T[k];
  const double w = (t - ts[k]) / (ts[k + 1] - ts[k]);
  Point p(T.dim());
  for (std::size_t j = 0; j < p.size(); ++j) p[j] = (1.0 - w) * T[k][j] + w * T[k + 1][j];
  return p;
}

/// T with its last point removed.
inline PLT drop_last(const PLT& T) {
  require(T.size() >= 3, "drop_last: a PLT of length 2 would become a singleton");
  std::vector<Point> pts(T.points().begin(), T.points().end() - 1);
  return PLT(std::move(pts));
}

/// Greedy subsequence test with exact point equality.
inline bool is_subsequence(std::span<const Point> a, std::span<const Point> b) {
  std::size_t i = 0;
  for (std::size_t j = 0; j < b.size() && i < a.size(); ++j)
    if (a[i] == b[j]) ++i;
  return i == a.size();
}

inline bool is_sub_plt(const PLT& a, const PLT& b) {
  return is_subsequence(a.points(), b.points());
}

/// sup_t |A_t - B_t| for two piecewise linear paths, evaluated on the union of
/// their breakpoints (exact, since |A - B| is convex between breakpoints).
inline double sup_distance(const SamplePath& A, const SamplePath& B) {
  require(A.dim() == B.dim(), "sup_distance: paths of different dimensions");
  std::vector<double> ts;
  std::merge(A.times().begin(), A.times().end(), B.times().begin(), B.times().end(),
             std::back_inserter(ts));
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  double m = 0.0;
  std::size_t ia = 0, ib = 0;
  Point pa(A.dim()), pb(B.dim());
  auto interp = [](const SamplePath& P, std::size_t& i, double t, Point& out) {
    while (i + 2 < P.size() && P.time(i + 1) <= t) ++i;
    const double w = std::clamp((t - P.time(i)) / (P.time(i + 1) - P.time(i)), 0.0, 1.0);
    for (std::size_t j = 0; j < out.size(); ++j)
      out[j] = (1.0 - w) * P.coord(i, j) + w * P.coord(i + 1, j);
  };
  for (double t : ts) {
    interp(A, ia, t, pa);
    interp(B, ib, t, pb);
    m = std::max(m, distance(pa, pb));
  }
  return m;
}

inline double sup_distance(const PLT& T, const Parametrization& sigma, const SamplePath& gamma) {
  return sup_distance(SamplePath(sigma.times(), T.points()), gamma);
}

/// Vertices of T with every segment split into pieces of length <= delta.
inline std::vector<Point> subdivide(const PLT& T, double delta) {
  require(delta > 0.0, "subdivide: mesh must be positive");
  std::vector<Point> out{T[0]};
  for (std::size_t k = 0; k + 1 < T.size(); ++k) {
    const double len = distance(T[k], T[k + 1]);
    const auto pieces = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(len / delta)));
    for (std::size_t p = 1; p <= pieces; ++p) {
      const double w = static_cast<double>(p) / static_cast<double>(pieces);
      Point x(T.dim());
      for (std::size_t j = 0; j < x.size(); ++j) x[j] = (1.0 - w) * T[k][j] + w * T[k + 1][j];
      if (p == pieces) x = T[k + 1];
      out.push_back(std::move(x));
    }
  }
  return out;
}

/// Largest distance between consecutive samples.
inline double max_step(const SamplePath& g) {
  double m = 0.0;
  for (std::size_t i = 0; i + 1 < g.size(); ++i) m = std::max(m, distance(g.point(i), g.point(i + 1)));
  return m;
}

namespace detail {

/// Discrete Frechet DP restricted to cells with squared distance <= cap.
/// Returns the squared distance, or +inf when no coupling stays under cap.
/// Exact whenever the true value is <= cap.
inline double capped_frechet_sq(const std::vector<Point>& P, const SamplePath& gamma, double cap) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const std::size_t n = P.size(), m = gamma.size();
  const std::size_t N = gamma.dim();
  auto dist = [&](std::size_t i, std::size_t j) {
    double s = 0;
    auto q = gamma.point(j);
    for (std::size_t k = 0; k < N; ++k) s += (P[i][k] - q[k]) * (P[i][k] - q[k]);
    return s;
  };
  struct Cell {
    std::size_t i;
    double v;
  };
  std::vector<Cell> prev, cur;
  // row 0: left moves only
  for (std::size_t i = 0; i < n; ++i) {
    const double dd = dist(i, 0);
    if (dd > cap) break;
    cur.push_back({i, std::max(dd, i ? cur.back().v : 0.0)});
  }
  for (std::size_t j = 1; j < m; ++j) {
    std::swap(prev, cur);
    cur.clear();
    if (prev.empty()) return inf;
    std::size_t q = 0;  // first prev cell with index >= i - 1
    std::size_t i = prev.front().i;
    for (;;) {
      while (q < prev.size() && prev[q].i + 1 < i) ++q;
      double up = inf, diag = inf;
      bool prev_has_i = false;
      for (std::size_t r = q; r < prev.size() && prev[r].i <= i; ++r) {
        if (prev[r].i == i) {
          up = prev[r].v;
          prev_has_i = true;
        } else {
          diag = prev[r].v;
        }
      }
      const double left = !cur.empty() && cur.back().i + 1 == i ? cur.back().v : inf;
      const double best = std::min({up, diag, left});
      bool filled = false;
      if (best < inf) {
        const double dd = dist(i, j);
        if (dd <= cap) {
          cur.push_back({i, std::max(best, dd)});
          filled = true;
        }
      }
      std::size_t next;
      if ((filled || prev_has_i) && i + 1 < n) {
        next = i + 1;
      } else {
        std::size_t r = q;
        while (r < prev.size() && prev[r].i <= i) ++r;
        if (r == prev.size()) break;
        next = prev[r].i;
      }
      i = next;
    }
  }
  return !cur.empty() && cur.back().i == n - 1 ? cur.back().v : inf;
}

}  // namespace detail

/// Discrete Frechet distance (endpoint pinned, monotone) between the samples of
/// gamma and T subdivided to mesh delta. Over-estimates the infimum over
/// parametrizations by at most about delta plus the sample mesh of gamma.
/// delta <= 0 picks the largest sample step of gamma.
inline double trajectory_distance(const PLT& T, const SamplePath& gamma, double delta = 0.0) {
  require(T.dim() == gamma.dim(), "trajectory_distance: dimension mismatch");
  if (!(delta > 0.0)) delta = max_step(gamma);
  if (!(delta > 0.0)) delta = 1.0;
  const auto P = subdivide(T, delta);
  const auto sq = [](std::span<const double> a, std::span<const double> b) {
    double s = 0;
    for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return s;
  };
  // largest possible squared distance, via bounding boxes
  const std::size_t N = T.dim();
  Point lo(N, std::numeric_limits<double>::infinity()), hi(N, -std::numeric_limits<double>::infinity());
  auto grow = [&](std::span<const double> x) {
    for (std::size_t k = 0; k < N; ++k) lo[k] = std::min(lo[k], x[k]), hi[k] = std::max(hi[k], x[k]);
  };
  for (const auto& p : P) grow(p);
  for (std::size_t j = 0; j < gamma.size(); ++j) grow(gamma.point(j));
  const double ceiling = sq(lo, hi);

  const double lower = std::max(sq(P.front(), gamma.point(0)), sq(P.back(), gamma.point(gamma.size() - 1)));
  double cap = std::max(lower, delta * delta);
  for (;;) {
    const double v = detail::capped_frechet_sq(P, gamma, cap);
    if (v < std::numeric_limits<double>::infinity()) return std::sqrt(v);
    if (cap >= ceiling) throw Error("trajectory_distance: no coupling found");  // unreachable
    cap = std::min(4.0 * cap, ceiling);
  }
}

// ---------------------------------------------------------------------------
// Squeeze construction

struct SqueezeClauses {
  bool clause1 = false;  // sigma1 embeds in sigma with T1(t|sigma1) = T(t|sigma)
  bool clause2 = false;  // sigma embeds in sigma2 with T(t|sigma) = T2(t|sigma2)
  bool ok() const { return clause1 && clause2; }
};

namespace detail {

/// Every t < 1 of `inner` is a time of `outer` and A(t|inner) = B(t|outer).
inline bool embeds(const PLT& A, const Parametrization& inner, const PLT& B,
                   const Parametrization& outer) {
  const auto& to = outer.times();
  for (std::size_t k = 0; k < inner.order(); ++k) {
    const double t = inner[k];
    if (t >= 1.0) continue;
    if (!std::binary_search(to.begin(), to.end(), t)) return false;
    if (!(evaluate(A, inner, t) == evaluate(B, outer, t))) return false;
  }
  return true;
}

}  // namespace detail

/// Exact check of the two embedding clauses.
inline SqueezeClauses check_squeeze_clauses(const PLT& T1, const Parametrization& s1, const PLT& T,
                                            const Parametrization& s, const PLT& T2,
                                            const Parametrization& s2) {
  return {detail::embeds(T1, s1, T, s), detail::embeds(T, s, T2, s2)};
}

/// Raised when the hypotheses of the squeeze construction fail; `clause`
/// names the failed one.
class SqueezeHypothesisError : public InvalidInput {
 public:
  SqueezeHypothesisError(std::string clause, const std::string& detail)
      : InvalidInput("squeeze hypothesis '" + clause + "' violated: " + detail),
        clause(std::move(clause)) {}
  std::string clause;
};

/// T with its last point repeated.
inline PLT with_repeated_last(std::span<const Point> T) {
  require(!T.empty(), "empty point sequence");
  std::vector<Point> pts(T.begin(), T.end());
  pts.push_back(pts.back());
  return PLT(std::move(pts));
}

/// All points but the last (T^- without promoting a singleton).
inline std::span<const Point> minus(const PLT& T) {
  return std::span<const Point>(T.points()).first(T.size() - 1);
}

/// Parametrization for Tbar = T with its last point repeated, such that the
/// partition points of sigma1 embed in it with T1(t|sigma1) = Tbar(t|sigma),
/// and its partition points embed in sigma2 with Tbar(t|sigma) =
/// T2(t|sigma2). Each point of T is assigned a time of sigma2 carrying the
/// same point, through an order-preserving embedding of T into (T2)^- that
/// passes through the positions of the sigma1 times; the earliest such
/// embedding is used.
inline Parametrization build_squeeze_parametrization(const PLT& T1, const Parametrization& s1,
                                                     std::span<const Point> T, const PLT& T2,
                                                     const Parametrization& s2) {
  using E = SqueezeHypothesisError;
  if (T.empty()) throw E("T nonempty", "T has no points");
  if (T1.size() != s1.order() || T2.size() != s2.order())
    throw E("orders", "PLT lengths must equal parametrization orders");
  if (!(T1[0] == T2[0]) || !(T[0] == T1[0])) throw E("first points", "first points differ");
  if (!(T1[T1.size() - 1] == T1[T1.size() - 2]))
    throw E("last points of T1", "last two points of T1 differ");
  if (!(T2[T2.size() - 1] == T2[T2.size() - 2]))
    throw E("last points of T2", "last two points of T2 differ");
  // anchors: position in sigma2 of each sigma1 time < 1
  std::vector<std::size_t> anchors;
  for (std::size_t k = 0; k < s1.order(); ++k) {
    const double t = s1[k];
    if (t >= 1.0) continue;
    auto it = std::lower_bound(s2.times().begin(), s2.times().end(), t);
    if (it == s2.times().end() || *it != t)
      throw E("sigma1 embeds in sigma2", "time " + std::to_string(t) + " of sigma1 missing in sigma2");
    const auto p = static_cast<std::size_t>(it - s2.times().begin());
    if (!(evaluate(T1, s1, t) == T2[p]))
      throw E("sigma1 embeds in sigma2", "T1 and T2 differ at t=" + std::to_string(t));
    anchors.push_back(p);
  }
  const auto T2m = minus(T2);
  if (!is_subsequence(minus(T1), T)) throw E("(T1)^- < T", "(T1)^- is not a subsequence of T");
  if (!is_subsequence(T, T2m)) throw E("T < (T2)^-", "T is not a subsequence of (T2)^-");

  const std::size_t n = T.size();
  const std::size_t m = T2m.size();
  // prev_anchor[q]: largest anchor < q, or -1
  std::vector<long> prev_anchor(m, -1);
  {
    long last = -1;
    std::size_t a = 0;
    for (std::size_t q = 0; q < m; ++q) {
      prev_anchor[q] = last;
      while (a < anchors.size() && anchors[a] == q) {
        last = static_cast<long>(q);
        ++a;
      }
    }
  }
  const std::size_t last_anchor = anchors.empty() ? 0 : anchors.back();
  // back[k][q]: T[k..] embeds with T[k] at q, covering every later anchor
  std::vector<std::vector<char>> back(n, std::vector<char>(m, 0));
  for (std::size_t q = 0; q < m; ++q) back[n - 1][q] = T[n - 1] == T2m[q] && q >= last_anchor;
  std::vector<long> next_ok(m + 1);
  for (std::size_t k = n - 1; k-- > 0;) {
    next_ok[m] = -1;
    for (std::size_t r = m; r-- > 0;) next_ok[r] = back[k + 1][r] ? static_cast<long>(r) : next_ok[r + 1];
    for (std::size_t q = 0; q < m; ++q) {
      if (!(T[k] == T2m[q])) continue;
      const long r = next_ok[q + 1];
      if (r < 0) continue;
      back[k][q] = prev_anchor[static_cast<std::size_t>(r)] <= static_cast<long>(q);
    }
  }
  if (anchors.empty() || anchors.front() != 0 || !back[0][0])
    throw E("anchored embedding", "no embedding of T into (T2)^- passes through all sigma1 times");
  std::vector<double> times{s2[0]};
  std::size_t q = 0;
  for (std::size_t k = 1; k < n; ++k) {
    std::size_t r = q + 1;
    while (!back[k][r]) ++r;
    q = r;
    times.push_back(s2[q]);
  }
  times.push_back(1.0);
  return Parametrization(std::move(times));
}

inline Parametrization build_squeeze_parametrization(const PLT& T1, const Parametrization& s1,
                                                     const PLT& T, const PLT& T2,
                                                     const Parametrization& s2) {
  return build_squeeze_parametrization(T1, s1, std::span<const Point>(T.points()), T2, s2);
}

}  // namespace sigrecon
