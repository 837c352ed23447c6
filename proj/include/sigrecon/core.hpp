#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sigrecon {

using Point = std::vector<double>;
using Lattice = std::vector<long>;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on caller-supplied data was violated.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidInput(what);
}

/// Closed axis-aligned box [lo, hi] in R^N.
struct AxisBox {
  Point lo;
  Point hi;

  static AxisBox centered(std::span<const double> center, double half_side) {
    AxisBox b;
    b.lo.resize(center.size());
    b.hi.resize(center.size());
    for (std::size_t i = 0; i < center.size(); ++i) {
      b.lo[i] = center[i] - half_side;
      b.hi[i] = center[i] + half_side;
    }
    return b;
  }

  std::size_t dim() const { return lo.size(); }

  bool contains(std::span<const double> x) const {
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (x[i] < lo[i] || x[i] > hi[i]) return false;
    return true;
  }

  bool contains_in_interior(std::span<const double> x) const {
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (x[i] <= lo[i] || x[i] >= hi[i]) return false;
    return true;
  }

  /// True when `other` lies in the open interior of this box.
  bool strictly_contains(const AxisBox& other) const {
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (!(other.lo[i] > lo[i] && other.hi[i] < hi[i])) return false;
    return true;
  }

  Point center() const {
    Point c(lo.size());
    for (std::size_t i = 0; i < lo.size(); ++i) c[i] = 0.5 * (lo[i] + hi[i]);
    return c;
  }

  double diameter() const {
    double s = 0;
    for (std::size_t i = 0; i < lo.size(); ++i) s += (hi[i] - lo[i]) * (hi[i] - lo[i]);
    return std::sqrt(s);
  }

  /// Parameter interval [s_in, s_out] ⊂ [0,1] where a + s(b-a) lies in the
  /// closed box. Returns false when the segment misses the box.
  bool clip_segment(std::span<const double> a, std::span<const double> b, double& s_in,
                    double& s_out) const {
    s_in = 0.0;
    s_out = 1.0;
    for (std::size_t i = 0; i < lo.size(); ++i) {
      const double d = b[i] - a[i];
      if (d == 0.0) {
        if (a[i] < lo[i] || a[i] > hi[i]) return false;
        continue;
      }
      double t0 = (lo[i] - a[i]) / d;
      double t1 = (hi[i] - a[i]) / d;
      if (t0 > t1) std::swap(t0, t1);
      s_in = std::max(s_in, t0);
      s_out = std::min(s_out, t1);
      if (s_in > s_out) return false;
    }
    return true;
  }
};

inline double norm2(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

inline Point scaled(const Lattice& z, double eps) {
  Point p(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) p[i] = eps * static_cast<double>(z[i]);
  return p;
}

inline long sup_distance(const Lattice& a, const Lattice& b) {
  long m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::labs(a[i] - b[i]));
  return m;
}

}  // namespace sigrecon
