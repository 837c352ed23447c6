#pragma once

#include <string>
#include <vector>

#include "core.hpp"

namespace sigrecon {

/// Piecewise linear trajectory: an ordered point sequence with no time
/// attached. A single point x is stored as (x, x).
class PLT {
 public:
  PLT() = default;

  explicit PLT(std::vector<Point> points) : points_(std::move(points)) {
    require(!points_.empty(), "PLT needs at least one point");
    const std::size_t n = points_.front().size();
    for (const auto& p : points_) {
      require(p.size() == n, "PLT points have inconsistent dimensions");
      for (double c : p) require(std::isfinite(c), "PLT point has a non-finite coordinate");
    }
    if (points_.size() == 1) points_.push_back(points_.front());
  }

  std::size_t size() const { return points_.size(); }
  std::size_t dim() const { return points_.empty() ? 0 : points_.front().size(); }
  const Point& operator[](std::size_t i) const { return points_[i]; }
  const std::vector<Point>& points() const { return points_; }

  bool operator==(const PLT&) const = default;

 private:
  std::vector<Point> points_;
};

/// Partition 0 = t_1 < ... < t_n = 1 of the unit interval.
class Parametrization {
 public:
  Parametrization() = default;

  explicit Parametrization(std::vector<double> times) : times_(std::move(times)) {
    require(times_.size() >= 2, "parametrization needs at least two times");
    require(times_.front() == 0.0 && times_.back() == 1.0,
            "parametrization must start at 0 and end at 1");
    for (std::size_t i = 1; i < times_.size(); ++i)
      require(times_[i] > times_[i - 1], "parametrization times must be strictly increasing");
  }

  std::size_t order() const { return times_.size(); }
  double operator[](std::size_t i) const { return times_[i]; }
  const std::vector<double>& times() const { return times_; }

  bool operator==(const Parametrization&) const = default;

 private:
  std::vector<double> times_;
};

}  // namespace sigrecon
