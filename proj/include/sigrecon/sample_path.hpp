#pragma once

#include <span>
#include <string>
#include <vector>

#include "core.hpp"
#include "trajectory.hpp"

namespace sigrecon {

/// Samples of a path on [0,1]: times[0] = 0 < ... < times[n-1] = 1, with the
/// coordinates of all points stored row-major.
class SamplePath {
 public:
  SamplePath() = default;

  SamplePath(std::vector<double> times, std::vector<double> coords, std::size_t dim)
      : times_(std::move(times)), coords_(std::move(coords)), dim_(dim) {
    require(dim_ >= 1, "sample path dimension must be positive");
    require(times_.size() >= 2, "sample path needs at least two samples");
    require(coords_.size() == times_.size() * dim_,
            "sample path coordinate count does not match times x dimension");
    require(times_.front() == 0.0 && times_.back() == 1.0,
            "sample path times must start at 0 and end at 1");
    for (std::size_t i = 1; i < times_.size(); ++i)
      require(times_[i] > times_[i - 1], "sample path times must be strictly increasing");
    for (double c : coords_) require(std::isfinite(c), "sample path has a non-finite coordinate");
  }

  SamplePath(std::vector<double> times, const std::vector<Point>& points)
      : SamplePath(std::move(times), flatten(points), points.empty() ? 0 : points[0].size()) {}

  std::size_t size() const { return times_.size(); }
  std::size_t dim() const { return dim_; }
  double time(std::size_t i) const { return times_[i]; }
  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& coords() const { return coords_; }

  std::span<const double> point(std::size_t i) const {
    return {coords_.data() + i * dim_, dim_};
  }
  double coord(std::size_t i, std::size_t j) const { return coords_[i * dim_ + j]; }

  /// Index i with times[i] <= t < times[i+1] (the last segment for t = 1).
  std::size_t segment_at(double t) const {
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    std::size_t i = it == times_.begin() ? 0 : static_cast<std::size_t>(it - times_.begin()) - 1;
    return std::min(i, times_.size() - 2);
  }

  /// Linear interpolation of the samples.
  Point at(double t) const {
    require(t >= 0.0 && t <= 1.0, "time outside [0,1]");
    const std::size_t i = segment_at(t);
    const double h = times_[i + 1] - times_[i];
    const double w = std::clamp((t - times_[i]) / h, 0.0, 1.0);
    Point p(dim_);
    for (std::size_t j = 0; j < dim_; ++j)
      p[j] = (1.0 - w) * coord(i, j) + w * coord(i + 1, j);
    return p;
  }

  /// Points of the restriction to [s,t]: interpolated endpoints plus the
  /// samples strictly in between.
  std::vector<Point> restricted_points(double s, double t) const {
    require(0.0 <= s && s <= t && t <= 1.0, "integration range must satisfy 0 <= s <= t <= 1");
    std::vector<Point> pts;
    pts.push_back(at(s));
    auto first = std::upper_bound(times_.begin(), times_.end(), s);
    for (auto it = first; it != times_.end() && *it < t; ++it) {
      auto p = point(static_cast<std::size_t>(it - times_.begin()));
      pts.emplace_back(p.begin(), p.end());
    }
    if (t > s) pts.push_back(at(t));
    return pts;
  }

  std::vector<double> restricted_times(double s, double t) const {
    std::vector<double> ts{s};
    auto first = std::upper_bound(times_.begin(), times_.end(), s);
    for (auto it = first; it != times_.end() && *it < t; ++it) ts.push_back(*it);
    if (t > s) ts.push_back(t);
    return ts;
  }

  PLT as_plt() const {
    std::vector<Point> pts;
    pts.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) pts.emplace_back(point(i).begin(), point(i).end());
    return PLT(std::move(pts));
  }

  bool operator==(const SamplePath&) const = default;

 private:
  static std::vector<double> flatten(const std::vector<Point>& points) {
    std::vector<double> out;
    for (const auto& p : points) out.insert(out.end(), p.begin(), p.end());
    return out;
  }

  std::vector<double> times_;
  std::vector<double> coords_;
  std::size_t dim_ = 0;
};

/// Uniform grid t_i = i/steps.
inline std::vector<double> uniform_times(std::size_t steps) {
  require(steps >= 1, "need at least one step");
  std::vector<double> t(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i)
    t[i] = static_cast<double>(i) / static_cast<double>(steps);
  t.back() = 1.0;
  return t;
}

/// Path T(t|sigma) sampled with `per_segment` uniform steps on each segment.
inline SamplePath sample_plt(const PLT& T, const Parametrization& sigma, std::size_t per_segment) {
  require(T.size() == sigma.order(), "PLT and parametrization have different lengths");
  require(per_segment >= 1, "need at least one sample per segment");
  std::vector<double> times;
  std::vector<double> coords;
  const std::size_t N = T.dim();
  for (std::size_t k = 0; k + 1 < T.size(); ++k) {
    for (std::size_t i = 0; i < per_segment; ++i) {
      const double w = static_cast<double>(i) / static_cast<double>(per_segment);
      times.push_back(sigma[k] + w * (sigma[k + 1] - sigma[k]));
      for (std::size_t j = 0; j < N; ++j) coords.push_back((1 - w) * T[k][j] + w * T[k + 1][j]);
    }
  }
  times.push_back(1.0);
  for (std::size_t j = 0; j < N; ++j) coords.push_back(T[T.size() - 1][j]);
  return SamplePath(std::move(times), std::move(coords), N);
}

/// Uniform-time parametrization of a PLT.
inline Parametrization uniform_parametrization(std::size_t n) {
  return Parametrization(uniform_times(n - 1));
}

}  // namespace sigrecon
