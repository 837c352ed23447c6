#pragma once

#include <array>
#include <concepts>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "core.hpp"
#include "sample_path.hpp"
#include "sigcore.hpp"

namespace sigrecon {

/// t -> integral over [s,t], tabulated at the sample times of the restricted
/// path. values[0] = 0.
struct RunningIntegral {
  std::vector<double> times;
  std::vector<double> values;

  double final() const { return values.back(); }
};

namespace detail {

inline void check_letters(const TensorWord& w, std::size_t N) {
  for (int j : w.letters())
    require(j >= 1 && static_cast<std::size_t>(j) <= N,
            "word letter " + std::to_string(j) + " out of range 1.." + std::to_string(N));
}

}  // namespace detail

/// Iterated Stratonovich integral [j_1..j_n]_{s,t} by the recurrence
/// F_k(i+1) = F_k(i) + (F_{k-1}(i) + F_{k-1}(i+1))/2 * dX^{j_k}.
inline RunningIntegral running_iterated_integral(const SamplePath& path, const TensorWord& word,
                                                 double s = 0.0, double t = 1.0) {
  detail::check_letters(word, path.dim());
  const auto pts = path.restricted_points(s, t);
  RunningIntegral out;
  out.times = path.restricted_times(s, t);
  const std::size_t n = pts.size();
  std::vector<double> prev(n, 1.0);
  std::vector<double> cur(n, 0.0);
  for (int letter : word.letters()) {
    const auto j = static_cast<std::size_t>(letter - 1);
    cur[0] = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i)
      cur[i + 1] = cur[i] + 0.5 * (prev[i] + prev[i + 1]) * (pts[i + 1][j] - pts[i][j]);
    std::swap(prev, cur);
  }
  if (word.empty()) std::fill(prev.begin(), prev.end(), 1.0);
  out.values = std::move(prev);
  return out;
}

inline double strat_iterated_integral(const SamplePath& path, const TensorWord& word,
                                      double s = 0.0, double t = 1.0) {
  return running_iterated_integral(path, word, s, t).final();
}

// ---------------------------------------------------------------------------
// 1-forms

/// psi = sum_i psi_i(x) dx^i, paired with a vector v as sum_i psi_i(x) v_i.
/// support() returns a closed box outside of which psi vanishes, if known.
template <class F>
concept OneFormLike = requires(const F& f, std::span<const double> x) {
  { f.pair(x, x) } -> std::convertible_to<double>;
  { f.support() } -> std::convertible_to<std::optional<AxisBox>>;
};

/// log of a positive constant c with psi / c of moderate size. Forms without
/// an opinion report 0.
template <OneFormLike F>
double form_log_norm(const F& f) {
  if constexpr (requires { f.log_norm(); })
    return f.log_norm();
  else
    return 0.0;
}

/// pair(x, v) * exp(-log_norm()), computed without under/overflow when the
/// form provides it.
template <OneFormLike F>
double form_pair_normalized(const F& f, std::span<const double> x, std::span<const double> v) {
  if constexpr (requires { f.pair_normalized(x, v); })
    return f.pair_normalized(x, v);
  else
    return f.pair(x, v);
}

/// dx^j (1-based).
class CoordinateForm {
 public:
  explicit CoordinateForm(int j) : j_(j) { require(j >= 1, "coordinate form index must be >= 1"); }

  double pair(std::span<const double>, std::span<const double> v) const {
    require(static_cast<std::size_t>(j_) <= v.size(), "coordinate form index exceeds dimension");
    return v[static_cast<std::size_t>(j_ - 1)];
  }
  std::optional<AxisBox> support() const { return std::nullopt; }

 private:
  int j_;
};

/// Type-erased 1-form.
class AnyForm {
 public:
  template <OneFormLike F>
    requires(!std::same_as<std::decay_t<F>, AnyForm>)
  AnyForm(F f) : impl_(std::make_shared<Model<F>>(std::move(f))) {}

  double pair(std::span<const double> x, std::span<const double> v) const {
    return impl_->pair(x, v);
  }
  double pair_normalized(std::span<const double> x, std::span<const double> v) const {
    return impl_->pair_normalized(x, v);
  }
  double log_norm() const { return impl_->log_norm(); }
  std::optional<AxisBox> support() const { return impl_->support(); }

 private:
  struct Concept {
    virtual ~Concept() = default;
    virtual double pair(std::span<const double>, std::span<const double>) const = 0;
    virtual double pair_normalized(std::span<const double>, std::span<const double>) const = 0;
    virtual double log_norm() const = 0;
    virtual std::optional<AxisBox> support() const = 0;
  };
  template <class F>
  struct Model final : Concept {
    explicit Model(F f) : f(std::move(f)) {}
    double pair(std::span<const double> x, std::span<const double> v) const override {
      return f.pair(x, v);
    }
    double pair_normalized(std::span<const double> x, std::span<const double> v) const override {
      return form_pair_normalized(f, x, v);
    }
    double log_norm() const override { return form_log_norm(f); }
    std::optional<AxisBox> support() const override { return f.support(); }
    F f;
  };
  std::shared_ptr<const Concept> impl_;
};

// ---------------------------------------------------------------------------
// Dense (sample-based) integrals

namespace detail {

template <OneFormLike F>
std::vector<double> form_increments(const std::vector<Point>& pts, const F& form) {
  const std::size_t n = pts.size();
  const std::size_t N = pts.front().size();
  std::vector<double> at_left(n ? n - 1 : 0), at_right(n ? n - 1 : 0);
  Point v(N);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = 0; j < N; ++j) v[j] = pts[i + 1][j] - pts[i][j];
    at_left[i] = form.pair(pts[i], v);
    at_right[i] = form.pair(pts[i + 1], v);
  }
  std::vector<double> out;
  out.reserve(2 * at_left.size());
  for (std::size_t i = 0; i < at_left.size(); ++i) {
    out.push_back(at_left[i]);
    out.push_back(at_right[i]);
  }
  return out;
}

}  // namespace detail

/// Line integral of a form along the sampled path over [s,t]:
/// each step contributes (psi(X_i) + psi(X_{i+1}))/2 . dX_i.
template <OneFormLike F>
RunningIntegral strat_line_integral(const SamplePath& path, const F& form, double s = 0.0,
                                    double t = 1.0) {
  const auto pts = path.restricted_points(s, t);
  RunningIntegral out;
  out.times = path.restricted_times(s, t);
  out.values.assign(pts.size(), 0.0);
  const auto inc = detail::form_increments(pts, form);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    out.values[i + 1] = out.values[i] + 0.5 * (inc[2 * i] + inc[2 * i + 1]);
  return out;
}

/// Nested integral [psi^1, ..., psi^k]_{s,t}; the integrand F_{k-1} psi^k is
/// averaged over the two ends of each step.
template <OneFormLike F>
RunningIntegral running_extended_signature(const SamplePath& path, std::span<const F> forms,
                                           double s = 0.0, double t = 1.0) {
  require(!forms.empty(), "extended signature needs a nonempty form sequence");
  const auto pts = path.restricted_points(s, t);
  const std::size_t n = pts.size();
  std::vector<double> prev(n, 1.0), cur(n, 0.0);
  for (const auto& form : forms) {
    const auto inc = detail::form_increments(pts, form);
    cur[0] = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i)
      cur[i + 1] = cur[i] + 0.5 * (prev[i] * inc[2 * i] + prev[i + 1] * inc[2 * i + 1]);
    std::swap(prev, cur);
  }
  return {path.restricted_times(s, t), std::move(prev)};
}

template <OneFormLike F>
double extended_signature(const SamplePath& path, std::span<const F> forms, double s = 0.0,
                          double t = 1.0) {
  return running_extended_signature(path, forms, s, t).final();
}

template <OneFormLike F>
double extended_signature(const SamplePath& path, const std::vector<F>& forms, double s = 0.0,
                          double t = 1.0) {
  return extended_signature(path, std::span<const F>(forms), s, t);
}

// ---------------------------------------------------------------------------
// Support-clipped integrals
//
// For forms with a bounded support the integral along the piecewise linear
// interpolant is computed chord by chord: each segment is clipped to the
// closed support box and the clipped chord is integrated with 4-point
// Gauss-Legendre. A segment's contribution is keyed by the time of its clipped
// chord midpoint, so two forms with disjoint supports never see each other's
// contributions within the same step in the wrong order.

/// Per-block bounding boxes of the segments of a path.
class PathIndex {
 public:
  static constexpr std::size_t kBlock = 64;

  explicit PathIndex(const SamplePath& path) : path_(&path) {
    const std::size_t segs = path.size() - 1;
    const std::size_t N = path.dim();
    for (std::size_t b = 0; b < segs; b += kBlock) {
      AxisBox box{Point(path.point(b).begin(), path.point(b).end()),
                  Point(path.point(b).begin(), path.point(b).end())};
      const std::size_t end = std::min(segs, b + kBlock);
      for (std::size_t i = b + 1; i <= end; ++i)
        for (std::size_t j = 0; j < N; ++j) {
          box.lo[j] = std::min(box.lo[j], path.coord(i, j));
          box.hi[j] = std::max(box.hi[j], path.coord(i, j));
        }
      blocks_.push_back(std::move(box));
    }
  }

  const SamplePath& path() const { return *path_; }

  /// Calls fn(i) for every segment index i whose block box meets `box`.
  template <class Fn>
  void for_candidate_segments(const AxisBox& box, Fn&& fn) const {
    const std::size_t segs = path_->size() - 1;
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      const auto& bb = blocks_[b];
      bool meets = true;
      for (std::size_t j = 0; j < bb.dim(); ++j)
        if (bb.hi[j] < box.lo[j] || bb.lo[j] > box.hi[j]) {
          meets = false;
          break;
        }
      if (!meets) continue;
      const std::size_t end = std::min(segs, (b + 1) * kBlock);
      for (std::size_t i = b * kBlock; i < end; ++i) fn(i);
    }
  }

 private:
  const SamplePath* path_;
  std::vector<AxisBox> blocks_;
};

/// Chord contributions of one form: key = segment index + midpoint parameter
/// of the clipped chord, value = normalized integral over that chord. The
/// actual integral is value * exp(log_norm).
struct ChordKeys {
  std::vector<double> key;
  std::vector<double> value;
  double log_norm = 0.0;

  bool empty() const { return key.empty(); }
};

template <OneFormLike F>
ChordKeys chord_keys(const PathIndex& index, const F& form) {
  static constexpr std::array<double, 4> kNode{-0.8611363115940526, -0.3399810435848563,
                                               0.3399810435848563, 0.8611363115940526};
  static constexpr std::array<double, 4> kWeight{0.3478548451374538, 0.6521451548625461,
                                                 0.6521451548625461, 0.3478548451374538};
  const auto supp = form.support();
  require(supp.has_value(), "support-clipped integration needs a form with bounded support");
  const SamplePath& path = index.path();
  const std::size_t N = path.dim();
  ChordKeys out;
  out.log_norm = form_log_norm(form);
  Point v(N), x(N);
  index.for_candidate_segments(*supp, [&](std::size_t i) {
    auto a = path.point(i);
    auto b = path.point(i + 1);
    double s0, s1;
    if (!supp->clip_segment(a, b, s0, s1) || !(s1 > s0)) return;
    for (std::size_t j = 0; j < N; ++j) v[j] = b[j] - a[j];
    const double half = 0.5 * (s1 - s0);
    const double mid = 0.5 * (s0 + s1);
    double acc = 0.0;
    for (std::size_t q = 0; q < kNode.size(); ++q) {
      const double s = mid + half * kNode[q];
      for (std::size_t j = 0; j < N; ++j) x[j] = a[j] + s * v[j];
      acc += kWeight[q] * form_pair_normalized(form, x, v);
    }
    acc *= half;
    if (acc == 0.0) return;
    out.key.push_back(static_cast<double>(i) + mid);
    out.value.push_back(acc);
  });
  return out;
}

/// Sparse running integral: value_after[i] is the (scaled) integral up to and
/// including key[i]; the integral is 0 before the first key. Actual values are
/// value_after * exp(log_scale).
struct SparseSeries {
  std::vector<double> key;
  std::vector<double> value_after;
  std::vector<double> increment;
  double log_scale = 0.0;

  bool empty() const { return key.empty(); }
  double final_scaled() const { return key.empty() ? 0.0 : value_after.back(); }

  /// Scaled value at a key time not shared with this series' own keys.
  double scaled_before(double k) const {
    auto it = std::lower_bound(key.begin(), key.end(), k);
    if (it == key.begin()) return 0.0;
    return value_after[static_cast<std::size_t>(it - key.begin()) - 1];
  }

  double max_abs_scaled() const {
    double m = 0;
    for (double x : value_after) m = std::max(m, std::abs(x));
    return m;
  }

  /// log of |integral over [0,1]|; -inf when it is exactly zero.
  double log_abs_final() const {
    const double f = final_scaled();
    return f == 0.0 ? -std::numeric_limits<double>::infinity() : std::log(std::abs(f)) + log_scale;
  }

  /// Median of the nonzero |increments| (scaled).
  double median_increment() const {
    std::vector<double> a;
    for (double x : increment)
      if (x != 0.0) a.push_back(std::abs(x));
    if (a.empty()) return 0.0;
    auto mid = a.begin() + static_cast<std::ptrdiff_t>(a.size() / 2);
    std::nth_element(a.begin(), mid, a.end());
    return *mid;
  }

  void normalize() {
    const double m = max_abs_scaled();
    if (m == 0.0 || !std::isfinite(m)) return;
    for (double& x : value_after) x /= m;
    for (double& x : increment) x /= m;
    log_scale += std::log(m);
  }
};

/// Series of a single form: [psi]_{0,t}.
inline SparseSeries first_series(const ChordKeys& keys) {
  SparseSeries s;
  s.key = keys.key;
  s.increment = keys.value;
  s.value_after.resize(keys.value.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < keys.value.size(); ++i) s.value_after[i] = acc += keys.value[i];
  s.log_scale = keys.log_norm;
  s.normalize();
  return s;
}

/// Series of [..., psi]_{0,t} given the series of the prefix and the chord
/// keys of psi. The inner series is read at each key of psi; supports of
/// consecutive forms are assumed disjoint so keys never coincide.
inline SparseSeries extend_series(const SparseSeries& inner, const ChordKeys& keys) {
  SparseSeries s;
  s.log_scale = inner.log_scale + keys.log_norm;
  if (inner.empty()) return s;
  const double onset = inner.key.front();
  auto start = std::upper_bound(keys.key.begin(), keys.key.end(), onset);
  double acc = 0.0;
  std::size_t p = 0;
  for (auto it = start; it != keys.key.end(); ++it) {
    const auto i = static_cast<std::size_t>(it - keys.key.begin());
    while (p < inner.key.size() && inner.key[p] < *it) ++p;
    const double f = p == 0 ? 0.0 : inner.value_after[p - 1];
    const double inc = f * keys.value[i];
    if (inc == 0.0) continue;
    acc += inc;
    s.key.push_back(*it);
    s.increment.push_back(inc);
    s.value_after.push_back(acc);
  }
  s.normalize();
  return s;
}

/// Support-clipped extended signature [psi^1..psi^k]_{0,1} as (scaled value,
/// log scale).
template <OneFormLike F>
SparseSeries clipped_extended_series(const PathIndex& index, std::span<const F> forms) {
  require(!forms.empty(), "extended signature needs a nonempty form sequence");
  SparseSeries s = first_series(chord_keys(index, forms[0]));
  for (std::size_t k = 1; k < forms.size(); ++k) s = extend_series(s, chord_keys(index, forms[k]));
  return s;
}

template <OneFormLike F>
double clipped_extended_signature(const SamplePath& path, const std::vector<F>& forms) {
  PathIndex index(path);
  const auto s = clipped_extended_series(index, std::span<const F>(forms));
  return s.final_scaled() * std::exp(s.log_scale);
}

}  // namespace sigrecon
