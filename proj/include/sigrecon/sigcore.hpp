#pragma once

#include <initializer_list>
#include <json.hpp>
#include <string>
#include <vector>

#include "core.hpp"
#include "trajectory.hpp"

namespace sigrecon {

inline constexpr std::size_t kDefaultMaxLevel = 6;

/// Word j_1..j_n over the alphabet {1, ..., d}.
class TensorWord {
 public:
  TensorWord() = default;
  TensorWord(std::initializer_list<int> letters) : letters_(letters) {}
  explicit TensorWord(std::vector<int> letters) : letters_(std::move(letters)) {}

  std::size_t size() const { return letters_.size(); }
  bool empty() const { return letters_.empty(); }
  int operator[](std::size_t i) const { return letters_[i]; }
  const std::vector<int>& letters() const { return letters_; }

  TensorWord prefix(std::size_t n) const {
    return TensorWord(std::vector<int>(letters_.begin(), letters_.begin() + n));
  }

  bool operator==(const TensorWord&) const = default;

 private:
  std::vector<int> letters_;
};

/// Element of the tensor algebra over R^d truncated at level L, stored as one
/// dense array of d^n coefficients per level n.
class TruncatedTensor {
 public:
  TruncatedTensor() = default;

  TruncatedTensor(std::size_t dim, std::size_t level, std::size_t max_level = kDefaultMaxLevel)
      : dim_(dim), level_(level) {
    require(dim >= 1, "tensor dimension must be positive");
    require(level >= 1, "tensor level must be positive");
    require(level <= max_level, "tensor level " + std::to_string(level) +
                                    " exceeds the configured maximum " +
                                    std::to_string(max_level));
    levels_.resize(level + 1);
    std::size_t n = 1;
    for (std::size_t k = 0; k <= level; ++k) {
      levels_[k].assign(n, 0.0);
      n *= dim;
    }
  }

  static TruncatedTensor identity(std::size_t dim, std::size_t level,
                                  std::size_t max_level = kDefaultMaxLevel) {
    TruncatedTensor t(dim, level, max_level);
    t.levels_[0][0] = 1.0;
    return t;
  }

  std::size_t dim() const { return dim_; }
  std::size_t level() const { return level_; }

  std::span<const double> coeffs(std::size_t n) const { return levels_.at(n); }
  std::span<double> coeffs(std::size_t n) { return levels_.at(n); }

  std::size_t index_of(const TensorWord& w) const {
    require(w.size() <= level_, "word longer than the tensor level");
    std::size_t idx = 0;
    for (int letter : w.letters()) {
      require(letter >= 1 && static_cast<std::size_t>(letter) <= dim_,
              "word letter out of range 1..d");
      idx = idx * dim_ + static_cast<std::size_t>(letter - 1);
    }
    return idx;
  }

  double at(const TensorWord& w) const { return levels_[w.size()][index_of(w)]; }
  double& at(const TensorWord& w) { return levels_[w.size()][index_of(w)]; }

  double max_abs() const {
    double m = 0;
    for (const auto& lv : levels_)
      for (double c : lv) m = std::max(m, std::abs(c));
    return m;
  }

  bool operator==(const TruncatedTensor&) const = default;

 private:
  std::size_t dim_ = 0;
  std::size_t level_ = 0;
  std::vector<std::vector<double>> levels_;
};

inline void require_compatible(const TruncatedTensor& a, const TruncatedTensor& b) {
  require(a.dim() == b.dim() && a.level() == b.level(),
          "tensor dimension/level mismatch: (" + std::to_string(a.dim()) + "," +
              std::to_string(a.level()) + ") vs (" + std::to_string(b.dim()) + "," +
              std::to_string(b.level()) + ")");
}

/// Truncated tensor product: level n of the result is sum_{i+j=n} a_i ⊗ b_j.
inline TruncatedTensor tensor_mul(const TruncatedTensor& a, const TruncatedTensor& b) {
  require_compatible(a, b);
  const std::size_t L = a.level();
  TruncatedTensor out(a.dim(), L, L);
  for (std::size_t n = 0; n <= L; ++n) {
    auto dst = out.coeffs(n);
    for (std::size_t i = 0; i <= n; ++i) {
      const auto ai = a.coeffs(i);
      const auto bj = b.coeffs(n - i);
      const std::size_t stride = bj.size();
      for (std::size_t p = 0; p < ai.size(); ++p) {
        const double x = ai[p];
        if (x == 0.0) continue;
        double* row = dst.data() + p * stride;
        for (std::size_t q = 0; q < stride; ++q) row[q] += x * bj[q];
      }
    }
  }
  return out;
}

/// Signature of the straight segment x -> y: level n is (y-x)^{⊗n} / n!.
inline TruncatedTensor segment_signature(std::span<const double> x, std::span<const double> y,
                                         std::size_t level,
                                         std::size_t max_level = kDefaultMaxLevel) {
  require(x.size() == y.size(), "segment endpoints have different dimensions");
  const std::size_t d = x.size();
  TruncatedTensor s = TruncatedTensor::identity(d, level, max_level);
  Point v(d);
  for (std::size_t i = 0; i < d; ++i) v[i] = y[i] - x[i];
  for (std::size_t n = 1; n <= level; ++n) {
    const auto prev = s.coeffs(n - 1);
    auto cur = s.coeffs(n);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t p = 0; p < prev.size(); ++p)
      for (std::size_t j = 0; j < d; ++j) cur[p * d + j] = prev[p] * v[j] * inv_n;
  }
  return s;
}

/// Chen product of the segment signatures of consecutive points of T.
inline TruncatedTensor plt_signature(const PLT& T, std::size_t level,
                                     std::size_t max_level = kDefaultMaxLevel) {
  require(T.size() >= 2, "PLT signature needs at least two points");
  TruncatedTensor acc = segment_signature(T[0], T[1], level, max_level);
  for (std::size_t i = 2; i < T.size(); ++i)
    acc = tensor_mul(acc, segment_signature(T[i - 1], T[i], level, max_level));
  return acc;
}

namespace detail {

inline void shuffles(const std::vector<int>& u, std::size_t i, const std::vector<int>& v,
                     std::size_t j, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (i == u.size() && j == v.size()) {
    out.push_back(cur);
    return;
  }
  if (i < u.size()) {
    cur.push_back(u[i]);
    shuffles(u, i + 1, v, j, cur, out);
    cur.pop_back();
  }
  if (j < v.size()) {
    cur.push_back(v[j]);
    shuffles(u, i, v, j + 1, cur, out);
    cur.pop_back();
  }
}

}  // namespace detail

/// All shuffles of u and v, listed with multiplicity.
inline std::vector<TensorWord> shuffle_product(const TensorWord& u, const TensorWord& v) {
  std::vector<std::vector<int>> raw;
  std::vector<int> cur;
  detail::shuffles(u.letters(), 0, v.letters(), 0, cur, raw);
  std::vector<TensorWord> out;
  out.reserve(raw.size());
  for (auto& w : raw) out.emplace_back(std::move(w));
  return out;
}

/// S^u S^v - sum over shuffles w of (u, v) of S^w. Vanishes on group-like
/// elements.
inline double shuffle_residual(const TruncatedTensor& s, const TensorWord& u,
                               const TensorWord& v) {
  require(u.size() + v.size() <= s.level(),
          "shuffle_residual: |u|+|v| exceeds the tensor level");
  double sum = 0;
  for (const auto& w : shuffle_product(u, v)) sum += s.at(w);
  return s.at(u) * s.at(v) - sum;
}

inline void to_json(nlohmann::json& j, const TruncatedTensor& t) {
  j = nlohmann::json::object();
  j["d"] = t.dim();
  j["L"] = t.level();
  auto levels = nlohmann::json::array();
  for (std::size_t n = 0; n <= t.level(); ++n) {
    auto c = t.coeffs(n);
    levels.push_back(std::vector<double>(c.begin(), c.end()));
  }
  j["levels"] = std::move(levels);
}

inline void from_json(const nlohmann::json& j, TruncatedTensor& t) {
  const auto d = j.at("d").get<std::size_t>();
  const auto L = j.at("L").get<std::size_t>();
  TruncatedTensor out(d, L, std::max(L, kDefaultMaxLevel));
  const auto& levels = j.at("levels");
  require(levels.size() == L + 1, "tensor JSON: expected L+1 levels");
  for (std::size_t n = 0; n <= L; ++n) {
    const auto vals = levels[n].get<std::vector<double>>();
    auto dst = out.coeffs(n);
    require(vals.size() == dst.size(), "tensor JSON: level " + std::to_string(n) +
                                           " has the wrong number of coefficients");
    std::copy(vals.begin(), vals.end(), dst.begin());
  }
  t = std::move(out);
}

}  // namespace sigrecon
