#pragma once

#include <cctype>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "core.hpp"

namespace sigrecon {

/// Sparse multivariate polynomial in x1..xn. Terms are kept sorted by
/// exponent vector with no zero coefficients.
class Polynomial {
 public:
  using Exponents = std::vector<int>;

  struct Term {
    Exponents exps;
    double coef;
    bool operator==(const Term&) const = default;
  };

  Polynomial() = default;
  explicit Polynomial(std::size_t nvars) : nvars_(nvars) {}

  static Polynomial constant(std::size_t nvars, double c) {
    Polynomial p(nvars);
    if (c != 0.0) p.terms_.push_back({Exponents(nvars, 0), c});
    return p;
  }

  /// The coordinate x_j (0-based j).
  static Polynomial variable(std::size_t nvars, std::size_t j) {
    require(j < nvars, "variable index out of range");
    Polynomial p(nvars);
    Exponents e(nvars, 0);
    e[j] = 1;
    p.terms_.push_back({e, 1.0});
    return p;
  }

  std::size_t nvars() const { return nvars_; }
  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  int degree() const {
    int d = 0;
    for (const auto& t : terms_) {
      int s = 0;
      for (int e : t.exps) s += e;
      d = std::max(d, s);
    }
    return d;
  }

  /// Same polynomial viewed in n >= nvars() variables.
  Polynomial with_vars(std::size_t n) const {
    require(n >= nvars_, "cannot drop variables");
    Polynomial p(n);
    for (const auto& t : terms_) {
      Exponents e = t.exps;
      e.resize(n, 0);
      p.terms_.push_back({std::move(e), t.coef});
    }
    return p;
  }

  double eval(std::span<const double> x) const {
    double s = 0.0;
    for (const auto& t : terms_) {
      double m = t.coef;
      for (std::size_t j = 0; j < nvars_; ++j)
        for (int k = 0; k < t.exps[j]; ++k) m *= x[j];
      s += m;
    }
    return s;
  }

  Polynomial derivative(std::size_t j) const {
    require(j < nvars_, "derivative variable out of range");
    Polynomial p(nvars_);
    for (const auto& t : terms_) {
      if (t.exps[j] == 0) continue;
      Exponents e = t.exps;
      const double c = t.coef * e[j];
      e[j] -= 1;
      p.terms_.push_back({std::move(e), c});
    }
    return p;
  }

  Polynomial operator-() const {
    Polynomial p = *this;
    for (auto& t : p.terms_) t.coef = -t.coef;
    return p;
  }

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    check_same(a, b);
    Polynomial p(a.nvars_);
    std::size_t i = 0, j = 0;
    while (i < a.terms_.size() || j < b.terms_.size()) {
      if (j == b.terms_.size() || (i < a.terms_.size() && a.terms_[i].exps < b.terms_[j].exps)) {
        p.terms_.push_back(a.terms_[i++]);
      } else if (i == a.terms_.size() || b.terms_[j].exps < a.terms_[i].exps) {
        p.terms_.push_back(b.terms_[j++]);
      } else {
        const double c = a.terms_[i].coef + b.terms_[j].coef;
        if (c != 0.0) p.terms_.push_back({a.terms_[i].exps, c});
        ++i;
        ++j;
      }
    }
    return p;
  }

  friend Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + (-b); }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    check_same(a, b);
    std::map<Exponents, double> acc;
    for (const auto& s : a.terms_)
      for (const auto& t : b.terms_) {
        Exponents e(a.nvars_);
        for (std::size_t k = 0; k < e.size(); ++k) e[k] = s.exps[k] + t.exps[k];
        acc[e] += s.coef * t.coef;
      }
    Polynomial p(a.nvars_);
    for (auto& [e, c] : acc)
      if (c != 0.0) p.terms_.push_back({e, c});
    return p;
  }

  friend Polynomial operator*(double c, const Polynomial& a) {
    if (c == 0.0) return Polynomial(a.nvars_);
    Polynomial p = a;
    for (auto& t : p.terms_) t.coef *= c;
    return p;
  }

  bool operator==(const Polynomial&) const = default;

  std::string to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    os.precision(17);
    bool first = true;
    for (const auto& t : terms_) {
      double c = t.coef;
      if (!first) {
        os << (c < 0 ? " - " : " + ");
        c = std::abs(c);
      }
      first = false;
      bool has_var = false;
      for (int e : t.exps) has_var |= e > 0;
      if (!has_var || c != 1.0) {
        if (c == -1.0 && has_var)
          os << "-";
        else
          os << c;
      }
      bool need_star = !has_var ? false : (c != 1.0 && c != -1.0);
      for (std::size_t j = 0; j < t.exps.size(); ++j) {
        if (t.exps[j] == 0) continue;
        if (need_star) os << "*";
        os << "x" << (j + 1);
        if (t.exps[j] > 1) os << "^" << t.exps[j];
        need_star = true;
      }
    }
    return os.str();
  }

  /// Parses sums/products/powers of decimal numbers and x1..xn, with
  /// parentheses and unary minus.
  static Polynomial parse(std::string_view text, std::size_t nvars);

 private:
  static void check_same(const Polynomial& a, const Polynomial& b) {
    require(a.nvars_ == b.nvars_, "polynomials over different variable counts");
  }

  std::size_t nvars_ = 0;
  std::vector<Term> terms_;
};

namespace detail {

class PolyParser {
 public:
  PolyParser(std::string_view s, std::size_t n) : s_(s), n_(n) {}

  Polynomial run() {
    Polynomial p = sum();
    skip();
    if (pos_ != s_.size()) fail("unexpected character '" + std::string(1, s_[pos_]) + "'");
    return p;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw InvalidInput("polynomial '" + std::string(s_) + "': " + what + " at offset " +
                       std::to_string(pos_));
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Polynomial sum() {
    Polynomial p = product();
    for (;;) {
      if (eat('+'))
        p = p + product();
      else if (eat('-'))
        p = p - product();
      else
        return p;
    }
  }
  Polynomial product() {
    Polynomial p = unary();
    while (eat('*')) p = p * unary();
    return p;
  }
  Polynomial unary() {
    if (eat('-')) return -unary();
    if (eat('+')) return unary();
    return power();
  }
  Polynomial power() {
    Polynomial base = atom();
    if (eat('^')) {
      skip();
      std::size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (start == pos_) fail("expected a nonnegative integer exponent");
      const int e = std::stoi(std::string(s_.substr(start, pos_ - start)));
      Polynomial r = Polynomial::constant(n_, 1.0);
      for (int k = 0; k < e; ++k) r = r * base;
      return r;
    }
    return base;
  }
  Polynomial atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Polynomial p = sum();
      if (!eat(')')) fail("expected ')'");
      return p;
    }
    if (c == 'x') {
      ++pos_;
      std::size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (start == pos_) fail("expected a variable index after 'x'");
      const auto j = std::stoul(std::string(s_.substr(start, pos_ - start)));
      if (j < 1 || j > n_) fail("variable x" + std::to_string(j) + " outside x1..x" + std::to_string(n_));
      return Polynomial::variable(n_, j - 1);
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.'))
        ++pos_;
      if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
        std::size_t save = pos_++;
        if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
        if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
          while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        } else {
          pos_ = save;
        }
      }
      const std::string num(s_.substr(start, pos_ - start));
      std::size_t used = 0;
      double v = 0;
      try {
        v = std::stod(num, &used);
      } catch (const std::exception&) {
        fail("bad number '" + num + "'");
      }
      if (used != num.size()) fail("bad number '" + num + "'");
      return Polynomial::constant(n_, v);
    }
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  std::string_view s_;
  std::size_t n_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Polynomial Polynomial::parse(std::string_view text, std::size_t nvars) {
  return detail::PolyParser(text, nvars).run();
}

/// p(x) * exp(-|x_{1..k} - xi|^2 / 2), or a plain polynomial when there is no
/// center. The center may cover only the first k <= nvars coordinates.
class PolyGaussFun {
 public:
  PolyGaussFun() = default;
  explicit PolyGaussFun(Polynomial p) : poly_(std::move(p)) {}
  PolyGaussFun(Polynomial p, Point center) : poly_(std::move(p)), center_(std::move(center)) {
    require(center_->size() <= poly_.nvars(), "Gaussian center has too many coordinates");
    if (poly_.is_zero()) center_.reset();
  }

  static PolyGaussFun zero(std::size_t nvars) { return PolyGaussFun(Polynomial(nvars)); }

  const Polynomial& poly() const { return poly_; }
  const std::optional<Point>& center() const { return center_; }
  std::size_t nvars() const { return poly_.nvars(); }
  bool is_zero() const { return poly_.is_zero(); }

  double log_gauss(std::span<const double> x) const {
    if (!center_) return 0.0;
    double s = 0;
    for (std::size_t i = 0; i < center_->size(); ++i) s += (x[i] - (*center_)[i]) * (x[i] - (*center_)[i]);
    return -0.5 * s;
  }

  double eval(std::span<const double> x) const {
    const double p = poly_.eval(x);
    return p == 0.0 ? 0.0 : p * std::exp(log_gauss(x));
  }

  /// Polynomial factor only (the value with the Gaussian divided out).
  double eval_reduced(std::span<const double> x) const { return poly_.eval(x); }

  /// d/dx_j (p G) = (dp/dx_j - (x_j - xi_j) p) G.
  PolyGaussFun derivative(std::size_t j) const {
    Polynomial d = poly_.derivative(j);
    if (center_ && j < center_->size()) {
      const Polynomial shift =
          Polynomial::variable(nvars(), j) - Polynomial::constant(nvars(), (*center_)[j]);
      d = d - shift * poly_;
    }
    return with_same_center(std::move(d));
  }

  PolyGaussFun with_vars(std::size_t n) const {
    PolyGaussFun f(poly_.with_vars(n));
    f.center_ = center_;
    return f;
  }

  friend PolyGaussFun operator+(const PolyGaussFun& a, const PolyGaussFun& b) {
    return combine(a, b, a.poly_ + b.poly_);
  }
  friend PolyGaussFun operator-(const PolyGaussFun& a, const PolyGaussFun& b) {
    return combine(a, b, a.poly_ - b.poly_);
  }
  PolyGaussFun operator-() const { return with_same_center(-poly_); }

  friend PolyGaussFun operator*(const PolyGaussFun& a, const PolyGaussFun& b) {
    if (a.is_zero() || b.is_zero()) return zero(a.nvars());
    require(!(a.center_ && b.center_),
            "product of two Gaussian-weighted functions leaves the function class");
    PolyGaussFun f(a.poly_ * b.poly_);
    f.center_ = a.center_ ? a.center_ : b.center_;
    return f;
  }

  bool operator==(const PolyGaussFun&) const = default;

 private:
  PolyGaussFun with_same_center(Polynomial p) const {
    PolyGaussFun f(std::move(p));
    f.center_ = center_;
    if (f.poly_.is_zero()) f.center_.reset();
    return f;
  }

  static PolyGaussFun combine(const PolyGaussFun& a, const PolyGaussFun& b, Polynomial p) {
    if (a.is_zero()) return b.with_same_center(std::move(p));
    if (b.is_zero()) return a.with_same_center(std::move(p));
    require(a.center_ == b.center_,
            "sum of functions with different Gaussian centers leaves the function class");
    return a.with_same_center(std::move(p));
  }

  Polynomial poly_;
  std::optional<Point> center_;
};

}  // namespace sigrecon
