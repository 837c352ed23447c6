#pragma once

#include <Eigen/Dense>
#include <json.hpp>
#include <map>
#include <string>
#include <vector>

#include "core.hpp"
#include "polynomial.hpp"

namespace sigrecon {

/// Vector field on R^N with components in the polynomial x Gaussian class.
struct VectorField {
  std::string name;
  std::vector<PolyGaussFun> comps;

  static VectorField zero(std::size_t N, std::string name = "0") {
    return {std::move(name), std::vector<PolyGaussFun>(N, PolyGaussFun::zero(N))};
  }

  static VectorField from_strings(const std::vector<std::string>& comps, std::string name = "") {
    VectorField v{std::move(name), {}};
    for (const auto& c : comps) v.comps.emplace_back(Polynomial::parse(c, comps.size()));
    return v;
  }

  std::size_t dim() const { return comps.size(); }

  bool is_zero() const {
    for (const auto& c : comps)
      if (!c.is_zero()) return false;
    return true;
  }

  Point eval(std::span<const double> x) const {
    Point v(comps.size());
    for (std::size_t i = 0; i < comps.size(); ++i) v[i] = comps[i].eval(x);
    return v;
  }

  /// Values with each component's Gaussian factor divided out.
  Point eval_reduced(std::span<const double> x) const {
    Point v(comps.size());
    for (std::size_t i = 0; i < comps.size(); ++i) v[i] = comps[i].eval_reduced(x);
    return v;
  }

  int degree() const {
    int d = 0;
    for (const auto& c : comps) d = std::max(d, c.poly().degree());
    return d;
  }

  bool operator==(const VectorField& o) const { return comps == o.comps; }
};

/// Drift V0 plus diffusion fields V1..Vd on R^N.
struct FieldFamily {
  std::size_t N = 0;
  VectorField V0;
  std::vector<VectorField> V;

  std::size_t d() const { return V.size(); }

  /// alpha = 0 is the drift.
  const VectorField& field(std::size_t alpha) const {
    require(alpha <= V.size(), "field index out of range");
    return alpha == 0 ? V0 : V[alpha - 1];
  }

  void validate() const {
    require(N >= 1, "field family needs N >= 1");
    require(V0.dim() == N, "drift has the wrong dimension");
    for (const auto& v : V) require(v.dim() == N, "field " + v.name + " has the wrong dimension");
  }
};

inline FieldFamily make_family(std::size_t N, std::vector<VectorField> diffusion,
                               std::optional<VectorField> drift = std::nullopt) {
  FieldFamily f;
  f.N = N;
  f.V0 = drift ? std::move(*drift) : VectorField::zero(N, "V0");
  f.V0.name = "V0";
  f.V = std::move(diffusion);
  for (std::size_t a = 0; a < f.V.size(); ++a)
    if (f.V[a].name.empty()) f.V[a].name = "V" + std::to_string(a + 1);
  f.validate();
  return f;
}

/// {N, d, fields: [{name, components: [...]}]}; the field named "V0" is the
/// drift, the others are V1..Vd in order.
inline FieldFamily family_from_json(const nlohmann::json& j) {
  auto get = [&](const nlohmann::json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key))
      throw InvalidInput("field spec: missing '" + std::string(key) + "' in " + where);
    return obj.at(key);
  };
  const auto Nj = get(j, "N", "top level");
  const auto dj = get(j, "d", "top level");
  if (!Nj.is_number_unsigned() || Nj.get<std::size_t>() == 0)
    throw InvalidInput("field spec: 'N' must be a positive integer");
  if (!dj.is_number_unsigned()) throw InvalidInput("field spec: 'd' must be a nonnegative integer");
  const auto N = Nj.get<std::size_t>();
  const auto d = dj.get<std::size_t>();
  const auto fields = get(j, "fields", "top level");
  if (!fields.is_array()) throw InvalidInput("field spec: 'fields' must be an array");
  std::optional<VectorField> drift;
  std::vector<VectorField> diffusion;
  for (std::size_t k = 0; k < fields.size(); ++k) {
    const std::string where = "fields[" + std::to_string(k) + "]";
    const auto name = get(fields[k], "name", where);
    const auto comps = get(fields[k], "components", where);
    if (!name.is_string()) throw InvalidInput("field spec: " + where + ".name must be a string");
    if (!comps.is_array() || comps.size() != N)
      throw InvalidInput("field spec: " + where + ".components must list N=" +
                         std::to_string(N) + " polynomials");
    VectorField v{name.get<std::string>(), {}};
    for (std::size_t i = 0; i < N; ++i) {
      if (!comps[i].is_string())
        throw InvalidInput("field spec: " + where + ".components[" + std::to_string(i) +
                           "] must be a string");
      try {
        v.comps.emplace_back(Polynomial::parse(comps[i].get<std::string>(), N));
      } catch (const InvalidInput& e) {
        throw InvalidInput("field spec: " + where + ".components[" + std::to_string(i) +
                           "]: " + e.what());
      }
    }
    if (v.name == "V0")
      drift = std::move(v);
    else
      diffusion.push_back(std::move(v));
  }
  if (diffusion.size() != d)
    throw InvalidInput("field spec: 'd' is " + std::to_string(d) + " but " +
                       std::to_string(diffusion.size()) + " diffusion fields were given");
  return make_family(N, std::move(diffusion), std::move(drift));
}

inline nlohmann::json family_to_json(const FieldFamily& f) {
  nlohmann::json j;
  j["N"] = f.N;
  j["d"] = f.d();
  auto arr = nlohmann::json::array();
  auto one = [&](const VectorField& v, const std::string& name) {
    nlohmann::json c = nlohmann::json::array();
    for (const auto& p : v.comps) c.push_back(p.poly().to_string());
    arr.push_back({{"name", name}, {"components", c}});
  };
  if (!f.V0.is_zero()) one(f.V0, "V0");
  for (std::size_t a = 0; a < f.d(); ++a) one(f.V[a], f.V[a].name);
  j["fields"] = arr;
  return j;
}

// ---------------------------------------------------------------------------
// Brackets

/// [V, W] = DW.V - DV.W, computed symbolically.
inline VectorField lie_bracket(const VectorField& V, const VectorField& W) {
  require(V.dim() == W.dim(), "lie_bracket: fields of different dimensions");
  const std::size_t N = V.dim();
  VectorField out = VectorField::zero(N, "[" + V.name + "," + W.name + "]");
  for (std::size_t i = 0; i < N; ++i) {
    PolyGaussFun acc = PolyGaussFun::zero(N);
    for (std::size_t j = 0; j < N; ++j) {
      if (!V.comps[j].is_zero()) acc = acc + W.comps[i].derivative(j) * V.comps[j];
      if (!W.comps[j].is_zero()) acc = acc - V.comps[i].derivative(j) * W.comps[j];
    }
    out.comps[i] = std::move(acc);
  }
  return out;
}

using BracketWord = std::vector<int>;

inline std::string word_name(const BracketWord& w) {
  std::string s = "(";
  for (std::size_t i = 0; i < w.size(); ++i) s += (i ? "," : "") + std::to_string(w[i]);
  return s + ")";
}

/// Memoized right-nested brackets V_[theta] = [V_{t1}, [V_{t2}, ... V_{tn}]].
class BracketTable {
 public:
  explicit BracketTable(const FieldFamily& f) : family_(f) {}
  explicit BracketTable(FieldFamily&&) = delete;  // holds a reference

  const VectorField& get(const BracketWord& w) {
    require(!w.empty(), "bracket word must be nonempty");
    for (int a : w)
      require(a >= 0 && static_cast<std::size_t>(a) <= family_.d(),
              "bracket letter " + std::to_string(a) + " outside 0..d");
    require(w.size() > 1 || w[0] >= 1, "length-one bracket words use letters 1..d");
    auto it = cache_.find(w);
    if (it != cache_.end()) return it->second;
    VectorField v;
    if (w.size() == 1) {
      v = family_.field(static_cast<std::size_t>(w[0]));
    } else {
      const BracketWord tail(w.begin() + 1, w.end());
      const VectorField& inner = tail.size() == 1 ? family_.field(static_cast<std::size_t>(tail[0]))
                                                  : get(tail);
      v = lie_bracket(family_.field(static_cast<std::size_t>(w[0])), inner);
    }
    return cache_.emplace(w, std::move(v)).first->second;
  }

 private:
  const FieldFamily& family_;
  std::map<BracketWord, VectorField> cache_;
};

inline VectorField bracket_from_word(const FieldFamily& f, const BracketWord& w) {
  BracketTable t(f);
  return t.get(w);
}

/// Words of Theta with length <= depth, shortest first: length one uses
/// 1..d, longer words any letters in 0..d.
inline std::vector<BracketWord> bracket_words(std::size_t d, std::size_t depth) {
  std::vector<BracketWord> out;
  for (std::size_t a = 1; a <= d; ++a) out.push_back({static_cast<int>(a)});
  for (std::size_t n = 2; n <= depth; ++n) {
    BracketWord w(n, 0);
    for (;;) {
      out.push_back(w);
      std::size_t k = n;
      while (k > 0 && static_cast<std::size_t>(++w[k - 1]) > d) w[--k] = 0;
      if (k == 0) break;
    }
  }
  return out;
}

struct RankReport {
  std::size_t rank = 0;
  std::vector<BracketWord> certificate;
  double sigma_ratio = 0.0;  // sigma_min / sigma_max of the certificate columns
};

inline constexpr double kRankThreshold = 1e-10;

namespace detail {

inline double sigma_ratio(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0.0;
  return s(s.size() - 1) / s(0);
}

}  // namespace detail

/// Rank of span{V_[theta](x) : |theta| <= depth}. Each coordinate row is
/// evaluated with its Gaussian factor divided out (all entries of one row
/// share a center), then columns are added greedily in word order while the
/// selection stays well conditioned.
inline RankReport hormander_rank(BracketTable& table, std::size_t d, std::size_t N,
                                 std::span<const double> x, std::size_t depth) {
  require(depth >= 1, "hormander_rank: depth must be >= 1");
  RankReport r;
  Eigen::MatrixXd sel(static_cast<Eigen::Index>(N), 0);
  for (const auto& w : bracket_words(d, depth)) {
    if (r.rank == N) break;
    const Point v = table.get(w).eval_reduced(x);
    const double nv = norm2(v);
    if (!(nv > 0.0) || !std::isfinite(nv)) continue;
    Eigen::MatrixXd cand(static_cast<Eigen::Index>(N), sel.cols() + 1);
    cand.leftCols(sel.cols()) = sel;
    for (std::size_t i = 0; i < N; ++i) cand(static_cast<Eigen::Index>(i), sel.cols()) = v[i] / nv;
    const double ratio = detail::sigma_ratio(cand);
    if (ratio > kRankThreshold) {
      sel = std::move(cand);
      r.certificate.push_back(w);
      r.sigma_ratio = ratio;
      ++r.rank;
    }
  }
  return r;
}

inline RankReport hormander_rank(const FieldFamily& f, std::span<const double> x,
                                 std::size_t depth) {
  BracketTable t(f);
  return hormander_rank(t, f.d(), f.N, x, depth);
}

/// Points of a regular grid with `res` points per axis (res = 1 gives the center).
inline std::vector<Point> box_grid_points(const AxisBox& box, std::size_t res) {
  require(res >= 1, "grid resolution must be >= 1");
  const std::size_t N = box.dim();
  std::vector<Point> out;
  std::vector<std::size_t> idx(N, 0);
  for (;;) {
    Point p(N);
    for (std::size_t i = 0; i < N; ++i)
      p[i] = res == 1 ? 0.5 * (box.lo[i] + box.hi[i])
                      : box.lo[i] + (box.hi[i] - box.lo[i]) * static_cast<double>(idx[i]) /
                                        static_cast<double>(res - 1);
    out.push_back(std::move(p));
    std::size_t k = 0;
    while (k < N && ++idx[k] == res) idx[k++] = 0;
    if (k == N) break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Assumption checks

namespace detail {

/// Approximate sup over the box of g, from a grid followed by a shrinking
/// pattern search started at the best grid points.
template <class G>
double box_sup(const AxisBox& box, G&& g, std::size_t res) {
  const auto pts = box_grid_points(box, res);
  std::vector<std::pair<double, std::size_t>> vals;
  vals.reserve(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) vals.emplace_back(g(pts[i]), i);
  const std::size_t keep = std::min<std::size_t>(5, vals.size());
  std::partial_sort(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(keep), vals.end(),
                    [](auto& a, auto& b) { return a.first > b.first; });
  double best = vals.front().first;
  const std::size_t N = box.dim();
  for (std::size_t s = 0; s < keep; ++s) {
    Point x = pts[vals[s].second];
    double fx = vals[s].first;
    Point step(N);
    for (std::size_t i = 0; i < N; ++i)
      step[i] = (box.hi[i] - box.lo[i]) / static_cast<double>(std::max<std::size_t>(res - 1, 1));
    for (int it = 0; it < 60; ++it) {
      bool moved = false;
      for (std::size_t i = 0; i < N; ++i)
        for (double sgn : {1.0, -1.0}) {
          Point y = x;
          y[i] = std::clamp(y[i] + sgn * step[i], box.lo[i], box.hi[i]);
          const double fy = g(y);
          if (fy > fx) {
            x = std::move(y);
            fx = fy;
            moved = true;
          }
        }
      if (!moved)
        for (double& h : step) h *= 0.5;
    }
    best = std::max(best, fx);
  }
  return best;
}

}  // namespace detail

/// sup over the box of the Euclidean norm of a field.
inline double field_sup_norm(const VectorField& v, const AxisBox& box, std::size_t res = 33) {
  if (v.is_zero()) return 0.0;
  if (v.degree() == 0) return norm2(v.eval(box.center()));
  return detail::box_sup(box, [&](const Point& x) { return norm2(v.eval(x)); }, res);
}

struct AssumptionAReport {
  bool bounded_on_box = true;
  std::vector<std::pair<std::string, double>> sup_norms;
  std::vector<std::string> warnings;
};

/// Polynomial fields are smooth; boundedness is checked on the box only.
inline AssumptionAReport check_assumption_A(const FieldFamily& f, const AxisBox& box) {
  AssumptionAReport r;
  for (std::size_t a = 0; a <= f.d(); ++a) {
    const auto& v = f.field(a);
    const double s = field_sup_norm(v, box);
    r.sup_norms.emplace_back(v.name, s);
    if (!std::isfinite(s)) r.bounded_on_box = false;
    if (v.degree() > 0)
      r.warnings.push_back(v.name + " has polynomial degree " + std::to_string(v.degree()) +
                           " and is unbounded outside the box");
  }
  return r;
}

struct AssumptionBReport {
  bool ok = true;
  std::size_t min_rank = 0;
  std::optional<Point> first_failure;
};

inline AssumptionBReport check_assumption_B(const FieldFamily& f, const std::vector<Point>& samples,
                                            std::size_t depth) {
  require(!samples.empty(), "assumption B check needs sample points");
  AssumptionBReport r;
  r.min_rank = f.N;
  BracketTable t(f);
  for (const auto& x : samples) {
    const auto rk = hormander_rank(t, f.d(), f.N, x, depth);
    r.min_rank = std::min(r.min_rank, rk.rank);
    if (rk.rank < f.N && r.ok) {
      r.ok = false;
      r.first_failure = x;
    }
  }
  return r;
}

struct AssumptionCReport {
  bool ok = true;
  std::optional<Point> failing_point;
  std::optional<std::size_t> failing_basis;  // 0-based index into the basis
};

inline constexpr double kPerpendicularThreshold = 1e-12;

/// For every sample x and basis vector e_i some V_alpha(x), alpha >= 1, must
/// have |V_alpha(x) . e_i| > 1e-12. The basis defaults to the standard one.
inline AssumptionCReport check_assumption_C(const FieldFamily& f, const std::vector<Point>& samples,
                                            std::optional<std::vector<Point>> basis = std::nullopt) {
  require(!samples.empty(), "assumption C check needs sample points");
  std::vector<Point> e;
  if (basis) {
    e = *basis;
    for (const auto& b : e) require(b.size() == f.N, "basis vector has the wrong dimension");
  } else {
    for (std::size_t i = 0; i < f.N; ++i) {
      Point b(f.N, 0.0);
      b[i] = 1.0;
      e.push_back(b);
    }
  }
  AssumptionCReport r;
  for (const auto& x : samples) {
    std::vector<Point> vals;
    for (std::size_t a = 1; a <= f.d(); ++a) vals.push_back(f.field(a).eval(x));
    for (std::size_t i = 0; i < e.size(); ++i) {
      bool hit = false;
      for (const auto& v : vals) {
        double dot = 0;
        for (std::size_t k = 0; k < f.N; ++k) dot += v[k] * e[i][k];
        if (std::abs(dot) > kPerpendicularThreshold) {
          hit = true;
          break;
        }
      }
      if (!hit) {
        r.ok = false;
        r.failing_point = x;
        r.failing_basis = i;
        return r;
      }
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// 1-forms with a cutoff

/// Quintic smoothstep 6u^5 - 15u^4 + 10u^3 clamped to [0,1].
inline double smoothstep5(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  return u * u * u * (u * (6.0 * u - 15.0) + 10.0);
}

/// phi = eta(x) exp(-|x - xi|^2/2) (dx^1 + ... + dx^N), with eta = 1 on the
/// inner box, 0 outside the outer box, and a tensor product of quintic
/// smoothsteps in between.
class OneForm {
 public:
  OneForm(Point xi, AxisBox inner, AxisBox outer)
      : xi_(std::move(xi)), inner_(std::move(inner)), outer_(std::move(outer)) {
    require(xi_.size() == inner_.dim() && inner_.dim() == outer_.dim(),
            "1-form: center and boxes have different dimensions");
    require(outer_.strictly_contains(inner_), "1-form: inner box must lie inside the outer box");
    const Point c = inner_.center();
    double s = 0;
    for (std::size_t i = 0; i < xi_.size(); ++i) s += (c[i] - xi_[i]) * (c[i] - xi_[i]);
    ref_sq_ = s;
  }

  const Point& xi() const { return xi_; }
  const AxisBox& inner() const { return inner_; }
  const AxisBox& outer() const { return outer_; }
  std::size_t dim() const { return xi_.size(); }

  double cutoff(std::span<const double> x) const {
    double eta = 1.0;
    for (std::size_t i = 0; i < xi_.size(); ++i) {
      const double xi = x[i];
      if (xi <= outer_.lo[i] || xi >= outer_.hi[i]) return 0.0;
      if (xi < inner_.lo[i])
        eta *= smoothstep5((xi - outer_.lo[i]) / (inner_.lo[i] - outer_.lo[i]));
      else if (xi > inner_.hi[i])
        eta *= smoothstep5((outer_.hi[i] - xi) / (outer_.hi[i] - inner_.hi[i]));
    }
    return eta;
  }

  double coefficient(std::span<const double> x) const {
    const double eta = cutoff(x);
    return eta == 0.0 ? 0.0 : eta * std::exp(-0.5 * sq_dist(x));
  }

  double pair(std::span<const double> x, std::span<const double> v) const {
    double s = 0;
    for (std::size_t i = 0; i < xi_.size(); ++i) s += v[i];
    return s == 0.0 ? 0.0 : coefficient(x) * s;
  }

  /// log of the Gaussian factor at the inner-box center.
  double log_norm() const { return -0.5 * ref_sq_; }

  double pair_normalized(std::span<const double> x, std::span<const double> v) const {
    const double eta = cutoff(x);
    if (eta == 0.0) return 0.0;
    double s = 0;
    for (std::size_t i = 0; i < xi_.size(); ++i) s += v[i];
    return eta * std::exp(-0.5 * (sq_dist(x) - ref_sq_)) * s;
  }

  std::optional<AxisBox> support() const { return outer_; }

  /// The coefficient where eta = 1, as a function of n >= N variables.
  PolyGaussFun gaussian(std::size_t nvars) const {
    return PolyGaussFun(Polynomial::constant(nvars, 1.0), xi_);
  }

 private:
  double sq_dist(std::span<const double> x) const {
    double s = 0;
    for (std::size_t i = 0; i < xi_.size(); ++i) s += (x[i] - xi_[i]) * (x[i] - xi_[i]);
    return s;
  }

  Point xi_;
  AxisBox inner_;
  AxisBox outer_;
  double ref_sq_ = 0.0;
};

/// The family (V_alpha, phi . V_alpha) on R^{N+1}, written with eta = 1, so it
/// agrees with the true lift on the inner box of phi.
inline FieldFamily lift_fields(const FieldFamily& f, const OneForm& phi) {
  require(phi.dim() == f.N, "lift_fields: form and fields have different dimensions");
  const std::size_t M = f.N + 1;
  const PolyGaussFun g = phi.gaussian(M);
  auto lift = [&](const VectorField& v) {
    VectorField out{v.name + "~", {}};
    PolyGaussFun last = PolyGaussFun::zero(M);
    for (const auto& c : v.comps) {
      out.comps.push_back(c.with_vars(M));
      last = last + g * c.with_vars(M);
    }
    out.comps.push_back(std::move(last));
    return out;
  };
  FieldFamily r;
  r.N = M;
  r.V0 = lift(f.V0);
  for (const auto& v : f.V) r.V.push_back(lift(v));
  return r;
}

/// Raised when the geometric sweep for Lambda ends without success.
class LambdaNotFound : public Error {
 public:
  LambdaNotFound(std::string what, double last_radius, std::size_t worst_rank, Point worst_point)
      : Error(std::move(what)),
        last_radius(last_radius),
        worst_rank(worst_rank),
        worst_point(std::move(worst_point)) {}
  double last_radius;
  std::size_t worst_rank;
  Point worst_point;
};

struct LambdaResult {
  double lambda = 0.0;
  std::size_t sweep_steps = 0;
  double min_sigma_ratio = 0.0;                 // over the inner-box grid at lambda
  std::vector<BracketWord> sample_certificate;  // at the inner-box center
};

inline constexpr int kLambdaSweepCap = 20;

/// Lifted rank at every grid point of the inner box for xi = center + r dir.
/// Returns the minimal rank and fills the worst point and the min ratio.
inline std::size_t lifted_rank_scan(const FieldFamily& f, const AxisBox& inner,
                                    const AxisBox& outer, const Point& xi, std::size_t depth,
                                    std::size_t res, Point* worst = nullptr,
                                    double* min_ratio = nullptr,
                                    std::vector<BracketWord>* center_cert = nullptr) {
  const OneForm phi(xi, inner, outer);
  const FieldFamily lifted = lift_fields(f, phi);
  BracketTable table(lifted);
  std::size_t min_rank = lifted.N;
  double mr = std::numeric_limits<double>::infinity();
  for (const auto& p : box_grid_points(inner, res)) {
    Point x = p;
    x.push_back(0.0);
    const auto rk = hormander_rank(table, lifted.d(), lifted.N, x, depth);
    if (rk.rank < min_rank) {
      min_rank = rk.rank;
      if (worst) *worst = p;
    }
    mr = std::min(mr, rk.sigma_ratio);
  }
  if (center_cert) {
    Point c = inner.center();
    c.push_back(0.0);
    *center_cert = hormander_rank(table, lifted.d(), lifted.N, c, depth).certificate;
  }
  if (min_ratio) *min_ratio = mr;
  return min_rank;
}

/// Smallest r in {r0 2^k : k = 0..20}, r0 = diameter(outer), such that the
/// lift with xi = center(inner) + r dir has rank N+1 on the inner-box grid.
inline LambdaResult find_lambda(const FieldFamily& f, const AxisBox& inner, const AxisBox& outer,
                                const Point& direction, std::size_t depth, std::size_t grid_res) {
  require(outer.strictly_contains(inner), "find_lambda: inner box must lie inside the outer box");
  require(direction.size() == f.N && norm2(direction) > 0, "find_lambda: bad direction");
  {
    const auto base = check_assumption_B(f, box_grid_points(inner, grid_res), depth);
    if (!base.ok)
      throw InvalidInput("find_lambda: base fields reach rank " + std::to_string(base.min_rank) +
                         " < N=" + std::to_string(f.N) + " on the inner box at depth " +
                         std::to_string(depth));
  }
  const double r0 = outer.diameter();
  const Point c = inner.center();
  const double dn = norm2(direction);
  std::size_t worst_rank = 0;
  Point worst_point = c;
  double r = r0;
  for (int k = 0; k <= kLambdaSweepCap; ++k) {
    r = r0 * std::ldexp(1.0, k);
    Point xi(f.N);
    for (std::size_t i = 0; i < f.N; ++i) xi[i] = c[i] + r * direction[i] / dn;
    Point worst = c;
    double ratio = 0;
    LambdaResult res;
    const std::size_t rank =
        lifted_rank_scan(f, inner, outer, xi, depth, grid_res, &worst, &ratio, &res.sample_certificate);
    if (rank == f.N + 1) {
      res.lambda = r;
      res.sweep_steps = static_cast<std::size_t>(k) + 1;
      res.min_sigma_ratio = ratio;
      return res;
    }
    worst_rank = rank;
    worst_point = worst;
  }
  throw LambdaNotFound("Lambda not found below cap " + std::to_string(r) + ": lifted rank " +
                           std::to_string(worst_rank) + " < " + std::to_string(f.N + 1),
                       r, worst_rank, worst_point);
}

}  // namespace sigrecon
