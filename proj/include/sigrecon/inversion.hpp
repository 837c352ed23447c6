#pragma once

#include <cmath>
#include <deque>
#include <json.hpp>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <vector>

#include "boxes.hpp"
#include "fields.hpp"
#include "plt.hpp"
#include "sdesim.hpp"
#include "stratint.hpp"

namespace sigrecon {

using AdmissibleWord = std::vector<Lattice>;

inline bool is_admissible(const AdmissibleWord& w) {
  if (w.empty()) return false;
  for (long c : w.front())
    if (c != 0) return false;
  for (std::size_t i = 1; i < w.size(); ++i)
    if (w[i] == w[i - 1]) return false;
  return true;
}

/// Forms phi_z with inner box H_z (exponent mu), support inside V_z
/// (exponent mu') and center xi_z = eps z + 1.1 Lambda e_1. Forms are built on
/// first use.
class OneFormFamily {
 public:
  static constexpr double kXiFactor = 1.1;

  OneFormFamily(double eps, double mu, double mu_prime, double lambda, std::size_t N)
      : small_(eps, mu), large_(eps, mu_prime), lambda_(lambda), N_(N) {
    require(mu_prime > mu, "form family: mu' must exceed mu");
    require(lambda > 0.0, "form family: Lambda must be positive");
    // keep the support strictly inside V_z
    margin_ = 1e-6 * (large_.half_side() - small_.half_side());
  }

  double eps() const { return small_.eps; }
  double lambda() const { return lambda_; }
  std::size_t dim() const { return N_; }
  const BoxGrid& small_grid() const { return small_; }
  const BoxGrid& large_grid() const { return large_; }

  Point xi(const Lattice& z) const {
    Point x = scaled(z, small_.eps);
    x[0] += kXiFactor * lambda_;
    return x;
  }

  AxisBox inner_box(const Lattice& z) const {
    return AxisBox::centered(scaled(z, small_.eps), small_.half_side());
  }
  AxisBox outer_box(const Lattice& z) const {
    return AxisBox::centered(scaled(z, small_.eps), large_.half_side() - margin_);
  }

  const OneForm& form(const Lattice& z) const {
    require(z.size() == N_, "form family: lattice point has the wrong dimension");
    auto it = cache_.find(z);
    if (it == cache_.end()) it = cache_.emplace(z, OneForm(xi(z), inner_box(z), outer_box(z))).first;
    return it->second;
  }

 private:
  BoxGrid small_;
  BoxGrid large_;
  double lambda_;
  std::size_t N_;
  double margin_ = 0.0;
  mutable std::map<Lattice, OneForm> cache_;
};

struct FormFamilyOptions {
  std::size_t depth = 3;
  std::size_t grid_res = 5;
};

/// One shared Lambda from the box around the origin (the grid is translation
/// invariant); the rank of the lift is then confirmed at the center actually
/// used, 1.1 Lambda away.
inline OneFormFamily build_form_family(double eps, double mu, double mu_prime,
                                       const FieldFamily& fields,
                                       const FormFamilyOptions& opt = {}) {
  const BoxGrid small(eps, mu), large(eps, mu_prime);
  const Lattice origin(fields.N, 0);
  const AxisBox inner = small.box(origin);
  const AxisBox outer = large.box(origin);
  Point e1(fields.N, 0.0);
  e1[0] = 1.0;
  const auto res = find_lambda(fields, inner, outer, e1, opt.depth, opt.grid_res);
  OneFormFamily fam(eps, mu, mu_prime, res.lambda, fields.N);
  Point worst;
  const std::size_t rank =
      lifted_rank_scan(fields, inner, fam.outer_box(origin), fam.xi(origin), opt.depth, opt.grid_res, &worst);
  if (rank != fields.N + 1)
    throw LambdaNotFound("lifted rank fails at 1.1 Lambda", OneFormFamily::kXiFactor * res.lambda,
                         rank, worst);
  return fam;
}

/// Raised when the word search exceeds its node budget.
class SearchBudgetExceeded : public Error {
 public:
  SearchBudgetExceeded(std::size_t nodes, AdmissibleWord best)
      : Error("word search exceeded its budget of " + std::to_string(nodes) + " nodes"),
        best(std::move(best)) {}
  AdmissibleWord best;
};

struct ExtractionResult {
  AdmissibleWord word;
  std::size_t M = 0;
  std::vector<double> prefix_log10;  // log10 |[phi_z0..phi_zk]_{0,1}|, k = 0..M
  std::vector<double> prefix_ratio;  // |integral| / noise scale, k = 0..M
  double tol = 0.0;
  std::size_t nodes = 0;
};

inline nlohmann::json to_json(const ExtractionResult& r) {
  auto finite = [](const std::vector<double>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (double x : v) a.push_back(std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr));
    return a;
  };
  return {{"word", r.word}, {"M", r.M}, {"prefixIntegrals", finite(r.prefix_log10)},
          {"prefixRatios", finite(r.prefix_ratio)}, {"tol", r.tol}};
}

struct ExtractionOptions {
  double tol = 1e-6;
  long radius = 2;
  std::size_t node_budget = 2'000'000;
  /// When set, search words over exactly these lattice points with no radius
  /// limit and no run-count pruning.
  std::optional<std::vector<Lattice>> universe;
};

namespace detail {

/// |I(1)| > tol * median nonzero |increment|.
inline bool nonzero(const SparseSeries& s, double tol) {
  if (s.empty()) return false;
  const double f = std::abs(s.final_scaled());
  return f > 0.0 && f > tol * s.median_increment();
}

inline double ratio(const SparseSeries& s) {
  const double m = s.median_increment();
  return m > 0.0 ? std::abs(s.final_scaled()) / m : 0.0;
}

class WordSearch {
 public:
  WordSearch(const SamplePath& path, const OneFormFamily& family, const ExtractionOptions& opt)
      : index_(path), family_(family), opt_(opt), N_(path.dim()) {}

  ExtractionResult run() {
    const Lattice origin(N_, 0);
    if (opt_.universe) {
      for (const auto& z : *opt_.universe) add(z);
      add(origin);
    } else {
      build_universe(origin);
      build_runs();
    }
    const std::size_t root = id_of_.at(origin);
    SparseSeries s0 = first_series(keys_[root]);
    std::vector<std::size_t> word{root};
    best_ = word;
    best_log_ = s0.log_abs_final();
    if (!s0.empty()) dfs(word, s0);
    ExtractionResult r;
    r.tol = opt_.tol;
    r.nodes = nodes_;
    for (auto id : best_) r.word.push_back(points_[id]);
    r.M = r.word.size() - 1;
    SparseSeries s = first_series(keys_[best_[0]]);
    for (std::size_t k = 0; k < best_.size(); ++k) {
      if (k > 0) s = extend_series(s, keys_[best_[k]]);
      r.prefix_log10.push_back(s.log_abs_final() / std::log(10.0));
      r.prefix_ratio.push_back(ratio(s));
    }
    return r;
  }

 private:
  std::size_t add(const Lattice& z) {
    auto it = id_of_.find(z);
    if (it != id_of_.end()) return it->second;
    const std::size_t id = points_.size();
    id_of_.emplace(z, id);
    points_.push_back(z);
    keys_.push_back(chord_keys(index_, family_.form(z)));
    return id;
  }

  /// Forms reachable from the origin through chains of nonempty forms with
  /// steps of sup-norm <= radius.
  void build_universe(const Lattice& origin) {
    add(origin);
    std::deque<std::size_t> queue{0};
    std::set<std::size_t> active{0};
    std::vector<long> off(N_);
    const long R = opt_.radius;
    while (!queue.empty()) {
      const Lattice z = points_[queue.front()];
      queue.pop_front();
      std::fill(off.begin(), off.end(), -R);
      for (;;) {
        Lattice y = z;
        bool self = true;
        for (std::size_t i = 0; i < N_; ++i) {
          y[i] += off[i];
          self &= off[i] == 0;
        }
        if (!self) {
          const bool known = id_of_.count(y) > 0;
          const std::size_t id = add(y);
          if (!known && !keys_[id].empty() && active.insert(id).second) queue.push_back(id);
        }
        std::size_t k = 0;
        for (; k < N_; ++k) {
          if (++off[k] <= R) break;
          off[k] = -R;
        }
        if (k == N_) break;
      }
    }
    for (std::size_t id = 0; id < points_.size(); ++id)
      if (!keys_[id].empty()) active_.push_back(id);
  }

  /// Maximal stretches of consecutive keys (in time) belonging to one form.
  void build_runs() {
    std::vector<std::pair<double, std::size_t>> all;
    for (auto id : active_)
      for (double k : keys_[id].key) all.emplace_back(k, id);
    std::sort(all.begin(), all.end());
    for (std::size_t i = 0; i < all.size(); ++i)
      if (i == 0 || all[i - 1].second != all[i].second) run_starts_.push_back(all[i].first);
  }

  /// Number of runs starting after time t. Each further letter needs a key
  /// after the onset of the prefix series in a run of its own.
  std::size_t runs_after(double t) const {
    return static_cast<std::size_t>(run_starts_.end() -
                                    std::upper_bound(run_starts_.begin(), run_starts_.end(), t));
  }

  bool adjacent(const Lattice& a, const Lattice& b) const {
    if (opt_.universe) return true;
    return sup_distance(a, b) <= opt_.radius;
  }

  void dfs(std::vector<std::size_t>& word, const SparseSeries& s) {
    if (++nodes_ > opt_.node_budget) {
      AdmissibleWord best;
      for (auto id : best_) best.push_back(points_[id]);
      throw SearchBudgetExceeded(opt_.node_budget, std::move(best));
    }
    // the prefix integral is negligible everywhere: every extension vanishes
    if (s.max_abs_scaled() <= opt_.tol * s.median_increment()) return;
    const double onset = s.key.front();
    if (!opt_.universe && word.size() + runs_after(onset) < best_.size()) return;
    const Lattice& tail = points_[word.back()];
    struct Child {
      double first;
      std::size_t id;
    };
    std::vector<Child> children;
    const auto& cand = opt_.universe ? all_ids() : active_;
    for (auto id : cand) {
      if (id == word.back() || keys_[id].empty() || !adjacent(tail, points_[id])) continue;
      const auto& kk = keys_[id].key;
      auto it = std::upper_bound(kk.begin(), kk.end(), onset);
      if (it == kk.end()) continue;
      children.push_back({*it, id});
    }
    std::sort(children.begin(), children.end(),
              [](const Child& a, const Child& b) { return a.first < b.first || (a.first == b.first && a.id < b.id); });
    for (const auto& c : children) {
      SparseSeries child = extend_series(s, keys_[c.id]);
      if (child.empty()) continue;
      word.push_back(c.id);
      if (nonzero(child, opt_.tol)) {
        const double lg = child.log_abs_final();
        if (word.size() > best_.size() || (word.size() == best_.size() && lg > best_log_)) {
          best_ = word;
          best_log_ = lg;
        }
      }
      dfs(word, child);
      word.pop_back();
    }
  }

  const std::vector<std::size_t>& all_ids() {
    if (all_ids_.size() != points_.size()) {
      all_ids_.resize(points_.size());
      for (std::size_t i = 0; i < points_.size(); ++i) all_ids_[i] = i;
    }
    return all_ids_;
  }

  PathIndex index_;
  const OneFormFamily& family_;
  const ExtractionOptions& opt_;
  std::size_t N_;
  std::map<Lattice, std::size_t> id_of_;
  std::vector<Lattice> points_;
  std::vector<ChordKeys> keys_;
  std::vector<std::size_t> active_;
  std::vector<std::size_t> all_ids_;
  std::vector<double> run_starts_;
  std::vector<std::size_t> best_;
  double best_log_ = 0.0;
  std::size_t nodes_ = 0;
};

}  // namespace detail

/// Longest admissible word whose extended signature over the family is
/// nonzero, found from integral values only.
inline ExtractionResult extract_word(const SamplePath& path, const OneFormFamily& family,
                                     const ExtractionOptions& opt = {}) {
  require(opt.tol > 0.0, "extract_word: tol must be positive");
  require(opt.radius >= 1, "extract_word: radius must be >= 1");
  require(path.dim() == family.dim(), "extract_word: path and family dimensions differ");
  for (std::size_t j = 0; j < path.dim(); ++j)
    require(path.coord(0, j) == 0.0, "extract_word: path must start at the origin");
  return detail::WordSearch(path, family, opt).run();
}

/// Large-box visit word of the path (ground truth for the extraction).
inline AdmissibleWord geometric_oracle_word(const SamplePath& path, const BoxGrid& large) {
  return extract_hitting(path, large).word;
}

inline std::vector<Point> scaled_word(const AdmissibleWord& w, double eps) {
  std::vector<Point> pts;
  pts.reserve(w.size());
  for (const auto& z : w) pts.push_back(scaled(z, eps));
  return pts;
}

// ---------------------------------------------------------------------------
// Reconstruction

struct ReconstructOptions {
  double mu = 2.0;
  double mu_prime = 3.0;
  double tol = 1e-6;
  long radius = 2;
  std::size_t depth = 3;
  std::size_t grid_res = 5;
  std::size_t node_budget = 2'000'000;
  /// Fields used for the Lambda search in place of the simulated ones (for
  /// specs whose own fields fail the rank condition, e.g. pure drift).
  std::optional<FieldFamily> family_fields;
  bool compute_frechet = true;
};

struct EpsResult {
  double eps = 0.0;
  std::size_t M_H = 0, M = 0, M_V = 0;
  AdmissibleWord word;
  bool oracle_match = false;
  bool sandwich_ok = false;
  bool squeeze_ok = false;
  std::string error;  // non-empty when this eps failed
  double frechet = std::numeric_limits<double>::quiet_NaN();
  double sup_X = 0.0, sup_Xtilde = 0.0, sup_Xhat = 0.0;  // sup_t distance to the path
  double sup_Y = std::numeric_limits<double>::quiet_NaN();  // with the squeeze sigma
};

/// Families per eps, built once and shared across seeds.
inline std::vector<OneFormFamily> prepare_families(const DiffusionSpec& spec,
                                                   const std::vector<double>& epss,
                                                   const ReconstructOptions& opt) {
  for (std::size_t i = 1; i < epss.size(); ++i)
    require(epss[i] < epss[i - 1], "eps list must be strictly decreasing");
  const FieldFamily& f = opt.family_fields ? *opt.family_fields : spec.fields;
  std::vector<OneFormFamily> out;
  for (double e : epss)
    out.push_back(build_form_family(e, opt.mu, opt.mu_prime, f, {opt.depth, opt.grid_res}));
  return out;
}

inline EpsResult reconstruct_eps(const SamplePath& path, const OneFormFamily& fam,
                                 const ReconstructOptions& opt) {
  EpsResult r;
  r.eps = fam.eps();
  const double eps = fam.eps();
  try {
    const auto recH = extract_hitting(path, fam.small_grid());
    const auto recV = extract_hitting(path, fam.large_grid());
    r.M_H = recH.M();
    r.M_V = recV.M();
    const Polygon X = polygonal_approx(recH, eps);
    const Polygon Xt = polygonal_approx(recV, eps);
    const Polygon Xh = modified_approx(recV, recH, eps);
    r.sup_X = sup_distance(X.path(), path);
    r.sup_Xtilde = sup_distance(Xt.path(), path);
    r.sup_Xhat = sup_distance(Xh.path(), path);

    ExtractionOptions eo;
    eo.tol = opt.tol;
    eo.radius = opt.radius;
    eo.node_budget = opt.node_budget;
    const auto ex = extract_word(path, fam, eo);
    r.word = ex.word;
    r.M = ex.M;
    r.oracle_match = ex.word == recV.word;
    const auto Y = scaled_word(ex.word, eps);
    r.sandwich_ok = is_subsequence(minus(X.plt), Y) && is_subsequence(Y, minus(Xh.plt));
    if (r.sandwich_ok) {
      const Parametrization sigma = build_squeeze_parametrization(X.plt, X.sigma, Y, Xh.plt, Xh.sigma);
      const PLT Ybar = with_repeated_last(Y);
      r.squeeze_ok = check_squeeze_clauses(X.plt, X.sigma, Ybar, sigma, Xh.plt, Xh.sigma).ok();
      r.sup_Y = sup_distance(Ybar, sigma, path);
    }
    if (opt.compute_frechet) r.frechet = trajectory_distance(PLT(Y), path);
  } catch (const Error& e) {
    r.error = e.what();
  }
  return r;
}

/// Simulates once and runs the reconstruction at every eps.
inline std::vector<EpsResult> reconstruct(const DiffusionSpec& spec,
                                          const std::vector<OneFormFamily>& families,
                                          const SimConfig& cfg, const ReconstructOptions& opt) {
  const SamplePath path = simulate(spec, cfg);
  std::vector<EpsResult> out;
  for (const auto& fam : families) out.push_back(reconstruct_eps(path, fam, opt));
  return out;
}

inline std::vector<EpsResult> reconstruct(const DiffusionSpec& spec, const std::vector<double>& epss,
                                          const SimConfig& cfg, const ReconstructOptions& opt) {
  return reconstruct(spec, prepare_families(spec, epss, opt), cfg, opt);
}

}  // namespace sigrecon
