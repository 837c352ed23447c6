#pragma once

#include <atomic>
#include <json.hpp>
#include <vector>

#include "core.hpp"
#include "sample_path.hpp"
#include "trajectory.hpp"

namespace sigrecon {

/// Number of box membership tests performed through BoxGrid. Lets tests check
/// that a computation never consults box geometry.
inline std::atomic<std::size_t> g_box_membership_probes{0};

/// Cubes around eps z, z in Z^N, of side eps - eps^exponent.
struct BoxGrid {
  double eps = 0.5;
  double exponent = 2.0;

  BoxGrid() = default;
  BoxGrid(double eps, double exponent) : eps(eps), exponent(exponent) {
    require(eps > 0.0 && eps < 1.0, "box grid: eps must lie in (0,1)");
    require(exponent > 1.0, "box grid: exponent must exceed 1");
    require(eps - std::pow(eps, exponent) > 0.0, "box grid: eps - eps^exponent must be positive");
  }

  double half_side() const { return 0.5 * (eps - std::pow(eps, exponent)); }

  AxisBox box(const Lattice& z) const { return AxisBox::centered(scaled(z, eps), half_side()); }

  /// Closed-box membership of x in the box around eps z.
  bool contains(const Lattice& z, std::span<const double> x) const {
    g_box_membership_probes.fetch_add(1, std::memory_order_relaxed);
    const double h = half_side();
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double c = eps * static_cast<double>(z[i]);
      if (x[i] < c - h || x[i] > c + h) return false;
    }
    return true;
  }
};

inline bool box_contains(const BoxGrid& g, const Lattice& z, std::span<const double> x) {
  return g.contains(z, x);
}

/// Successive visit times tau_0 = 0 < tau_1 < ... < 1 and the boxes m_k.
struct HittingRecord {
  double eps = 0.0;
  double exponent = 0.0;
  std::vector<double> taus;
  std::vector<Lattice> word;

  std::size_t M() const { return taus.empty() ? 0 : taus.size() - 1; }
  bool operator==(const HittingRecord&) const = default;
};

inline nlohmann::json to_json(const HittingRecord& r) {
  return {{"eps", r.eps}, {"exponent", r.exponent}, {"taus", r.taus}, {"word", r.word}};
}

/// Visit record of the piecewise linear interpolant of the samples. Each
/// segment is clipped against every box it can reach; the boxes it enters are
/// taken in order of entry, and an entry counts when the box differs from the
/// current one. Entries at t = 1 exactly are not recorded.
inline HittingRecord extract_hitting(const SamplePath& path, const BoxGrid& grid) {
  const std::size_t N = path.dim();
  HittingRecord r{grid.eps, grid.exponent, {0.0}, {Lattice(N, 0)}};
  const double h = grid.half_side();
  const double eps = grid.eps;
  std::vector<long> lo(N), hi(N);
  Lattice z(N);
  struct Hit {
    double s;
    Lattice z;
  };
  std::vector<Hit> hits;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    auto a = path.point(i);
    auto b = path.point(i + 1);
    bool any = true;
    for (std::size_t j = 0; j < N; ++j) {
      const double mn = std::min(a[j], b[j]), mx = std::max(a[j], b[j]);
      lo[j] = static_cast<long>(std::ceil((mn - h) / eps));
      hi[j] = static_cast<long>(std::floor((mx + h) / eps));
      if (lo[j] > hi[j]) any = false;
    }
    if (!any) continue;
    hits.clear();
    z = lo;
    for (;;) {
      const AxisBox box = AxisBox::centered(scaled(z, eps), h);
      double s0, s1;
      if (box.clip_segment(a, b, s0, s1)) hits.push_back({s0, z});
      std::size_t k = 0;
      for (; k < N; ++k) {
        if (++z[k] <= hi[k]) break;
        z[k] = lo[k];
      }
      if (k == N) break;
    }
    if (hits.empty()) continue;
    std::sort(hits.begin(), hits.end(), [](const Hit& x, const Hit& y) { return x.s < y.s; });
    const double t0 = path.time(i), dt = path.time(i + 1) - path.time(i);
    for (const auto& hit : hits) {
      if (hit.z == r.word.back()) continue;
      const double t = std::min(t0 + hit.s * dt, path.time(i + 1));
      if (t >= 1.0 || t <= r.taus.back()) continue;
      r.taus.push_back(t);
      r.word.push_back(hit.z);
    }
  }
  return r;
}

/// Piecewise linear path together with its vertex PLT and the parametrization
/// carrying the vertices.
struct Polygon {
  PLT plt;
  Parametrization sigma;

  SamplePath path() const { return SamplePath(sigma.times(), plt.points()); }
};

/// X^eps: linear between (tau_{k-1}, eps m_{k-1}) and (tau_k, eps m_k), then
/// constant eps m_M on [tau_M, 1]. The PLT ends with eps m_M twice.
inline Polygon polygonal_approx(const HittingRecord& rec, double eps) {
  std::vector<Point> pts;
  std::vector<double> times;
  for (std::size_t k = 0; k < rec.word.size(); ++k) {
    pts.push_back(scaled(rec.word[k], eps));
    times.push_back(rec.taus[k]);
  }
  pts.push_back(pts.back());
  times.push_back(1.0);
  return {PLT(std::move(pts)), Parametrization(std::move(times))};
}

/// The modified path: when some tau_l falls strictly inside (zeta_k,
/// zeta_{k+1}), hold eps n_k on [zeta_k, tau_l] and move to eps n_{k+1} on
/// [tau_l, zeta_{k+1}]; a tau_l after the last zeta only adds a hold vertex.
inline Polygon modified_approx(const HittingRecord& recV, const HittingRecord& recH, double eps) {
  require(!recV.taus.empty() && !recH.taus.empty(), "modified_approx: empty record");
  require(recV.word.front() == recH.word.front(),
          "modified_approx: records start in different boxes");
  std::vector<Point> pts;
  std::vector<double> times;
  std::size_t l = 1;  // next small-box hit to place
  const std::size_t MV = recV.M();
  for (std::size_t k = 0; k <= MV; ++k) {
    pts.push_back(scaled(recV.word[k], eps));
    times.push_back(recV.taus[k]);
    const double next = k < MV ? recV.taus[k + 1] : 1.0;
    std::size_t inside = 0;
    while (l < recH.taus.size() && recH.taus[l] < next) {
      const double tau = recH.taus[l];
      require(tau > recV.taus[k],
              "modified_approx: small-box hit at t=" + std::to_string(tau) +
                  " does not follow a large-box hit (records from different paths?)");
      require(recH.word[l] == recV.word[k],
              "modified_approx: small-box hit in a box other than the current large box "
              "(records from different paths?)");
      require(++inside == 1, "modified_approx: two small-box hits between consecutive large-box hits");
      pts.push_back(scaled(recV.word[k], eps));
      times.push_back(tau);
      ++l;
    }
  }
  require(l == recH.taus.size(), "modified_approx: small-box hits left unplaced");
  pts.push_back(pts.back());
  times.push_back(1.0);
  return {PLT(std::move(pts)), Parametrization(std::move(times))};
}

/// 4 N k exp(-eps^{2 mu} k / (8 N d C^2)), defined for k > 2C / eps^mu.
inline double hitting_tail_bound(std::size_t N, std::size_t d, double C, double eps, double mu,
                            double k) {
  require(N >= 1 && d >= 1 && C > 0.0, "tail bound needs N, d >= 1 and C > 0");
  const double threshold = 2.0 * C / std::pow(eps, mu);
  if (!(k > threshold))
    throw InvalidInput("tail bound needs k > 2C/eps^mu = " + std::to_string(threshold) +
                       ", got k = " + std::to_string(k));
  const double Nd = static_cast<double>(N), dd = static_cast<double>(d);
  return 4.0 * Nd * k * std::exp(-std::pow(eps, 2.0 * mu) * k / (8.0 * Nd * dd * C * C));
}

}  // namespace sigrecon
