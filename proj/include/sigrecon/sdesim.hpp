#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fields.hpp"
#include "rng.hpp"
#include "sample_path.hpp"

namespace sigrecon {

struct DiffusionSpec {
  FieldFamily fields;
  Point start;  // empty means the origin

  std::size_t dim() const { return fields.N; }
  Point start_point() const { return start.empty() ? Point(fields.N, 0.0) : start; }
};

struct SimConfig {
  std::size_t steps = 1024;
  std::uint64_t seed = 0;
  std::uint32_t replica = 0;
};

/// Raised when the state stops being finite.
class SimulationDiverged : public Error {
 public:
  SimulationDiverged(std::size_t step)
      : Error("simulation diverged at step " + std::to_string(step)), step(step) {}
  std::size_t step;
};

namespace detail {

/// Flat evaluator for a polynomial vector field (no Gaussian factors).
class CompiledField {
 public:
  CompiledField() = default;
  explicit CompiledField(const VectorField& v) : N_(v.dim()) {
    for (std::size_t i = 0; i < v.comps.size(); ++i) {
      require(!v.comps[i].center(), "simulation fields must be plain polynomials");
      for (const auto& t : v.comps[i].poly().terms()) {
        comp_.push_back(i);
        coef_.push_back(t.coef);
        exps_.insert(exps_.end(), t.exps.begin(), t.exps.end());
      }
    }
  }

  bool empty() const { return coef_.empty(); }

  void eval(const double* x, double* out) const {
    std::fill(out, out + N_, 0.0);
    for (std::size_t k = 0; k < coef_.size(); ++k) {
      double m = coef_[k];
      const int* e = exps_.data() + k * N_;
      for (std::size_t j = 0; j < N_; ++j)
        for (int p = 0; p < e[j]; ++p) m *= x[j];
      out[comp_[k]] += m;
    }
  }

 private:
  std::size_t N_ = 0;
  std::vector<std::size_t> comp_;
  std::vector<double> coef_;
  std::vector<int> exps_;
};

}  // namespace detail

/// Heun scheme for dX = V0 dt + V_alpha o dW^alpha on a uniform grid, driven
/// by the given increments dW (steps x d, row-major).
inline SamplePath simulate_with_increments(const DiffusionSpec& spec, std::size_t steps,
                                           const std::vector<double>& dW) {
  require(steps >= 2, "simulation needs at least 2 steps");
  const FieldFamily& f = spec.fields;
  f.validate();
  const std::size_t N = f.N, d = f.d();
  require(dW.size() == steps * d, "increment array has the wrong size");
  std::vector<detail::CompiledField> V;
  for (std::size_t a = 0; a <= d; ++a) V.emplace_back(f.field(a));
  const double h = 1.0 / static_cast<double>(steps);
  std::vector<double> coords((steps + 1) * N);
  const Point x0 = spec.start_point();
  require(x0.size() == N, "start point has the wrong dimension");
  std::copy(x0.begin(), x0.end(), coords.begin());
  std::vector<double> k0((d + 1) * N), k1((d + 1) * N), pred(N), tmp(N);
  for (std::size_t n = 0; n < steps; ++n) {
    const double* x = coords.data() + n * N;
    double* y = coords.data() + (n + 1) * N;
    const double* w = dW.data() + n * d;
    for (std::size_t a = 0; a <= d; ++a)
      if (!V[a].empty())
        V[a].eval(x, k0.data() + a * N);
      else
        std::fill(k0.begin() + static_cast<std::ptrdiff_t>(a * N),
                  k0.begin() + static_cast<std::ptrdiff_t>((a + 1) * N), 0.0);
    for (std::size_t i = 0; i < N; ++i) {
      double s = x[i] + k0[i] * h;
      for (std::size_t a = 1; a <= d; ++a) s += k0[a * N + i] * w[a - 1];
      pred[i] = s;
    }
    for (std::size_t a = 0; a <= d; ++a)
      if (!V[a].empty())
        V[a].eval(pred.data(), k1.data() + a * N);
      else
        std::fill(k1.begin() + static_cast<std::ptrdiff_t>(a * N),
                  k1.begin() + static_cast<std::ptrdiff_t>((a + 1) * N), 0.0);
    for (std::size_t i = 0; i < N; ++i) {
      double s = x[i] + 0.5 * (k0[i] + k1[i]) * h;
      for (std::size_t a = 1; a <= d; ++a) s += 0.5 * (k0[a * N + i] + k1[a * N + i]) * w[a - 1];
      if (!std::isfinite(s)) throw SimulationDiverged(n + 1);
      y[i] = s;
    }
  }
  return SamplePath(uniform_times(steps), std::move(coords), N);
}

/// Brownian increments sqrt(h) Z for the counter-based stream.
inline std::vector<double> brownian_increments(std::size_t d, const SimConfig& cfg) {
  std::vector<double> dW(cfg.steps * d);
  const double sh = std::sqrt(1.0 / static_cast<double>(cfg.steps));
  const NormalStream rng(cfg.seed, cfg.replica);
  for (std::size_t n = 0; n < cfg.steps; ++n) {
    rng.fill(n, d, dW.data() + n * d);
    for (std::size_t a = 0; a < d; ++a) dW[n * d + a] *= sh;
  }
  return dW;
}

inline SamplePath simulate(const DiffusionSpec& spec, const SimConfig& cfg) {
  return simulate_with_increments(spec, cfg.steps, brownian_increments(spec.fields.d(), cfg));
}

/// V0 + 1/2 sum_alpha D_{V_alpha} V_alpha, where (D_V W)_i = sum_j dW_i/dx_j V_j.
inline VectorField ito_correction(const FieldFamily& f) {
  const std::size_t N = f.N;
  VectorField out = f.V0;
  out.name = "V0_ito";
  const PolyGaussFun half(Polynomial::constant(N, 0.5));
  for (std::size_t a = 1; a <= f.d(); ++a) {
    const auto& v = f.field(a);
    for (std::size_t i = 0; i < N; ++i) {
      PolyGaussFun acc = PolyGaussFun::zero(N);
      for (std::size_t j = 0; j < N; ++j) acc = acc + v.comps[i].derivative(j) * v.comps[j];
      out.comps[i] = out.comps[i] + half * acc;
    }
  }
  return out;
}

/// max over alpha >= 1 of sup |V_alpha| and of sup |ito_correction| on the box.
inline double constant_C(const FieldFamily& f, const AxisBox& box) {
  double c = field_sup_norm(ito_correction(f), box);
  for (std::size_t a = 1; a <= f.d(); ++a) c = std::max(c, field_sup_norm(f.field(a), box));
  return c;
}

}  // namespace sigrecon
