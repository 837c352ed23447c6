#pragma once

#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "boxes.hpp"
#include "fields.hpp"
#include "inversion.hpp"
#include "io.hpp"
#include "plt.hpp"
#include "sdesim.hpp"

namespace sigrecon {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int usage = 1;
inline constexpr int assumption = 2;
inline constexpr int runtime = 3;
}  // namespace exit_code

/// Bad command line or configuration.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct ExperimentConfig {
  nlohmann::json spec;                        // field family
  std::optional<nlohmann::json> family_spec;  // fields for the Lambda search, if different
  std::vector<double> eps{0.2, 0.1, 0.05};
  double mu = 2.0;
  double mu_prime = 3.0;
  std::size_t steps = 4096;
  std::size_t seeds = 10;
  std::uint64_t base_seed = 1;
  double tol = 1e-6;
  long radius = 2;
  std::size_t depth = 3;
  std::size_t grid_res = 5;
  double lambda_check = 12.0;
  double box = 2.0;  // experiment bounding box [-box, box]^N
  std::size_t sample_res = 9;
  std::string out = ".";

  nlohmann::json to_json() const {
    nlohmann::json j{{"spec", spec},         {"eps", eps},
                     {"mu", mu},             {"mu_prime", mu_prime},
                     {"steps", steps},       {"seeds", seeds},
                     {"base_seed", base_seed}, {"tol", tol},
                     {"radius", radius},     {"depth", depth},
                     {"grid_res", grid_res}, {"lambda_check", lambda_check},
                     {"box", box},           {"sample_res", sample_res}};
    if (family_spec) j["family_spec"] = *family_spec;
    return j;
  }

  /// Hash of everything that determines outputs (the output directory excluded).
  std::uint64_t hash() const { return fnv1a(to_json().dump()); }

  void validate() const {
    if (eps.empty()) throw UsageError("eps list is empty");
    for (double e : eps)
      if (!(e > 0.0 && e < 1.0)) throw UsageError("every eps must lie in (0,1)");
    for (std::size_t i = 1; i < eps.size(); ++i)
      if (!(eps[i] < eps[i - 1])) throw UsageError("eps list must be strictly decreasing");
    if (!(mu_prime > mu && mu > 1.0)) throw UsageError("need mu' > mu > 1");
    if (steps < 2) throw UsageError("steps must be >= 2");
    if (seeds < 1) throw UsageError("seeds must be >= 1");
    if (!(tol > 0.0)) throw UsageError("tol must be positive");
    if (radius < 1) throw UsageError("radius must be >= 1");
    if (!(box > 0.0)) throw UsageError("box must be positive");
  }
};

inline nlohmann::json load_json_file(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError("'" + path + "' is not valid JSON: " + e.what());
  }
}

/// Reads a config file. "spec" and "family_spec" may be inline objects or
/// paths relative to the config file.
inline ExperimentConfig config_from_json(const nlohmann::json& j, const std::string& base_dir = ".") {
  ExperimentConfig c;
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  auto spec_of = [&](const nlohmann::json& v, const char* key) {
    if (v.is_string()) {
      std::filesystem::path p(v.get<std::string>());
      if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
      return load_json_file(p.string());
    }
    if (v.is_object()) return v;
    throw UsageError(std::string("config: '") + key + "' must be a path or an object");
  };
  try {
    if (j.contains("spec")) c.spec = spec_of(j["spec"], "spec");
    if (j.contains("family_spec")) c.family_spec = spec_of(j["family_spec"], "family_spec");
    if (j.contains("eps")) c.eps = j["eps"].get<std::vector<double>>();
    if (j.contains("mu")) c.mu = j["mu"].get<double>();
    if (j.contains("mu_prime")) c.mu_prime = j["mu_prime"].get<double>();
    if (j.contains("steps")) c.steps = j["steps"].get<std::size_t>();
    if (j.contains("seeds")) c.seeds = j["seeds"].get<std::size_t>();
    if (j.contains("base_seed")) c.base_seed = j["base_seed"].get<std::uint64_t>();
    if (j.contains("tol")) c.tol = j["tol"].get<double>();
    if (j.contains("radius")) c.radius = j["radius"].get<long>();
    if (j.contains("depth")) c.depth = j["depth"].get<std::size_t>();
    if (j.contains("grid_res")) c.grid_res = j["grid_res"].get<std::size_t>();
    if (j.contains("lambda_check")) c.lambda_check = j["lambda_check"].get<double>();
    if (j.contains("box")) c.box = j["box"].get<double>();
    if (j.contains("sample_res")) c.sample_res = j["sample_res"].get<std::size_t>();
    if (j.contains("out")) c.out = j["out"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  return c;
}

inline DiffusionSpec diffusion_of(const ExperimentConfig& c) {
  if (c.spec.is_null()) throw UsageError("config has no field spec");
  return DiffusionSpec{family_from_json(c.spec), {}};
}

inline AxisBox bounding_box(const ExperimentConfig& c, std::size_t N) {
  return AxisBox{Point(N, -c.box), Point(N, c.box)};
}

inline std::filesystem::path out_dir(const ExperimentConfig& c) {
  std::filesystem::path p(c.out);
  std::error_code ec;
  std::filesystem::create_directories(p, ec);
  if (ec) throw Error("cannot create output directory '" + c.out + "': " + ec.message());
  return p;
}

/// Warns when a step can jump across a large-box tunnel.
inline void step_warning(const ExperimentConfig& c, double C, std::ostream& err) {
  for (double e : c.eps) {
    const double lhs = C / static_cast<double>(c.steps);
    const double rhs = std::pow(e, c.mu_prime) / 4.0;
    if (lhs > rhs)
      err << "warning: dt*C = " << lhs << " exceeds eps^mu'/4 = " << rhs << " at eps=" << e << "\n";
  }
}

// ---------------------------------------------------------------------------

inline int cmd_simulate(const ExperimentConfig& c, std::ostream& out, std::ostream& err) {
  (void)err;
  const auto spec = diffusion_of(c);
  const auto dir = out_dir(c);
  const auto h = c.hash();
  for (std::size_t i = 0; i < c.seeds; ++i) {
    const std::uint64_t seed = c.base_seed + i;
    const auto path = simulate(spec, {c.steps, seed, 0});
    const auto file = dir / ("path_seed" + std::to_string(seed) + ".csv");
    write_file(file.string(), path_to_csv(path, provenance_line(h, std::to_string(seed))));
  }
  out << "wrote " << c.seeds << " path files to " << dir.string() << "\n";
  return exit_code::ok;
}

struct AssumptionSummary {
  AssumptionAReport A;
  AssumptionBReport B;
  AssumptionCReport C;
  nlohmann::json json;
};

inline AssumptionSummary run_assumption_checks(const FieldFamily& f, const AxisBox& box,
                                               std::size_t depth, std::size_t res) {
  AssumptionSummary s;
  const auto samples = box_grid_points(box, res);
  s.A = check_assumption_A(f, box);
  s.B = check_assumption_B(f, samples, depth);
  s.C = check_assumption_C(f, samples);
  nlohmann::json a{{"bounded_on_box", s.A.bounded_on_box}, {"warnings", s.A.warnings}};
  for (auto& [name, v] : s.A.sup_norms) a["sup_norms"][name] = v;
  nlohmann::json b{{"ok", s.B.ok}, {"min_rank", s.B.min_rank}, {"depth", depth}};
  if (s.B.first_failure) b["first_failure"] = *s.B.first_failure;
  nlohmann::json cc{{"ok", s.C.ok}};
  if (!s.C.ok) {
    cc["failing_point"] = *s.C.failing_point;
    cc["failing_basis"] = "e" + std::to_string(*s.C.failing_basis + 1);
  }
  s.json = {{"A", a}, {"B", b}, {"C", cc}};
  return s;
}

inline int cmd_check_assumptions(const ExperimentConfig& c, std::ostream& out, std::ostream& err) {
  (void)err;
  const auto spec = diffusion_of(c);
  const auto& f = spec.fields;
  const auto s = run_assumption_checks(f, bounding_box(c, f.N), c.depth, c.sample_res);
  const auto dir = out_dir(c);
  write_file((dir / "assumptions.json").string(), s.json.dump(2) + "\n");
  out << "A: " << (s.A.bounded_on_box ? "pass" : "FAIL") << " (bounded on box)\n";
  for (const auto& [name, v] : s.A.sup_norms) out << "   sup|" << name << "| = " << v << "\n";
  for (const auto& w : s.A.warnings) out << "   warning: " << w << "\n";
  out << "B: " << (s.B.ok ? "pass" : "FAIL") << " (min rank " << s.B.min_rank << " of " << f.N
      << " at depth " << c.depth << ")\n";
  out << "C: " << (s.C.ok ? "pass" : "FAIL");
  if (!s.C.ok) {
    out << " (all fields perpendicular to e" << (*s.C.failing_basis + 1) << " at (";
    for (std::size_t i = 0; i < s.C.failing_point->size(); ++i)
      out << (i ? "," : "") << (*s.C.failing_point)[i];
    out << "))";
  }
  out << "\n";
  return s.A.bounded_on_box && s.B.ok && s.C.ok ? exit_code::ok : exit_code::assumption;
}

/// Upper end of the two-sided 99% Wilson score interval.
inline double wilson_upper_99(std::size_t hits, std::size_t n) {
  constexpr double z = 2.5758293035489004;
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(hits) / nn;
  const double z2 = z * z;
  const double center = p + z2 / (2 * nn);
  const double half = z * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn));
  return std::min(1.0, (center + half) / (1 + z2 / nn));
}

struct TailRow {
  std::size_t k;
  double empirical;
  double wilson;
  std::optional<double> bound;  // clamped to 1; none below the threshold
};

struct TailResult {
  double C = 0;
  double threshold = 0;
  std::vector<TailRow> rows;
  std::size_t violations = 0;
};

inline TailResult run_tailbound(const ExperimentConfig& c, const DiffusionSpec& spec) {
  const auto& f = spec.fields;
  TailResult r;
  r.C = constant_C(f, bounding_box(c, f.N));
  const double eps = c.eps.front();
  r.threshold = 2.0 * r.C / std::pow(eps, c.mu);
  const BoxGrid grid(eps, c.mu);
  std::vector<std::size_t> hist;
  for (std::size_t i = 0; i < c.seeds; ++i) {
    const auto path = simulate(spec, {c.steps, c.base_seed + i, 0});
    const std::size_t M = extract_hitting(path, grid).M();
    if (hist.size() <= M) hist.resize(M + 1, 0);
    ++hist[M];
  }
  const auto kmax = std::max<std::size_t>(hist.size(), static_cast<std::size_t>(r.threshold) + 2);
  hist.resize(kmax, 0);
  for (std::size_t k = 0; k < kmax; ++k) {
    TailRow row{k, static_cast<double>(hist[k]) / static_cast<double>(c.seeds),
                wilson_upper_99(hist[k], c.seeds), std::nullopt};
    if (static_cast<double>(k) > r.threshold && f.d() > 0 && r.C > 0) {
      row.bound = std::min(1.0, hitting_tail_bound(f.N, f.d(), r.C, eps, c.mu, static_cast<double>(k)));
      if (row.wilson > *row.bound) ++r.violations;
    }
    r.rows.push_back(row);
  }
  return r;
}

inline int cmd_tailbound(const ExperimentConfig& c, std::ostream& out, std::ostream& err) {
  const auto spec = diffusion_of(c);
  const auto r = run_tailbound(c, spec);
  step_warning(c, r.C, err);
  const auto dir = out_dir(c);
  std::string csv = provenance_line(c.hash(), std::to_string(c.base_seed) + "+" + std::to_string(c.seeds));
  csv += "k,empirical_p,wilson_upper_99,bound\n";
  for (const auto& row : r.rows)
    csv += std::to_string(row.k) + "," + format_double(row.empirical) + "," + format_double(row.wilson) +
           "," + (row.bound ? format_double(*row.bound) : std::string("NA")) + "\n";
  write_file((dir / "tailbound.csv").string(), csv);
  out << "C = " << r.C << ", threshold 2C/eps^mu = " << r.threshold << ", rows = " << r.rows.size()
      << ", violations = " << r.violations << "\n";
  return exit_code::ok;
}

struct ReconstructSummary {
  std::vector<double> eps;
  std::vector<double> median_frechet;
  std::vector<double> sandwich_rate;
  std::vector<double> match_rate;
  std::vector<double> lambda_exceed_rate;  // P(sup|X^eps - X| > lambda eps)
  std::size_t failures = 0;
};

inline double median(std::vector<double> v) {
  std::erase_if(v, [](double x) { return !std::isfinite(x); });
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline ReconstructOptions reconstruct_options(const ExperimentConfig& c) {
  ReconstructOptions o;
  o.mu = c.mu;
  o.mu_prime = c.mu_prime;
  o.tol = c.tol;
  o.radius = c.radius;
  o.depth = c.depth;
  o.grid_res = c.grid_res;
  if (c.family_spec) o.family_fields = family_from_json(*c.family_spec);
  return o;
}

inline int cmd_reconstruct(const ExperimentConfig& c, std::ostream& out, std::ostream& err) {
  const auto spec = diffusion_of(c);
  const auto opt = reconstruct_options(c);
  step_warning(c, constant_C(spec.fields, bounding_box(c, spec.fields.N)), err);
  std::vector<OneFormFamily> fams;
  try {
    fams = prepare_families(spec, c.eps, opt);
  } catch (const LambdaNotFound& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::assumption;
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::assumption;
  }
  const auto dir = out_dir(c);
  std::string csv = provenance_line(c.hash(), std::to_string(c.base_seed) + "+" + std::to_string(c.seeds));
  csv += "seed,eps,M_H,M,M_V,sandwich_ok,frechet_dist,oracle_match,squeeze_ok,error\n";
  const std::size_t E = c.eps.size();
  std::vector<std::vector<double>> fr(E);
  std::vector<std::size_t> sand(E, 0), match(E, 0), exceed(E, 0);
  ReconstructSummary sum;
  for (std::size_t i = 0; i < c.seeds; ++i) {
    const std::uint64_t seed = c.base_seed + i;
    std::vector<EpsResult> res;
    try {
      res = reconstruct(spec, fams, {c.steps, seed, 0}, opt);
    } catch (const Error& e) {
      for (double e0 : c.eps) {
        csv += std::to_string(seed) + "," + format_double(e0) + ",,,,false,,false,false," + e.what() + "\n";
        ++sum.failures;
      }
      continue;
    }
    for (std::size_t k = 0; k < E; ++k) {
      const auto& r = res[k];
      std::string msg = r.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      csv += std::to_string(seed) + "," + format_double(r.eps) + "," + std::to_string(r.M_H) + "," +
             std::to_string(r.M) + "," + std::to_string(r.M_V) + "," + (r.sandwich_ok ? "true" : "false") +
             "," + (std::isfinite(r.frechet) ? format_double(r.frechet) : std::string()) + "," +
             (r.oracle_match ? "true" : "false") + "," + (r.squeeze_ok ? "true" : "false") + "," + msg +
             "\n";
      if (!r.error.empty()) ++sum.failures;
      fr[k].push_back(r.frechet);
      sand[k] += r.sandwich_ok;
      match[k] += r.oracle_match;
      exceed[k] += r.sup_X > c.lambda_check * r.eps;
    }
  }
  write_file((dir / "reconstruct.csv").string(), csv);
  nlohmann::json js = nlohmann::json::array();
  const double n = static_cast<double>(c.seeds);
  for (std::size_t k = 0; k < E; ++k) {
    sum.eps.push_back(c.eps[k]);
    sum.median_frechet.push_back(median(fr[k]));
    sum.sandwich_rate.push_back(static_cast<double>(sand[k]) / n);
    sum.match_rate.push_back(static_cast<double>(match[k]) / n);
    sum.lambda_exceed_rate.push_back(static_cast<double>(exceed[k]) / n);
    js.push_back({{"eps", c.eps[k]},
                  {"lambda", fams[k].lambda()},
                  {"median_frechet", sum.median_frechet.back()},
                  {"sandwich_rate", sum.sandwich_rate.back()},
                  {"word_match_rate", sum.match_rate.back()},
                  {"lambda_exceed_rate", sum.lambda_exceed_rate.back()}});
    out << "eps=" << c.eps[k] << " median_frechet=" << sum.median_frechet.back()
        << " sandwich_rate=" << sum.sandwich_rate.back() << " word_match_rate=" << sum.match_rate.back()
        << "\n";
  }
  write_file((dir / "summary.json").string(),
             nlohmann::json{{"config_hash", hex64(c.hash())}, {"per_eps", js}, {"failures", sum.failures}}
                     .dump(2) +
                 "\n");
  return exit_code::ok;
}

/// Distance between a stored path and a PLT (JSON array of points) or another
/// stored path taken as the PLT of its samples.
inline double frechet_files(const std::string& path_file, const std::string& other_file,
                            double delta = 0.0) {
  const SamplePath gamma = path_from_csv(read_file(path_file), path_file);
  const std::string text = read_file(other_file);
  std::size_t p = text.find_first_not_of(" \t\r\n");
  PLT T;
  if (p != std::string::npos && (text[p] == '[' || text[p] == '{')) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw UsageError("'" + other_file + "' is not valid JSON: " + e.what());
    }
    T = plt_from_json(j);
  } else {
    T = path_from_csv(text, other_file).as_plt();
  }
  if (T.dim() != gamma.dim())
    throw UsageError("dimension mismatch: " + path_file + " has " + std::to_string(gamma.dim()) +
                     " coordinates, " + other_file + " has " + std::to_string(T.dim()));
  return trajectory_distance(T, gamma, delta);
}

}  // namespace sigrecon
