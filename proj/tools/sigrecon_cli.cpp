#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <sigrecon/experiment.hpp>
#include <sstream>

namespace {

struct Overrides {
  std::string config;
  std::string spec;
  std::string family_spec;
  std::optional<std::string> out;
  std::optional<std::size_t> seeds;
  std::optional<std::uint64_t> base_seed;
  std::optional<std::string> eps;
  std::optional<std::size_t> steps;
  std::optional<double> tol;
  std::optional<long> radius;
  std::optional<double> lambda_check;
  std::optional<std::size_t> depth;
  std::optional<double> box;
};

std::vector<double> parse_eps_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(sigrecon::parse_double(item, "--eps"));
  return out;
}

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "experiment config JSON");
  cmd->add_option("--spec", o.spec, "field spec JSON (overrides the config)");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--seeds", o.seeds, "number of seeds");
  cmd->add_option("--base-seed", o.base_seed, "first seed");
  cmd->add_option("--eps", o.eps, "comma separated, strictly decreasing");
  cmd->add_option("--steps", o.steps, "time steps per path");
  cmd->add_option("--tol", o.tol, "nonvanishing tolerance");
  cmd->add_option("--radius", o.radius, "word search radius");
}

sigrecon::ExperimentConfig build_config(const Overrides& o) {
  using namespace sigrecon;
  ExperimentConfig c;
  if (!o.config.empty()) {
    const auto base = std::filesystem::path(o.config).parent_path().string();
    c = config_from_json(load_json_file(o.config), base.empty() ? "." : base);
  }
  if (!o.spec.empty()) c.spec = load_json_file(o.spec);
  if (!o.family_spec.empty()) c.family_spec = load_json_file(o.family_spec);
  if (o.out) c.out = *o.out;
  if (o.seeds) c.seeds = *o.seeds;
  if (o.base_seed) c.base_seed = *o.base_seed;
  if (o.eps) c.eps = parse_eps_list(*o.eps);
  if (o.steps) c.steps = *o.steps;
  if (o.tol) c.tol = *o.tol;
  if (o.radius) c.radius = *o.radius;
  if (o.lambda_check) c.lambda_check = *o.lambda_check;
  if (o.depth) c.depth = *o.depth;
  if (o.box) c.box = *o.box;
  c.validate();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace sigrecon;
  CLI::App app{"signature reconstruction of hypoelliptic diffusions"};
  app.require_subcommand(1);
  Overrides o;

  auto* sim = app.add_subcommand("simulate", "simulate one path per seed");
  add_common(sim, o);
  auto* chk = app.add_subcommand("check-assumptions", "check assumptions A, B, C on the box");
  add_common(chk, o);
  chk->add_option("--depth", o.depth, "bracket depth");
  chk->add_option("--box", o.box, "half width of the bounding box");
  auto* tail = app.add_subcommand("tailbound", "hitting count histogram vs the tail bound");
  add_common(tail, o);
  tail->add_option("--box", o.box, "half width of the bounding box");
  auto* rec = app.add_subcommand("reconstruct", "signature-only reconstruction sweep");
  add_common(rec, o);
  rec->add_option("--family-spec", o.family_spec, "fields used to build the 1-forms");
  rec->add_option("--lambda", o.lambda_check, "lambda in sup|X^eps - X| > lambda eps");
  rec->add_option("--depth", o.depth, "bracket depth for the lifted rank check");

  auto* fr = app.add_subcommand("frechet", "trajectory distance between stored files");
  std::string fa, fb;
  double delta = 0.0;
  fr->add_option("path", fa, "path CSV")->required();
  fr->add_option("other", fb, "path CSV or PLT JSON")->required();
  fr->add_option("--delta", delta, "subdivision step (default: largest path step)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? exit_code::ok : exit_code::usage;
  }

  try {
    if (fr->parsed()) {
      std::cout << format_double(frechet_files(fa, fb, delta)) << "\n";
      return exit_code::ok;
    }
    const ExperimentConfig c = build_config(o);
    if (sim->parsed()) return cmd_simulate(c, std::cout, std::cerr);
    if (chk->parsed()) return cmd_check_assumptions(c, std::cout, std::cerr);
    if (tail->parsed()) return cmd_tailbound(c, std::cout, std::cerr);
    if (rec->parsed()) return cmd_reconstruct(c, std::cout, std::cerr);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return exit_code::usage;
  } catch (const InvalidInput& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return exit_code::usage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code::runtime;
  }
  return exit_code::usage;
}
