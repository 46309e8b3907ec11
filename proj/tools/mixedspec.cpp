// Command-line driver: mixedspec <command> [--config PATH] [--out DIR] ...
#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>

#include "mixedspec/campaign.hpp"

using nlohmann::json;

namespace {

struct Flags {
  std::string config;
  std::optional<std::string> out;
  std::optional<unsigned> workers;
  std::optional<std::uint64_t> seed;
  std::optional<double> k;
  std::vector<double> k_list;
  std::optional<std::string> omega;
  std::vector<std::string> omegas;
  std::optional<double> e_min, e_max_grid, e_step;
  std::optional<long> n, phases, big_n, thetas, stages, probes;
  std::optional<double> energy, theta, e_max, kappa, tau;
  std::optional<std::string> range;
  bool no_svg = false;
};

void add_flags(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "JSON campaign config");
  sub->add_option("--out", f.out, "output directory");
  sub->add_option("--workers", f.workers, "worker threads")->check(CLI::PositiveNumber);
  sub->add_option("--seed", f.seed, "seed for sampled phases");
  sub->add_option("--K", f.k, "coupling");
  sub->add_option("--K-list", f.k_list, "couplings to scan")->delimiter(',');
  sub->add_option("--omega", f.omega, "golden | silver | p/q | cf:... | liouville:B");
  sub->add_option("--omegas", f.omegas, "frequencies to scan")->delimiter(',');
  sub->add_option("--E-min", f.e_min);
  sub->add_option("--E-max", f.e_max_grid);
  sub->add_option("--E-step", f.e_step);
  sub->add_option("--n", f.n, "cocycle product length");
  sub->add_option("--phases", f.phases, "phase samples");
  sub->add_option("--N", f.big_n, "truncation size");
  sub->add_option("--thetas", f.thetas, "number of phases for spectra");
  sub->add_option("--stages", f.stages, "continued-fraction stages");
  sub->add_option("--probes", f.probes, "subcritical probe energies");
  sub->add_option("--energy", f.energy);
  sub->add_option("--theta", f.theta);
  sub->add_option("--e-max", f.e_max, "perturbation window (reduce)");
  sub->add_option("--kappa", f.kappa);
  sub->add_option("--tau", f.tau);
  sub->add_option("--range", f.range, "Diophantine scan range");
  sub->add_flag("--no-svg", f.no_svg);
}

json overrides_of(const Flags& f) {
  json o = json::object();
  if (f.out) o["outputs"]["dir"] = *f.out;
  if (f.no_svg) o["outputs"]["svg"] = false;
  if (f.workers) o["workers"] = *f.workers;
  if (f.seed) o["seed"] = *f.seed;
  if (f.k) o["model"]["K"] = *f.k;
  if (f.omega) o["model"]["omega"] = *f.omega;
  if (!f.k_list.empty()) o["grid"]["K"] = f.k_list;
  if (!f.omegas.empty()) o["grid"]["omegas"] = f.omegas;
  if (f.e_min) o["grid"]["E"]["min"] = *f.e_min;
  if (f.e_max_grid) o["grid"]["E"]["max"] = *f.e_max_grid;
  if (f.e_step) o["grid"]["E"]["step"] = *f.e_step;
  if (f.n) o["grid"]["n"] = *f.n;
  if (f.phases) o["grid"]["phases"] = *f.phases;
  if (f.big_n) o["grid"]["N"] = *f.big_n;
  if (f.thetas) o["grid"]["thetas"] = *f.thetas;
  if (f.stages) o["grid"]["stages"] = *f.stages;
  if (f.probes) o["grid"]["probes"] = *f.probes;
  if (f.energy) o["grid"]["energy"] = *f.energy;
  if (f.theta) o["grid"]["theta"] = *f.theta;
  if (f.e_max) o["grid"]["e_max"] = *f.e_max;
  if (f.kappa) o["grid"]["kappa"] = *f.kappa;
  if (f.tau) o["grid"]["tau"] = *f.tau;
  if (f.range) o["grid"]["range"] = *f.range;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral experiments for the mixed exponential quasi-periodic operator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", mixedspec::kVersion);
  Flags flags;
  const std::map<std::string, std::string> about = {
      {"scan-lyapunov", "Lyapunov exponent over an energy grid"},
      {"spectrum", "finite-volume eigenvalues, eigenvector decay and gaps"},
      {"reduce", "conjugate A(theta, 0) to a constant and probe small E"},
      {"gordon-probe", "periodic-approximant and Cayley-Hamilton diagnostics"},
      {"classify-freq", "beta, Diophantine and strong Diophantine checks"},
      {"phase-diagram", "Lyapunov exponent over a (K, E) grid"}};
  for (const auto& name : mixedspec::kCommands)
    add_flags(app.add_subcommand(name, about.at(name)), flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    json file_config;
    if (!flags.config.empty()) file_config = mixedspec::load_config_file(flags.config);
    const json resolved = mixedspec::resolve_config(command, file_config, overrides_of(flags));
    const auto result = mixedspec::run_campaign(resolved);
    for (const auto& path : result.files) std::cout << path << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "mixedspec: " << e.what() << "\n";
    return mixedspec::exit_code_for(e);
  }
}
