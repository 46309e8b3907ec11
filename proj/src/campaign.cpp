#include "mixedspec/campaign.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "mixedspec/cocycle.hpp"
#include "mixedspec/gordon.hpp"
#include "mixedspec/reducibility.hpp"
#include "mixedspec/spectrum.hpp"
#include "mixedspec/svg.hpp"

namespace mixedspec {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

json finite_or_string(double x) {
  if (std::isfinite(x)) return x;
  return fmt(x);
}

std::vector<double> energy_grid(const json& e) {
  const double lo = e.at("min").get<double>();
  const double hi = e.at("max").get<double>();
  const double step = e.at("step").get<double>();
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = lo + static_cast<double>(i) * step;
  return out;
}

std::vector<double> coupling_list(const json& cfg) {
  const auto& k = cfg.at("grid").at("K");
  if (k.is_null()) return {cfg.at("model").at("K").get<double>()};
  return k.get<std::vector<double>>();
}

std::vector<std::string> omega_list(const json& cfg) {
  const auto& o = cfg.at("grid").at("omegas");
  if (!o.is_null()) return o.get<std::vector<std::string>>();
  const auto& m = cfg.at("model").at("omega");
  if (m.is_string()) return {m.get<std::string>()};
  return {};
}

ModelParams model_with(const json& cfg, const std::string& omega, double k) {
  json m = cfg.at("model");
  m["K"] = k;
  if (!omega.empty()) m["omega"] = omega;
  return model_from_json(m);
}

std::string omega_id(const json& cfg, const std::string& omega) {
  if (!omega.empty()) return omega;
  return cfg.at("model").at("omega").value("name", std::string("cf"));
}

// Uniform doubles in [0, 1) from the top 53 bits of mt19937_64, which is
// specified exactly by the standard (unlike the distribution classes).
std::vector<double> seeded_thetas(std::uint64_t seed, std::size_t count) {
  std::mt19937_64 rng(seed);
  std::vector<double> out(count);
  for (auto& t : out) t = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return out;
}

class Outputs {
 public:
  explicit Outputs(const json& cfg) : cfg_(cfg) {
    dir_ = cfg.at("outputs").at("dir").get<std::string>();
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_))
      throw ConfigError("output directory '" + dir_.string() + "' is not usable");
  }

  bool svg() const { return cfg_.at("outputs").at("svg").get<bool>(); }

  void write(const std::string& name, const std::string& body) {
    const fs::path path = dir_ / name;
    std::ofstream out(path, std::ios::binary);
    out << body;
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    files_.push_back(path.string());
  }

  void write_csv(const std::string& name, const std::string& columns,
                 const std::vector<std::string>& rows) {
    std::string body = header_line(cfg_) + "\n" + columns + "\n";
    for (const auto& r : rows) body += r + "\n";
    write(name, body);
  }

  void write_json(const std::string& name, json payload) {
    payload["meta"] = {{"version", kVersion},
                       {"config_hash", config_hash(cfg_)},
                       {"config", cfg_}};
    write(name, payload.dump(2) + "\n");
  }

  std::vector<std::string> files() const { return files_; }

 private:
  const json& cfg_;
  fs::path dir_;
  std::vector<std::string> files_;
};

std::string join(std::initializer_list<std::string> parts) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += ',';
    out += p;
  }
  return out;
}

void run_lyapunov(const json& cfg, Outputs& out) {
  const auto& grid = cfg.at("grid");
  const auto energies = energy_grid(grid.at("E"));
  const auto n = grid.at("n").get<std::size_t>();
  const auto phases = grid.at("phases").get<std::size_t>();
  const auto workers = cfg.at("workers").get<unsigned>();
  std::vector<std::string> rows;
  std::vector<svg::Series> curves;
  auto omegas = omega_list(cfg);
  if (omegas.empty()) omegas.push_back("");
  for (const auto& om : omegas) {
    for (double k : coupling_list(cfg)) {
      const ModelParams params = model_with(cfg, om, k);
      const std::string id = omega_id(cfg, om);
      svg::Series s{id + " K=" + fmt(k), {}, {}};
      for (double e : energies) {
        const auto est = finite_lyapunov(params, e, n, phases, workers);
        rows.push_back(join({fmt(e), id, fmt(k), std::to_string(n),
                             std::to_string(phases), fmt(est.value), fmt(est.std_error)}));
        s.x.push_back(e);
        s.y.push_back(est.value);
      }
      curves.push_back(std::move(s));
    }
  }
  out.write_csv("lyapunov.csv", "E,omega_id,K,n,phases,L,stderr", rows);
  if (out.svg())
    out.write("lyapunov.svg",
              svg::line_plot("Finite Lyapunov exponent", "E", "L(E)", curves));
}

void run_spectrum(const json& cfg, Outputs& out) {
  const auto& grid = cfg.at("grid");
  const ModelParams params = model_from_json(cfg.at("model"));
  const auto n = grid.at("N").get<std::size_t>();
  const auto thetas =
      seeded_thetas(cfg.at("seed").get<std::uint64_t>(), grid.at("thetas").get<std::size_t>());
  std::vector<std::string> rows;
  svg::Series ladder{"eigenvalues", {}, {}};
  for (double theta : thetas) {
    const auto op = build_finite(params, theta, n);
    auto [a, b] = op.gershgorin();
    if (!grid.at("window").is_null()) {
      a = grid.at("window").at(0).get<double>();
      b = grid.at("window").at(1).get<double>();
    }
    for (const auto& r : analyze(op, a, b, 1e-12 * std::max(1.0, std::abs(b)))) {
      rows.push_back(join({fmt(r.theta), std::to_string(r.n), std::to_string(r.index),
                           fmt(r.energy), fmt(r.residual), fmt(r.decay_rate),
                           fmt(r.fit_quality)}));
      ladder.x.push_back(r.theta);
      ladder.y.push_back(r.energy);
    }
  }
  out.write_csv("spectrum.csv", "theta,N,index,E,residual,decay_rate,fit_quality", rows);
  if (out.svg())
    out.write("spectrum.svg",
              svg::scatter_plot("Eigenvalue ladder, N = " + std::to_string(n), "theta",
                                "E", {ladder}));
}

void run_reduce(const json& cfg, Outputs& out) {
  const auto& grid = cfg.at("grid");
  const ModelParams params = model_from_json(cfg.at("model"));
  const auto conj = build_conjugation(params, grid.at("divisor_floor").get<double>());
  json report = to_json(conj);
  const double e_max = grid.at("e_max").get<double>();
  const auto pr = perturbation_report(conj, e_max);
  report["perturbation"] = {{"norm_F", pr.norm_F},
                            {"norm_A0", pr.norm_A0},
                            {"threshold_heuristic", pr.threshold_heuristic},
                            {"threshold_is_heuristic", true},
                            {"e_max", pr.e_max},
                            {"e_max_below_heuristic", pr.e_max_below_heuristic}};
  const auto probes = grid.at("probes").get<std::size_t>();
  if (probes > 0) {
    std::vector<double> energies;
    for (std::size_t i = 1; i <= probes; ++i)
      energies.push_back(e_max * static_cast<double>(i) / static_cast<double>(probes));
    json rows = json::array();
    for (const auto& r : subcritical_probe(params, energies, grid.at("n").get<std::size_t>(),
                                           grid.at("phases").get<std::size_t>(),
                                           cfg.at("workers").get<unsigned>())) {
      rows.push_back({{"E", r.energy},
                      {"L", r.lyapunov},
                      {"stderr", r.std_error},
                      {"rotation", r.rotation},
                      {"flagged", r.flagged}});
    }
    report["probe"] = rows;
  }
  out.write_json("reduce.json", report);
}

void run_gordon(const json& cfg, Outputs& out) {
  const auto& grid = cfg.at("grid");
  const ModelParams params = model_from_json(cfg.at("model"));
  const auto rep = gordon_report(params, grid.at("energy").get<double>(),
                                 grid.at("theta").get<double>(),
                                 grid.at("stages").get<std::size_t>());
  std::vector<std::string> rows;
  for (const auto& r : rep.per_scale)
    rows.push_back(join({std::to_string(r.n), std::to_string(r.q), fmt(r.approximant_error),
                         fmt(r.envelope), fmt(r.telescoping), fmt(r.ch_quantity),
                         fmt(r.lower_bound)}));
  out.write_csv("gordon.csv",
                "n,q,approximant_error,envelope,telescoping,ch_quantity,lower_bound", rows);
  out.write_json("gordon.json", to_json(rep));
}

void run_classify(const json& cfg, Outputs& out) {
  const auto& grid = cfg.at("grid");
  const DiophantineParams dc(grid.at("kappa").get<double>(), grid.at("tau").get<double>());
  const mpz_class range(grid.at("range").get<std::string>());
  auto omegas = omega_list(cfg);
  if (omegas.empty()) omegas.push_back("");
  json items = json::array();
  std::vector<std::string> rows;
  for (const auto& om : omegas) {
    const ModelParams params = model_with(cfg, om, cfg.at("model").at("K").get<double>());
    const auto& w = params.omega();
    json item{{"omega_id", omega_id(cfg, om)}, {"frequency", to_json(w)}};
    double bp = 0.0, tail = 0.0;
    if (w.is_rational()) {
      item["beta"] = nullptr;
    } else {
      const auto b = beta(w, 30);
      bp = b.value;
      tail = b.tail;
      item["beta"] = {{"value", b.value}, {"tail", b.tail}, {"argmax_stage", b.argmax_stage}};
    }
    const auto v = check_dc(w, dc, range);
    const auto s = check_sdc(w, dc.kappa, range);
    const auto crit = criterion(params);
    item["dc"] = {{"pass", v.pass},
                  {"witness", v.witness.get_str()},
                  {"log_margin", finite_or_string(v.log_margin)},
                  {"checked_up_to", v.checked_up_to.get_str()}};
    item["sdc"] = {{"pass", s.pass},
                   {"witness", s.witness.get_str()},
                   {"log_margin", finite_or_string(s.log_margin)}};
    item["criterion"] = {{"K", params.coupling()},
                         {"met", crit.met},
                         {"margin", crit.margin},
                         {"degenerate_k0", crit.degenerate_k0},
                         {"caveat", crit.caveat}};
    items.push_back(item);
    rows.push_back(join({omega_id(cfg, om), fmt(bp), fmt(tail), v.pass ? "1" : "0",
                         s.pass ? "1" : "0", crit.met ? "1" : "0", fmt(crit.margin)}));
  }
  out.write_csv("classify.csv",
                "omega_id,beta_proxy,beta_tail,dc_pass,sdc_pass,criterion_met,margin", rows);
  out.write_json("classify.json", {{"frequencies", items}});
}

void run_phase_diagram(const json& cfg, Outputs& out) {
  const auto& grid = cfg.at("grid");
  const auto energies = energy_grid(grid.at("E"));
  const auto n = grid.at("n").get<std::size_t>();
  const auto phases = grid.at("phases").get<std::size_t>();
  const auto workers = cfg.at("workers").get<unsigned>();
  const double zero_cut = grid.at("zero_cut").get<double>();
  std::vector<std::string> rows;
  svg::Series zero{"L < " + fmt(zero_cut), {}, {}}, positive{"L >= " + fmt(zero_cut), {}, {}};
  for (double k : coupling_list(cfg)) {
    const ModelParams params = model_with(cfg, "", k);
    for (double e : energies) {
      const auto est = finite_lyapunov(params, e, n, phases, workers);
      rows.push_back(join({fmt(k), fmt(e), fmt(est.value), fmt(est.std_error)}));
      auto& s = est.value < zero_cut ? zero : positive;
      s.x.push_back(e);
      s.y.push_back(k);
    }
  }
  out.write_csv("phase_diagram.csv", "K,E,L,stderr", rows);
  if (out.svg())
    out.write("phase_diagram.svg",
              svg::scatter_plot("Lyapunov regimes", "E", "K", {zero, positive}));
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

json default_config() {
  return {
      {"scan", "scan-lyapunov"},
      {"model", {{"f", "default"}, {"h", kDefaultStrip}, {"K", 0.0}, {"omega", "golden"}}},
      {"grid",
       {{"E", {{"min", -1.0}, {"max", 6.0}, {"step", 0.05}}},
        {"K", nullptr},
        {"omegas", nullptr},
        {"n", 100000},
        {"phases", 64},
        {"N", 400},
        {"thetas", 4},
        {"window", nullptr},
        {"divisor_floor", kDivisorFloor},
        {"e_max", 0.01},
        {"probes", 0},
        {"energy", 0.5},
        {"theta", 0.0},
        {"stages", 8},
        {"kappa", 0.1},
        {"tau", 2.0},
        {"range", "1000000"},
        {"zero_cut", 0.05}}},
      {"outputs", {{"dir", "."}, {"svg", true}}},
      {"workers", 1},
      {"seed", 0}};
}

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
}

json resolve_config(const std::string& command, const json& file_config,
                    const json& overrides) {
  if (std::find(kCommands.begin(), kCommands.end(), command) == kCommands.end())
    throw ConfigError("unknown command '" + command + "'");
  require(file_config.is_null() || file_config.is_object(), "config must be an object");
  json cfg = default_config();
  if (!file_config.is_null()) cfg.merge_patch(file_config);
  cfg.merge_patch(overrides);
  cfg["scan"] = command;
  try {
    const auto& g = cfg.at("grid");
    const auto& e = g.at("E");
    require(e.at("step").get<double>() > 0.0, "grid.E.step must be positive");
    require(e.at("max").get<double>() >= e.at("min").get<double>(),
            "grid.E.max must be >= grid.E.min");
    require(g.at("n").get<long>() > 0, "grid.n must be positive");
    require(g.at("phases").get<long>() > 0, "grid.phases must be positive");
    require(g.at("N").get<long>() >= 2, "grid.N must be >= 2");
    require(g.at("thetas").get<long>() > 0, "grid.thetas must be positive");
    require(g.at("stages").get<long>() >= 1, "grid.stages must be >= 1");
    require(cfg.at("workers").get<long>() >= 1, "workers must be >= 1");
    (void)cfg.at("seed").get<std::uint64_t>();
    (void)cfg.at("outputs").at("dir").get<std::string>();
    (void)cfg.at("outputs").at("svg").get<bool>();
    (void)mpz_class(g.at("range").get<std::string>());
    (void)DiophantineParams(g.at("kappa").get<double>(), g.at("tau").get<double>());
    if (!g.at("window").is_null())
      require(g.at("window").size() == 2 &&
                  g.at("window").at(0).get<double>() < g.at("window").at(1).get<double>(),
              "grid.window must be [a, b] with a < b");
    (void)model_from_json(cfg.at("model"));
    for (double k : coupling_list(cfg)) require(std::isfinite(k), "K must be finite");
    for (const auto& om : omega_list(cfg)) (void)parse_frequency(om);
  } catch (const ConfigError&) {
    throw;
  } catch (const ResourceError&) {
    throw;
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("invalid config value: ") + ex.what());
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(std::string("invalid config value: ") + ex.what());
  } catch (const Error& ex) {
    throw ConfigError(ex.what());
  }
  return cfg;
}

std::string config_hash(const json& resolved) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : resolved.dump()) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string header_line(const json& resolved) {
  return std::string("# mixedspec ") + kVersion +
         " modules=fourier-core,arithmetic,cocycle,spectrum,reducibility,gordon,cli@" +
         kVersion + " config_hash=" + config_hash(resolved) + " config=" + resolved.dump();
}

CampaignResult run_campaign(const json& resolved) {
  Outputs out(resolved);
  const auto scan = resolved.at("scan").get<std::string>();
  if (scan == "scan-lyapunov")
    run_lyapunov(resolved, out);
  else if (scan == "spectrum")
    run_spectrum(resolved, out);
  else if (scan == "reduce")
    run_reduce(resolved, out);
  else if (scan == "gordon-probe")
    run_gordon(resolved, out);
  else if (scan == "classify-freq")
    run_classify(resolved, out);
  else if (scan == "phase-diagram")
    run_phase_diagram(resolved, out);
  else
    throw ConfigError("unknown scan '" + scan + "'");
  return {out.files()};
}

int exit_code_for(const std::exception& e) noexcept {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const json::exception*>(&e)) return 2;
  if (dynamic_cast<const ResourceError*>(&e)) return 4;
  if (dynamic_cast<const Error*>(&e)) return 3;
  return 3;
}

}  // namespace mixedspec
