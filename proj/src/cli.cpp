#include "treepoly/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "treepoly/conductance.hpp"
#include "treepoly/engine.hpp"
#include "treepoly/environment.hpp"
#include "treepoly/errors.hpp"
#include "treepoly/experiments.hpp"
#include "treepoly/report.hpp"
#include "treepoly/theory.hpp"
#include "treepoly/verify.hpp"

namespace treepoly::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kHelpFooter =
    "Commands:\n"
    "  theory-scan   critical-point table over a beta grid\n"
    "  simulate      Z_0..Z_depth on one environment\n"
    "  chi           partial sums of the quenched susceptibility\n"
    "  estimate-hq   finite-depth free energy against h_q\n"
    "  moments       fractional and second moments over replicas\n"
    "  survival      P(Z_n > (r(theta_c) - eps)^(n/theta_c)) over replicas\n"
    "  verify        brute-force oracle suite\n"
    "\n"
    "Precedence: flags > TREEPOLY_THREADS (threads only) > --config file > defaults.\n"
    "\n"
    "Exit codes:\n"
    "  0  ok\n"
    "  1  unknown command or bad flags\n"
    "  2  invalid configuration (law spec, grid, key)\n"
    "  3  work budget exceeded\n"
    "  4  verification failure\n"
    "  5  quantity undefined for the input (e.g. weak disorder)\n";

const std::vector<std::string> kCommands = {"theory-scan", "simulate", "chi",
                                            "estimate-hq", "moments",  "survival",
                                            "verify"};

void write_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string());
    f << content;
    f.flush();
    if (!f) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

class Writer {
 public:
  Writer(const RunConfig& config, std::ostream& out)
      : dir_(config.output_dir), out_(out) {
    header_ = "treepoly " + std::string(kVersion) + " " + describe(config);
    config_json_["version"] = kVersion;
    for (auto key : config_keys()) {
      if (key == "threads" || key == "output_dir") continue;
      config_json_[std::string(key)] = get_field(config, key);
    }
    fs::create_directories(dir_);
  }

  void csv(const std::string& name, const ExperimentReport& report) {
    emit(name, to_csv(report, header_));
  }

  void json(const std::string& name, const std::vector<const ExperimentReport*>& reports) {
    nlohmann::ordered_json j;
    j["config"] = config_json_;
    if (reports.size() == 1) {
      j["report"] = to_json(*reports.front());
    } else {
      auto arr = nlohmann::ordered_json::array();
      for (const auto* r : reports) arr.push_back(to_json(*r));
      j["reports"] = std::move(arr);
    }
    emit(name, j.dump(2) + "\n");
  }

 private:
  void emit(const std::string& name, const std::string& content) {
    const auto path = dir_ / name;
    write_atomic(path, content);
    out_ << "wrote " << path.string() << "\n";
  }

  fs::path dir_;
  std::ostream& out_;
  std::string header_;
  nlohmann::ordered_json config_json_;
};

ConductanceLaw require_law(const RunConfig& c) {
  if (c.law.empty()) throw ConfigError("command '" + c.command + "' needs a law");
  return parse_law(c.law);
}

double scalar_beta(const RunConfig& c) {
  const auto grid = expand_grid(c.beta);
  if (grid.size() != 1) {
    throw ConfigError("command '" + c.command + "' needs a single beta, not a grid");
  }
  return grid.front();
}

engine::EngineOptions engine_options(const RunConfig& c) {
  engine::EngineOptions o;
  o.work_budget = c.work_budget;
  o.split_depth = c.split_depth;
  o.threads = c.threads;
  return o;
}

experiments::McSetup mc_setup(const RunConfig& c) {
  experiments::McSetup s;
  s.law = require_law(c);
  s.beta = scalar_beta(c);
  s.ell = c.ell;
  s.depth = c.depth;
  s.replicas = c.replicas;
  s.seed = c.seed;
  s.threads = c.threads;
  s.work_budget = c.work_budget;
  s.split_depth = c.split_depth;
  if (s.replicas < experiments::kMinReplicas) {
    throw ConfigError("replicas must be >= " + std::to_string(experiments::kMinReplicas));
  }
  return s;
}

std::vector<int> n_range(const RunConfig& c) {
  if (c.n_min > c.depth) throw ConfigError("n_min exceeds depth");
  std::vector<int> out;
  for (int n = c.n_min; n <= c.depth; ++n) out.push_back(n);
  return out;
}

int theory_scan(const RunConfig& c, Writer& w) {
  const auto law = require_law(c);
  const auto grid = expand_grid(c.beta);
  const auto report = experiments::phase_scan(law, c.ell, grid);
  w.csv("theory_scan.csv", report);
  w.json("theory_scan.json", {&report});
  return kOk;
}

int simulate(const RunConfig& c, Writer& w) {
  const auto law = require_law(c);
  const double beta = scalar_beta(c);
  const Environment env(law, c.seed, c.ell);
  const auto mode = c.mode == "forward" ? engine::TreeMode::forward : engine::TreeMode::root;
  const auto p = engine::compute_profile(env, beta, c.depth, mode, engine_options(c));
  ExperimentReport r;
  r.id = "simulate";
  r.parameters["law"] = format_law(law);
  r.parameters["beta"] = beta;
  r.parameters["ell"] = c.ell;
  r.parameters["depth"] = c.depth;
  r.parameters["seed"] = c.seed;
  r.parameters["mode"] = c.mode;
  r.columns = {"n", "z", "log_unnormalized", "free_energy"};
  for (int n = 0; n <= c.depth; ++n) {
    const auto i = static_cast<std::size_t>(n);
    r.rows.push_back({static_cast<long long>(n), p.z[i], p.log_unnormalized[i],
                      p.free_energy[i]});
  }
  r.summary["z_final"] = p.z.back();
  r.summary["h_a"] = theory::annealed_critical_point(law, beta, c.ell);
  w.csv("simulate.csv", r);
  w.json("simulate.json", {&r});
  return kOk;
}

int chi(const RunConfig& c, Writer& w) {
  const auto law = require_law(c);
  const double beta = scalar_beta(c);
  const double h_a = theory::annealed_critical_point(law, beta, c.ell);
  const double h = c.h ? *c.h : h_a + c.delta;
  const Environment env(law, c.seed, c.ell);
  const auto s = engine::susceptibility(env, beta, h, c.depth, engine_options(c));
  ExperimentReport r;
  r.id = "chi";
  r.parameters["law"] = format_law(law);
  r.parameters["beta"] = beta;
  r.parameters["ell"] = c.ell;
  r.parameters["depth"] = c.depth;
  r.parameters["seed"] = c.seed;
  r.parameters["h"] = h;
  r.columns = {"n", "log_term", "partial_sum"};
  for (std::size_t n = 0; n < s.partial_sums.size(); ++n) {
    r.rows.push_back({static_cast<long long>(n), s.log_terms[n], s.partial_sums[n]});
  }
  r.summary["h_a"] = h_a;
  r.summary["tail_ratio"] = s.tail_ratio;
  r.summary["tail_estimate"] = s.tail_estimate;
  r.summary["nondecreasing_run"] = s.nondecreasing_run;
  r.summary["diverging"] = s.diverging;
  w.csv("chi.csv", r);
  w.json("chi.json", {&r});
  return kOk;
}

int estimate_hq(const RunConfig& c, Writer& w) {
  const auto batch = experiments::draw_replicas(mc_setup(c));
  const auto r = experiments::quenched_point_estimate(batch);
  w.csv("estimate_hq.csv", r);
  w.json("estimate_hq.json", {&r});
  return kOk;
}

int moments(const RunConfig& c, Writer& w) {
  const auto batch = experiments::draw_replicas(mc_setup(c));
  const auto ns = n_range(c);
  const auto frac = experiments::mc_fractional_moment(batch, c.theta, ns);
  const auto second = experiments::mc_second_moment(batch, ns);
  w.csv("moments_fractional.csv", frac);
  w.csv("moments_second.csv", second);
  w.json("moments.json", {&frac, &second});
  return kOk;
}

int survival(const RunConfig& c, Writer& w) {
  const auto setup = mc_setup(c);
  const double eps =
      c.eps ? *c.eps : experiments::default_survival_eps(setup.law, setup.beta, setup.ell);
  // Reject weak disorder before paying for the replicas.
  theory::theta_c(setup.law, setup.beta, setup.ell);
  const auto batch = experiments::draw_replicas(setup);
  const auto r = experiments::survival_probability(batch, eps, n_range(c));
  w.csv("survival.csv", r);
  w.json("survival.json", {&r});
  return kOk;
}

int verify(const RunConfig& c, Writer& w, std::ostream& out) {
  oracle::VerifyOptions o;
  o.threads = c.threads;
  const auto r = oracle::run_verification(o);
  w.json("verify.json", {&r});
  std::size_t failed = 0;
  for (const auto& check : r.checks) {
    if (!check.informational && !check.passed) {
      ++failed;
      out << "FAIL " << check.name << "\n";
    }
  }
  out << r.checks.size() << " checks, " << failed << " failed\n";
  return failed == 0 ? kOk : kVerifyFailed;
}

}  // namespace

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    if (std::find(kCommands.begin(), kCommands.end(), config.command) == kCommands.end()) {
      err << "unknown command '" << config.command << "'\n";
      return kUsage;
    }
    Writer writer(config, out);
    const auto& cmd = config.command;
    if (cmd == "theory-scan") return theory_scan(config, writer);
    if (cmd == "simulate") return simulate(config, writer);
    if (cmd == "chi") return chi(config, writer);
    if (cmd == "estimate-hq") return estimate_hq(config, writer);
    if (cmd == "moments") return moments(config, writer);
    if (cmd == "survival") return survival(config, writer);
    return verify(config, writer, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const BudgetExceeded& e) {
    err << "budget exceeded: " << e.what() << "\n";
    return kBudget;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << "\n";
    return kDomainError;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  }
}

ParsedArgs parse_args(int argc, char** argv) {
  ParsedArgs result;
  CLI::App app{"Directed polymers on disordered trees: theory, exact engine, Monte Carlo"};
  app.footer(kHelpFooter);
  app.set_help_flag("--help", "print this help and exit");
  app.set_version_flag("--version", std::string(kVersion));
  std::string command;
  std::string config_file;
  app.add_option("command", command, "command to run")->required();
  app.add_option("--config", config_file, "key=value config file");
  std::map<std::string, std::string> flags;
  for (auto key : config_keys()) {
    if (key == "command") continue;
    std::string name = "--" + std::string(key);
    for (auto& ch : name) {
      if (ch == '_') ch = '-';
    }
    app.add_option_function<std::string>(
        name, [&flags, k = std::string(key)](const std::string& v) { flags[k] = v; },
        "overrides " + std::string(key));
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    result.exit_code = code == 0 ? kOk : kUsage;
    return result;
  }
  try {
    if (!config_file.empty()) {
      std::ifstream f(config_file, std::ios::binary);
      if (!f) throw ConfigError("cannot read config file " + config_file);
      std::ostringstream text;
      text << f.rdbuf();
      apply_text(result.config, text.str());
    }
    if (const char* env = std::getenv("TREEPOLY_THREADS"); env && *env) {
      set_field(result.config, "threads", env);
    }
    for (const auto& [key, value] : flags) set_field(result.config, key, value);
    result.config.command = command;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    result.exit_code = kConfigError;
  }
  return result;
}

int main(int argc, char** argv) {
  const auto parsed = parse_args(argc, argv);
  if (parsed.exit_code) return *parsed.exit_code;
  return run(parsed.config, std::cout, std::cerr);
}

}  // namespace treepoly::cli
