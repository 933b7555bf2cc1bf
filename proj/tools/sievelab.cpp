// sievelab: command-line front end for the experiments.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "sievelab/errors.hpp"
#include "sievelab/experiments.hpp"

using sievelab::ExperimentConfig;
using sievelab::ExperimentReport;

namespace {

struct Common {
  std::string out;
  std::string format = "json";
  std::uint64_t seed = 1;
  std::uint64_t budget = 1'000'000'000ULL;
  unsigned jobs = 1;
  std::string config_file;
  bool timing = false;
  std::string plot_data;
  std::vector<std::string> params;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("params", c.params, "key=value parameters");
  cmd->add_option("--out", c.out, "output directory (default: stdout)");
  cmd->add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--seed", c.seed, "master seed");
  cmd->add_option("--budget", c.budget, "largest sieve bound");
  cmd->add_option("--jobs", c.jobs, "parallel x-points")->check(CLI::PositiveNumber);
  cmd->add_option("--config", c.config_file, "key=value config file");
  cmd->add_flag("--timing", c.timing, "include wall clock in the report");
  cmd->add_option("--emit-plot-data", c.plot_data, "write (x, value) CSV of the main series here");
}

ExperimentConfig build_config(const std::string& name, const Common& c, CLI::App* cmd) {
  ExperimentConfig cfg = c.config_file.empty() ? ExperimentConfig{} : ExperimentConfig::from_kv_file(c.config_file);
  cfg.experiment = name;
  for (auto& kv : c.params) cfg.set_pair(kv);
  // flags given on the command line override the config file
  if (cmd->count("--format")) cfg.format = c.format;
  if (cmd->count("--seed")) cfg.seed = c.seed;
  if (cmd->count("--budget")) cfg.budget = c.budget;
  if (cmd->count("--jobs")) cfg.jobs = c.jobs;
  cfg.out = c.out;
  cfg.timing = c.timing;
  return cfg;
}

void write_plot_data(const ExperimentReport& r, const std::string& path) {
  static const std::vector<std::pair<std::string, std::string>> series = {
      {"x", "ratio"}, {"t", "ratio"}, {"u", "rho"}, {"k", "lhs"}, {"k", "integral"}};
  std::string xs, ys;
  if (!r.rows.empty()) {
    for (auto& [a, b] : series)
      if (r.rows[0].contains(a) && r.rows[0].contains(b)) {
        xs = a;
        ys = b;
        break;
      }
  }
  if (xs.empty()) throw sievelab::PreconditionFail("this report has no plottable series");
  std::ofstream out(path);
  out << xs << "," << ys << "\n";
  out.precision(17);
  for (auto& row : r.rows) out << row[xs].dump() << "," << row[ys].dump() << "\n";
}

int emit(const ExperimentConfig& cfg, const ExperimentReport& r, const std::string& plot) {
  const std::string body = r.serialize(cfg.format);
  if (cfg.out.empty()) {
    std::cout << body;
  } else {
    std::filesystem::create_directories(cfg.out);
    auto path = std::filesystem::path(cfg.out) / (cfg.experiment + "." + cfg.format);
    std::ofstream(path, std::ios::binary) << body;
    std::cerr << "wrote " << path.string() << "\n";
  }
  if (!plot.empty()) write_plot_data(r, plot);
  return r.precondition_met ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Experiments on integers with prime factors from a prescribed set"};
  app.set_version_flag("--version", std::string(sievelab::kVersion));
  app.require_subcommand(1);

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"psi", "count x-smooth-style integers with all prime factors in P  (x= set= method=sieve|dfs|both k= T0=)"},
      {"benchmark", "compare counts with the Hall and Hildebrand benchmarks  (x= | xs= , set=)"},
      {"counterexample", "power-interval family scan  (xs= N= augmented=0|1)"},
      {"congruence", "primes 1 mod q on a t-grid  (x= q= u= grid=)"},
      {"friedlander", "two-range prime set vs u rho(u)(1-1/v)  (x= u= v=)"},
      {"hyp-a", "integer set checker  (N= u= v= A=... lambda2=)"},
      {"hyp-p", "prime set checker  (x= set= u= v= delta= lambda1=)"},
      {"hyp-t", "interval set checker  (T=a:b,... | tfamily=N , u= v= lambda3= M=)"},
      {"pipeline", "run one instance through all three checkers  (instance=A|T|P ...)"},
      {"dickman", "Dickman rho  (u=1,2,3 tol=)"},
  };
  std::vector<Common> opts(commands.size());
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < commands.size(); ++i) {
    auto* cmd = app.add_subcommand(commands[i].first, commands[i].second);
    add_common(cmd, opts[i]);
    subs.push_back(cmd);
  }
  std::string rerun_path, rerun_out;
  auto* rerun = app.add_subcommand("rerun", "re-run the config echoed in a JSON report");
  rerun->add_option("report", rerun_path, "report.json")->required()->check(CLI::ExistingFile);
  rerun->add_option("--out", rerun_out, "output directory (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (rerun->parsed()) {
      std::ifstream in(rerun_path);
      auto j = nlohmann::json::parse(in);
      if (j.value("schema", "") != sievelab::kReportSchema)
        throw sievelab::PreconditionFail("unsupported report schema");
      auto cfg = ExperimentConfig::from_json(j.at("config"));
      cfg.out = rerun_out;
      cfg.timing = j.contains("wall_clock_s");
      return emit(cfg, sievelab::run_experiment(cfg), "");
    }
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (!subs[i]->parsed()) continue;
      auto cfg = build_config(commands[i].first, opts[i], subs[i]);
      return emit(cfg, sievelab::run_experiment(cfg), opts[i].plot_data);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return sievelab::exit_code_for(e);
  }
  return 0;
}
