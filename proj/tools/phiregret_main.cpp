// phiregret: experiment harness for adaptive phi-regret minimization.
//
// Subcommands:
//   run    - one experiment from a JSON config, report as CSV or JSON
//   sweep  - grid of experiments (arrays for d/T/algorithm/adversary)
//   verify - full invariant/property suite; exits nonzero on failure
//   report - aggregate result CSVs into summary tables

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "phiregret/experiment.hpp"
#include "phiregret/selfcheck.hpp"

namespace {

using phiregret::ConfigError;
using phiregret::ExperimentConfig;
using phiregret::RegretReport;
using phiregret::SweepConfig;

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("", "config is not valid JSON: " + std::string(e.what()));
  }
  return j;
}

void write_output(const std::string& out_path, const std::string& payload) {
  if (out_path.empty()) {
    std::cout << payload;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw ConfigError("", "cannot open output file: " + out_path);
  out << payload;
}

std::string reports_as_csv(const std::vector<RegretReport>& reports) {
  std::string payload = std::string(phiregret::kCsvHeader) + "\n";
  for (const auto& r : reports) payload += phiregret::csv_rows(r);
  return payload;
}

std::string reports_as_json(const std::vector<RegretReport>& reports) {
  if (reports.size() == 1) return phiregret::report_to_json(reports[0]).dump(2) + "\n";
  auto arr = nlohmann::json::array();
  for (const auto& r : reports) arr.push_back(phiregret::report_to_json(r));
  return arr.dump(2) + "\n";
}

int run_command(const std::string& config_path, bool seed_set,
                std::uint64_t seed, const std::string& out_path,
                const std::string& format) {
  auto json = load_json(config_path);
  if (seed_set) json["seed"] = seed;
  const auto cfg = ExperimentConfig::from_json(json);
  const auto result = phiregret::run_experiment(cfg);
  write_output(out_path, format == "json"
                             ? reports_as_json({result.report})
                             : reports_as_csv({result.report}));
  return 0;
}

int sweep_command(const std::string& config_path, bool seed_set,
                  std::uint64_t seed, const std::string& out_path,
                  const std::string& format, std::size_t jobs) {
  auto json = load_json(config_path);
  if (seed_set) json["seed"] = seed;
  const auto sweep = SweepConfig::from_json(json);
  const auto reports = phiregret::run_sweep(sweep, jobs);
  write_output(out_path, format == "json" ? reports_as_json(reports)
                                          : reports_as_csv(reports));
  return 0;
}

int verify_command() {
  const auto results = phiregret::selfcheck::run_all();
  int failures = 0;
  int index = 0;
  for (const auto& r : results) {
    ++index;
    std::printf("criterion %2d [%s] %s: %s\n", index,
                r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
    std::fflush(stdout);
    if (!r.passed) ++failures;
  }
  std::printf("%d/%zu criteria passed\n",
              static_cast<int>(results.size()) - failures, results.size());
  return failures == 0 ? 0 : 1;
}

int report_command(const std::vector<std::string>& inputs,
                   const std::string& out_path, const std::string& format) {
  std::vector<std::string> lines;
  for (const auto& path : inputs) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open input file: " + path);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
  }
  const auto summary = phiregret::summarize_csv_rows(lines);
  if (format == "json") {
    auto arr = nlohmann::json::array();
    for (const auto& s : summary) {
      arr.push_back({{"algorithm", s.algorithm},
                     {"d", s.d},
                     {"adversary", s.adversary},
                     {"comparator_kind", s.comparator_kind},
                     {"comparator_params", s.comparator_params},
                     {"T_checkpoint", s.checkpoint},
                     {"runs", s.runs},
                     {"mean", s.mean},
                     {"min", s.min},
                     {"max", s.max}});
    }
    write_output(out_path, arr.dump(2) + "\n");
  } else {
    std::string payload =
        "algorithm,d,adversary,comparator_kind,comparator_params,"
        "T_checkpoint,runs,mean,min,max\n";
    char buf[512];
    for (const auto& s : summary) {
      std::snprintf(buf, sizeof buf, "%s,%s,%s,%s,%s,%s,%zu,%.17g,%.17g,%.17g\n",
                    s.algorithm.c_str(), s.d.c_str(), s.adversary.c_str(),
                    s.comparator_kind.c_str(), s.comparator_params.c_str(),
                    s.checkpoint.c_str(), s.runs, s.mean, s.min, s.max);
      payload += buf;
    }
    write_output(out_path, payload);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adaptive phi-regret minimization harness"};
  app.require_subcommand(1);

  std::string config_path, out_path, format = "csv";
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::vector<std::string> report_inputs;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--out", out_path, "write output to this path (default stdout)");
    cmd->add_option("--format", format, "output format")
        ->check(CLI::IsMember({"csv", "json"}));
  };

  auto* run = app.add_subcommand("run", "run a single experiment");
  run->add_option("config", config_path, "experiment config (JSON)")->required();
  auto* run_seed = run->add_option("--seed", seed, "override the config seed");
  add_common(run);

  auto* sweep = app.add_subcommand("sweep", "run a grid of experiments");
  sweep->add_option("config", config_path, "sweep config (JSON)")->required();
  auto* sweep_seed = sweep->add_option("--seed", seed, "override the config seed");
  sweep->add_option("--jobs", jobs, "parallel workers")->check(CLI::PositiveNumber);
  add_common(sweep);

  auto* verify = app.add_subcommand(
      "verify", "run the full invariant/property suite");

  auto* report = app.add_subcommand("report", "aggregate result CSVs");
  report->add_option("inputs", report_inputs, "CSV files to aggregate")
      ->required();
  add_common(report);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return run_command(config_path, run_seed->count() > 0, seed, out_path,
                         format);
    }
    if (sweep->parsed()) {
      return sweep_command(config_path, sweep_seed->count() > 0, seed, out_path,
                           format, jobs);
    }
    if (verify->parsed()) {
      return verify_command();
    }
    if (report->parsed()) {
      return report_command(report_inputs, out_path, format);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const phiregret::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
