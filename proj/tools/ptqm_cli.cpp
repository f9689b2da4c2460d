// ptqm: scenario-driven front end.
//
//   ptqm run <config> [--out-dir DIR] [--seed N] [--tol-scale X] [--timing]
//   ptqm sweep <config> --vary KEY --values V1,V2,... [--threads N]
//   ptqm validate <config>
//   ptqm golden
//
// Exit codes: 0 all checks pass, 2 parse error, 3 invalid scenario,
// 4 numerical failure (the residual table goes to stderr).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "ptqm/scenario.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kParse = 2;
constexpr int kConfig = 3;
constexpr int kNumeric = 4;

int thread_count(int flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("PTQM_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
    std::cerr << "ignoring PTQM_THREADS=" << env << '\n';
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PT-symmetric quantum mechanics with a parameter-dependent metric"};
  app.require_subcommand(1);

  std::string out_dir = ".";
  std::int64_t seed = -1;
  int threads = 0;
  double tol_scale = 1.0;
  bool timing = false;
  app.add_option("--out-dir", out_dir, "Directory for result files")->capture_default_str();
  app.add_option("--seed", seed, "Seed for randomized invariance checks (overrides the scenario)");
  app.add_option("--threads", threads, "Worker threads for sweeps (default: PTQM_THREADS, then all cores)");
  app.add_option("--tol-scale", tol_scale, "Multiply every tolerance by this factor")->capture_default_str();
  app.add_flag("--timing", timing, "Record wall time in the result bundle (breaks byte-identical output)");

  std::string config;
  auto* run = app.add_subcommand("run", "Run a scenario and write its result bundle");
  run->add_option("config", config, "Scenario JSON file")->required();

  std::string vary;
  std::vector<double> values;
  auto* sweep = app.add_subcommand("sweep", "Run a scenario once per value of one parameter");
  sweep->add_option("config", config, "Scenario JSON file")->required();
  sweep->add_option("--vary", vary, "Dotted key, e.g. model.params.omega_d")->required();
  sweep->add_option("--values", values, "Comma-separated values")->delimiter(',');

  auto* validate = app.add_subcommand("validate", "Parse and validate a scenario without running it");
  validate->add_option("config", config, "Scenario JSON file")->required();

  auto* golden = app.add_subcommand("golden", "Built-in oscillator reference checks");

  for (CLI::App* sub : {run, sweep, validate, golden}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  ptqm::RunOptions options;
  options.out_dir = out_dir;
  options.tol_scale = tol_scale;
  options.timing = timing;
  if (seed >= 0) options.seed = static_cast<std::uint64_t>(seed);

  try {
    if (golden->parsed()) {
      const int failures = ptqm::run_golden(std::cout, ptqm::Tolerances{}.scaled(tol_scale));
      return failures == 0 ? kOk : kNumeric;
    }
    const ptqm::Scenario scenario = ptqm::load_scenario(config);
    if (validate->parsed()) {
      std::cout << "ok: " << scenario.name << " (" << scenario.model << ", " << scenario.outputs.size()
                << " outputs)\n";
      return kOk;
    }
    if (run->parsed()) {
      const ptqm::ResultBundle bundle = ptqm::run_scenario(scenario, options);
      const auto bundle_file = std::filesystem::path(out_dir) / (scenario.name + ".bundle.json");
      if (bundle.passed()) {
        std::cout << scenario.name << ": " << bundle.checks.size() << " checks passed; bundle "
                  << bundle_file.string() << '\n';
        return kOk;
      }
      if (!bundle.failure.empty()) std::cerr << "numerical failure: " << bundle.failure << '\n';
      ptqm::write_residual_table(std::cerr, bundle.checks);
      return kNumeric;
    }
    // sweep
    const auto rows = ptqm::sweep(scenario, vary, values, options, thread_count(threads));
    std::filesystem::create_directories(out_dir);
    const auto file = std::filesystem::path(out_dir) / (scenario.name + ".sweep.csv");
    std::ofstream f(file);
    ptqm::write_sweep_csv(f, vary, rows);
    bool all = true;
    for (const auto& r : rows) all = all && r.passed();
    std::cout << "sweep over " << vary << ": " << rows.size() << " rows written to " << file.string() << '\n';
    if (!all) {
      for (const auto& r : rows) {
        if (r.passed()) continue;
        std::cerr << "row " << r.value << " failed" << (r.error.empty() ? "" : ": " + r.error) << '\n';
        if (r.bundle) ptqm::write_residual_table(std::cerr, r.bundle->checks);
      }
    }
    return all ? kOk : kNumeric;
  } catch (const ptqm::ParseError& e) {
    std::cerr << config << ":" << e.line() << ":" << e.column() << ": " << e.what() << '\n';
    return kParse;
  } catch (const ptqm::ConfigError& e) {
    std::cerr << "invalid scenario: " << e.what() << '\n';
    return kConfig;
  } catch (const ptqm::Error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumeric;
  }
}
