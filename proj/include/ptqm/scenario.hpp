#pragma once

// Declarative scenarios: a JSON file names a model, a loop, run settings and
// the outputs to produce. Every numeric block of the result carries its
// measured residual, its tolerance and a pass flag.

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ptqm/serialize.hpp"

namespace ptqm {

/// Malformed JSON, with a 1-based position.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error(what), line_(line), column_(column) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_, column_;
};

/// Well-formed JSON that does not describe a runnable scenario.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct OutputSpec {
  /// phases | tensors-at-point | tensor-grid | classification | stokes-check
  std::string kind;
  std::string file;
  std::string format = "json";
  Json options;
};

struct Scenario {
  std::string name;
  std::string model;  // oscillator | two_level | standard_qm
  Json model_params;
  Json path;
  int steps = 2000;
  Tolerances tol;
  std::optional<std::uint64_t> seed;
  std::vector<OutputSpec> outputs;
  Json source;
};

/// Throws ParseError or ConfigError.
Scenario parse_scenario(const std::string& text, const std::string& default_name = "scenario");
Scenario load_scenario(const std::string& file);

/// Copy of the scenario with the number at a dotted key path (e.g.
/// "model.params.omega_d") replaced. Throws ConfigError if the key is absent.
Scenario with_value(const Scenario& s, const std::string& key, double value);

struct Check {
  std::string name;
  double residual = 0.0;
  double tol = 0.0;
  bool pass = false;
};

struct RunOptions {
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  double tol_scale = 1.0;
  bool timing = false;
  bool write_files = true;
};

struct ResultBundle {
  Json doc;
  std::vector<Check> checks;
  std::optional<PhaseReport> phases;
  std::array<int, 3> causal_counts{};  // spacelike, lightlike, timelike
  /// Set when a numerical error stopped the run.
  std::string failure;

  bool passed() const;
};

/// Runs every output of the scenario. Numerical errors are caught and
/// recorded in `failure`; configuration problems throw ConfigError.
ResultBundle run_scenario(const Scenario& s, const RunOptions& options = {});

void write_residual_table(std::ostream& os, const std::vector<Check>& checks);

struct SweepRow {
  double value = 0.0;
  std::optional<ResultBundle> bundle;
  std::string error;
  bool passed() const { return bundle && bundle->passed() && error.empty(); }
};

/// One run per value, on up to `threads` workers. Rows that fail are
/// recorded and the sweep continues.
std::vector<SweepRow> sweep(const Scenario& s, const std::string& key, const std::vector<double>& values,
                            const RunOptions& options, int threads);
void write_sweep_csv(std::ostream& os, const std::string& key, const std::vector<SweepRow>& rows);

/// Built-in oscillator reference checks, one line each. Returns the number of
/// failures.
int run_golden(std::ostream& os, const Tolerances& tol = {});

}  // namespace ptqm
