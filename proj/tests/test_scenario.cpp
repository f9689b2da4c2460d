#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "ptqm/scenario.hpp"

using namespace ptqm;

namespace {

const char* kSpin = R"({
  "spec_version": 1,
  "name": "spin",
  "model": {"name": "standard_qm", "params": {"b": 1.0}},
  "path": {"type": "cone", "theta": 0.8, "duration": 6.283185307179586},
  "run": {"steps": 2000},
  "seed": 3,
  "outputs": [
    {"kind": "phases", "file": "spin/phases.json"},
    {"kind": "tensors-at-point", "file": "spin/tensors.json"},
    {"kind": "classification", "file": "spin/classes.csv", "format": "csv", "options": {"samples": 8}}
  ]
})";

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("ptqm_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("parse errors carry line and column") {
  const std::string bad = "{\n  \"spec_version\": 1,\n  \"name\": oops\n}";
  try {
    parse_scenario(bad);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(e.column() >= 11);
  }
}

TEST_CASE("invalid scenarios are rejected") {
  auto edit = [](const std::string& from, const std::string& to) {
    std::string s = kSpin;
    s.replace(s.find(from), from.size(), to);
    return s;
  };
  CHECK_THROWS_AS(parse_scenario(edit("\"spec_version\": 1", "\"spec_version\": 2")), ConfigError);
  CHECK_THROWS_AS(parse_scenario(edit("\"seed\": 3", "\"seeds\": 3")), ConfigError);
  CHECK_THROWS_AS(parse_scenario(edit("standard_qm\"", "mystery\"")), ConfigError);
  CHECK_THROWS_AS(parse_scenario(edit("\"steps\": 2000", "\"steps\": 1")), ConfigError);
  CHECK_THROWS_AS(parse_scenario(edit("spin/phases.json", "/tmp/x.json")), ConfigError);
  CHECK_THROWS_AS(parse_scenario(edit("spin/tensors.json", "spin/phases.json")), ConfigError);
  CHECK_THROWS_AS(parse_scenario(edit("\"kind\": \"phases\"", "\"kind\": \"plots\"")), ConfigError);
}

TEST_CASE("scenario fields") {
  const Scenario s = parse_scenario(kSpin);
  CHECK(s.name == "spin");
  CHECK(s.model == "standard_qm");
  CHECK(s.steps == 2000);
  CHECK(s.seed == 3u);
  CHECK(s.outputs.size() == 3);
  CHECK(s.outputs[2].format == "csv");
}

TEST_CASE("with_value edits a dotted key") {
  const Scenario s = parse_scenario(kSpin);
  const Scenario t = with_value(s, "path.theta", 0.5);
  CHECK(t.path["theta"].get<double>() == 0.5);
  CHECK(s.path["theta"].get<double>() == 0.8);
  CHECK(with_value(s, "run.steps", 800).steps == 800);
  CHECK_THROWS_AS(with_value(s, "path.nothing", 1.0), ConfigError);
}

TEST_CASE("a run passes every check and is byte-for-byte reproducible") {
  const Scenario s = parse_scenario(kSpin);
  const auto a = scratch("a"), b = scratch("b");
  RunOptions o;
  o.out_dir = a.string();
  const ResultBundle ra = run_scenario(s, o);
  CHECK(ra.failure.empty());
  for (const Check& c : ra.checks) CHECK_MESSAGE(c.pass, c.name);
  CHECK(ra.passed());
  CHECK(ra.causal_counts[2] == 0);
  o.out_dir = b.string();
  run_scenario(s, o);
  for (const char* f : {"spin.bundle.json", "spin/phases.json", "spin/tensors.json", "spin/classes.csv"}) {
    CHECK_MESSAGE(std::filesystem::exists(a / f), f);
    CHECK_MESSAGE(slurp(a / f) == slurp(b / f), f);
  }
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
}

TEST_CASE("numerical failures are recorded rather than thrown") {
  Scenario s = parse_scenario(kSpin);
  s.tol.unitarity = 1e-30;
  RunOptions o;
  o.write_files = false;
  const ResultBundle r = run_scenario(s, o);
  CHECK_FALSE(r.passed());
}

TEST_CASE("sweep runs every value") {
  const Scenario s = parse_scenario(kSpin);
  RunOptions o;
  o.write_files = false;
  const auto rows = sweep(s, "path.theta", {0.4, 0.8, 1.2}, o, 3);
  REQUIRE(rows.size() == 3);
  for (const auto& r : rows) CHECK(r.passed());
  CHECK(rows[1].value == 0.8);
  std::ostringstream csv;
  write_sweep_csv(csv, "path.theta", rows);
  const std::string text = csv.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);
  CHECK(text.rfind("path.theta", 0) == 0);
}

TEST_CASE("residual table") {
  std::ostringstream os;
  write_residual_table(os, {{"a", 1e-3, 1e-6, false}});
  CHECK(os.str().find("FAIL") != std::string::npos);
}
