#include "ptqm/scenario.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "ptqm/models.hpp"
#include "ptqm/numerics.hpp"

namespace ptqm {

namespace fs = std::filesystem;

// --- parsing ---------------------------------------------------------------------

namespace {

[[noreturn]] void config_fail(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

void allow_keys(const Json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) config_fail(where, "expected an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) config_fail(where, "unknown key \"" + it.key() + "\"");
  }
}

double number_or(const Json& obj, const char* key, double fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) config_fail(where, std::string("\"") + key + "\" must be a number");
  const double v = obj[key].get<double>();
  if (!std::isfinite(v)) config_fail(where, std::string("\"") + key + "\" must be finite");
  return v;
}

long integer_or(const Json& obj, const char* key, long fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const Json& v = obj[key];
  if (v.is_number_integer()) return v.get<long>();
  if (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>()) return static_cast<long>(v.get<double>());
  config_fail(where, std::string("\"") + key + "\" must be an integer");
}

std::string string_or(const Json& obj, const char* key, const std::string& fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_string()) config_fail(where, std::string("\"") + key + "\" must be a string");
  return obj[key].get<std::string>();
}

Point point_of(const Json& v, Index size, const std::string& where) {
  if (!v.is_array() || static_cast<Index>(v.size()) != size) {
    config_fail(where, "expected an array of " + std::to_string(size) + " numbers");
  }
  Point p(size);
  for (Index i = 0; i < size; ++i) {
    if (!v[static_cast<std::size_t>(i)].is_number()) config_fail(where, "expected numbers");
    p(i) = v[static_cast<std::size_t>(i)].get<double>();
  }
  return p;
}

struct TolField {
  const char* name;
  double Tolerances::*member;
};

constexpr TolField kTolFields[] = {
    {"herm", &Tolerances::herm},         {"pseudo", &Tolerances::pseudo},
    {"norm", &Tolerances::norm},         {"idem", &Tolerances::idem},
    {"trace", &Tolerances::trace},       {"rank", &Tolerances::rank},
    {"unitarity", &Tolerances::unitarity}, {"cyclic", &Tolerances::cyclic},
    {"path", &Tolerances::path},         {"phase", &Tolerances::phase},
    {"tensor", &Tolerances::tensor},     {"fid", &Tolerances::fid},
    {"light", &Tolerances::light},       {"pt", &Tolerances::pt},
    {"trunc", &Tolerances::trunc},       {"cond_warn", &Tolerances::cond_warn},
};

const std::set<std::string> kOutputKinds = {"phases", "tensors-at-point", "tensor-grid", "classification",
                                            "stokes-check"};

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

std::pair<Index, Index> two_level_axes(const Json& path) {
  if (!path.contains("axes")) return {0, 1};
  const Point a = point_of(path["axes"], 2, "path.axes");
  const Index a0 = static_cast<Index>(a(0)), a1 = static_cast<Index>(a(1));
  if (a(0) != a0 || a(1) != a1 || a0 < 0 || a1 < 0 || a0 > 2 || a1 > 2 || a0 == a1) {
    config_fail("path.axes", "expected two distinct indices in {0, 1, 2}");
  }
  return {a0, a1};
}

void validate_model(const Scenario& s) {
  const std::string where = "model.params";
  const Json& p = s.model_params;
  const Json& path = s.path;
  if (s.model == "oscillator") {
    allow_keys(p, where, {"n", "omega_d", "delta", "phi_l", "picture"});
    if (integer_or(p, "n", 60, where) < 2) config_fail(where, "\"n\" must be at least 2");
    if (!(number_or(p, "delta", 1.0, where) > 0.0)) config_fail(where, "\"delta\" must be positive");
    number_or(p, "omega_d", 0.3, where);
    number_or(p, "phi_l", 0.0, where);
    const std::string picture = string_or(p, "picture", "pt", where);
    if (picture != "pt" && picture != "hermitian") config_fail(where, "\"picture\" must be \"pt\" or \"hermitian\"");
    if (!path.is_null()) {
      allow_keys(path, "path", {"type"});
      if (string_or(path, "type", "drive", "path") != "drive") config_fail("path", "the oscillator only supports type \"drive\"");
    }
  } else if (s.model == "two_level") {
    allow_keys(p, where, {"which"});
    integer_or(p, "which", 0, where);
    allow_keys(path, "path", {"type", "center", "radius", "duration", "axes"});
    if (string_or(path, "type", "circle", "path") != "circle") config_fail("path", "two_level supports type \"circle\"");
    if (!path.contains("center")) config_fail("path", "\"center\" is required");
    const Point c = point_of(path["center"], 3, "path.center");
    const double r = number_or(path, "radius", 0.1, "path");
    if (!(r > 0.0)) config_fail("path", "\"radius\" must be positive");
    if (!(number_or(path, "duration", 2.0 * kPi, "path") > 0.0)) config_fail("path", "\"duration\" must be positive");
    const auto [a0, a1] = two_level_axes(path);
    // Every point of the loop must keep |κ| > |γ|.
    for (int k = 0; k < 720; ++k) {
      Point q = c;
      q(a0) += r * std::cos(kPi * k / 360.0);
      q(a1) += r * std::sin(kPi * k / 360.0);
      if (!(std::hypot(q(0), q(1)) > std::abs(q(2)))) config_fail("path", "loop leaves the unbroken region |κ| > |γ|");
    }
  } else if (s.model == "standard_qm") {
    allow_keys(p, where, {"b", "which"});
    if (!(number_or(p, "b", 1.0, where) > 0.0)) config_fail(where, "\"b\" must be positive");
    integer_or(p, "which", 0, where);
    allow_keys(path, "path", {"type", "theta", "duration"});
    if (string_or(path, "type", "cone", "path") != "cone") config_fail("path", "standard_qm supports type \"cone\"");
    const double theta = number_or(path, "theta", kPi / 2, "path");
    if (!(theta > 0.0 && theta < kPi)) config_fail("path", "\"theta\" must lie in (0, π)");
    if (!(number_or(path, "duration", 2.0 * kPi, "path") > 0.0)) config_fail("path", "\"duration\" must be positive");
  } else {
    config_fail("model.name", "unknown model \"" + s.model + "\" (oscillator, two_level, standard_qm)");
  }
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& default_name) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    const auto [line, column] = line_column(text, e.byte);
    // Keep nlohmann's description, minus its own position prefix.
    std::string what = e.what();
    if (const auto colon = what.find(": "); colon != std::string::npos) what = what.substr(colon + 2);
    throw ParseError(what, line, column);
  }
  allow_keys(doc, "scenario", {"spec_version", "name", "model", "path", "run", "outputs", "seed"});
  if (!doc.contains("spec_version") || integer_or(doc, "spec_version", 0, "scenario") != 1) {
    config_fail("spec_version", "must be 1");
  }
  Scenario s;
  s.source = doc;
  s.name = string_or(doc, "name", default_name, "scenario");
  if (s.name.empty() || s.name.find('/') != std::string::npos) config_fail("name", "must be a plain file stem");

  if (!doc.contains("model")) config_fail("scenario", "\"model\" is required");
  allow_keys(doc["model"], "model", {"name", "params"});
  s.model = string_or(doc["model"], "name", "", "model");
  s.model_params = doc["model"].contains("params") ? doc["model"]["params"] : Json::object();
  s.path = doc.contains("path") ? doc["path"] : Json();
  if (s.model != "oscillator" && s.path.is_null()) s.path = Json::object();
  validate_model(s);

  if (doc.contains("run")) {
    const Json& run = doc["run"];
    allow_keys(run, "run", {"steps", "tolerances"});
    const long steps = integer_or(run, "steps", 2000, "run");
    if (steps < 2 || steps > 10000000) config_fail("run", "\"steps\" must lie in [2, 1e7]");
    s.steps = static_cast<int>(steps);
    if (run.contains("tolerances")) {
      const Json& t = run["tolerances"];
      if (!t.is_object()) config_fail("run.tolerances", "expected an object");
      for (auto it = t.begin(); it != t.end(); ++it) {
        bool known = false;
        for (const TolField& f : kTolFields) {
          if (it.key() == f.name) {
            known = true;
            const double v = number_or(t, f.name, 0.0, "run.tolerances");
            if (!(v > 0.0)) config_fail("run.tolerances", std::string("\"") + f.name + "\" must be positive");
            s.tol.*f.member = v;
          }
        }
        if (!known) config_fail("run.tolerances", "unknown tolerance \"" + it.key() + "\"");
      }
    }
  }
  if (doc.contains("seed")) {
    const long seed = integer_or(doc, "seed", 0, "scenario");
    if (seed < 0) config_fail("seed", "must be non-negative");
    s.seed = static_cast<std::uint64_t>(seed);
  }

  if (!doc.contains("outputs") || !doc["outputs"].is_array()) config_fail("outputs", "expected an array");
  std::set<std::string> files;
  for (std::size_t i = 0; i < doc["outputs"].size(); ++i) {
    const std::string where = "outputs[" + std::to_string(i) + "]";
    const Json& o = doc["outputs"][i];
    allow_keys(o, where, {"kind", "file", "format", "options"});
    OutputSpec out;
    out.kind = string_or(o, "kind", "", where);
    if (!kOutputKinds.count(out.kind)) config_fail(where, "unknown kind \"" + out.kind + "\"");
    out.file = string_or(o, "file", "", where);
    if (out.file.empty()) config_fail(where, "\"file\" is required");
    if (fs::path(out.file).is_absolute() || out.file.find("..") != std::string::npos) {
      config_fail(where, "\"file\" must be a relative path inside the output directory");
    }
    if (!files.insert(out.file).second) config_fail(where, "duplicate file \"" + out.file + "\"");
    out.format = string_or(o, "format", "json", where);
    if (out.format != "json" && out.format != "csv") config_fail(where, "\"format\" must be json or csv");
    out.options = o.contains("options") ? o["options"] : Json::object();
    if (!out.options.is_object()) config_fail(where + ".options", "expected an object");
    s.outputs.push_back(std::move(out));
  }
  return s;
}

Scenario load_scenario(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot read scenario file " + file);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), fs::path(file).stem().string());
}

Scenario with_value(const Scenario& s, const std::string& key, double value) {
  Json doc = s.source;
  Json* node = &doc;
  std::stringstream ss(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  if (parts.empty()) throw ConfigError("empty sweep parameter");
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (!node->is_object() || !node->contains(parts[i])) {
      throw ConfigError("sweep parameter \"" + key + "\" does not exist in the scenario");
    }
    node = &(*node)[parts[i]];
  }
  if (!node->is_number()) throw ConfigError("sweep parameter \"" + key + "\" is not a number");
  if (node->is_number_integer()) {
    *node = static_cast<long>(std::llround(value));
  } else {
    *node = value;
  }
  return parse_scenario(doc.dump(), s.name);
}

// --- model setup -----------------------------------------------------------------

namespace {

struct Setup {
  Index dim = 0;
  HamiltonianFamily h;
  MetricFamily metric;
  ParameterPath path;
  CVector psi0;
  StateSection section;
  ParameterPath section_loop;
  Point apex;
  Point default_point;
  /// Expected α mod 2π when known in closed form.
  std::optional<double> alpha_oracle;
  /// Expected -∮A over the section loop.
  std::optional<double> loop_oracle;
  bool identity_metric = false;
  bool expect_timelike = false;
  std::optional<CMatrix> golden_q;
  std::optional<RMatrix> golden_omega, golden_g;
  std::optional<OscillatorModel> oscillator;
};

CMatrix golden_q() {
  CMatrix q(4, 4);
  q << 0, 0, -1, -kI,  //
      0, 0, kI, -1,    //
      -1, -kI, 1, kI,  //
      kI, -1, -kI, 1;
  return q;
}

Setup make_setup(const Scenario& s, const Tolerances& tol) {
  Setup st;
  const Json& p = s.model_params;
  if (s.model == "oscillator") {
    OscillatorParams op;
    op.n = integer_or(p, "n", 60, "model.params");
    op.omega_d = number_or(p, "omega_d", 0.3, "model.params");
    op.delta = number_or(p, "delta", 1.0, "model.params");
    op.phi_l = number_or(p, "phi_l", 0.0, "model.params");
    st.oscillator.emplace(op, tol);
    const OscillatorModel& m = *st.oscillator;
    st.dim = op.n;
    if (string_or(p, "picture", "pt", "model.params") == "pt") {
      st.h = m.pt_hamiltonian();
      st.metric = m.metric();
      st.path = m.pt_path();
    } else {
      st.h = m.hermitian_family();
      st.metric = MetricFamily::identity(op.n);
      st.path = m.hermitian_path();
      st.identity_metric = true;
    }
    st.psi0 = coherent_state(0.0, op.n, tol.trunc);
    st.section = m.section();
    st.section_loop = m.section_loop();
    const Complex c = -kI * op.omega_d * std::polar(1.0, op.phi_l) / op.delta;  // loop centre
    st.apex = Point{{c.real(), c.imag(), c.real(), c.imag()}};
    st.default_point = Point{{0.1, -0.2, 0.15, 0.05}};
    st.alpha_oracle = 2.0 * m.loop_area();
    st.loop_oracle = st.alpha_oracle;
    st.expect_timelike = true;
    st.golden_q = golden_q();
    st.golden_omega = st.golden_q->imag();
    st.golden_g = st.golden_q->real();
  } else if (s.model == "two_level") {
    const TwoLevelModel m = two_level_model();
    const Point c = point_of(s.path["center"], 3, "path.center");
    const double r = number_or(s.path, "radius", 0.1, "path");
    const double tau = number_or(s.path, "duration", 2.0 * kPi, "path");
    const auto [a0, a1] = two_level_axes(s.path);
    st.dim = 2;
    st.h = m.hamiltonian;
    st.metric = m.metric;
    st.path = circle_path(c, r, tau, a0, a1);
    st.psi0 = cyclic_initial_state(st.h, st.metric, st.path, s.steps, integer_or(p, "which", 0, "model.params"));
    st.section = m.section;
    st.section_loop = st.path;
    st.apex = c;
    st.default_point = c;
  } else {
    const double b = number_or(p, "b", 1.0, "model.params");
    const double theta = number_or(s.path, "theta", kPi / 2, "path");
    const double tau = number_or(s.path, "duration", 2.0 * kPi, "path");
    st.dim = 2;
    st.h = spin_half_hamiltonian();
    st.metric = MetricFamily::identity(2);
    st.path = spin_field_loop(b, theta, tau);
    st.psi0 = cyclic_initial_state(st.h, st.metric, st.path, s.steps, integer_or(p, "which", 0, "model.params"));
    st.identity_metric = true;
    st.section = bloch_section_planar();
    st.section_loop = circle_path(Point::Zero(2), theta, tau);
    st.apex = Point::Zero(2);
    st.default_point = Point{{0.5, 0.3}};
    st.loop_oracle = -kPi * (1.0 - std::cos(theta));
  }
  return st;
}

/// The cyclic spin state precesses about z on a cone, so its ray encloses the
/// polar cap at the state's own polar angle: γ = -π(1 - cos θ_state).
std::optional<double> spin_gamma_oracle(const Setup& st, const Scenario& s) {
  if (s.model != "standard_qm") return std::nullopt;
  const double cos_state = std::norm(st.psi0(0)) - std::norm(st.psi0(1));
  return -kPi * (1.0 - cos_state);
}

// --- checks ----------------------------------------------------------------------

struct Collector {
  std::vector<Check>& checks;
  Json& block;

  void add(const std::string& name, double residual, double tol) {
    const bool pass = std::isfinite(residual) && residual <= tol;
    checks.push_back({name, residual, tol, pass});
    block["checks"].push_back(Json{{"name", name}, {"residual", residual}, {"tol", tol}, {"pass", pass}});
  }
  void require_positive(const std::string& name, double value) {
    const bool pass = value > 0.0;
    checks.push_back({name, value, 0.0, pass});
    block["checks"].push_back(Json{{"name", name}, {"value", value}, {"pass", pass}});
  }
};

double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }
double max_abs(const RMatrix& m) { return m.cwiseAbs().maxCoeff(); }

/// Smooth periodic phase function used for random regauging.
struct RandomPhase {
  std::vector<double> amp, freq, shift;
  explicit RandomPhase(std::mt19937_64& rng, int terms = 3) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < terms; ++k) {
      amp.push_back(u(rng));
      freq.push_back(static_cast<double>(k + 1));
      shift.push_back(kPi * u(rng));
    }
  }
  double operator()(double x) const {
    double v = 0.0;
    for (std::size_t k = 0; k < amp.size(); ++k) v += amp[k] * std::sin(freq[k] * x + shift[k]);
    return v;
  }
};

struct Context {
  const Scenario& s;
  const Setup& st;
  const Tolerances& tol;
  std::optional<std::uint64_t> seed;
  std::vector<Check>& checks;
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

Json run_phases(Context& ctx, ResultBundle& bundle, Table& table) {
  Json block = Json::object();
  block["checks"] = Json::array();
  Collector c{ctx.checks, block};
  EvolveOptions eo;
  eo.tol = ctx.tol;
  const EvolutionRecord rec = evolve(ctx.st.h, ctx.st.metric, ctx.st.path, {ctx.st.psi0, ctx.st.path(0.0)},
                                     ctx.s.steps, eo);
  const PhaseReport rep = phase_report(rec, ctx.st.h, ctx.st.metric, ctx.tol);
  bundle.phases = rep;
  block["report"] = to_json(rep);
  block["steps"] = static_cast<long>(rec.size() - 1);

  c.add("phases.unitarity_drift", rec.max_norm_drift(), ctx.tol.unitarity);
  c.add("phases.decomposition", rep.decomposition_residual, ctx.tol.phase);
  c.add("phases.route_spread", rep.route_spread, ctx.tol.phase);
  c.add("phases.gw_decomposition", rep.gw_decomposition_residual, ctx.tol.phase);
  c.add("phases.gw_identity", rep.gw_identity_residual, ctx.tol.phase);
  c.add("phases.holonomy_transport", rep.holonomy_transport_residual, ctx.tol.pt);
  c.require_positive("phases.kinematic_scale", rep.kinematic_scale);
  if (ctx.st.alpha_oracle) {
    block["alpha_oracle"] = *ctx.st.alpha_oracle;
    c.add("phases.alpha_vs_area_oracle", phase_distance(rep.alpha, *ctx.st.alpha_oracle), 1e-5);
  }
  if (const auto g = spin_gamma_oracle(ctx.st, ctx.s)) {
    block["gamma_oracle"] = *g;
    c.add("phases.gamma_vs_solid_angle", phase_distance(rep.gamma, *g), 1e-5);
  }
  if (ctx.seed) {
    std::mt19937_64 rng(*ctx.seed);
    const RandomPhase theta(rng);
    const double tau = rec.duration();
    const EvolutionRecord moved = regauge(rec, [&](double t) { return theta(2.0 * kPi * t / tau); });
    const PhaseReport other = phase_report(moved, ctx.st.h, ctx.st.metric, ctx.tol);
    double worst = 0.0;
    for (const auto& [name, value] : rep.gamma_routes) {
      worst = std::max(worst, phase_distance(value, other.gamma_routes.at(name)));
    }
    c.add("phases.regauge_invariance", worst, ctx.tol.phase);
  }
  table.header = phase_csv_header();
  table.rows = {phase_csv_row(rep)};
  return block;
}

Point option_point(const Json& options, const Setup& st) {
  if (!options.contains("point")) return st.default_point;
  return point_of(options["point"], st.section.dim_coords, "options.point");
}

Json run_tensors_at_point(Context& ctx, const OutputSpec& out, Table& table) {
  Json block = Json::object();
  block["checks"] = Json::array();
  Collector c{ctx.checks, block};
  const Point p = option_point(out.options, ctx.st);
  const GeometricTensors t = tensors(ctx.st.section, p, ctx.tol);
  block["tensors"] = to_json(t);
  c.add("tensors.q_hermitian", max_abs(CMatrix(t.Q - t.Q.adjoint())), ctx.tol.tensor);
  c.add("tensors.im_q_vs_omega", max_abs(RMatrix(t.Q.imag() - t.Omega)), ctx.tol.tensor);
  c.add("tensors.re_q_vs_g", max_abs(RMatrix(t.Q.real() - t.g)), ctx.tol.tensor);
  const RMatrix from_a = curvature_from_connection(ctx.st.section, p, ctx.tol);
  c.add("tensors.omega_vs_dA", max_abs(RMatrix(from_a - t.Omega)), ctx.tol.tensor);
  if (ctx.st.golden_q) {
    c.add("tensors.q_golden", max_abs(CMatrix(t.Q - *ctx.st.golden_q)), ctx.tol.tensor);
    c.add("tensors.omega_golden", max_abs(RMatrix(t.Omega - *ctx.st.golden_omega)), ctx.tol.tensor);
    c.add("tensors.g_golden", max_abs(RMatrix(t.g - *ctx.st.golden_g)), ctx.tol.tensor);
  }
  if (ctx.seed) {
    std::mt19937_64 rng(*ctx.seed);
    const Index m = ctx.st.section.dim_coords;
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    RVector k(m);
    for (Index i = 0; i < m; ++i) k(i) = u(rng);
    const double a0 = u(rng), shift = kPi * u(rng);
    auto theta = [k, a0, shift](const Point& l) { return a0 * std::sin(k.dot(l) + shift); };
    const GeometricTensors moved = tensors(regauge(ctx.st.section, theta), p, ctx.tol);
    const RVector grad = a0 * std::cos(k.dot(p) + shift) * k;
    c.add("tensors.regauge_q", max_abs(CMatrix(moved.Q - t.Q)), ctx.tol.tensor);
    c.add("tensors.regauge_a_shift", (moved.A - t.A - grad).cwiseAbs().maxCoeff(), ctx.tol.tensor);
  }
  table.header = tensor_csv_header(t.point.size());
  table.rows = {tensor_csv_row(t)};
  return block;
}

Json run_tensor_grid(Context& ctx, const OutputSpec& out, Table& table, const fs::path& out_dir,
                     bool write_files) {
  Json block = Json::object();
  block["checks"] = Json::array();
  Collector c{ctx.checks, block};
  const Json& o = out.options;
  const Index m = ctx.st.section.dim_coords;
  Index ax0 = 0, ax1 = 1;
  if (o.contains("axes")) {
    const Point a = point_of(o["axes"], 2, "options.axes");
    ax0 = static_cast<Index>(a(0));
    ax1 = static_cast<Index>(a(1));
  }
  if (ax0 < 0 || ax1 < 0 || ax0 >= m || ax1 >= m || ax0 == ax1) throw ConfigError("options.axes: invalid axes");
  const Point base = option_point(o, ctx.st);
  const Point lo = o.contains("lo") ? point_of(o["lo"], 2, "options.lo")
                                    : Point{{base(ax0) - 0.1, base(ax1) - 0.1}};
  const Point hi = o.contains("hi") ? point_of(o["hi"], 2, "options.hi")
                                    : Point{{base(ax0) + 0.1, base(ax1) + 0.1}};
  const long n = integer_or(o, "n", 5, "options");
  if (n < 1 || n > 1000) throw ConfigError("options.n must lie in [1, 1000]");
  table.header = tensor_csv_header(m);
  Table plot;
  plot.header = {"lambda" + std::to_string(ax0 + 1), "lambda" + std::to_string(ax1 + 1),
                 "Omega" + std::to_string(ax0 + 1) + std::to_string(ax1 + 1)};
  double split = 0.0, herm = 0.0;
  Json points = Json::array();
  for (long i = 0; i < n; ++i) {
    for (long j = 0; j < n; ++j) {
      Point p = base;
      p(ax0) = n == 1 ? lo(0) : lo(0) + (hi(0) - lo(0)) * i / (n - 1);
      p(ax1) = n == 1 ? lo(1) : lo(1) + (hi(1) - lo(1)) * j / (n - 1);
      const GeometricTensors t = tensors(ctx.st.section, p, ctx.tol);
      split = std::max({split, max_abs(RMatrix(t.Q.imag() - t.Omega)), max_abs(RMatrix(t.Q.real() - t.g))});
      herm = std::max(herm, max_abs(CMatrix(t.Q - t.Q.adjoint())));
      table.rows.push_back(tensor_csv_row(t));
      plot.rows.push_back({p(ax0), p(ax1), t.Omega(ax0, ax1)});
      if (out.format == "json") points.push_back(to_json(t));
    }
  }
  if (out.format == "json") block["grid"] = std::move(points);
  c.add("grid.q_split", split, ctx.tol.tensor);
  c.add("grid.q_hermitian", herm, ctx.tol.tensor);
  if (o.contains("plot_file")) {
    const std::string plot_file = string_or(o, "plot_file", "", "options");
    if (plot_file.empty() || fs::path(plot_file).is_absolute() || plot_file.find("..") != std::string::npos) {
      throw ConfigError("options.plot_file must be a relative path");
    }
    if (write_files) {
      const fs::path target = out_dir / plot_file;
      fs::create_directories(target.parent_path());
      std::ofstream f(target);
      write_csv(f, plot.header, plot.rows);
    }
    block["plot_file"] = plot_file;
  }
  return block;
}

Json run_classification(Context& ctx, const OutputSpec& out, ResultBundle& bundle, Table& table) {
  Json block = Json::object();
  block["checks"] = Json::array();
  Collector c{ctx.checks, block};
  const long samples = integer_or(out.options, "samples", 64, "options");
  if (samples < 1) throw ConfigError("options.samples must be positive");
  const auto tags = classify_evolution(ctx.st.section, ctx.st.section_loop, static_cast<int>(samples), ctx.tol);
  std::array<int, 3> counts{};
  Json rows = Json::array();
  double law = 0.0;
  for (const ClassifiedSample& s : tags) {
    ++counts[static_cast<std::size_t>(s.tag)];
    rows.push_back(Json{{"t", s.t}, {"ds2", s.ds2}, {"tag", to_string(s.tag)}});
    table.rows.push_back({s.t, s.ds2, s.tangent_norm2, static_cast<double>(static_cast<int>(s.tag))});
    // On the oscillator loop z¹ = z², so ds² = -|ż|² = -½|dλ/dt|².
    if (ctx.st.expect_timelike) law = std::max(law, std::abs(s.ds2 + 0.5 * s.tangent_norm2));
  }
  table.header = {"t", "ds2", "tangent_norm2", "tag"};
  bundle.causal_counts = counts;
  block["samples"] = std::move(rows);
  block["counts"] = Json{{"spacelike", counts[0]}, {"lightlike", counts[1]}, {"timelike", counts[2]}};
  if (ctx.st.expect_timelike) {
    c.add("classification.non_timelike_samples", static_cast<double>(counts[0] + counts[1]), 0.0);
    c.add("classification.ds2_law", law, ctx.tol.tensor);
  }
  if (ctx.st.identity_metric || ctx.s.model == "standard_qm") {
    c.add("classification.timelike_samples", static_cast<double>(counts[2]), 0.0);
  }
  return block;
}

Json run_stokes(Context& ctx, const OutputSpec& out, Table& table) {
  Json block = Json::object();
  block["checks"] = Json::array();
  Collector c{ctx.checks, block};
  const long panels = integer_or(out.options, "panels", 64, "options");
  const long grid = integer_or(out.options, "grid", 16, "options");
  if (panels < 1 || grid < 1) throw ConfigError("options.panels and options.grid must be positive");
  const double loop = loop_integral_connection(ctx.st.section, ctx.st.section_loop, static_cast<int>(panels), ctx.tol);
  const double surface = surface_integral_curvature(ctx.st.section, cone_patch(ctx.st.section_loop, ctx.st.apex),
                                                    static_cast<int>(grid), ctx.tol);
  block["loop_integral"] = loop;
  block["surface_integral"] = surface;
  c.add("stokes.loop_vs_surface", phase_distance(loop, surface), 1e-4);
  table.header = {"loop_integral", "surface_integral"};
  table.rows = {{loop, surface}};
  if (ctx.st.loop_oracle) {
    block["oracle"] = *ctx.st.loop_oracle;
    c.add("stokes.loop_vs_oracle", phase_distance(loop, *ctx.st.loop_oracle), 1e-5);
    table.header.push_back("oracle");
    table.rows[0].push_back(*ctx.st.loop_oracle);
  }
  return block;
}

void write_table_or_json(const fs::path& target, const OutputSpec& out, const Json& block, const Table& table) {
  fs::create_directories(target.parent_path());
  std::ofstream f(target);
  if (!f) throw ConfigError("cannot write " + target.string());
  if (out.format == "csv") {
    write_csv(f, table.header, table.rows);
  } else {
    f << dump_json(block) << '\n';
  }
}

}  // namespace

bool ResultBundle::passed() const {
  if (!failure.empty()) return false;
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

ResultBundle run_scenario(const Scenario& s, const RunOptions& options) {
  if (!(options.tol_scale > 0.0)) throw ConfigError("--tol-scale must be positive");
  const auto start = std::chrono::steady_clock::now();
  const Tolerances tol = s.tol.scaled(options.tol_scale);
  const std::optional<std::uint64_t> seed = options.seed ? options.seed : s.seed;
  const fs::path out_dir = options.out_dir;
  if (options.write_files) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir)) throw ConfigError("output directory " + out_dir.string() + " is not writable");
  }

  ResultBundle bundle;
  Json& doc = bundle.doc;
  doc["spec_version"] = 1;
  doc["scenario"] = s.source;
  doc["outputs"] = Json::object();
  std::vector<std::pair<const OutputSpec*, std::pair<Json, Table>>> produced;
  try {
    const Setup st = make_setup(s, tol);
    Context ctx{s, st, tol, seed, bundle.checks};
    for (const OutputSpec& out : s.outputs) {
      Table table;
      Json block;
      if (out.kind == "phases") {
        block = run_phases(ctx, bundle, table);
      } else if (out.kind == "tensors-at-point") {
        block = run_tensors_at_point(ctx, out, table);
      } else if (out.kind == "tensor-grid") {
        block = run_tensor_grid(ctx, out, table, out_dir, options.write_files);
      } else if (out.kind == "classification") {
        block = run_classification(ctx, out, bundle, table);
      } else {
        block = run_stokes(ctx, out, table);
      }
      block["file"] = out.file;
      doc["outputs"][out.kind + ":" + out.file] = block;
      produced.push_back({&out, {std::move(block), std::move(table)}});
    }
    doc["runtime"] = Json{{"steps", s.steps}, {"dimension", static_cast<long>(st.dim)}};
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    bundle.failure = e.what();
  }
  if (options.timing) {
    doc["runtime"]["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  Json residuals = Json::array();
  for (const Check& c : bundle.checks) {
    residuals.push_back(Json{{"name", c.name}, {"residual", c.residual}, {"tol", c.tol}, {"pass", c.pass}});
  }
  doc["residuals"] = std::move(residuals);
  if (!bundle.failure.empty()) doc["failure"] = bundle.failure;
  doc["passed"] = bundle.passed();

  if (options.write_files) {
    for (const auto& [out, content] : produced) write_table_or_json(out_dir / out->file, *out, content.first, content.second);
    std::ofstream f(out_dir / (s.name + ".bundle.json"));
    f << dump_json(doc) << '\n';
  }
  return bundle;
}

void write_residual_table(std::ostream& os, const std::vector<Check>& checks) {
  os << "check,residual,tol,pass\n";
  for (const Check& c : checks) {
    os << c.name << ',' << format_number(c.residual) << ',' << format_number(c.tol) << ','
       << (c.pass ? "pass" : "FAIL") << '\n';
  }
}

// --- sweeps ----------------------------------------------------------------------

std::vector<SweepRow> sweep(const Scenario& s, const std::string& key, const std::vector<double>& values,
                            const RunOptions& options, int threads) {
  std::vector<SweepRow> rows(values.size());
  std::vector<Scenario> variants;
  variants.reserve(values.size());
  for (double v : values) variants.push_back(with_value(s, key, v));  // bad keys fail before any run
  RunOptions row_options = options;
  row_options.write_files = false;
  row_options.timing = false;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) {
      rows[i].value = values[i];
      try {
        rows[i].bundle = run_scenario(variants[i], row_options);
        if (!rows[i].bundle->failure.empty()) rows[i].error = rows[i].bundle->failure;
      } catch (const std::exception& e) {
        rows[i].error = e.what();
      }
    }
  };
  const int n = std::max(1, std::min<int>(threads, static_cast<int>(values.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  return rows;
}

void write_sweep_csv(std::ostream& os, const std::string& key, const std::vector<SweepRow>& rows) {
  std::vector<std::string> header = {key};
  for (const std::string& h : phase_csv_header()) header.push_back(h);
  for (const char* h : {"spacelike", "lightlike", "timelike", "passed", "error"}) header.push_back(h);
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n';
  const std::size_t phase_cols = phase_csv_header().size();
  for (const SweepRow& r : rows) {
    os << format_number(r.value);
    if (r.bundle && r.bundle->phases) {
      for (double x : phase_csv_row(*r.bundle->phases)) os << ',' << format_number(x);
    } else {
      for (std::size_t i = 0; i < phase_cols; ++i) os << ",";
    }
    const std::array<int, 3> counts = r.bundle ? r.bundle->causal_counts : std::array<int, 3>{};
    os << ',' << counts[0] << ',' << counts[1] << ',' << counts[2] << ',' << (r.passed() ? "true" : "false") << ',';
    std::string err = r.error;
    for (char& ch : err) {
      if (ch == '"') ch = '\'';
      if (ch == '\n') ch = ' ';
    }
    os << '"' << err << "\"\n";
  }
}

// --- golden suite ----------------------------------------------------------------

int run_golden(std::ostream& os, const Tolerances& tol) {
  int failures = 0;
  auto line = [&](const std::string& name, double residual, double limit) {
    const bool pass = std::isfinite(residual) && residual <= limit;
    if (!pass) ++failures;
    char buf[64];
    std::snprintf(buf, sizeof buf, " residual=%.3g tol=%.3g", residual, limit);
    os << (pass ? "PASS " : "FAIL ") << name << buf << '\n';
  };
  try {
    const OscillatorModel m(OscillatorParams{}, tol);
    const StateSection section = m.section();
    const CMatrix q0 = golden_q();
    for (const Point& p : {Point{{0.1, -0.2, 0.15, 0.05}}, Point{{-0.05, 0.1, -0.2, 0.1}},
                           Point{{0.2, 0.15, 0.0, -0.25}}}) {
      const GeometricTensors t = tensors(section, p, tol);
      std::ostringstream at;
      at << "(" << p(0) << "," << p(1) << "," << p(2) << "," << p(3) << ")";
      line("qgt" + at.str(), max_abs(CMatrix(t.Q - q0)), 1e-6);
      line("curvature" + at.str(), max_abs(RMatrix(t.Omega - RMatrix(q0.imag()))), 1e-6);
      line("metric" + at.str(), max_abs(RMatrix(t.g - RMatrix(q0.real()))), 1e-6);
    }
    const RVector ev = Eigen::SelfAdjointEigenSolver<RMatrix>(RMatrix(q0.real())).eigenvalues();
    const double s5 = std::sqrt(5.0);
    const RVector expect = (RVector(4) << (1 - s5) / 2, (1 - s5) / 2, (1 + s5) / 2, (1 + s5) / 2).finished();
    line("metric_eigenvalues", (ev - expect).cwiseAbs().maxCoeff(), 1e-8);

    EvolveOptions eo;
    eo.tol = tol;
    const EvolutionRecord rec = evolve(m.pt_hamiltonian(), m.metric(), m.pt_path(),
                                       {coherent_state(0.0, m.params().n), m.pt_path()(0.0)}, 3000, eo);
    const PhaseReport rep = phase_report(rec, m.pt_hamiltonian(), m.metric(), tol);
    const double area = 2.0 * m.loop_area();
    line("unitarity", rec.max_norm_drift(), 1e-8);
    line("dynamical_phase_zero", std::abs(rep.beta), 1e-12);
    line("gamma_vs_twice_area", phase_distance(rep.gamma, area), 1e-4);
    line("route_spread", rep.route_spread, 1e-5);
    int non_timelike = 0;
    for (const ClassifiedSample& s : classify_evolution(section, m.section_loop(), 32, tol)) {
      if (s.tag != Causal::timelike) ++non_timelike;
    }
    line("timelike_loop", non_timelike, 0.0);
  } catch (const Error& e) {
    os << "FAIL golden suite aborted: " << e.what() << '\n';
    ++failures;
  }
  return failures;
}

}  // namespace ptqm
