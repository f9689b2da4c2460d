#include "ptqm/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace ptqm {

std::string format_number(double x) {
  if (!std::isfinite(x)) return "null";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

void dump(const Json& j, std::ostringstream& os, int indent, int depth) {
  const std::string pad = indent > 0 ? "\n" + std::string(static_cast<std::size_t>(indent * (depth + 1)), ' ') : "";
  const std::string close = indent > 0 ? "\n" + std::string(static_cast<std::size_t>(indent * depth), ' ') : "";
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ',';
        first = false;
        os << pad << Json(it.key()).dump() << (indent > 0 ? ": " : ":");
        dump(it.value(), os, indent, depth + 1);
      }
      os << close << '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      const bool flat = std::none_of(j.begin(), j.end(), [](const Json& e) { return e.is_structured(); });
      os << '[';
      bool first = true;
      for (const Json& e : j) {
        if (!first) os << (flat && indent > 0 ? ", " : ",");
        first = false;
        if (!flat) os << pad;
        dump(e, os, indent, depth + 1);
      }
      if (!flat) os << close;
      os << ']';
      return;
    }
    case Json::value_t::number_float:
      os << format_number(j.get<double>());
      return;
    default:
      os << j.dump();
  }
}

}  // namespace

std::string dump_json(const Json& j, int indent) {
  std::ostringstream os;
  dump(j, os, indent, 0);
  return os.str();
}

Json to_json(const Point& p) {
  Json a = Json::array();
  for (Index i = 0; i < p.size(); ++i) a.push_back(p(i));
  return a;
}

Json to_json(const RMatrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) rows.push_back(to_json(Point(m.row(i).transpose())));
  return rows;
}

Json to_json(const CMatrix& m) {
  return Json{{"re", to_json(RMatrix(m.real()))}, {"im", to_json(RMatrix(m.imag()))}};
}

Json to_json(const EvolutionRecord& record) {
  Json states = Json::array();
  for (const PhysicalState& s : record.states) {
    Json v = Json::array();
    for (Index i = 0; i < s.vec.size(); ++i) v.push_back({s.vec(i).real(), s.vec(i).imag()});
    states.push_back(std::move(v));
  }
  return Json{{"times", record.times}, {"norms", record.norms}, {"states", std::move(states)}};
}

namespace {

Json complex_json(Complex c) { return Json{{"re", c.real()}, {"im", c.imag()}}; }

}  // namespace

Json to_json(const PhaseReport& r) {
  Json routes = Json::object();
  for (const auto& [name, value] : r.gamma_routes) routes[name] = value;
  Json j{{"alpha", r.alpha},
         {"beta", r.beta},
         {"gamma", r.gamma},
         {"gamma_routes", std::move(routes)},
         {"gw_beta", complex_json(r.gw_beta)},
         {"gw_gamma", complex_json(r.gw_gamma)},
         {"gauge_term", complex_json(r.gauge_term)},
         {"eta", r.eta ? Json(*r.eta) : Json(nullptr)},
         {"residuals",
          {{"decomposition", r.decomposition_residual},
           {"gw_decomposition", r.gw_decomposition_residual},
           {"gw_identity", r.gw_identity_residual},
           {"route_spread", r.route_spread},
           {"holonomy_transport", r.holonomy_transport_residual},
           {"kinematic_scale", r.kinematic_scale}}}};
  return j;
}

Json to_json(const GeometricTensors& t) {
  const RVector ev = Eigen::SelfAdjointEigenSolver<RMatrix>(t.g, Eigen::EigenvaluesOnly).eigenvalues();
  return Json{{"point", to_json(t.point)},
              {"A", to_json(t.A)},
              {"Omega", to_json(t.Omega)},
              {"g", to_json(t.g)},
              {"g_eigenvalues", to_json(ev)},
              {"degenerate_directions", t.degenerate_directions},
              {"Q", to_json(t.Q)}};
}

std::vector<std::string> tensor_csv_header(Index m) {
  std::vector<std::string> h;
  for (Index i = 0; i < m; ++i) h.push_back("lambda" + std::to_string(i + 1));
  for (Index i = 0; i < m; ++i) h.push_back("A" + std::to_string(i + 1));
  for (const char* name : {"Omega", "g", "ReQ", "ImQ"}) {
    for (Index i = 0; i < m; ++i) {
      for (Index j = 0; j < m; ++j) h.push_back(std::string(name) + std::to_string(i + 1) + std::to_string(j + 1));
    }
  }
  return h;
}

std::vector<double> tensor_csv_row(const GeometricTensors& t) {
  std::vector<double> row(t.point.data(), t.point.data() + t.point.size());
  row.insert(row.end(), t.A.data(), t.A.data() + t.A.size());
  for (const RMatrix& m : {t.Omega, t.g, RMatrix(t.Q.real()), RMatrix(t.Q.imag())}) {
    for (Index i = 0; i < m.rows(); ++i) {
      for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    }
  }
  return row;
}

std::vector<std::string> phase_csv_header() {
  return {"alpha", "beta", "gamma_gauge_split", "gamma_gauge_invariant", "gamma_kinematic",
          "gamma_kinematic_bargmann", "gamma_holonomy", "gw_beta_re", "gw_beta_im",
          "gw_gamma_re", "gw_gamma_im", "route_spread", "gw_identity_residual"};
}

std::vector<double> phase_csv_row(const PhaseReport& r) {
  auto route_value = [&](const char* name) {
    const auto it = r.gamma_routes.find(name);
    return it == r.gamma_routes.end() ? std::nan("") : it->second;
  };
  return {r.alpha,
          r.beta,
          route_value(route::kGaugeSplit),
          route_value(route::kGaugeInvariant),
          route_value(route::kKinematic),
          route_value(route::kBargmann),
          route_value(route::kHolonomy),
          r.gw_beta.real(),
          r.gw_beta.imag(),
          r.gw_gamma.real(),
          r.gw_gamma.imag(),
          r.route_spread,
          r.gw_identity_residual};
}

void write_csv(std::ostream& os, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_number(row[i]);
    os << '\n';
  }
}

}  // namespace ptqm
