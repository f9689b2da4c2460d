#pragma once

// JSON and CSV forms of records, phase reports and tensors. Numbers are
// written with 17 significant digits so that identical inputs give
// byte-identical files.

#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "ptqm/geometry.hpp"
#include "ptqm/phases.hpp"

namespace ptqm {

using Json = nlohmann::ordered_json;

/// "%.17g"; NaN and infinities become null.
std::string format_number(double x);

/// Deterministic dump with fixed number formatting.
std::string dump_json(const Json& j, int indent = 2);

Json to_json(const Point& p);
Json to_json(const RMatrix& m);  // row-major nested arrays
Json to_json(const CMatrix& m);  // {"re": […], "im": […]}

/// {"times": […], "norms": […], "states": [[[re, im], …], …]}
Json to_json(const EvolutionRecord& record);
Json to_json(const PhaseReport& report);
Json to_json(const GeometricTensors& t);

/// Column names for one row of tensor_csv_row.
std::vector<std::string> tensor_csv_header(Index dim_coords);
/// Coordinates, then A, Ω, g, Re Q, Im Q, each row-major.
std::vector<double> tensor_csv_row(const GeometricTensors& t);

std::vector<std::string> phase_csv_header();
std::vector<double> phase_csv_row(const PhaseReport& report);

void write_csv(std::ostream& os, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

}  // namespace ptqm
