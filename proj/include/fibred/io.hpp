#pragma once

#include <iosfwd>
#include <string>

#include "json.hpp"

#include "fibred/analysis.hpp"
#include "fibred/dynamics.hpp"
#include "fibred/measures.hpp"
#include "fibred/transport.hpp"

namespace fibred {

using json = nlohmann::json;

/// {"type": "uniform"}, {"type": "cdf", "values": [...]},
/// {"type": "atoms", "atoms": [{"omega": , "weight": }, ...]} or
/// {"type": "mixed", "atoms": [...], "values": [...]} ("values" defaults to
/// the uniform CDF).
MarginalPtr marginal_from_json(const json& j);
json marginal_to_json(const LabelMarginal& pi);

/// {"marginal": {...}, "dim": d,
///  "fibres": [{"cell": [a, b], "weight": w, "points": [{"x": [...], "w": }]}]}
/// A cell with a == b is an atom.
FibredMeasure measure_from_json(const json& j);
json measure_to_json(const FibredMeasure& mu);

json curve_to_json(const MeasureCurve& curve);
json plan_to_json(const TransportPlanResult& plan);
json bound_to_json(const BoundReport& b);

/// Parse failures raise ValidationError.
json read_json(const std::string& path);
void write_json(const std::string& path, const json& j);
FibredMeasure read_measure(const std::string& path);
void write_measure(const std::string& path, const FibredMeasure& mu);

/// Columns t, particle_id, cell_k, x_0..x_{d-1}, one row per particle per
/// recorded node.
void write_trajectory_csv(std::ostream& os, const TrajectoryEnsemble& traj);

/// 12 significant digits.
std::string format_number(double x);

}  // namespace fibred
