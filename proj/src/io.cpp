#include "fibred/io.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

#include "fibred/error.hpp"

namespace fibred {

namespace {

std::vector<Atom> atoms_from_json(const json& j) {
  std::vector<Atom> atoms;
  for (const auto& a : j)
    atoms.push_back({a.at("omega").get<double>(), a.at("weight").get<double>()});
  return atoms;
}

template <class F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ValidationError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

MarginalPtr marginal_from_json(const json& j) {
  return guarded("invalid marginal", [&] {
    const std::string type = j.at("type").get<std::string>();
    if (type == "uniform") return make_marginal(LabelMarginal::uniform());
    if (type == "cdf")
      return make_marginal(
          LabelMarginal::from_cdf_values(j.at("values").get<std::vector<double>>()));
    if (type == "atoms")
      return make_marginal(LabelMarginal::from_atoms(atoms_from_json(j.at("atoms"))));
    if (type == "mixed") {
      std::vector<double> values{0.0, 1.0};
      if (j.contains("values")) values = j.at("values").get<std::vector<double>>();
      return make_marginal(
          LabelMarginal::mixed(atoms_from_json(j.at("atoms")), std::move(values)));
    }
    throw ValidationError("unknown marginal type '" + type + "'");
  });
}

json marginal_to_json(const LabelMarginal& pi) {
  json atoms = json::array();
  for (const auto& a : pi.atoms())
    atoms.push_back({{"omega", a.omega}, {"weight", a.weight}});
  if (pi.atoms().empty()) {
    if (pi.is_uniform()) return {{"type", "uniform"}};
    return {{"type", "cdf"}, {"values", pi.cdf_values()}};
  }
  if (pi.cdf_values().empty()) return {{"type", "atoms"}, {"atoms", atoms}};
  return {{"type", "mixed"}, {"atoms", atoms}, {"values", pi.cdf_values()}};
}

FibredMeasure measure_from_json(const json& j) {
  return guarded("invalid measure", [&] {
    auto pi = marginal_from_json(j.at("marginal"));
    const int dim = j.at("dim").get<int>();
    if (dim < 1) throw ValidationError("dim must be positive");
    std::vector<Fibre> fibres;
    for (const auto& f : j.at("fibres")) {
      const auto cell = f.at("cell").get<std::vector<double>>();
      if (cell.size() != 2) throw ValidationError("cell must be [a, b]");
      std::vector<double> coords, weights;
      for (const auto& p : f.at("points")) {
        const auto x = p.at("x").get<std::vector<double>>();
        if (x.size() != static_cast<std::size_t>(dim))
          throw ValidationError("point dimension differs from dim");
        coords.insert(coords.end(), x.begin(), x.end());
        weights.push_back(p.at("w").get<double>());
      }
      Fibre fb;
      fb.cell = cell[0] == cell[1] ? Cell::at(cell[0])
                                   : Cell::interval(cell[0], cell[1]);
      fb.weight = f.at("weight").get<double>();
      fb.law = DiscreteMeasure(dim, std::move(coords), std::move(weights));
      fibres.push_back(std::move(fb));
    }
    return FibredMeasure(std::move(pi), dim, std::move(fibres));
  });
}

json measure_to_json(const FibredMeasure& mu) {
  json fibres = json::array();
  for (const auto& f : mu.fibres()) {
    json points = json::array();
    for (std::size_t i = 0; i < f.law.size(); ++i) {
      const auto p = f.law.point(i);
      points.push_back({{"x", std::vector<double>(p.begin(), p.end())},
                        {"w", f.law.weight(i)}});
    }
    fibres.push_back({{"cell", {f.cell.lo, f.cell.hi}},
                      {"weight", f.weight},
                      {"points", points}});
  }
  return {{"marginal", marginal_to_json(mu.marginal())},
          {"dim", mu.dim()},
          {"fibres", fibres}};
}

json curve_to_json(const MeasureCurve& curve) {
  json out = json::array();
  for (std::size_t s = 0; s < curve.size(); ++s) {
    json m = measure_to_json(curve.measures[s]);
    m["t"] = curve.times[s];
    out.push_back(std::move(m));
  }
  return out;
}

json plan_to_json(const TransportPlanResult& plan) {
  json entries = json::array();
  for (const auto& e : plan.plan) entries.push_back({e.i, e.j, e.mass});
  return {{"cost", plan.cost},
          {"distance", plan.distance},
          {"plan", entries},
          {"primal_feasibility_residual", plan.primal_feasibility_residual}};
}

json bound_to_json(const BoundReport& b) {
  return {{"name", b.name}, {"t", b.t},         {"lhs", b.lhs},
          {"rhs", b.rhs},   {"slack", b.slack()}, {"pass", b.pass()}};
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError("cannot parse '" + path + "': " + e.what());
  }
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

FibredMeasure read_measure(const std::string& path) {
  return measure_from_json(read_json(path));
}

void write_measure(const std::string& path, const FibredMeasure& mu) {
  write_json(path, measure_to_json(mu));
}

void write_trajectory_csv(std::ostream& os, const TrajectoryEnsemble& traj) {
  const auto d = static_cast<std::size_t>(traj.dim);
  os << "t,particle_id,cell_k";
  for (std::size_t c = 0; c < d; ++c) os << ",x_" << c;
  os << '\n';
  for (std::size_t s = 0; s < traj.states.size(); ++s) {
    const std::string t = format_number(traj.grid.t(traj.steps[s]));
    const auto& x = traj.states[s];
    for (std::size_t i = 0; i < traj.size(); ++i) {
      os << t << ',' << i << ',' << traj.coarse_cell[i];
      for (std::size_t c = 0; c < d; ++c) os << ',' << format_number(x[i * d + c]);
      os << '\n';
    }
  }
}

std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

}  // namespace fibred
