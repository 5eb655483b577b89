#include <algorithm>
#include <cmath>
#include <string>

#include "fibred/error.hpp"
#include "fibred/measures.hpp"

namespace fibred {

namespace {

std::vector<double> checked_cdf(std::vector<double> v) {
  if (v.size() < 2) throw ValidationError("CDF grid needs at least 2 points");
  for (double x : v)
    if (!std::isfinite(x)) throw ValidationError("CDF value is not finite");
  if (std::abs(v.front()) > kWeightTol)
    throw ValidationError("CDF must start at 0");
  if (std::abs(v.back() - 1.0) > kWeightTol)
    throw ValidationError("CDF must end at 1");
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] < v[i - 1] - kWeightTol)
      throw ValidationError("CDF decreases at grid index " +
                            std::to_string(i));
  v.front() = 0.0;
  v.back() = 1.0;
  for (std::size_t i = 1; i < v.size(); ++i) v[i] = std::max(v[i], v[i - 1]);
  return v;
}

std::vector<Atom> checked_atoms(std::vector<Atom> atoms) {
  for (const auto& a : atoms) {
    if (!(a.omega >= 0.0 && a.omega <= 1.0))
      throw ValidationError("atom position outside [0,1]");
    if (!(a.weight > 0.0) || !std::isfinite(a.weight))
      throw ValidationError("atom weight must be positive");
  }
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& a, const Atom& b) { return a.omega < b.omega; });
  for (std::size_t i = 1; i < atoms.size(); ++i)
    if (atoms[i].omega == atoms[i - 1].omega)
      throw ValidationError("duplicate atom position");
  return atoms;
}

}  // namespace

LabelMarginal LabelMarginal::uniform() {
  LabelMarginal m;
  m.cdf_ = {0.0, 1.0};
  m.continuous_mass_ = 1.0;
  m.uniform_ = true;
  return m;
}

LabelMarginal LabelMarginal::from_cdf(const std::function<double(double)>& cdf,
                                      int grid) {
  if (grid < 2) throw ValidationError("CDF grid needs at least 2 points");
  std::vector<double> v(static_cast<std::size_t>(grid));
  for (int i = 0; i < grid; ++i)
    v[static_cast<std::size_t>(i)] =
        cdf(static_cast<double>(i) / static_cast<double>(grid - 1));
  return from_cdf_values(std::move(v));
}

LabelMarginal LabelMarginal::from_cdf_values(std::vector<double> values) {
  LabelMarginal m;
  m.cdf_ = checked_cdf(std::move(values));
  m.continuous_mass_ = 1.0;
  return m;
}

LabelMarginal LabelMarginal::from_atoms(std::vector<Atom> atoms) {
  LabelMarginal m;
  m.atoms_ = checked_atoms(std::move(atoms));
  if (m.atoms_.empty()) throw ValidationError("atom list is empty");
  double total = 0.0;
  for (const auto& a : m.atoms_) total += a.weight;
  if (std::abs(total - 1.0) > kWeightTol)
    throw ValidationError("atom weights must sum to 1");
  for (auto& a : m.atoms_) a.weight /= total;
  return m;
}

LabelMarginal LabelMarginal::mixed(std::vector<Atom> atoms,
                                   std::vector<double> cdf_values) {
  LabelMarginal m;
  m.atoms_ = checked_atoms(std::move(atoms));
  double total = 0.0;
  for (const auto& a : m.atoms_) total += a.weight;
  if (!(total < 1.0 - kWeightTol))
    throw ValidationError("mixed marginal leaves no continuous mass");
  m.cdf_ = checked_cdf(std::move(cdf_values));
  m.continuous_mass_ = 1.0 - total;
  m.uniform_ = m.cdf_.size() == 2;
  return m;
}

MarginalPtr make_marginal(LabelMarginal m) {
  return std::make_shared<const LabelMarginal>(std::move(m));
}

double LabelMarginal::cdf(double omega) const {
  if (cdf_.empty()) return 0.0;
  if (omega <= 0.0) return 0.0;
  if (omega >= 1.0) return 1.0;
  if (cdf_.size() == 2) return omega;
  const double pos = omega * static_cast<double>(cdf_.size() - 1);
  const auto i = std::min(static_cast<std::size_t>(pos), cdf_.size() - 2);
  const double s = pos - static_cast<double>(i);
  return cdf_[i] + s * (cdf_[i + 1] - cdf_[i]);
}

double LabelMarginal::quantile(double u) const {
  if (cdf_.empty()) throw NonatomicRequiredError("marginal has no density");
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  if (cdf_.size() == 2) return u;
  // first grid index with F >= u
  const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
  const auto j = static_cast<std::size_t>(it - cdf_.begin());
  const std::size_t i = j - 1;
  const double h = 1.0 / static_cast<double>(cdf_.size() - 1);
  const double df = cdf_[j] - cdf_[i];
  const double s = df > 0.0 ? (u - cdf_[i]) / df : 0.0;
  return (static_cast<double>(i) + s) * h;
}

double LabelMarginal::atom_weight(double omega) const {
  auto it = std::lower_bound(
      atoms_.begin(), atoms_.end(), omega,
      [](const Atom& a, double w) { return a.omega < w; });
  if (it != atoms_.end() && std::abs(it->omega - omega) <= kMergeTol)
    return it->weight;
  if (it != atoms_.begin() && std::abs((it - 1)->omega - omega) <= kMergeTol)
    return (it - 1)->weight;
  return 0.0;
}

double LabelMarginal::mass(const Cell& cell) const {
  if (cell.atom) return atom_weight(cell.lo);
  if (cdf_.empty() || !(cell.hi > cell.lo)) return 0.0;
  return continuous_mass_ * (cdf(cell.hi) - cdf(cell.lo));
}

std::vector<Cell> LabelMarginal::support_cells() const {
  std::vector<Cell> cells;
  if (!cdf_.empty()) cells.push_back(Cell::interval(0.0, 1.0));
  for (const auto& a : atoms_) cells.push_back(Cell::at(a.omega));
  std::sort(cells.begin(), cells.end(), cell_less);
  return cells;
}

bool LabelMarginal::same_as(const LabelMarginal& other, double tol) const {
  if (this == &other) return true;
  if (atoms_.size() != other.atoms_.size()) return false;
  for (std::size_t i = 0; i < atoms_.size(); ++i)
    if (std::abs(atoms_[i].omega - other.atoms_[i].omega) > tol ||
        std::abs(atoms_[i].weight - other.atoms_[i].weight) > tol)
      return false;
  if (cdf_.empty() != other.cdf_.empty()) return false;
  if (cdf_.empty()) return true;
  if (std::abs(continuous_mass_ - other.continuous_mass_) > tol) return false;
  if (cdf_ == other.cdf_) return true;
  auto check_grid = [&](const std::vector<double>& grid) {
    const double h = 1.0 / static_cast<double>(grid.size() - 1);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double w = static_cast<double>(i) * h;
      if (std::abs(cdf(w) - other.cdf(w)) > tol) return false;
    }
    return true;
  };
  return check_grid(cdf_) && check_grid(other.cdf_);
}

}  // namespace fibred
