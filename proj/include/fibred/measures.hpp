#pragma once

// Finite-support fibred probability measures over [0,1] x R^d.
//
// A fibred measure is stored as a list of fibres, each living on a label cell
// (an interval [lo, hi) or a single atom) and carrying a finitely supported
// law on R^d. All measures produced by the library are piecewise constant in
// the label variable on such cells.

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace fibred {

inline constexpr double kWeightTol = 1e-12;
inline constexpr double kMergeTol = 1e-12;

struct Cell {
  double lo = 0.0;
  double hi = 1.0;
  bool atom = false;

  static Cell interval(double a, double b) { return Cell{a, b, false}; }
  static Cell at(double omega) { return Cell{omega, omega, true}; }

  bool contains(double omega) const {
    return atom ? omega == lo : (omega >= lo && omega < hi);
  }
  friend bool operator==(const Cell&, const Cell&) = default;
};

/// Orders atoms by position and intervals by left end; an atom sorts before
/// an interval starting at the same point.
bool cell_less(const Cell& a, const Cell& b);

struct Atom {
  double omega = 0.0;
  double weight = 0.0;
};

/// Reference measure pi on [0,1]: finitely many atoms plus an optional
/// continuous part with a piecewise-linear CDF sampled on a uniform grid.
class LabelMarginal {
 public:
  static constexpr int kDefaultGrid = 4096;

  static LabelMarginal uniform();
  /// Samples `cdf` on `grid` uniform points of [0,1].
  static LabelMarginal from_cdf(const std::function<double(double)>& cdf,
                                int grid = kDefaultGrid);
  static LabelMarginal from_cdf_values(std::vector<double> values);
  static LabelMarginal from_atoms(std::vector<Atom> atoms);
  /// Atoms plus a continuous part carrying the remaining mass 1 - sum(w).
  static LabelMarginal mixed(std::vector<Atom> atoms,
                             std::vector<double> cdf_values);

  const std::vector<Atom>& atoms() const { return atoms_; }
  double continuous_mass() const { return continuous_mass_; }
  bool nonatomic() const { return atoms_.empty(); }
  bool is_uniform() const { return uniform_; }
  const std::vector<double>& cdf_values() const { return cdf_; }

  /// Normalised CDF of the continuous part (0 when there is none).
  double cdf(double omega) const;
  /// Inverse of `cdf` by monotone linear interpolation.
  double quantile(double u) const;
  /// pi-mass of a cell. Interval cells only see the continuous part; atom
  /// cells only see their atom.
  double mass(const Cell& cell) const;
  double atom_weight(double omega) const;

  /// Cells covering the support: one interval [0,1) for the continuous part
  /// (if any) followed by every atom.
  std::vector<Cell> support_cells() const;

  bool same_as(const LabelMarginal& other, double tol = kWeightTol) const;

 private:
  std::vector<Atom> atoms_;
  std::vector<double> cdf_;  // empty when there is no continuous part
  double continuous_mass_ = 0.0;
  bool uniform_ = false;
};

using MarginalPtr = std::shared_ptr<const LabelMarginal>;

MarginalPtr make_marginal(LabelMarginal m);

/// Finitely supported probability measure on R^d. Points are stored
/// row-major in `coords` (size() * dim() values).
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;
  /// Weights must be positive and sum to 1 within kWeightTol; they are then
  /// renormalised exactly.
  DiscreteMeasure(int dim, std::vector<double> coords,
                  std::vector<double> weights);

  /// Normalises arbitrary positive weights.
  static DiscreteMeasure normalised(int dim, std::vector<double> coords,
                                    std::vector<double> weights);
  static DiscreteMeasure dirac(std::span<const double> x);
  static DiscreteMeasure uniform(int dim, std::vector<double> coords);

  int dim() const { return dim_; }
  std::size_t size() const { return weights_.size(); }
  std::span<const double> point(std::size_t i) const {
    return {coords_.data() + i * static_cast<std::size_t>(dim_),
            static_cast<std::size_t>(dim_)};
  }
  double weight(std::size_t i) const { return weights_[i]; }
  const std::vector<double>& coords() const { return coords_; }
  const std::vector<double>& weights() const { return weights_; }

  /// Points sorted lexicographically with coordinates within `tol` merged.
  DiscreteMeasure merged(double tol = kMergeTol) const;
  /// Weighted mean of the points.
  std::vector<double> barycentre() const;
  /// (sum_j w_j |x_j|^p)^{1/p}
  double moment(int p) const;
  double radius() const;

  static DiscreteMeasure mixture(std::span<const DiscreteMeasure* const> parts,
                                 std::span<const double> lambdas);

 private:
  int dim_ = 0;
  std::vector<double> coords_;
  std::vector<double> weights_;
};

struct Fibre {
  Cell cell;
  double weight = 0.0;  // pi(cell)
  DiscreteMeasure law;
};

/// Label partition of (Omega, pi). Masses are stored explicitly because an
/// atom may be split into several equal-mass copies by `refine`.
struct Partition {
  MarginalPtr marginal;
  std::vector<Cell> cells;
  std::vector<double> masses;

  std::size_t size() const { return cells.size(); }
};

class FibredMeasure {
 public:
  FibredMeasure() = default;
  /// Validates disjointness, weights against pi and point finiteness; fibres
  /// are sorted by cell.
  FibredMeasure(MarginalPtr marginal, int dim, std::vector<Fibre> fibres);

  /// pi x rho on the marginal's support cells.
  static FibredMeasure product(MarginalPtr marginal, const DiscreteMeasure& rho);
  /// Piecewise constant on `part` with one law per cell.
  static FibredMeasure on_partition(const Partition& part,
                                    std::vector<DiscreteMeasure> laws);

  const LabelMarginal& marginal() const { return *marginal_; }
  const MarginalPtr& marginal_ptr() const { return marginal_; }
  int dim() const { return dim_; }
  const std::vector<Fibre>& fibres() const { return fibres_; }
  std::size_t support_size() const;

 private:
  MarginalPtr marginal_;
  int dim_ = 0;
  std::vector<Fibre> fibres_;
};

/// Non-owning view of a piecewise-constant fibred measure. Used by the field
/// evaluators so particle states can be read in place.
struct FibreView {
  Cell cell;
  double weight = 0.0;
  std::span<const double> coords;
  std::span<const double> weights;  // empty means uniform weights

  std::size_t size(int dim) const {
    return coords.size() / static_cast<std::size_t>(dim);
  }
  double point_weight(std::size_t j, std::size_t n) const {
    return weights.empty() ? 1.0 / static_cast<double>(n) : weights[j];
  }
};

struct MeasureView {
  const LabelMarginal* marginal = nullptr;
  int dim = 0;
  std::vector<FibreView> fibres;
};

MeasureView view_of(const FibredMeasure& mu);

/// Common refinement of two cell families over the same marginal.
struct CellOverlap {
  Cell cell;
  double mass = 0.0;
  std::size_t first = 0;   // index into the first family
  std::size_t second = 0;  // index into the second family
};

/// Intersections of positive pi-mass between two cell families.
std::vector<CellOverlap> overlap_cells(const LabelMarginal& pi,
                                       std::span<const Cell> a,
                                       std::span<const Cell> b);

/// Pairs the fibres of two measures on their common refinement. Throws
/// IncomparableMarginalsError when the marginals differ.
std::vector<CellOverlap> common_refinement(const FibredMeasure& a,
                                           const FibredMeasure& b);

double fibred_moment(const FibredMeasure& mu, int p);
double fibred_moment(const MeasureView& mu, int p);
double support_radius(const FibredMeasure& mu);
FibredMeasure conditional_expectation(const FibredMeasure& mu,
                                      const Partition& part);
DiscreteMeasure space_marginal(const FibredMeasure& mu);

struct CellBarycentre {
  Cell cell;
  std::vector<double> x;
};
std::vector<CellBarycentre> barycentres(const FibredMeasure& mu);

/// Applies `map` to every support point (labels untouched).
FibredMeasure push_forward(
    const FibredMeasure& mu,
    const std::function<void(const Cell&, std::span<const double>,
                             std::span<double>)>& map);

}  // namespace fibred
