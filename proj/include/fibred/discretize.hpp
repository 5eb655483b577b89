#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "fibred/fields.hpp"
#include "fibred/measures.hpp"

namespace fibred {

/// Cells [F^{-1}((i-1)/N), F^{-1}(i/N)) of a nonatomic marginal.
Partition equipartition(MarginalPtr pi, int N);

/// Equipartition of the continuous part into `n` cells plus one cell per
/// atom. Reduces to `equipartition` for nonatomic marginals.
Partition label_partition(MarginalPtr pi, int n);

/// Splits every cell into `m` children of equal pi-mass (atoms into m equal
/// copies). Child (k, l) has index k * m + l.
Partition refine(const Partition& coarse, int m);

/// Inverse of `refine`: joins consecutive groups of `m` cells.
Partition coarsen(const Partition& fine, int m);

/// Quadrature rule per cell for averaging a field over the cell. Nodes and
/// weights of cell i are in [offset[i], offset[i + 1]).
struct AveragedField {
  std::vector<std::size_t> offset;
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return offset.empty() ? 0 : offset.size() - 1; }
};

inline constexpr int kQuadratureNodes = 8;

/// Fields that are piecewise constant in omega are averaged exactly over the
/// overlap pieces; others use `q` pi-quantile midpoint nodes per cell.
AveragedField average_field(const VectorField& v, const Partition& part,
                            int q = kQuadratureNodes);

/// Evaluates the averaged field of cell `i` at x.
void eval_averaged(const VectorField& v, const FieldState& state,
                   const AveragedField& avg, std::size_t i,
                   std::span<const double> x, std::span<double> out);

/// Particle states with their coarse cell; particle k * per_cell + l lives
/// in coarse cell k.
struct ParticleSample {
  int dim = 0;
  std::size_t per_cell = 0;
  std::vector<double> x;
  std::vector<std::size_t> cell;

  std::size_t size() const { return cell.size(); }
};

std::uint64_t cell_seed(std::uint64_t seed, std::uint64_t cell);

/// m i.i.d. draws per coarse cell from the cell-averaged fibre of mu0.
ParticleSample sample_initial(const FibredMeasure& mu0,
                              const Partition& coarse, int m,
                              std::uint64_t seed);

/// Sum of |f_{i+1} - f_i| over a sampled scalar map.
double total_variation(std::span<const double> values);

/// Sum of dist(i, i+1) over `count` ordered samples of a map into a metric
/// space.
double total_variation(std::size_t count,
                       const std::function<double(std::size_t, std::size_t)>&
                           dist);

/// Variation of omega -> mu_omega over the interval cells of mu in W_1.
/// Exact for measures piecewise constant on their cells.
double fibre_variation(const FibredMeasure& mu);

}  // namespace fibred
