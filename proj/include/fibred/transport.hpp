#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "fibred/measures.hpp"

namespace fibred {

inline constexpr std::size_t kSolverBudget = 512;

struct PlanEntry {
  std::size_t i = 0;
  std::size_t j = 0;
  double mass = 0.0;
};

struct TransportPlanResult {
  double cost = 0.0;      // sum of gamma_ij c_ij
  double distance = 0.0;  // cost^{1/p}
  std::vector<PlanEntry> plan;
  double primal_feasibility_residual = 0.0;
};

/// Exact balanced transport between weight vectors `a` and `b` with a dense
/// row-major cost matrix, by successive shortest paths with potentials.
TransportPlanResult solve_transport(std::span<const double> a,
                                    std::span<const double> b,
                                    std::span<const double> cost);

/// Exact W_p for measures on R, by the quantile formula.
double w_1d(const DiscreteMeasure& mu, const DiscreteMeasure& nu, int p);

/// Exact W_p with cost |x-y|^p.
TransportPlanResult w_discrete(const DiscreteMeasure& mu,
                               const DiscreteMeasure& nu, int p);
/// Exact W_p for a user-supplied ground distance matrix (cost is d^p).
TransportPlanResult w_discrete(std::span<const double> a,
                               std::span<const double> b,
                               std::span<const double> ground_distance, int p);

/// W_1 on the circle R / period Z: minimises the quantile coupling over
/// rotations.
double circular_w1(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                   double period);

/// Per-fibre W_p on the common refinement, averaged in L^p(pi).
double fibred_w(const FibredMeasure& mu, const FibredMeasure& nu, int p);
double fibred_w_serial(const FibredMeasure& mu, const FibredMeasure& nu,
                       int p);

struct ProductMetric {
  /// Ground distance (d_label^q + |x-y|^q)^{1/q}.
  double q = 2.0;
  /// Label quadrature nodes representing each interval cell.
  int label_nodes = 1;
};

/// Classical W_p on [0,1] x R^d. Interval cells are represented by
/// pi-quantile midpoints; when both measures share a marginal they are first
/// brought onto their common refinement.
double classical_w_product(const FibredMeasure& mu, const FibredMeasure& nu,
                           int p, const ProductMetric& metric = {});

/// A test function per cell of `common_refinement(mu, nu)`.
using CellPotential =
    std::function<double(std::size_t cell, std::span<const double> x)>;

/// sum_k pi_k (int phi_k d mu_k - int phi_k d nu_k) after checking that every
/// phi_k is 1-Lipschitz on the support within 1e-9.
double kr_dual_value(const FibredMeasure& mu, const FibredMeasure& nu,
                     const CellPotential& phi);

/// Piecewise-linear function on R, constant outside its knots.
struct Potential1D {
  std::vector<double> knots;
  std::vector<double> values;
  double operator()(double x) const;
};

/// Optimal 1D dual potential with slope -sign(F_mu - F_nu).
Potential1D cdf_dual_potential(const DiscreteMeasure& mu,
                               const DiscreteMeasure& nu);

}  // namespace fibred
