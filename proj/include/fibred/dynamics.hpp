#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fibred/discretize.hpp"
#include "fibred/fields.hpp"
#include "fibred/measures.hpp"
#include "fibred/transport.hpp"

namespace fibred {

struct TimeGrid {
  double T = 1.0;
  int steps = 200;

  double dt() const { return T / steps; }
  double t(int s) const { return T * static_cast<double>(s) / steps; }
};

void check_grid(const TimeGrid& grid);

enum class Integrator { euler, rk4 };

Integrator parse_integrator(const std::string& name);

struct SolveOptions {
  Integrator integrator = Integrator::rk4;
  /// Store every k-th grid node (the last node is always stored).
  int record_every = 1;
  bool store = true;
  bool parallel = true;
  int quadrature = kQuadratureNodes;
  /// Abort when a coordinate exceeds blowup_factor * R_r.
  double blowup_factor = 1e3;
  /// Called at every recorded node with the full particle state.
  std::function<void(int, double, std::span<const double>)> observer;
};

struct TrajectoryEnsemble {
  TimeGrid grid;
  int dim = 0;
  std::size_t per_cell = 0;
  Partition coarse;
  std::vector<std::size_t> coarse_cell;
  std::vector<int> steps;                  // recorded grid indices
  std::vector<std::vector<double>> states;  // one N*d block per recorded node
  double max_initial_norm = 0.0;
  /// max_i |x_i(t)| over every grid node, recorded or not.
  std::vector<double> max_norm;

  std::size_t size() const { return coarse_cell.size(); }
};

/// Particle i uses the field averaged over fine cell i; the measure argument
/// is the empirical measure on the coarse partition, rebuilt at every stage.
TrajectoryEnsemble solve_particles(const VectorField& v, const Partition& fine,
                                   const Partition& coarse,
                                   const ParticleSample& x0,
                                   const TimeGrid& grid,
                                   const SolveOptions& opts = {});

/// All particles of coarse cell k share the field averaged over cell k.
TrajectoryEnsemble solve_auxiliary(const VectorField& v,
                                   const Partition& coarse,
                                   const ParticleSample& x0,
                                   const TimeGrid& grid,
                                   const SolveOptions& opts = {});

struct MeasureCurve {
  std::vector<double> times;
  std::vector<FibredMeasure> measures;

  std::size_t size() const { return times.size(); }
};

FibredMeasure empirical_measure(const Partition& coarse, int dim,
                                std::size_t per_cell,
                                std::span<const double> x);

MeasureCurve empirical_curve(const TrajectoryEnsemble& traj,
                             const Partition& coarse);

/// Explicit Euler on the support of mu0 with the measure argument delayed
/// by T / n_delay (mu0 before time 0). `grid.steps` must be a multiple of
/// n_delay.
MeasureCurve delayed_euler_curve(const VectorField& v,
                                 const FibredMeasure& mu0,
                                 const TimeGrid& grid, int n_delay,
                                 int quadrature = kQuadratureNodes);

struct FlowTable {
  int iterations = 0;
  std::vector<double> residuals;  // weighted sup distance between iterates
  /// Support trajectories of the last iterate, (steps + 1) x points x d.
  std::vector<double> trajectories;
  std::size_t points = 0;
  double R = 0.0;  // radius used for the Lipschitz weight
};

struct FlowResult {
  MeasureCurve curve;
  FlowTable table;
};

/// Picard iteration on the characteristic flow: integrate the support of
/// mu0 along the field evaluated at the previous iterate's pushforward until
/// the weighted sup distance exp(-2 int_0^t L_R) |Phi_{j+1} - Phi_j| < tol.
FlowResult flow_picard(const VectorField& v, const FibredMeasure& mu0,
                       const TimeGrid& grid, double tol = 1e-8,
                       int max_iter = 100,
                       Integrator integrator = Integrator::rk4,
                       int quadrature = kQuadratureNodes);

enum class CurveMetric { fibred_w1, classical_w1 };

struct CurveDistance {
  double sup = 0.0;
  std::vector<double> values;
};

CurveDistance curve_distance(const MeasureCurve& a, const MeasureCurve& b,
                             CurveMetric metric,
                             const ProductMetric& product = {});

}  // namespace fibred
