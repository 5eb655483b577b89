#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fibred/dynamics.hpp"
#include "fibred/fields.hpp"
#include "fibred/kernels.hpp"
#include "fibred/measures.hpp"

namespace fibred {

struct ConvergenceRecord {
  int N = 0;
  int n = 0;
  int m = 0;
  std::uint64_t seed = 0;
  double sup_t_error = 0.0;
  double runtime_seconds = 0.0;
};

struct BoundReport {
  std::string name;
  double t = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;

  double slack() const { return rhs - lhs; }
  bool pass(double tol = 1e-6) const { return slack() >= -tol; }
};

/// R_r = (r + |m|_1) exp(2 |m|_1)
double r_big(double r, double m_norm);

struct StabilityConstants {
  double R_r = 0.0;
  double L_norm = 0.0;  // int_0^T L_{R_r}
  double C_T = 0.0;     // exp(L_norm)
  double D_r = 0.0;     // exp((1 + C_T + 2 C_T^2) L_norm)
};

StabilityConstants stability_constants(const VectorField& v, double r,
                                       double T);

/// Per-node check of the Gronwall envelope between a curve mu driven by v
/// and a curve nu driven by w. Throws PreconditionError when a support
/// leaves B(0, R_r).
std::vector<BoundReport> stability_envelope(const MeasureCurve& mu,
                                            const MeasureCurve& nu,
                                            const VectorField& v,
                                            const VectorField& w,
                                            int quadrature = kQuadratureNodes);

/// Particle, support, per-fibre moment and absolute-continuity bounds along
/// a stored particle solve.
std::vector<BoundReport> apriori_bounds(const TrajectoryEnsemble& traj,
                                        const VectorField& v);

/// r C_d m^{-1/2}, times ln(1 + m) when d = 2.
double fg_bound(double r, int d, double m, double C_d = 1.0);

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // root mean square of log residuals
};

/// Least squares of log y against log x (at least two distinct x).
FitResult fit_loglog(std::span<const double> x, std::span<const double> y);

/// Averages errors over seeds per N, then fits log error against log N.
/// Needs at least four distinct N.
FitResult fit_rate(std::span<const ConvergenceRecord> records);

double quantitative_bound(double var_mu0, double var_V, double r, int d,
                          double N, double D_r, double C_d);

/// Upper bound sup|Psi| * T * int Var(w(., theta)) dpi(theta) on the
/// variation of the field map for a kernel field.
double kernel_field_variation(const LabelKernel& w, const LabelMarginal& pi,
                              double psi_sup, double T, int grid = 512);

/// Fits C_d as the largest E[W_1(empirical_m, target)] sqrt(m) / r over the
/// given sample sizes (log factor for d = 2). One-dimensional targets only.
double calibrate_C_d(std::span<const DiscreteMeasure> targets, double r,
                     std::span<const int> sizes, int seeds,
                     std::uint64_t seed);

/// Mean W_1 between m i.i.d. samples of `target` and `target` over seeds.
double mean_sampling_gap(const DiscreteMeasure& target, int m, int seeds,
                         std::uint64_t seed);

}  // namespace fibred
