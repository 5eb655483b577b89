#include "fibred/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "fibred/error.hpp"
#include "fibred/particle_kernels.hpp"

namespace fibred {

void check_grid(const TimeGrid& grid) {
  if (!(grid.T > 0.0) || !std::isfinite(grid.T) || grid.steps < 1)
    throw ValidationError("time grid needs T > 0 and at least one step");
}

Integrator parse_integrator(const std::string& name) {
  if (name == "euler") return Integrator::euler;
  if (name == "rk4") return Integrator::rk4;
  throw ValidationError("unknown integrator '" + name + "'");
}

namespace {

double max_norm(std::span<const double> x, int dim) {
  const auto d = static_cast<std::size_t>(dim);
  double r = 0.0;
  for (std::size_t i = 0; i < x.size() / d; ++i) {
    double s = 0.0;
    for (std::size_t c = 0; c < d; ++c) s += x[i * d + c] * x[i * d + c];
    r = std::max(r, s);
  }
  return std::sqrt(r);
}

double a_priori_radius(const VectorField& v, double r, double T) {
  const double mn = v.growth().m_integral(0.0, T);
  return (r + mn) * std::exp(2.0 * mn);
}

void check_state(std::span<const double> x, double limit, int step) {
  for (double c : x) {
    if (!std::isfinite(c)) throw BlowUpError("non-finite state", step);
    if (std::abs(c) > limit)
      throw BlowUpError("state left the a-priori ball", step);
  }
}

// y = x + h * k
void axpy(std::span<const double> x, double h, std::span<const double> k,
          std::span<double> y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[i] + h * k[i];
}

template <class Rhs>
void step_state(Integrator integ, Rhs&& rhs, double t, double h,
                std::vector<double>& x, std::vector<double>& k1,
                std::vector<double>& k2, std::vector<double>& k3,
                std::vector<double>& k4, std::vector<double>& tmp) {
  if (integ == Integrator::euler) {
    rhs(t, x, k1);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += h * k1[i];
    return;
  }
  rhs(t, x, k1);
  axpy(x, 0.5 * h, k1, tmp);
  rhs(t + 0.5 * h, tmp, k2);
  axpy(x, 0.5 * h, k2, tmp);
  rhs(t + 0.5 * h, tmp, k3);
  axpy(x, h, k3, tmp);
  rhs(t + h, tmp, k4);
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

TrajectoryEnsemble integrate_particles(const VectorField& v,
                                       const Partition& coarse,
                                       const AveragedField& avg,
                                       const std::vector<std::size_t>& fcell,
                                       const ParticleSample& x0,
                                       const TimeGrid& grid,
                                       const SolveOptions& opts) {
  check_grid(grid);
  if (x0.dim != v.dim()) throw ValidationError("state dimension mismatch");
  if (x0.size() != coarse.size() * x0.per_cell)
    throw ValidationError("particle count differs from cells x per_cell");
  if (opts.record_every < 1) throw ValidationError("record_every must be >= 1");

  TrajectoryEnsemble out;
  out.grid = grid;
  out.dim = x0.dim;
  out.per_cell = x0.per_cell;
  out.coarse = coarse;
  out.coarse_cell = x0.cell;
  out.max_initial_norm = max_norm(x0.x, x0.dim);
  const double limit =
      opts.blowup_factor * a_priori_radius(v, out.max_initial_norm, grid.T);

  auto rhs = [&](double t, std::span<const double> x, std::span<double> k) {
    const MeasureView view = particle_view(coarse, x0.dim, x0.per_cell, x);
    const auto state = v.prepare(t, view);
    if (opts.parallel)
      particle_velocities(v, *state, avg, fcell, x0.dim, x, k);
    else
      particle_velocities_serial(v, *state, avg, fcell, x0.dim, x, k);
  };

  std::vector<double> x = x0.x;
  const std::size_t n = x.size();
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  auto record = [&](int s) {
    out.max_norm.push_back(max_norm(x, x0.dim));
    if (s % opts.record_every != 0 && s != grid.steps) return;
    if (opts.store) {
      out.steps.push_back(s);
      out.states.push_back(x);
    }
    if (opts.observer) opts.observer(s, grid.t(s), x);
  };
  check_state(x, limit, 0);
  record(0);
  for (int s = 0; s < grid.steps; ++s) {
    step_state(opts.integrator, rhs, grid.t(s), grid.dt(), x, k1, k2, k3, k4,
               tmp);
    check_state(x, limit, s + 1);
    record(s + 1);
  }
  return out;
}

}  // namespace

TrajectoryEnsemble solve_particles(const VectorField& v, const Partition& fine,
                                   const Partition& coarse,
                                   const ParticleSample& x0,
                                   const TimeGrid& grid,
                                   const SolveOptions& opts) {
  if (fine.size() != coarse.size() * x0.per_cell)
    throw PreconditionError("fine partition must have n*m cells");
  const AveragedField avg = average_field(v, fine, opts.quadrature);
  std::vector<std::size_t> fcell(fine.size());
  for (std::size_t i = 0; i < fcell.size(); ++i) fcell[i] = i;
  return integrate_particles(v, coarse, avg, fcell, x0, grid, opts);
}

TrajectoryEnsemble solve_auxiliary(const VectorField& v,
                                   const Partition& coarse,
                                   const ParticleSample& x0,
                                   const TimeGrid& grid,
                                   const SolveOptions& opts) {
  const AveragedField avg = average_field(v, coarse, opts.quadrature);
  return integrate_particles(v, coarse, avg, x0.cell, x0, grid, opts);
}

FibredMeasure empirical_measure(const Partition& coarse, int dim,
                                std::size_t per_cell,
                                std::span<const double> x) {
  std::vector<DiscreteMeasure> laws;
  laws.reserve(coarse.size());
  const std::size_t stride = per_cell * static_cast<std::size_t>(dim);
  for (std::size_t k = 0; k < coarse.size(); ++k) {
    auto c = x.subspan(k * stride, stride);
    laws.push_back(
        DiscreteMeasure::uniform(dim, std::vector<double>(c.begin(), c.end()))
            .merged());
  }
  return FibredMeasure::on_partition(coarse, std::move(laws));
}

MeasureCurve empirical_curve(const TrajectoryEnsemble& traj,
                             const Partition& coarse) {
  if (coarse.size() * traj.per_cell != traj.size())
    throw PreconditionError("trajectory does not match the coarse partition");
  MeasureCurve c;
  for (std::size_t s = 0; s < traj.steps.size(); ++s) {
    c.times.push_back(traj.grid.t(traj.steps[s]));
    c.measures.push_back(
        empirical_measure(coarse, traj.dim, traj.per_cell, traj.states[s]));
  }
  return c;
}

// ---------------------------------------------------------------------------
// Support-point systems for the delayed Euler scheme and the Picard flow.

namespace {

struct SupportSystem {
  MarginalPtr marginal;
  int dim = 0;
  Partition cells;  // fibre cells, refined by the field's label breaks
  std::vector<std::size_t> start;
  std::vector<double> weights;
  std::vector<double> x0;
  std::vector<std::size_t> point_cell;
  AveragedField avg;

  std::size_t points() const { return weights.size(); }

  MeasureView view(std::span<const double> x) const {
    MeasureView v;
    v.marginal = marginal.get();
    v.dim = dim;
    const auto d = static_cast<std::size_t>(dim);
    for (std::size_t k = 0; k < cells.size(); ++k) {
      const std::size_t b = start[k], e = start[k + 1];
      v.fibres.push_back(FibreView{
          cells.cells[k], cells.masses[k], x.subspan(b * d, (e - b) * d),
          std::span<const double>(weights).subspan(b, e - b)});
    }
    return v;
  }

  FibredMeasure measure(std::span<const double> x) const {
    std::vector<DiscreteMeasure> laws;
    const auto d = static_cast<std::size_t>(dim);
    for (std::size_t k = 0; k < cells.size(); ++k) {
      const std::size_t b = start[k], e = start[k + 1];
      laws.push_back(DiscreteMeasure::normalised(
                         dim,
                         std::vector<double>(x.begin() + b * d,
                                             x.begin() + e * d),
                         std::vector<double>(weights.begin() + b,
                                             weights.begin() + e))
                         .merged());
    }
    return FibredMeasure::on_partition(cells, std::move(laws));
  }

  void velocities(const VectorField& v, double t,
                  std::span<const double> frozen, std::span<const double> x,
                  std::span<double> out) const {
    const auto state = v.prepare(t, view(frozen));
    particle_velocities(v, *state, avg, point_cell, dim, x, out);
  }
};

SupportSystem make_support_system(const VectorField& v,
                                  const FibredMeasure& mu0, int quadrature) {
  if (mu0.dim() != v.dim()) throw ValidationError("state dimension mismatch");
  SupportSystem sys;
  sys.marginal = mu0.marginal_ptr();
  sys.dim = mu0.dim();
  sys.cells.marginal = sys.marginal;
  const auto breaks = v.label_breaks();
  for (const auto& f : mu0.fibres()) {
    std::vector<CellOverlap> pieces;
    if (breaks && !f.cell.atom)
      pieces = split_by_breaks(*sys.marginal, f.cell, *breaks);
    else
      pieces.push_back(CellOverlap{f.cell, f.weight, 0, 0});
    for (const auto& p : pieces) {
      sys.start.push_back(sys.weights.size());
      sys.cells.cells.push_back(p.cell);
      sys.cells.masses.push_back(p.mass);
      for (std::size_t j = 0; j < f.law.size(); ++j) {
        sys.point_cell.push_back(sys.cells.size() - 1);
        sys.weights.push_back(f.law.weight(j));
        auto x = f.law.point(j);
        sys.x0.insert(sys.x0.end(), x.begin(), x.end());
      }
    }
  }
  sys.start.push_back(sys.weights.size());
  sys.avg = average_field(v, sys.cells, quadrature);
  return sys;
}

}  // namespace

MeasureCurve delayed_euler_curve(const VectorField& v,
                                 const FibredMeasure& mu0,
                                 const TimeGrid& grid, int n_delay,
                                 int quadrature) {
  check_grid(grid);
  if (n_delay < 1 || grid.steps % n_delay != 0)
    throw ValidationError("grid steps must be a multiple of n_delay");
  const SupportSystem sys = make_support_system(v, mu0, quadrature);
  const int lag = grid.steps / n_delay;
  const double limit =
      1e3 * a_priori_radius(v, support_radius(mu0), grid.T);
  std::vector<std::vector<double>> xs;
  xs.reserve(static_cast<std::size_t>(grid.steps) + 1);
  xs.push_back(sys.x0);
  std::vector<double> k(sys.x0.size());
  MeasureCurve curve;
  curve.times.push_back(0.0);
  curve.measures.push_back(sys.measure(sys.x0));
  for (int s = 0; s < grid.steps; ++s) {
    const auto& delayed =
        s - lag < 0 ? sys.x0 : xs[static_cast<std::size_t>(s - lag)];
    const auto& x = xs.back();
    sys.velocities(v, grid.t(s), delayed, x, k);
    std::vector<double> next(x.size());
    axpy(x, grid.dt(), k, next);
    check_state(next, limit, s + 1);
    xs.push_back(std::move(next));
    curve.times.push_back(grid.t(s + 1));
    curve.measures.push_back(sys.measure(xs.back()));
  }
  return curve;
}

namespace {

// Frozen iterate at time t = t_s + frac * dt by 4-point Lagrange
// interpolation on the grid nodes around s.
void interpolate(const std::vector<double>& traj, std::size_t block, int steps,
                 int s, double frac, std::span<double> out) {
  int a = std::clamp(s - 1, 0, std::max(0, steps - 3));
  const int npts = std::min(4, steps + 1);
  const double tau = static_cast<double>(s - a) + frac;
  std::fill(out.begin(), out.end(), 0.0);
  for (int i = 0; i < npts; ++i) {
    double li = 1.0;
    for (int j = 0; j < npts; ++j)
      if (j != i) li *= (tau - j) / static_cast<double>(i - j);
    const double* row = traj.data() + static_cast<std::size_t>(a + i) * block;
    for (std::size_t c = 0; c < block; ++c) out[c] += li * row[c];
  }
}

}  // namespace

FlowResult flow_picard(const VectorField& v, const FibredMeasure& mu0,
                       const TimeGrid& grid, double tol, int max_iter,
                       Integrator integrator, int quadrature) {
  check_grid(grid);
  if (!(tol > 0.0) || max_iter < 1)
    throw ValidationError("flow_picard needs tol > 0 and max_iter >= 1");
  const SupportSystem sys = make_support_system(v, mu0, quadrature);
  const std::size_t block = sys.x0.size();
  const auto S = static_cast<std::size_t>(grid.steps);
  const double R = a_priori_radius(v, support_radius(mu0), grid.T);
  const double limit = 1e3 * R;
  std::vector<double> weight(S + 1);
  for (std::size_t s = 0; s <= S; ++s)
    weight[s] = std::exp(
        -2.0 * v.growth().L_integral(R, 0.0, grid.t(static_cast<int>(s))));

  std::vector<double> prev((S + 1) * block);
  for (std::size_t s = 0; s <= S; ++s)
    std::copy(sys.x0.begin(), sys.x0.end(), prev.begin() + s * block);
  std::vector<double> next(prev.size());

  FlowResult res;
  res.table.points = sys.points();
  res.table.R = R;
  std::vector<double> frozen_mid(block);
  std::vector<double> k1(block), k2(block), k3(block), k4(block), tmp(block);
  const double h = grid.dt();
  const auto d = static_cast<std::size_t>(sys.dim);
  for (int it = 1;; ++it) {
    std::copy(sys.x0.begin(), sys.x0.end(), next.begin());
    for (std::size_t s = 0; s < S; ++s) {
      const double t = grid.t(static_cast<int>(s));
      std::span<const double> x(next.data() + s * block, block);
      std::span<double> y(next.data() + (s + 1) * block, block);
      std::span<const double> f0(prev.data() + s * block, block);
      if (integrator == Integrator::euler) {
        sys.velocities(v, t, f0, x, k1);
        axpy(x, h, k1, y);
      } else {
        std::span<const double> f1(prev.data() + (s + 1) * block, block);
        interpolate(prev, block, grid.steps, static_cast<int>(s), 0.5,
                    frozen_mid);
        sys.velocities(v, t, f0, x, k1);
        axpy(x, 0.5 * h, k1, tmp);
        sys.velocities(v, t + 0.5 * h, frozen_mid, tmp, k2);
        axpy(x, 0.5 * h, k2, tmp);
        sys.velocities(v, t + 0.5 * h, frozen_mid, tmp, k3);
        axpy(x, h, k3, tmp);
        sys.velocities(v, t + h, f1, tmp, k4);
        for (std::size_t i = 0; i < block; ++i)
          y[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      }
      check_state(y, limit, static_cast<int>(s + 1));
    }
    double r = 0.0;
    for (std::size_t s = 0; s <= S; ++s) {
      double m = 0.0;
      for (std::size_t p = 0; p < sys.points(); ++p) {
        double q = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
          const double e = next[s * block + p * d + c] -
                           prev[s * block + p * d + c];
          q += e * e;
        }
        m = std::max(m, q);
      }
      r = std::max(r, weight[s] * std::sqrt(m));
    }
    res.table.residuals.push_back(r);
    prev.swap(next);
    if (r < tol) {
      res.table.iterations = std::max(1, it - 1);
      break;
    }
    if (it >= max_iter)
      throw NoConvergenceError("flow_picard did not converge", r);
  }
  res.table.trajectories = prev;
  for (std::size_t s = 0; s <= S; ++s) {
    res.curve.times.push_back(grid.t(static_cast<int>(s)));
    res.curve.measures.push_back(sys.measure(
        std::span<const double>(prev.data() + s * block, block)));
  }
  return res;
}

CurveDistance curve_distance(const MeasureCurve& a, const MeasureCurve& b,
                             CurveMetric metric, const ProductMetric& product) {
  if (a.size() != b.size())
    throw PreconditionError("curves have different numbers of nodes");
  CurveDistance out;
  for (std::size_t s = 0; s < a.size(); ++s) {
    if (std::abs(a.times[s] - b.times[s]) > 1e-12)
      throw PreconditionError("curves are not on a shared grid");
    const double d =
        metric == CurveMetric::fibred_w1
            ? fibred_w(a.measures[s], b.measures[s], 1)
            : classical_w_product(a.measures[s], b.measures[s], 1, product);
    out.values.push_back(d);
    out.sup = std::max(out.sup, d);
  }
  return out;
}

}  // namespace fibred
