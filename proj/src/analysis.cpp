#include "fibred/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "fibred/error.hpp"
#include "fibred/transport.hpp"

namespace fibred {

double r_big(double r, double m_norm) {
  return (r + m_norm) * std::exp(2.0 * m_norm);
}

StabilityConstants stability_constants(const VectorField& v, double r,
                                       double T) {
  StabilityConstants c;
  c.R_r = r_big(r, v.growth().m_integral(0.0, T));
  c.L_norm = v.growth().L_integral(c.R_r, 0.0, T);
  c.C_T = std::exp(c.L_norm);
  c.D_r = std::exp((1.0 + c.C_T + 2.0 * c.C_T * c.C_T) * c.L_norm);
  return c;
}

namespace {

struct LabelRule {
  std::vector<double> nodes;
  std::vector<double> masses;
};

std::vector<double> merge_breaks(const std::vector<double>& a,
                                 const std::vector<double>& b) {
  std::vector<double> out(a);
  out.insert(out.end(), b.begin(), b.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(),
                        [](double x, double y) { return std::abs(x - y) < 1e-15; }),
            out.end());
  return out;
}

// Nodes and pi-masses covering `cell`; exact when both fields are step fields.
LabelRule label_rule(const LabelMarginal& pi, const Fibre& f,
                     const std::optional<std::vector<double>>& breaks, int q) {
  LabelRule r;
  if (f.cell.atom) {
    r.nodes.push_back(f.cell.lo);
    r.masses.push_back(f.weight);
  } else if (breaks) {
    for (const auto& p : split_by_breaks(pi, f.cell, *breaks)) {
      r.nodes.push_back(quantile_nodes(pi, p.cell, 1).front());
      r.masses.push_back(p.mass);
    }
  } else {
    for (double w : quantile_nodes(pi, f.cell, q)) {
      r.nodes.push_back(w);
      r.masses.push_back(f.weight / q);
    }
  }
  return r;
}

// int_Omega sup_{y in supp nu_omega} |v(t, mu, omega, y) - w(t, nu, omega, y)|
double field_gap(const VectorField& v, const VectorField& w, double t,
                 const FibredMeasure& mu, const FibredMeasure& nu, int q) {
  const auto sv = v.prepare(t, view_of(mu));
  const auto sw = w.prepare(t, view_of(nu));
  std::optional<std::vector<double>> breaks;
  const auto bv = v.label_breaks();
  const auto bw = w.label_breaks();
  if (bv && bw) breaks = merge_breaks(*bv, *bw);
  const auto d = static_cast<std::size_t>(nu.dim());
  std::vector<double> a(d), b(d);
  double total = 0.0;
  for (const auto& f : nu.fibres()) {
    const LabelRule rule = label_rule(nu.marginal(), f, breaks, q);
    for (std::size_t l = 0; l < rule.nodes.size(); ++l) {
      double sup = 0.0;
      for (std::size_t j = 0; j < f.law.size(); ++j) {
        v.eval(*sv, rule.nodes[l], f.law.point(j), a);
        w.eval(*sw, rule.nodes[l], f.law.point(j), b);
        double s = 0.0;
        for (std::size_t c = 0; c < d; ++c) s += (a[c] - b[c]) * (a[c] - b[c]);
        sup = std::max(sup, std::sqrt(s));
      }
      total += rule.masses[l] * sup;
    }
  }
  return total;
}

double law_w1(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  return a.dim() == 1 ? w_1d(a, b, 1) : w_discrete(a, b, 1).distance;
}

}  // namespace

std::vector<BoundReport> stability_envelope(const MeasureCurve& mu,
                                            const MeasureCurve& nu,
                                            const VectorField& v,
                                            const VectorField& w,
                                            int quadrature) {
  if (mu.size() != nu.size() || mu.size() == 0)
    throw PreconditionError("curves must share a non-empty grid");
  for (std::size_t s = 0; s < mu.size(); ++s)
    if (std::abs(mu.times[s] - nu.times[s]) > 1e-12)
      throw PreconditionError("curves are not on a shared grid");

  const double t0 = mu.times.front();
  const double T = mu.times.back();
  const double r = std::max(support_radius(mu.measures.front()),
                            support_radius(nu.measures.front()));
  const double mn = std::max(v.growth().m_integral(t0, T),
                             w.growth().m_integral(t0, T));
  const double R = r_big(r, mn);
  for (std::size_t s = 0; s < mu.size(); ++s) {
    const double rr = std::max(support_radius(mu.measures[s]),
                               support_radius(nu.measures[s]));
    if (rr > R + 1e-6)
      throw PreconditionError("support leaves the a-priori ball B(0, R_r)");
  }

  const double w0 = fibred_w(mu.measures.front(), nu.measures.front(), 1);
  const double growth = std::exp(v.growth().L_integral(R, t0, T));
  std::vector<BoundReport> out;
  double integral = 0.0;
  double prev_gap = 0.0;
  for (std::size_t s = 0; s < mu.size(); ++s) {
    const double gap = field_gap(v, w, mu.times[s], mu.measures[s],
                                 nu.measures[s], quadrature);
    if (s > 0)
      integral += 0.5 * (gap + prev_gap) * (mu.times[s] - mu.times[s - 1]);
    prev_gap = gap;
    BoundReport b;
    b.name = "stability_envelope";
    b.t = mu.times[s];
    b.lhs = fibred_w(mu.measures[s], nu.measures[s], 1);
    b.rhs = (w0 + integral) * growth;
    out.push_back(b);
  }
  return out;
}

std::vector<BoundReport> apriori_bounds(const TrajectoryEnsemble& traj,
                                        const VectorField& v) {
  if (traj.states.empty())
    throw PreconditionError("a-priori checks need stored states");
  const GrowthProfile& g = v.growth();
  std::vector<BoundReport> out;

  for (std::size_t s = 0; s < traj.max_norm.size(); ++s) {
    const double t = traj.grid.t(static_cast<int>(s));
    const double mn = g.m_integral(0.0, t);
    out.push_back({"particle_max", t, traj.max_norm[s],
                   (traj.max_initial_norm + mn) * std::exp(2.0 * mn)});
  }

  const MeasureCurve curve = empirical_curve(traj, traj.coarse);
  const double R = r_big(support_radius(curve.measures.front()),
                         g.m_integral(0.0, traj.grid.T));
  double m_star = 0.0;
  for (std::size_t s = 0; s < curve.size(); ++s) {
    out.push_back({"support_radius", curve.times[s],
                   support_radius(curve.measures[s]), R});
    m_star = std::max(m_star, fibred_moment(curve.measures[s], 1));
  }

  // Nonlocal fields grow like m(t)(1 + M_{pi,1}(mu(t))) along the solution.
  const auto meff = [&](double t0, double t1) {
    return (1.0 + m_star) * g.m_integral(t0, t1);
  };
  const auto& f0 = curve.measures.front().fibres();
  for (std::size_t s = 0; s < curve.size(); ++s) {
    const double I = meff(0.0, curve.times[s]);
    const auto& fs = curve.measures[s].fibres();
    BoundReport worst{"fibre_moment", curve.times[s], 0.0, 0.0};
    bool first = true;
    for (std::size_t k = 0; k < fs.size(); ++k) {
      const double lhs = fs[k].law.moment(1);
      const double rhs = (f0[k].law.moment(1) + I) * std::exp(I);
      if (first || rhs - lhs < worst.slack()) {
        worst.lhs = lhs;
        worst.rhs = rhs;
        first = false;
      }
    }
    out.push_back(worst);
  }

  const double total = meff(0.0, traj.grid.T);
  const double c_mom = std::max(1.0, total) * std::exp(total);
  const double scale = (1.0 + fibred_moment(curve.measures.front(), 1)) *
                       (1.0 + c_mom);
  for (std::size_t s = 1; s < curve.size(); ++s) {
    for (std::size_t from : {std::size_t{0}, s - 1}) {
      out.push_back({"absolute_continuity", curve.times[s],
                     fibred_w(curve.measures[from], curve.measures[s], 1),
                     scale * meff(curve.times[from], curve.times[s])});
      if (s == 1) break;
    }
  }

  for (std::size_t s = 0; s < curve.size(); ++s) {
    double dev = 0.0;
    const auto& fs = curve.measures[s].fibres();
    for (std::size_t k = 0; k < fs.size(); ++k) {
      dev = std::max(dev, std::abs(fs[k].weight - traj.coarse.masses[k]));
      if (!(fs[k].cell == traj.coarse.cells[k])) dev = 1.0;
    }
    if (!curve.measures[s].marginal().same_as(*traj.coarse.marginal, 0.0))
      dev = 1.0;
    out.push_back({"label_marginal", curve.times[s], dev, 0.0});
  }
  return out;
}

double fg_bound(double r, int d, double m, double C_d) {
  if (!(m >= 1.0)) throw ValidationError("sample size must be at least 1");
  const double base = r * C_d / std::sqrt(m);
  return d == 2 ? base * std::log1p(m) : base;
}

FitResult fit_loglog(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw FitError("mismatched fit inputs");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw FitError("log-log fit needs positive values");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  const auto n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i] / n;
    my += ly[i] / n;
  }
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (lx.size() < 2 || !(sxx > 0.0))
    throw FitError("log-log fit needs two distinct abscissae");
  FitResult f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double e = ly[i] - (f.intercept + f.slope * lx[i]);
    ss += e * e;
  }
  f.residual = std::sqrt(ss / n);
  return f;
}

FitResult fit_rate(std::span<const ConvergenceRecord> records) {
  std::map<int, std::pair<double, int>> by_n;
  for (const auto& r : records) {
    auto& e = by_n[r.N];
    e.first += r.sup_t_error;
    e.second += 1;
  }
  if (by_n.size() < 4) throw FitError("rate fit needs at least four distinct N");
  std::vector<double> x, y;
  for (const auto& [N, e] : by_n) {
    const double mean = e.first / e.second;
    if (!(mean > 0.0)) throw FitError("zero mean error at N = " + std::to_string(N));
    x.push_back(N);
    y.push_back(mean);
  }
  return fit_loglog(x, y);
}

double quantitative_bound(double var_mu0, double var_V, double r, int d,
                          double N, double D_r, double C_d) {
  if (!(N >= 1.0)) throw ValidationError("N must be at least 1");
  const double rate = std::cbrt(1.0 / N);
  const double sampling =
      d == 2 ? rate * std::log1p(std::pow(N, 2.0 / 3.0)) : rate;
  return D_r * (2.0 * var_V + var_mu0) * rate + r * C_d * D_r * sampling;
}

double kernel_field_variation(const LabelKernel& w, const LabelMarginal& pi,
                              double psi_sup, double T, int grid) {
  if (grid < 2) throw ValidationError("variation grid needs two points");
  double integral = 0.0;
  if (w.is_step()) {
    const auto& br = w.breaks();
    std::vector<double> col_mass(w.blocks(), 0.0);
    for (std::size_t c = 0; c < w.blocks(); ++c)
      col_mass[c] = pi.continuous_mass() * (pi.cdf(br[c + 1]) - pi.cdf(br[c]));
    for (const auto& a : pi.atoms()) col_mass[w.block_of(a.omega)] += a.weight;
    for (std::size_t c = 0; c < w.blocks(); ++c) {
      double var = 0.0;
      for (std::size_t b = 1; b < w.blocks(); ++b)
        var += std::abs(w.block_value(b, c) - w.block_value(b - 1, c));
      integral += var * col_mass[c];
    }
  } else {
    const auto variation_at = [&](double theta) {
      double var = 0.0;
      double prev = w(0.0, theta);
      for (int i = 1; i <= grid; ++i) {
        const double cur = w(static_cast<double>(i) / grid, theta);
        var += std::abs(cur - prev);
        prev = cur;
      }
      return var;
    };
    if (pi.continuous_mass() > 0.0)
      for (int i = 0; i < grid; ++i)
        integral += variation_at(pi.quantile((i + 0.5) / grid)) *
                    pi.continuous_mass() / grid;
    for (const auto& a : pi.atoms()) integral += variation_at(a.omega) * a.weight;
  }
  return psi_sup * T * integral;
}

double mean_sampling_gap(const DiscreteMeasure& target, int m, int seeds,
                         std::uint64_t seed) {
  if (m < 1 || seeds < 1)
    throw ValidationError("sampling gap needs m >= 1 and at least one seed");
  const auto d = static_cast<std::size_t>(target.dim());
  std::vector<double> cum;
  double s = 0.0;
  for (double w : target.weights()) cum.push_back(s += w);
  double total = 0.0;
  for (int k = 0; k < seeds; ++k) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(k));
    std::uniform_real_distribution<double> unit(0.0, cum.back());
    std::vector<double> pts;
    pts.reserve(static_cast<std::size_t>(m) * d);
    for (int i = 0; i < m; ++i) {
      auto j = static_cast<std::size_t>(
          std::upper_bound(cum.begin(), cum.end(), unit(rng)) - cum.begin());
      j = std::min(j, target.size() - 1);
      const auto p = target.point(j);
      pts.insert(pts.end(), p.begin(), p.end());
    }
    const DiscreteMeasure emp =
        DiscreteMeasure::uniform(target.dim(), std::move(pts)).merged();
    total += law_w1(emp, target);
  }
  return total / seeds;
}

double calibrate_C_d(std::span<const DiscreteMeasure> targets, double r,
                     std::span<const int> sizes, int seeds,
                     std::uint64_t seed) {
  if (!(r > 0.0)) throw ValidationError("calibration needs a positive radius");
  double c = 0.0;
  std::uint64_t offset = 0;
  for (const auto& target : targets) {
    if (target.dim() != 1)
      throw ValidationError("calibration supports one-dimensional targets");
    for (int m : sizes) {
      const double gap = mean_sampling_gap(target, m, seeds, seed + offset);
      offset += static_cast<std::uint64_t>(seeds);
      c = std::max(c, gap / fg_bound(r, 1, m, 1.0));
    }
  }
  return c;
}

}  // namespace fibred
