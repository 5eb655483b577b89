#include "fibred/transport.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fibred/error.hpp"

namespace fibred {

namespace {

void check_order(int p) {
  if (p != 1 && p != 2) throw ValidationError("p must be 1 or 2");
}

double powp(double x, int p) { return p == 1 ? x : x * x; }
double rootp(double x, int p) { return p == 1 ? x : std::sqrt(x); }

double euclid(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t c = 0; c < x.size(); ++c) {
    const double d = x[c] - y[c];
    s += d * d;
  }
  return std::sqrt(s);
}

struct Sorted1D {
  std::vector<double> x;
  std::vector<double> w;
};

Sorted1D sorted_1d(const DiscreteMeasure& mu) {
  std::vector<std::size_t> idx(mu.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return mu.coords()[a] < mu.coords()[b];
  });
  Sorted1D s;
  s.x.reserve(idx.size());
  s.w.reserve(idx.size());
  for (std::size_t i : idx) {
    s.x.push_back(mu.coords()[i]);
    s.w.push_back(mu.weight(i));
  }
  return s;
}

// Breakpoints and signed CDF difference F_mu - F_nu on each gap.
struct CdfDiff {
  std::vector<double> knots;
  std::vector<double> diff;  // diff[k] on [knots[k], knots[k+1])
};

CdfDiff cdf_difference(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  const Sorted1D a = sorted_1d(mu);
  const Sorted1D b = sorted_1d(nu);
  CdfDiff out;
  std::size_t i = 0, j = 0;
  double fa = 0.0, fb = 0.0;
  while (i < a.x.size() || j < b.x.size()) {
    const double xa = i < a.x.size() ? a.x[i] : INFINITY;
    const double xb = j < b.x.size() ? b.x[j] : INFINITY;
    const double x = std::min(xa, xb);
    while (i < a.x.size() && a.x[i] == x) fa += a.w[i++];
    while (j < b.x.size() && b.x[j] == x) fb += b.w[j++];
    out.knots.push_back(x);
    out.diff.push_back(fa - fb);
  }
  return out;
}

}  // namespace

double w_1d(const DiscreteMeasure& mu, const DiscreteMeasure& nu, int p) {
  check_order(p);
  if (mu.dim() != 1 || nu.dim() != 1)
    throw ValidationError("w_1d requires one-dimensional measures");
  if (p == 1) {
    const CdfDiff c = cdf_difference(mu, nu);
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < c.knots.size(); ++k)
      s += std::abs(c.diff[k]) * (c.knots[k + 1] - c.knots[k]);
    return s;
  }
  // merged quantile walk
  const Sorted1D a = sorted_1d(mu);
  const Sorted1D b = sorted_1d(nu);
  std::size_t i = 0, j = 0;
  double ra = a.w[0], rb = b.w[0];
  double s = 0.0;
  while (i < a.x.size() && j < b.x.size()) {
    const double step = std::min(ra, rb);
    s += step * powp(std::abs(a.x[i] - b.x[j]), p);
    ra -= step;
    rb -= step;
    if (ra <= 1e-15) {
      if (++i < a.x.size()) ra += a.w[i];
    }
    if (rb <= 1e-15) {
      if (++j < b.x.size()) rb += b.w[j];
    }
  }
  return rootp(s, p);
}

TransportPlanResult w_discrete(std::span<const double> a,
                               std::span<const double> b,
                               std::span<const double> ground_distance,
                               int p) {
  check_order(p);
  std::vector<double> cost(ground_distance.begin(), ground_distance.end());
  if (p == 2)
    for (double& c : cost) c *= c;
  TransportPlanResult r = solve_transport(a, b, cost);
  r.distance = rootp(r.cost, p);
  return r;
}

TransportPlanResult w_discrete(const DiscreteMeasure& mu,
                               const DiscreteMeasure& nu, int p) {
  check_order(p);
  if (mu.dim() != nu.dim()) throw ValidationError("dimension mismatch");
  if (mu.size() > kSolverBudget || nu.size() > kSolverBudget)
    throw BudgetError("transport problem exceeds 512 points per side");
  std::vector<double> dist(mu.size() * nu.size());
  for (std::size_t i = 0; i < mu.size(); ++i)
    for (std::size_t j = 0; j < nu.size(); ++j)
      dist[i * nu.size() + j] = euclid(mu.point(i), nu.point(j));
  return w_discrete(mu.weights(), nu.weights(), dist, p);
}

double circular_w1(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                   double period) {
  if (mu.dim() != 1 || nu.dim() != 1)
    throw ValidationError("circular_w1 requires one-dimensional measures");
  if (!(period > 0.0)) throw ValidationError("period must be positive");
  auto wrap = [period](const DiscreteMeasure& m) {
    std::vector<double> c(m.coords());
    for (double& x : c) {
      x = std::fmod(x, period);
      if (x < 0.0) x += period;
      if (x >= period) x = 0.0;
    }
    return DiscreteMeasure::normalised(1, std::move(c), m.weights());
  };
  const DiscreteMeasure a = wrap(mu);
  const DiscreteMeasure b = wrap(nu);
  CdfDiff c = cdf_difference(a, b);
  // segments of G = F_a - F_b over one period, including the wrap-around gap
  std::vector<std::pair<double, double>> seg;  // (value, length)
  for (std::size_t k = 0; k + 1 < c.knots.size(); ++k)
    seg.emplace_back(c.diff[k], c.knots[k + 1] - c.knots[k]);
  seg.emplace_back(0.0, period - c.knots.back() + c.knots.front());
  // optimal shift is a weighted median of G
  std::sort(seg.begin(), seg.end());
  double half = 0.0;
  for (const auto& s : seg) half += s.second;
  half *= 0.5;
  double acc = 0.0;
  double alpha = seg.back().first;
  for (const auto& s : seg) {
    acc += s.second;
    if (acc >= half) {
      alpha = s.first;
      break;
    }
  }
  double total = 0.0;
  for (const auto& s : seg) total += std::abs(s.first - alpha) * s.second;
  return total;
}

namespace {

double fibre_distance(const DiscreteMeasure& a, const DiscreteMeasure& b,
                      int p) {
  if (a.dim() == 1) return w_1d(a, b, p);
  return w_discrete(a, b, p).distance;
}

}  // namespace

double fibred_w_serial(const FibredMeasure& mu, const FibredMeasure& nu,
                       int p) {
  check_order(p);
  const auto ov = common_refinement(mu, nu);
  double s = 0.0;
  for (const auto& o : ov)
    s += o.mass * powp(fibre_distance(mu.fibres()[o.first].law,
                                      nu.fibres()[o.second].law, p),
                       p);
  return rootp(s, p);
}

double fibred_w(const FibredMeasure& mu, const FibredMeasure& nu, int p) {
  check_order(p);
  const auto ov = common_refinement(mu, nu);
  std::vector<double> terms(ov.size());
  const auto count = static_cast<std::ptrdiff_t>(ov.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t k = 0; k < count; ++k) {
    const auto& o = ov[static_cast<std::size_t>(k)];
    terms[static_cast<std::size_t>(k)] =
        powp(fibre_distance(mu.fibres()[o.first].law,
                            nu.fibres()[o.second].law, p),
             p);
  }
  double s = 0.0;
  for (std::size_t k = 0; k < ov.size(); ++k) s += ov[k].mass * terms[k];
  return rootp(s, p);
}

namespace {

struct Flat {
  std::vector<double> label;
  std::vector<double> coords;
  std::vector<double> weights;
};

void flatten_fibre(const LabelMarginal& pi, const Cell& cell, double mass,
                   const DiscreteMeasure& law, int nodes, Flat& out) {
  std::vector<double> omegas;
  if (cell.atom) {
    omegas.push_back(cell.lo);
  } else {
    const double u0 = pi.cdf(cell.lo);
    const double u1 = pi.cdf(cell.hi);
    for (int l = 0; l < nodes; ++l)
      omegas.push_back(pi.quantile(u0 + (u1 - u0) * (l + 0.5) / nodes));
  }
  const double share = mass / static_cast<double>(omegas.size());
  for (double om : omegas)
    for (std::size_t j = 0; j < law.size(); ++j) {
      out.label.push_back(om);
      auto x = law.point(j);
      out.coords.insert(out.coords.end(), x.begin(), x.end());
      out.weights.push_back(share * law.weight(j));
    }
}

}  // namespace

double classical_w_product(const FibredMeasure& mu, const FibredMeasure& nu,
                           int p, const ProductMetric& metric) {
  check_order(p);
  if (mu.dim() != nu.dim()) throw ValidationError("dimension mismatch");
  if (!(metric.q >= 1.0) || metric.label_nodes < 1)
    throw ValidationError("invalid product metric");
  Flat a, b;
  const int nodes = metric.label_nodes;
  if (mu.marginal().same_as(nu.marginal())) {
    std::vector<Cell> ca, cb;
    for (const auto& f : mu.fibres()) ca.push_back(f.cell);
    for (const auto& f : nu.fibres()) cb.push_back(f.cell);
    for (const auto& o : overlap_cells(mu.marginal(), ca, cb)) {
      flatten_fibre(mu.marginal(), o.cell, o.mass, mu.fibres()[o.first].law,
                    nodes, a);
      flatten_fibre(nu.marginal(), o.cell, o.mass, nu.fibres()[o.second].law,
                    nodes, b);
    }
  } else {
    for (const auto& f : mu.fibres())
      flatten_fibre(mu.marginal(), f.cell, f.weight, f.law, nodes, a);
    for (const auto& f : nu.fibres())
      flatten_fibre(nu.marginal(), f.cell, f.weight, f.law, nodes, b);
  }
  const std::size_t n = a.weights.size();
  const std::size_t m = b.weights.size();
  if (n > kSolverBudget || m > kSolverBudget)
    throw BudgetError("flattened supports exceed 512 points per side");
  const auto d = static_cast<std::size_t>(mu.dim());
  std::vector<double> dist(n * m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const double dl = std::abs(a.label[i] - b.label[j]);
      const double dx = euclid({a.coords.data() + i * d, d},
                               {b.coords.data() + j * d, d});
      dist[i * m + j] =
          metric.q == 2.0
              ? std::hypot(dl, dx)
              : std::pow(std::pow(dl, metric.q) + std::pow(dx, metric.q),
                         1.0 / metric.q);
    }
  // renormalise away rounding so both sides carry identical total mass
  const double sa = std::accumulate(a.weights.begin(), a.weights.end(), 0.0);
  const double sb = std::accumulate(b.weights.begin(), b.weights.end(), 0.0);
  for (double& w : a.weights) w /= sa;
  for (double& w : b.weights) w /= sb;
  return w_discrete(a.weights, b.weights, dist, p).distance;
}

double kr_dual_value(const FibredMeasure& mu, const FibredMeasure& nu,
                     const CellPotential& phi) {
  const auto ov = common_refinement(mu, nu);
  double total = 0.0;
  for (std::size_t k = 0; k < ov.size(); ++k) {
    const DiscreteMeasure& a = mu.fibres()[ov[k].first].law;
    const DiscreteMeasure& b = nu.fibres()[ov[k].second].law;
    std::vector<std::span<const double>> pts;
    for (std::size_t j = 0; j < a.size(); ++j) pts.push_back(a.point(j));
    for (std::size_t j = 0; j < b.size(); ++j) pts.push_back(b.point(j));
    std::vector<double> vals(pts.size());
    for (std::size_t j = 0; j < pts.size(); ++j) {
      vals[j] = phi(k, pts[j]);
      if (!std::isfinite(vals[j]))
        throw InvalidPotentialError("potential is not finite");
    }
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = i + 1; j < pts.size(); ++j)
        if (std::abs(vals[i] - vals[j]) > euclid(pts[i], pts[j]) + 1e-9)
          throw InvalidPotentialError("potential on cell " +
                                      std::to_string(k) +
                                      " is not 1-Lipschitz");
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += a.weight(j) * vals[j];
    for (std::size_t j = 0; j < b.size(); ++j)
      s -= b.weight(j) * vals[a.size() + j];
    total += ov[k].mass * s;
  }
  return total;
}

double Potential1D::operator()(double x) const {
  if (knots.empty()) return 0.0;
  if (x <= knots.front()) return values.front();
  if (x >= knots.back()) return values.back();
  const auto it = std::upper_bound(knots.begin(), knots.end(), x);
  const auto k = static_cast<std::size_t>(it - knots.begin()) - 1;
  const double s = (x - knots[k]) / (knots[k + 1] - knots[k]);
  return values[k] + s * (values[k + 1] - values[k]);
}

Potential1D cdf_dual_potential(const DiscreteMeasure& mu,
                               const DiscreteMeasure& nu) {
  if (mu.dim() != 1 || nu.dim() != 1)
    throw ValidationError("cdf_dual_potential requires dimension 1");
  const CdfDiff c = cdf_difference(mu, nu);
  Potential1D phi;
  phi.knots = c.knots;
  phi.values.assign(c.knots.size(), 0.0);
  for (std::size_t k = 0; k + 1 < c.knots.size(); ++k) {
    const double slope = c.diff[k] > 0.0 ? -1.0 : (c.diff[k] < 0.0 ? 1.0 : 0.0);
    phi.values[k + 1] = phi.values[k] + slope * (c.knots[k + 1] - c.knots[k]);
  }
  return phi;
}

}  // namespace fibred
