#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "fibred/error.hpp"
#include "fibred/transport.hpp"

namespace fibred {

namespace {

constexpr double kZero = 1e-15;
constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

TransportPlanResult solve_transport(std::span<const double> a,
                                    std::span<const double> b,
                                    std::span<const double> cost) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  if (n == 0 || m == 0) throw ValidationError("empty transport problem");
  if (n > kSolverBudget || m > kSolverBudget)
    throw BudgetError("transport problem exceeds 512 points per side");
  if (cost.size() != n * m) throw ValidationError("cost matrix has wrong size");
  for (double c : cost)
    if (!std::isfinite(c) || c < 0.0)
      throw ValidationError("cost must be finite and nonnegative");
  const double sa = std::accumulate(a.begin(), a.end(), 0.0);
  const double sb = std::accumulate(b.begin(), b.end(), 0.0);
  if (std::abs(sa - sb) > 1e-9)
    throw ValidationError("transport marginals have different mass");

  std::vector<double> supply(a.begin(), a.end());
  std::vector<double> demand(b.begin(), b.end());
  std::vector<double> flow(n * m, 0.0);
  // node order: sources 0..n-1, sinks n..n+m-1
  const std::size_t V = n + m;
  std::vector<double> phi(V, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    double lo = kInf;
    for (std::size_t i = 0; i < n; ++i) lo = std::min(lo, cost[i * m + j]);
    phi[n + j] = lo;
  }

  std::vector<double> dist(V);
  std::vector<std::size_t> pred(V);
  std::vector<char> done(V);
  const std::size_t none = V;

  for (;;) {
    bool any_supply = false;
    for (std::size_t i = 0; i < n; ++i)
      if (supply[i] > kZero) any_supply = true;
    bool any_demand = false;
    for (std::size_t j = 0; j < m; ++j)
      if (demand[j] > kZero) any_demand = true;
    if (!any_supply || !any_demand) break;

    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(pred.begin(), pred.end(), none);
    std::fill(done.begin(), done.end(), 0);
    for (std::size_t i = 0; i < n; ++i)
      if (supply[i] > kZero) dist[i] = 0.0;

    std::size_t target = none;
    for (;;) {
      std::size_t u = none;
      double best = kInf;
      for (std::size_t v = 0; v < V; ++v)
        if (!done[v] && dist[v] < best) {
          best = dist[v];
          u = v;
        }
      if (u == none) break;
      done[u] = 1;
      if (u >= n && demand[u - n] > kZero) {
        target = u;
        break;
      }
      if (u < n) {
        const double* row = cost.data() + u * m;
        for (std::size_t j = 0; j < m; ++j) {
          const std::size_t v = n + j;
          if (done[v]) continue;
          const double rc = std::max(0.0, row[j] + phi[u] - phi[v]);
          if (dist[u] + rc < dist[v]) {
            dist[v] = dist[u] + rc;
            pred[v] = u;
          }
        }
      } else {
        const std::size_t j = u - n;
        for (std::size_t i = 0; i < n; ++i) {
          if (done[i] || flow[i * m + j] <= kZero) continue;
          const double rc = std::max(0.0, -cost[i * m + j] + phi[u] - phi[i]);
          if (dist[u] + rc < dist[i]) {
            dist[i] = dist[u] + rc;
            pred[i] = u;
          }
        }
      }
    }
    if (target == none) break;

    const double dt = dist[target];
    for (std::size_t v = 0; v < V; ++v) phi[v] += std::min(dist[v], dt);

    // walk back to the originating source
    double delta = demand[target - n];
    std::size_t v = target;
    while (pred[v] != none) {
      const std::size_t u = pred[v];
      if (u >= n) {  // backward edge sink u -> source v
        delta = std::min(delta, flow[v * m + (u - n)]);
      }
      v = u;
    }
    delta = std::min(delta, supply[v]);
    const std::size_t origin = v;

    v = target;
    while (pred[v] != none) {
      const std::size_t u = pred[v];
      if (u < n)
        flow[u * m + (v - n)] += delta;
      else
        flow[v * m + (u - n)] -= delta;
      v = u;
    }
    supply[origin] -= delta;
    demand[target - n] -= delta;
    if (supply[origin] < kZero) supply[origin] = 0.0;
    if (demand[target - n] < kZero) demand[target - n] = 0.0;
  }

  TransportPlanResult res;
  std::vector<double> rows(n, 0.0), cols(m, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const double f = flow[i * m + j];
      if (f <= kZero) continue;
      res.plan.push_back(PlanEntry{i, j, f});
      res.cost += f * cost[i * m + j];
      rows[i] += f;
      cols[j] += f;
    }
  double r = 0.0;
  for (std::size_t i = 0; i < n; ++i) r = std::max(r, std::abs(rows[i] - a[i]));
  for (std::size_t j = 0; j < m; ++j) r = std::max(r, std::abs(cols[j] - b[j]));
  res.primal_feasibility_residual = r;
  if (r > 1e-9)
    throw NoConvergenceError("transport solver left unmatched mass", r);
  res.distance = res.cost;
  return res;
}

}  // namespace fibred
