// Prints one PASS/FAIL line per acceptance criterion; exits 1 if any fails.
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "fibred/analysis.hpp"
#include "fibred/error.hpp"
#include "fibred/experiment.hpp"
#include "fibred/io.hpp"
#include "test_util.hpp"

using namespace fibred;

namespace {

const std::string kSource = FIBRED_SOURCE_DIR;

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void run(int id, const char* title, double budget_s,
         const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool ok = o.pass && s < budget_s;
  if (!ok) ++failures;
  std::printf("%s %2d %s [%.2f s / %.0f s] %s\n", ok ? "PASS" : "FAIL", id, title, s,
              budget_s, o.detail.c_str());
  std::fflush(stdout);
}

FibredMeasure two_atoms(MarginalPtr pi, double w1, double w2, double x1, double x2) {
  return FibredMeasure(
      std::move(pi), 1,
      {{Cell::at(w1), 0.5, DiscreteMeasure::dirac(std::vector<double>{x1})},
       {Cell::at(w2), 0.5, DiscreteMeasure::dirac(std::vector<double>{x2})}});
}

std::string fmt(double x) { return format_number(x); }

Outcome golden_metric() {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g;
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    double w1 = u(rng), w2 = u(rng);
    if (w1 > w2) std::swap(w1, w2);
    const double x1 = g(rng), x2 = g(rng);
    auto pi = make_marginal(LabelMarginal::from_atoms({{w1, 0.5}, {w2, 0.5}}));
    const auto a = two_atoms(pi, w1, w2, x1, x2);
    const auto b = two_atoms(pi, w1, w2, x2, x1);
    worst = std::max(worst, std::abs(fibred_w(a, b, 1) - std::abs(x1 - x2)));
    worst = std::max(worst, std::abs(classical_w_product(a, b, 1) -
                                     std::min(w2 - w1, std::abs(x1 - x2))));
  }
  return {worst <= 1e-10, "max error " + fmt(worst)};
}

Outcome golden_counterexample() {
  const double eps = 0.3;
  const auto v = local_field(
      1, [eps](double, double w, std::span<const double>, std::span<double> out) {
        out[0] = w < eps / 2.0 ? 0.0 : 1.0;
      },
      GrowthProfile::constant(1.0, 0.0), std::vector<double>{0.0, eps / 2.0, 1.0});
  auto pi = make_marginal(LabelMarginal::from_atoms({{0.0, 0.5}, {eps, 0.5}}));
  const TimeGrid grid{1.0, 200};
  const auto mu = flow_picard(*v, two_atoms(pi, 0.0, eps, 0.0, 1.0), grid).curve;
  const auto nu = flow_picard(*v, two_atoms(pi, 0.0, eps, 1.0, 0.0), grid).curve;
  double metric_err = 0.0, traj_err = 0.0;
  for (int s : {0, 100, 200}) {
    const double t = grid.t(s);
    const auto& a = mu.measures[s];
    const auto& b = nu.measures[s];
    metric_err = std::max(metric_err, std::abs(fibred_w(a, b, 1) - 1.0));
    metric_err = std::max(metric_err, std::abs(classical_w_product(a, b, 1) -
                                               std::min(1.0, std::hypot(eps, t))));
  }
  for (int s = 0; s <= grid.steps; ++s) {
    const double t = grid.t(s);
    const auto& a = mu.measures[s].fibres();
    const auto& b = nu.measures[s].fibres();
    traj_err = std::max({traj_err, std::abs(a[0].law.point(0)[0]),
                         std::abs(a[1].law.point(0)[0] - (1.0 + t)),
                         std::abs(b[0].law.point(0)[0] - 1.0),
                         std::abs(b[1].law.point(0)[0] - t)});
  }
  return {metric_err <= 1e-10 && traj_err <= 1e-8,
          "metric error " + fmt(metric_err) + ", trajectory error " + fmt(traj_err)};
}

Outcome ot_oracles() {
  std::mt19937_64 rng(303);
  std::uniform_int_distribution<int> small(1, 6), large(1, 64), dim(1, 3);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const int d = dim(rng), n = small(rng);
    const auto a = test_util::random_uniform(rng, d, n);
    const auto b = test_util::random_uniform(rng, d, n);
    const int p = 1 + t % 2;
    worst = std::max(worst, std::abs(w_discrete(a, b, p).distance -
                                     test_util::brute_force_w(a, b, p)));
  }
  for (int t = 0; t < 200; ++t) {
    const auto a = test_util::random_weighted(rng, 1, large(rng));
    const auto b = test_util::random_weighted(rng, 1, large(rng));
    const int p = 1 + t % 2;
    worst = std::max(worst, std::abs(w_1d(a, b, p) - w_discrete(a, b, p).distance));
  }
  return {worst <= 1e-9, "max error " + fmt(worst)};
}

Outcome metric_ordering() {
  std::mt19937_64 rng(404);
  std::uniform_int_distribution<int> cells(1, 5), pts(1, 4), dim(1, 2);
  const MarginalPtr marginals[] = {
      make_marginal(LabelMarginal::uniform()),
      make_marginal(LabelMarginal::from_atoms({{0.1, 0.3}, {0.5, 0.3}, {0.9, 0.4}})),
      make_marginal(LabelMarginal::mixed({{0.4, 0.25}}, {0.0, 1.0}))};
  double worst = -INFINITY;
  for (int t = 0; t < 500; ++t) {
    const auto& pi = marginals[t % 3];
    const int d = dim(rng);
    const auto a = test_util::random_fibred(rng, pi, cells(rng), d, pts(rng));
    const auto b = test_util::random_fibred(rng, pi, cells(rng), d, pts(rng));
    const int p = 1 + t % 2;
    worst = std::max(worst, classical_w_product(a, b, p) - fibred_w(a, b, p));
  }
  return {worst <= 1e-9, "max(classical - fibred) " + fmt(worst)};
}

Outcome duality() {
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto pi = make_marginal(LabelMarginal::uniform());
  double worst_gap = -INFINITY;
  for (int t = 0; t < 100; ++t) {
    const auto a = test_util::random_fibred(rng, pi, 3, 2, 4);
    const auto b = test_util::random_fibred(rng, pi, 4, 2, 3);
    // per cell: min over cones c_j + |x - z_j|, 1-Lipschitz by construction
    std::vector<std::array<double, 3>> cones;
    for (int j = 0; j < 6 * 4; ++j) cones.push_back({u(rng), 2.0 * u(rng), 2.0 * u(rng)});
    const CellPotential phi = [&](std::size_t k, std::span<const double> x) {
      double best = INFINITY;
      for (std::size_t j = 4 * (k % 6); j < 4 * (k % 6) + 4; ++j)
        best = std::min(best, cones[j][0] + std::hypot(x[0] - cones[j][1], x[1] - cones[j][2]));
      return best;
    };
    worst_gap = std::max(worst_gap, kr_dual_value(a, b, phi) - fibred_w(a, b, 1));
  }
  double worst_cdf = 0.0;
  for (int t = 0; t < 50; ++t) {
    const auto a = test_util::random_weighted(rng, 1, 1 + t % 17);
    const auto b = test_util::random_weighted(rng, 1, 1 + (3 * t) % 13);
    const auto phi = cdf_dual_potential(a, b);
    double v = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) v += a.weight(i) * phi(a.point(i)[0]);
    for (std::size_t j = 0; j < b.size(); ++j) v -= b.weight(j) * phi(b.point(j)[0]);
    worst_cdf = std::max(worst_cdf, std::abs(v - w_1d(a, b, 1)));
  }
  return {worst_gap <= 1e-9 && worst_cdf <= 1e-8,
          "max(dual - primal) " + fmt(worst_gap) + ", cdf potential error " + fmt(worst_cdf)};
}

Outcome apriori_along_dynamics() {
  std::ostringstream detail;
  bool ok = true;
  for (const char* name : {"kuramoto.json", "mm.json"}) {
    ExperimentConfig cfg = read_config(kSource + "/configs/" + name);
    cfg.T = 2.0;
    cfg.steps = 200;
    const Model model = model_from_json(cfg.model, *cfg.marginal);
    const auto mu0 = initial_from_json(cfg.initial, cfg.marginal, model.field->dim(),
                                       cfg.base_dir);
    const auto coarse = label_partition(cfg.marginal, 20);
    const auto fine = refine(coarse, 20);
    const auto x0 = sample_initial(mu0, coarse, 20, cfg.seed);
    SolveOptions opts;
    opts.record_every = 1;
    const auto traj = solve_particles(*model.field, fine, coarse, x0, cfg.grid(), opts);
    double worst = INFINITY;
    std::string worst_name;
    for (const auto& r : apriori_bounds(traj, *model.field)) {
      ok = ok && r.pass();
      if (r.slack() < worst) {
        worst = r.slack();
        worst_name = r.name;
      }
    }
    detail << name << " N=" << traj.size() << " worst slack " << fmt(worst) << " ("
           << worst_name << ") ";
  }
  return {ok, detail.str()};
}

FibredMeasure smooth_initial(MarginalPtr pi, int K) {
  const Partition part = label_partition(pi, K);
  std::vector<DiscreteMeasure> laws;
  for (const Cell& c : part.cells) {
    const double w = quantile_nodes(*pi, c, 1).front();
    laws.push_back(DiscreteMeasure::uniform(1, {w - 0.5, w, 2.0 * w + 0.25}));
  }
  return FibredMeasure::on_partition(part, std::move(laws));
}

Outcome scheme_cross_validation() {
  auto pi = make_marginal(LabelMarginal::uniform());
  const auto v = graphon_field(
      LabelKernel::closed_form([](double a, double b) { return 1.0 - std::max(a, b); }, 1.0),
      sine_interaction(1.0), 1);
  const auto mu0 = smooth_initial(pi, 8);
  constexpr int kRef = 512;
  const auto picard = flow_picard(*v, mu0, {1.0, kRef});
  const auto& res = picard.table.residuals;
  double contraction = 0.0;
  for (std::size_t j = 1; j + 1 < res.size(); ++j)
    if (res[j] > 0.0) contraction = std::max(contraction, res[j + 1] / res[j]);
  std::vector<double> gaps;
  for (int n : {8, 16, 32, 64}) {
    const auto e = delayed_euler_curve(*v, mu0, {1.0, n}, n);
    MeasureCurve sub;
    for (int s = 0; s <= n; ++s) {
      sub.times.push_back(e.times[s]);
      sub.measures.push_back(picard.curve.measures[s * (kRef / n)]);
    }
    gaps.push_back(curve_distance(e, sub, CurveMetric::fibred_w1).sup);
  }
  bool ok = contraction <= 0.75 && res.size() >= 3;
  std::string ratios;
  for (std::size_t i = 0; i + 1 < gaps.size(); ++i) {
    const double r = gaps[i] / gaps[i + 1];
    ok = ok && r >= 1.6 && r <= 2.4;
    ratios += fmt(r) + " ";
  }
  return {ok, "gap ratios " + ratios + "Picard contraction " + fmt(contraction)};
}

Outcome convergence_rate() {
  ExperimentConfig cfg = read_config(kSource + "/configs/kuramoto.json");
  cfg.sweep.n = {4, 8, 16, 32};
  cfg.sweep.m = {16, 64, 256, 1024};
  cfg.reference = ReferenceSpec{64, 4096};
  const auto out = std::filesystem::temp_directory_path() / "fibred_acceptance_converge";
  std::ostringstream log;
  const int rc = run_converge(cfg, out.string(), log);
  const json summary = read_json((out / "summary.json").string());
  std::map<int, std::pair<double, int>> by_n;
  for (const auto& r : summary["records"]) {
    auto& e = by_n[r["N"].get<int>()];
    e.first += r["sup_t_error"].get<double>();
    e.second += 1;
  }
  bool decreasing = true;
  double prev = INFINITY;
  std::string means;
  for (const auto& [N, e] : by_n) {
    const double m = e.first / e.second;
    decreasing = decreasing && m < prev;
    prev = m;
    means += std::to_string(N) + ":" + fmt(m) + " ";
  }
  bool bounds = !summary["bounds"].empty();
  double worst = INFINITY;
  for (const auto& b : summary["bounds"]) {
    const double slack = b["rhs"].get<double>() - b["lhs"].get<double>();
    worst = std::min(worst, slack);
    bounds = bounds && slack >= -1e-6;
  }
  const double slope = summary["fit"]["slope"].get<double>();
  std::filesystem::remove_all(out);
  return {rc == 0 && decreasing && slope <= -0.25 && bounds,
          "mean errors " + means + "slope " + fmt(slope) + ", worst bound slack " +
              fmt(worst) + ", C_d " + fmt(summary["constants"]["C_d_fitted"].get<double>())};
}

Outcome sampling_rate() {
  std::vector<double> pts;
  for (int i = 0; i < 256; ++i) pts.push_back(std::sin(0.37 * i) + 0.01 * i);
  const auto target = DiscreteMeasure::uniform(1, pts);
  std::vector<double> ms{100.0, 1000.0, 10000.0}, gaps;
  for (double m : ms) gaps.push_back(mean_sampling_gap(target, static_cast<int>(m), 50, 909));
  const auto f = fit_loglog(ms, gaps);
  return {std::abs(f.slope + 0.5) <= 0.1, "slope " + fmt(f.slope)};
}

Outcome conditional_expectation_rate() {
  auto pi = make_marginal(LabelMarginal::uniform());
  const Partition part = label_partition(pi, 1024);
  std::vector<DiscreteMeasure> laws;
  for (const Cell& c : part.cells) {
    const double w = quantile_nodes(*pi, c, 1).front();
    laws.push_back(DiscreteMeasure::uniform(
        1, {std::sin(6.0 * w), 2.0 * w, w < 0.5 ? -1.0 : 1.0}));
  }
  const auto mu0 = FibredMeasure::on_partition(part, std::move(laws));
  const double var = fibre_variation(mu0);
  bool ok = true;
  double prev = INFINITY, worst = -INFINITY;
  for (int n = 2; n <= 256; n *= 2) {
    const double e = fibred_w(mu0, conditional_expectation(mu0, label_partition(pi, n)), 1);
    ok = ok && e <= var / n + 1e-9 && e < prev;
    worst = std::max(worst, e - var / n);
    prev = e;
  }
  return {ok, "Var " + fmt(var) + ", max(error - Var/n) " + fmt(worst) +
                  ", error at n=256 " + fmt(prev)};
}

}  // namespace

int main() {
  run(1, "golden metric values", 1.0, golden_metric);
  run(2, "golden counterexample", 1.0, golden_counterexample);
  run(3, "OT oracle equivalence", 10.0, ot_oracles);
  run(4, "metric ordering", 30.0, metric_ordering);
  run(5, "duality", 10.0, duality);
  run(6, "a-priori bounds along dynamics", 30.0, apriori_along_dynamics);
  run(7, "scheme cross-validation", 120.0, scheme_cross_validation);
  run(8, "mean-field convergence rate", 900.0, convergence_rate);
  run(9, "sampling rate", 60.0, sampling_rate);
  run(10, "conditional-expectation approximation", 5.0, conditional_expectation_rate);
  return failures == 0 ? 0 : 1;
}
