#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fibred/error.hpp"
#include "fibred/transport.hpp"
#include "test_util.hpp"

using namespace fibred;

namespace {

FibredMeasure two_atoms(double w1, double w2, double x1, double x2) {
  auto pi = make_marginal(LabelMarginal::from_atoms({{w1, 0.5}, {w2, 0.5}}));
  return FibredMeasure(
      pi, 1,
      {{Cell::at(w1), 0.5, DiscreteMeasure::dirac(std::vector<double>{x1})},
       {Cell::at(w2), 0.5, DiscreteMeasure::dirac(std::vector<double>{x2})}});
}

}  // namespace

TEST(SolveTransport, TwoByTwoAssignment) {
  const double a[] = {0.5, 0.5};
  const double b[] = {0.5, 0.5};
  const double c[] = {0.0, 1.0, 1.0, 0.0};
  const auto r = solve_transport(a, b, c);
  EXPECT_NEAR(r.cost, 0.0, 1e-15);
  EXPECT_LE(r.primal_feasibility_residual, 1e-12);
}

TEST(SolveTransport, NonUniformMarginalsFeasible) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> a(7), b(5), c(35);
  for (auto& x : a) x = u(rng);
  for (auto& x : b) x = u(rng);
  for (auto& x : c) x = u(rng);
  const double sa = std::accumulate(a.begin(), a.end(), 0.0);
  const double sb = std::accumulate(b.begin(), b.end(), 0.0);
  for (auto& x : a) x /= sa;
  for (auto& x : b) x /= sb;
  const auto r = solve_transport(a, b, c);
  std::vector<double> ra(7, 0.0), rb(5, 0.0);
  double cost = 0.0;
  for (const auto& e : r.plan) {
    EXPECT_GE(e.mass, 0.0);
    ra[e.i] += e.mass;
    rb[e.j] += e.mass;
    cost += e.mass * c[e.i * 5 + e.j];
  }
  for (std::size_t i = 0; i < 7; ++i) EXPECT_NEAR(ra[i], a[i], 1e-12);
  for (std::size_t j = 0; j < 5; ++j) EXPECT_NEAR(rb[j], b[j], 1e-12);
  EXPECT_NEAR(cost, r.cost, 1e-12);
}

TEST(WDiscrete, MatchesPermutationBruteForce) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const int d = 1 + trial % 3;
    const int n = 2 + trial % 5;
    const auto a = test_util::random_uniform(rng, d, n);
    const auto b = test_util::random_uniform(rng, d, n);
    for (int p : {1, 2})
      EXPECT_NEAR(w_discrete(a, b, p).distance, test_util::brute_force_w(a, b, p),
                  1e-9);
  }
}

TEST(WDiscrete, BudgetExceeded) {
  std::mt19937_64 rng(2);
  const auto a = test_util::random_uniform(rng, 1, static_cast<int>(kSolverBudget) + 1);
  EXPECT_THROW(w_discrete(a, a, 1), BudgetError);
}

TEST(W1d, MatchesLinearProgram) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = test_util::random_weighted(rng, 1, 1 + trial % 20);
    const auto b = test_util::random_weighted(rng, 1, 1 + (trial * 7) % 23);
    for (int p : {1, 2})
      EXPECT_NEAR(w_1d(a, b, p), w_discrete(a, b, p).distance, 1e-9);
  }
}

TEST(W1d, TranslationAndDirac) {
  const auto a = DiscreteMeasure::uniform(1, {0.0, 1.0, 5.0});
  const auto b = DiscreteMeasure::uniform(1, {0.5, 1.5, 5.5});
  EXPECT_NEAR(w_1d(a, b, 1), 0.5, 1e-15);
  EXPECT_NEAR(w_1d(a, b, 2), 0.5, 1e-15);
  const auto d = DiscreteMeasure::dirac(std::vector<double>{2.0});
  EXPECT_NEAR(w_1d(a, d, 1), (2.0 + 1.0 + 3.0) / 3.0, 1e-15);
}

TEST(CircularW1, WrapsAroundThePeriod) {
  const double L = 2.0 * M_PI;
  const auto a = DiscreteMeasure::dirac(std::vector<double>{0.1});
  const auto b = DiscreteMeasure::dirac(std::vector<double>{L - 0.1});
  EXPECT_NEAR(circular_w1(a, b, L), 0.2, 1e-12);
  const auto u = DiscreteMeasure::uniform(1, {0.0, M_PI});
  const auto v = DiscreteMeasure::uniform(1, {M_PI / 2.0, 3.0 * M_PI / 2.0});
  EXPECT_NEAR(circular_w1(u, v, L), M_PI / 2.0, 1e-12);
}

TEST(CircularW1, NeverExceedsLineDistanceOfReducedPoints) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 30; ++t) {
    std::vector<double> x(5), y(4);
    for (auto& v : x) v = u(rng);
    for (auto& v : y) v = u(rng);
    const auto a = DiscreteMeasure::uniform(1, x);
    const auto b = DiscreteMeasure::uniform(1, y);
    EXPECT_LE(circular_w1(a, b, 1.0), w_1d(a, b, 1) + 1e-12);
    EXPECT_GE(circular_w1(a, b, 1.0), 0.0);
  }
}

TEST(FibredW, SwappedAtomPairOfEmpiricalMeasures) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g;
  for (int t = 0; t < 20; ++t) {
    double w1 = u(rng), w2 = u(rng);
    if (w1 > w2) std::swap(w1, w2);
    const double x1 = g(rng), x2 = g(rng);
    const auto a = two_atoms(w1, w2, x1, x2);
    const auto b = two_atoms(w1, w2, x2, x1);
    for (int p : {1, 2}) {
      EXPECT_NEAR(fibred_w(a, b, p), std::abs(x1 - x2), 1e-10);
      EXPECT_NEAR(classical_w_product(a, b, p),
                  std::min(w2 - w1, std::abs(x1 - x2)), 1e-10);
    }
  }
}

TEST(FibredW, MetricAxioms) {
  std::mt19937_64 rng(8);
  auto pi = make_marginal(LabelMarginal::mixed({{0.4, 0.2}}, {0.0, 1.0}));
  for (int t = 0; t < 25; ++t) {
    const auto a = test_util::random_fibred(rng, pi, 3, 2, 3);
    const auto b = test_util::random_fibred(rng, pi, 4, 2, 3);
    const auto c = test_util::random_fibred(rng, pi, 5, 2, 2);
    for (int p : {1, 2}) {
      EXPECT_NEAR(fibred_w(a, a, p), 0.0, 1e-12);
      EXPECT_NEAR(fibred_w(a, b, p), fibred_w(b, a, p), 1e-12);
      EXPECT_LE(fibred_w(a, c, p), fibred_w(a, b, p) + fibred_w(b, c, p) + 1e-9);
    }
    EXPECT_LE(fibred_w(a, b, 1), fibred_w(a, b, 2) + 1e-12);
  }
}

TEST(FibredW, ParallelEqualsSerialBitwise) {
  std::mt19937_64 rng(21);
  auto pi = make_marginal(LabelMarginal::uniform());
  const auto a = test_util::random_fibred(rng, pi, 40, 1, 6);
  const auto b = test_util::random_fibred(rng, pi, 24, 1, 5);
  for (int p : {1, 2}) EXPECT_EQ(fibred_w(a, b, p), fibred_w_serial(a, b, p));
}

TEST(FibredW, IncomparableMarginals) {
  auto pa = make_marginal(LabelMarginal::uniform());
  auto pb = make_marginal(LabelMarginal::from_cdf([](double w) { return w * w; }));
  const auto rho = DiscreteMeasure::dirac(std::vector<double>{0.0});
  EXPECT_THROW(fibred_w(FibredMeasure::product(pa, rho),
                        FibredMeasure::product(pb, rho), 1),
               IncomparableMarginalsError);
}

TEST(ClassicalW, NeverExceedsFibred) {
  std::mt19937_64 rng(17);
  for (auto pi : {make_marginal(LabelMarginal::uniform()),
                  make_marginal(LabelMarginal::from_atoms({{0.1, 0.3}, {0.5, 0.3}, {0.9, 0.4}}))}) {
    for (int t = 0; t < 30; ++t) {
      const auto a = test_util::random_fibred(rng, pi, 3, 1 + t % 2, 3);
      const auto b = test_util::random_fibred(rng, pi, 2, 1 + t % 2, 4);
      for (int p : {1, 2})
        EXPECT_LE(classical_w_product(a, b, p), fibred_w(a, b, p) + 1e-9);
    }
  }
}

TEST(ClassicalW, ProductMeasuresAgreeWithSpaceDistance) {
  auto pi = make_marginal(LabelMarginal::from_atoms({{0.2, 0.5}, {0.8, 0.5}}));
  const auto a = FibredMeasure::product(pi, DiscreteMeasure::uniform(1, {0.0, 1.0}));
  const auto b = FibredMeasure::product(pi, DiscreteMeasure::uniform(1, {0.1, 1.1}));
  EXPECT_NEAR(classical_w_product(a, b, 1), 0.1, 1e-12);
}

TEST(Duality, CertifiedPotentialsBoundPrimal) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto pi = make_marginal(LabelMarginal::uniform());
  for (int t = 0; t < 20; ++t) {
    const auto a = test_util::random_fibred(rng, pi, 3, 2, 3);
    const auto b = test_util::random_fibred(rng, pi, 3, 2, 3);
    const double c0 = u(rng), c1 = u(rng);
    const double n = std::hypot(c0, c1);
    const auto phi = [&](std::size_t k, std::span<const double> x) {
      return (k % 2 == 0 ? 1.0 : -1.0) * (c0 * x[0] + c1 * x[1]) / n;
    };
    EXPECT_LE(kr_dual_value(a, b, phi), fibred_w(a, b, 1) + 1e-9);
  }
}

TEST(Duality, RejectsNonLipschitzPotential) {
  auto pi = make_marginal(LabelMarginal::uniform());
  const auto a = FibredMeasure::product(pi, DiscreteMeasure::uniform(1, {0.0, 1.0}));
  const auto phi = [](std::size_t, std::span<const double> x) { return 2.0 * x[0]; };
  EXPECT_THROW(kr_dual_value(a, a, phi), InvalidPotentialError);
}

TEST(Duality, CdfPotentialAttainsW1) {
  std::mt19937_64 rng(29);
  for (int t = 0; t < 30; ++t) {
    const auto a = test_util::random_weighted(rng, 1, 1 + t % 9);
    const auto b = test_util::random_weighted(rng, 1, 1 + t % 7);
    const auto phi = cdf_dual_potential(a, b);
    double v = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) v += a.weight(i) * phi(a.point(i)[0]);
    for (std::size_t j = 0; j < b.size(); ++j) v -= b.weight(j) * phi(b.point(j)[0]);
    EXPECT_NEAR(v, w_1d(a, b, 1), 1e-8);
  }
}
