#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fibred/error.hpp"
#include "fibred/fields.hpp"
#include "fibred/kernels.hpp"
#include "test_util.hpp"

using namespace fibred;

namespace {

LabelKernel step_kernel() {
  return LabelKernel::step({0.0, 0.4, 1.0}, {1.0, 0.3, -0.5, 0.8});
}

LabelKernel smooth_kernel() {
  return LabelKernel::closed_form(
      [](double w, double t) { return std::exp(-std::abs(w - t)); }, 1.0);
}

std::vector<double> eval(const VectorField& v, const FibredMeasure& mu,
                         double omega, std::vector<double> x) {
  return v(0.0, mu, omega, x);
}

}  // namespace

TEST(LabelKernel, StepLookupAndNorms) {
  const auto w = step_kernel();
  EXPECT_EQ(w.block_of(0.39), 0u);
  EXPECT_EQ(w.block_of(0.4), 1u);
  EXPECT_DOUBLE_EQ(w(0.5, 0.1), -0.5);
  EXPECT_DOUBLE_EQ(w.sup_norm(), 1.0);
  EXPECT_THROW(LabelKernel::step({0.0, 0.5}, {1.0}), ValidationError);
}

TEST(KernelWeights, TabulatedRowsIntegrateTheKernel) {
  auto pi = make_marginal(LabelMarginal::uniform());
  std::mt19937_64 rng(1);
  const auto mu = test_util::random_fibred(rng, pi, 5, 1, 2);
  const auto view = view_of(mu);
  const auto w = step_kernel();
  KernelWeights kw(w, *pi, view.fibres, kThetaNodes);
  ASSERT_TRUE(kw.tabulated());
  // cell [0.2, 0.4) lies in theta block 0; [0.4, 0.6) in block 1
  EXPECT_NEAR(kw.row(0)[1], 0.2 * 1.0, 1e-12);
  EXPECT_NEAR(kw.row(1)[2], 0.2 * 0.8, 1e-12);
}

TEST(Fields, ZeroAndLocal) {
  auto pi = make_marginal(LabelMarginal::uniform());
  const auto mu = FibredMeasure::product(pi, DiscreteMeasure::uniform(2, {0.0, 1.0}));
  EXPECT_EQ(eval(*zero_field(2), mu, 0.3, {1.0, 2.0}), (std::vector<double>{0.0, 0.0}));
  const auto v = local_field(
      1, [](double t, double w, std::span<const double> x, std::span<double> out) {
        out[0] = w * x[0] + t;
      },
      GrowthProfile::constant(1.0, 1.0));
  const auto mu1 = FibredMeasure::product(pi, DiscreteMeasure::dirac(std::vector<double>{0.0}));
  EXPECT_DOUBLE_EQ(eval(*v, mu1, 0.5, {4.0})[0], 2.0);
  EXPECT_TRUE(v->measure_independent());
}

TEST(Fields, GraphonMatchesDirectSum) {
  auto pi = make_marginal(LabelMarginal::from_atoms({{0.2, 0.3}, {0.7, 0.7}}));
  const auto w = LabelKernel::closed_form([](double a, double b) { return a + 2.0 * b; }, 3.0);
  const auto v = graphon_field(w, difference_interaction(1.5), 1);
  const FibredMeasure mu(
      pi, 1,
      {{Cell::at(0.2), 0.3, DiscreteMeasure::uniform(1, {1.0, 3.0})},
       {Cell::at(0.7), 0.7, DiscreteMeasure::dirac(std::vector<double>{-1.0})}});
  const double x = 0.5, omega = 0.2;
  const double expect = 0.3 * (omega + 0.4) * 1.5 * (2.0 - x) +
                        0.7 * (omega + 1.4) * 1.5 * (-1.0 - x);
  EXPECT_NEAR(eval(*v, mu, omega, {x})[0], expect, 1e-12);
}

TEST(Fields, GraphonIsLinearInTheMeasure) {
  auto pi = make_marginal(LabelMarginal::uniform());
  std::mt19937_64 rng(3);
  const Partition part = label_partition(pi, 4);
  std::vector<DiscreteMeasure> la, lb, lm;
  const double lambda = 0.3;
  for (std::size_t k = 0; k < part.size(); ++k) {
    la.push_back(test_util::random_weighted(rng, 1, 3));
    lb.push_back(test_util::random_weighted(rng, 1, 2));
    const DiscreteMeasure* parts[] = {&la.back(), &lb.back()};
    const double lambdas[] = {lambda, 1.0 - lambda};
    lm.push_back(DiscreteMeasure::mixture(parts, lambdas));
  }
  const auto a = FibredMeasure::on_partition(part, la);
  const auto b = FibredMeasure::on_partition(part, lb);
  const auto m = FibredMeasure::on_partition(part, lm);
  for (const auto& w : {step_kernel(), smooth_kernel()}) {
    const auto v = graphon_field(w, difference_interaction(1.0), 1);
    for (double omega : {0.1, 0.45, 0.9}) {
      const double va = eval(*v, a, omega, {0.2})[0];
      const double vb = eval(*v, b, omega, {0.2})[0];
      EXPECT_NEAR(eval(*v, m, omega, {0.2})[0], lambda * va + (1 - lambda) * vb, 1e-12);
    }
  }
}

TEST(Fields, KuramotoMatchesSineGraphon) {
  auto pi = make_marginal(LabelMarginal::uniform());
  std::mt19937_64 rng(5);
  const auto mu = test_util::random_fibred(rng, pi, 6, 1, 4);
  for (const auto& w : {step_kernel(), smooth_kernel()}) {
    const auto k = kuramoto_field(0.7, w);
    const auto g = graphon_field(w, sine_interaction(0.7), 1);
    for (double omega : {0.05, 0.5, 0.95})
      for (double x : {-2.0, 0.3, 4.0})
        EXPECT_NEAR(eval(*k, mu, omega, {x})[0], eval(*g, mu, omega, {x})[0], 1e-12);
  }
}

TEST(Fields, MichaelisMentenBoundsAndDomain) {
  auto pi = make_marginal(LabelMarginal::uniform());
  MichaelisMentenParams p;
  p.alpha = LabelKernel::step({0.0, 0.5, 1.0}, {1.0, 0.5, 0.5, 2.0});
  p.k = LabelKernel::constant(0.3);
  p.g = LabelFunction::closed_form([](double w) { return 0.5 + w; }, 0.5, 1.5);
  const auto v = michaelis_menten_field(p);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> c(6);
    for (auto& x : c) x = u(rng);
    const auto mu = FibredMeasure::product(pi, DiscreteMeasure::uniform(1, c));
    const double omega = u(rng) / 5.0;
    const double val = eval(*v, mu, omega, {1.0})[0];
    EXPECT_GE(val, 0.0);
    EXPECT_LE(val, 2.0 + 0.5 + omega + 1e-12);
  }
  const auto neg = FibredMeasure::product(pi, DiscreteMeasure::uniform(1, {-1.0, 1.0}));
  EXPECT_THROW(eval(*v, neg, 0.5, {1.0}), DomainError);
  p.strict = false;
  EXPECT_NO_THROW(eval(*michaelis_menten_field(p), neg, 0.5, {1.0}));
}

TEST(Fields, MichaelisMentenRejectsNonpositiveConstants) {
  MichaelisMentenParams p;
  p.k = LabelKernel::constant(0.0);
  EXPECT_THROW(michaelis_menten_field(p), ValidationError);
}

TEST(Fields, LeaderFollowerClosedForm) {
  auto pi = make_marginal(LabelMarginal::mixed({{0.5, 0.5}}, {0.0, 1.0}));
  LeaderFollowerParams p;
  p.kappa = 2.0;
  p.b = {0.25};
  p.controls = {{0.5, {1.0}}};
  const auto v = leader_follower_field(p);
  const FibredMeasure mu(
      pi, 1,
      {{Cell::interval(0.0, 1.0), 0.5, DiscreteMeasure::uniform(1, {0.0, 1.0})},
       {Cell::at(0.5), 0.5, DiscreteMeasure::dirac(std::vector<double>{3.0})}});
  // everyone is pulled towards the follower mass: -kappa (0.5 x - 0.5 * 0.5)
  EXPECT_NEAR(eval(*v, mu, 0.25, {1.0})[0], -2.0 * (0.5 - 0.25), 1e-12);
  // leaders add v_ext and their control
  EXPECT_NEAR(eval(*v, mu, 0.5, {3.0})[0], -2.0 * (1.5 - 0.25) + 0.25 + 1.0, 1e-12);
}

TEST(Fields, LinearFieldClosedForm) {
  auto pi = make_marginal(LabelMarginal::uniform());
  const auto v = linear_field(LabelKernel::constant(-1.0), LabelKernel::constant(0.5), 1);
  const auto mu = FibredMeasure::product(pi, DiscreteMeasure::uniform(1, {1.0, 3.0}));
  EXPECT_NEAR(eval(*v, mu, 0.3, {2.0})[0], -2.0 + 0.5 * 2.0, 1e-12);
}

TEST(Fields, BuiltinsSatisfyDeclaredGrowthAndLipschitz) {
  auto uniform = make_marginal(LabelMarginal::uniform());
  auto mixed = make_marginal(LabelMarginal::mixed({{0.5, 0.3}}, {0.0, 1.0}));
  std::vector<std::pair<FieldPtr, MarginalPtr>> cases{
      {graphon_field(step_kernel(), difference_interaction(1.0), 1), uniform},
      {graphon_field(smooth_kernel(), sine_interaction(2.0), 1), uniform},
      {kuramoto_field(1.5, step_kernel()), uniform},
      {linear_field(step_kernel(), smooth_kernel(), 2), uniform},
      {michaelis_menten_field({}), uniform},
  };
  LeaderFollowerParams lf;
  lf.dim = 2;
  lf.A = {0.0, -1.0, 1.0, 0.0};
  lf.b = {0.1, 0.0};
  lf.controls = {{0.5, {0.5, -0.5}}};
  cases.emplace_back(leader_follower_field(lf), mixed);
  for (const auto& [v, pi] : cases) {
    HypothesesSampling s;
    s.marginal = pi;
    const auto rep = hypotheses_check(*v, s);
    EXPECT_TRUE(rep.pass()) << v->name() << " growth " << rep.growth_ratio
                            << " lipschitz " << rep.lipschitz_ratio;
    EXPECT_GT(rep.samples, 0);
  }
}

TEST(Fields, HypothesesCheckCatchesUnderstatedGrowth) {
  auto pi = make_marginal(LabelMarginal::uniform());
  auto v = std::const_pointer_cast<VectorField>(
      graphon_field(step_kernel(), difference_interaction(1.0), 1));
  v->set_growth(GrowthProfile::constant(0.01, 0.01));
  HypothesesSampling s;
  s.marginal = pi;
  EXPECT_FALSE(hypotheses_check(*v, s).pass());
}

TEST(GrowthProfile, IntegralsOfCallbacks) {
  const auto g = GrowthProfile::from_functions([](double t) { return t; },
                                               [](double R, double t) { return R * t; });
  EXPECT_NEAR(g.m_integral(0.0, 2.0), 2.0, 1e-6);
  EXPECT_NEAR(g.L_integral(3.0, 0.0, 1.0), 1.5, 1e-6);
  const auto c = GrowthProfile::constant(2.0, 5.0);
  EXPECT_DOUBLE_EQ(c.m_integral(1.0, 2.5), 3.0);
  EXPECT_DOUBLE_EQ(c.L_integral(100.0, 0.0, 2.0), 10.0);
}
