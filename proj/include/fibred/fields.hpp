#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fibred/kernels.hpp"
#include "fibred/measures.hpp"

namespace fibred {

/// Growth bound m(t) and local Lipschitz bound L_R(t) of a vector field.
class GrowthProfile {
 public:
  GrowthProfile() = default;
  /// Time-independent constants; L does not depend on R.
  static GrowthProfile constant(double m, double L);
  static GrowthProfile from_functions(std::function<double(double)> m,
                                      std::function<double(double, double)> L);

  double m(double t) const;
  double L(double R, double t) const;
  /// int_{t0}^{t1} m; exact for constants, trapezoid with `steps` otherwise.
  double m_integral(double t0, double t1, int steps = 1000) const;
  double L_integral(double R, double t0, double t1, int steps = 1000) const;
  bool is_constant() const { return constant_; }

 private:
  bool constant_ = true;
  double m_const_ = 0.0;
  double L_const_ = 0.0;
  std::function<double(double)> m_fn_;
  std::function<double(double, double)> L_fn_;
};

/// Summaries of the measure argument computed once per evaluation time.
struct FieldState {
  virtual ~FieldState() = default;
  double t = 0.0;
};

class VectorField {
 public:
  virtual ~VectorField() = default;

  virtual int dim() const = 0;
  virtual std::string name() const = 0;
  virtual std::unique_ptr<FieldState> prepare(double t,
                                              const MeasureView& mu) const = 0;
  virtual void eval(const FieldState& state, double omega,
                    std::span<const double> x, std::span<double> out) const = 0;
  /// Breaks b_0 = 0 < ... < b_B = 1 such that the field is constant in omega
  /// on each [b_i, b_{i+1}); none when it varies continuously.
  virtual std::optional<std::vector<double>> label_breaks() const {
    return std::nullopt;
  }
  virtual bool measure_independent() const { return false; }
  /// States must stay in the nonnegative orthant.
  virtual bool nonnegative_state() const { return false; }

  const GrowthProfile& growth() const { return growth_; }
  void set_growth(GrowthProfile g) { growth_ = std::move(g); }

  std::vector<double> operator()(double t, const FibredMeasure& mu,
                                 double omega, std::span<const double> x) const;

 protected:
  GrowthProfile growth_;
};

using FieldPtr = std::shared_ptr<const VectorField>;

/// Pair interaction Psi(x, y) with declared Lipschitz constant (with respect
/// to |x - x'| + |y - y'|) and |Psi(0, 0)|.
struct PairInteraction {
  std::function<void(std::span<const double>, std::span<const double>,
                     std::span<double>)>
      psi;
  double lipschitz = 0.0;
  double at_origin = 0.0;
};

/// Psi(x, y) = c (y - x)
PairInteraction difference_interaction(double c);
/// Psi(x, y) = K sin(y - x), d = 1
PairInteraction sine_interaction(double K);
/// Psi(x, y) = c, independent of states
PairInteraction constant_interaction(std::vector<double> c);

inline constexpr int kThetaNodes = 4;

FieldPtr zero_field(int dim);

/// mu-independent field v(t, omega, x).
FieldPtr local_field(
    int dim,
    std::function<void(double, double, std::span<const double>,
                       std::span<double>)>
        f,
    GrowthProfile growth,
    std::optional<std::vector<double>> label_breaks = std::nullopt);

/// v = int w(omega, theta) Psi(x, y) dmu(theta, y)
FieldPtr graphon_field(LabelKernel w, PairInteraction psi, int dim,
                       int theta_nodes = kThetaNodes);

/// v = K int w(omega, theta) sin(y - x) dmu, using the sine addition formula.
FieldPtr kuramoto_field(double K, LabelKernel w,
                        int theta_nodes = kThetaNodes);

struct MichaelisMentenParams {
  LabelKernel alpha = LabelKernel::constant(1.0);
  LabelKernel k = LabelKernel::constant(1.0);
  LabelFunction beta = LabelFunction::constant(1.0);
  LabelFunction g = LabelFunction::constant(0.0);
  LabelFunction a = LabelFunction::constant(1.0);
  /// Negative states raise DomainError instead of being clipped at zero.
  bool strict = true;
};

/// v = int alpha y / (k + y) dmu + g(omega) r / (a(omega) + r),
/// r = int beta(theta) y dmu.  d = 1.
FieldPtr michaelis_menten_field(MichaelisMentenParams params,
                                int theta_nodes = kThetaNodes);

struct LeaderFollowerParams {
  int dim = 1;
  /// v_ext(x) = A x + b
  std::vector<double> A;  // dim x dim, row-major; empty means zero
  std::vector<double> b;  // empty means zero
  /// Constant control per leader atom, keyed by atom position.
  std::vector<std::pair<double, std::vector<double>>> controls;
  /// Psi(z) = -kappa z
  double kappa = 1.0;
};

/// Leaders are the atoms of the marginal, followers its continuous part.
FieldPtr leader_follower_field(LeaderFollowerParams params);

/// v = int (a(omega, theta) x + b(omega, theta) y) dmu
FieldPtr linear_field(LabelKernel a, LabelKernel b, int dim,
                      int theta_nodes = kThetaNodes);

struct HypothesesSampling {
  MarginalPtr marginal;
  int cells = 8;
  int points_per_fibre = 4;
  double radius = 2.0;
  double perturbation = 0.5;
  int samples = 200;
  double t_max = 1.0;
  std::uint64_t seed = 1;
};

struct HypothesesReport {
  double growth_ratio = 0.0;     // max |v| / (m (1 + |x| + M_1))
  double lipschitz_ratio = 0.0;  // max |dv| / (L_R (W_{pi,1} + |dx|))
  int samples = 0;
  bool pass() const { return growth_ratio <= 1.0 + 1e-9 &&
                             lipschitz_ratio <= 1.0 + 1e-9; }
};

/// Monte-Carlo check of the growth and Lipschitz hypotheses against the
/// field's declared profile.
HypothesesReport hypotheses_check(const VectorField& field,
                                  const HypothesesSampling& sampling);

}  // namespace fibred
