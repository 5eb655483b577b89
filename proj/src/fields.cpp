#include "fibred/fields.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "fibred/error.hpp"
#include "fibred/transport.hpp"

namespace fibred {

// ---------------------------------------------------------------------------
// GrowthProfile

GrowthProfile GrowthProfile::constant(double m, double L) {
  if (!(m >= 0.0) || !(L >= 0.0) || !std::isfinite(m) || !std::isfinite(L))
    throw ValidationError("growth constants must be finite and nonnegative");
  GrowthProfile g;
  g.m_const_ = m;
  g.L_const_ = L;
  return g;
}

GrowthProfile GrowthProfile::from_functions(
    std::function<double(double)> m, std::function<double(double, double)> L) {
  GrowthProfile g;
  g.constant_ = false;
  g.m_fn_ = std::move(m);
  g.L_fn_ = std::move(L);
  return g;
}

double GrowthProfile::m(double t) const {
  return constant_ ? m_const_ : m_fn_(t);
}

double GrowthProfile::L(double R, double t) const {
  return constant_ ? L_const_ : L_fn_(R, t);
}

namespace {

double trapezoid(const std::function<double(double)>& f, double t0, double t1,
                 int steps) {
  if (t1 <= t0) return 0.0;
  const double h = (t1 - t0) / steps;
  double s = 0.5 * (f(t0) + f(t1));
  for (int i = 1; i < steps; ++i) s += f(t0 + i * h);
  return s * h;
}

}  // namespace

double GrowthProfile::m_integral(double t0, double t1, int steps) const {
  if (constant_) return m_const_ * std::max(0.0, t1 - t0);
  return trapezoid(m_fn_, t0, t1, steps);
}

double GrowthProfile::L_integral(double R, double t0, double t1,
                                 int steps) const {
  if (constant_) return L_const_ * std::max(0.0, t1 - t0);
  return trapezoid([&](double t) { return L_fn_(R, t); }, t0, t1, steps);
}

std::vector<double> VectorField::operator()(double t, const FibredMeasure& mu,
                                            double omega,
                                            std::span<const double> x) const {
  const auto state = prepare(t, view_of(mu));
  std::vector<double> out(static_cast<std::size_t>(dim()), 0.0);
  eval(*state, omega, x, out);
  return out;
}

// ---------------------------------------------------------------------------
// Interactions

PairInteraction difference_interaction(double c) {
  PairInteraction p;
  p.psi = [c](std::span<const double> x, std::span<const double> y,
              std::span<double> out) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = c * (y[i] - x[i]);
  };
  p.lipschitz = std::abs(c);
  p.at_origin = 0.0;
  return p;
}

PairInteraction sine_interaction(double K) {
  PairInteraction p;
  p.psi = [K](std::span<const double> x, std::span<const double> y,
              std::span<double> out) { out[0] = K * std::sin(y[0] - x[0]); };
  p.lipschitz = std::abs(K);
  p.at_origin = 0.0;
  return p;
}

PairInteraction constant_interaction(std::vector<double> c) {
  PairInteraction p;
  double n = 0.0;
  for (double v : c) n += v * v;
  p.psi = [c = std::move(c)](std::span<const double>, std::span<const double>,
                             std::span<double> out) {
    std::copy(c.begin(), c.end(), out.begin());
  };
  p.lipschitz = 0.0;
  p.at_origin = std::sqrt(n);
  return p;
}

namespace {

std::vector<double> union_breaks(
    std::initializer_list<const std::vector<double>*> parts) {
  std::set<double> s;
  for (const auto* p : parts) s.insert(p->begin(), p->end());
  return {s.begin(), s.end()};
}

double fibre_mean(const FibreView& f, int dim, int c) {
  const std::size_t n = f.size(dim);
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j)
    s += f.point_weight(j, n) *
         f.coords[j * static_cast<std::size_t>(dim) +
                  static_cast<std::size_t>(c)];
  return s;
}

std::vector<double>& scratch(std::size_t n) {
  thread_local std::vector<double> buf;
  if (buf.size() < n) buf.resize(n);
  return buf;
}

// ---------------------------------------------------------------------------

class ZeroField final : public VectorField {
 public:
  explicit ZeroField(int dim) : dim_(dim) {
    growth_ = GrowthProfile::constant(0.0, 0.0);
  }
  int dim() const override { return dim_; }
  std::string name() const override { return "zero"; }
  std::unique_ptr<FieldState> prepare(double t,
                                      const MeasureView&) const override {
    auto s = std::make_unique<FieldState>();
    s->t = t;
    return s;
  }
  void eval(const FieldState&, double, std::span<const double>,
            std::span<double> out) const override {
    std::fill(out.begin(), out.end(), 0.0);
  }
  std::optional<std::vector<double>> label_breaks() const override {
    return std::vector<double>{0.0, 1.0};
  }
  bool measure_independent() const override { return true; }

 private:
  int dim_;
};

class LocalField final : public VectorField {
 public:
  using Fn = std::function<void(double, double, std::span<const double>,
                                std::span<double>)>;
  LocalField(int dim, Fn f, GrowthProfile g,
             std::optional<std::vector<double>> breaks)
      : dim_(dim), f_(std::move(f)), breaks_(std::move(breaks)) {
    growth_ = std::move(g);
  }
  int dim() const override { return dim_; }
  std::string name() const override { return "local"; }
  std::unique_ptr<FieldState> prepare(double t,
                                      const MeasureView&) const override {
    auto s = std::make_unique<FieldState>();
    s->t = t;
    return s;
  }
  void eval(const FieldState& s, double omega, std::span<const double> x,
            std::span<double> out) const override {
    f_(s.t, omega, x, out);
  }
  std::optional<std::vector<double>> label_breaks() const override {
    return breaks_;
  }
  bool measure_independent() const override { return true; }

 private:
  int dim_;
  Fn f_;
  std::optional<std::vector<double>> breaks_;
};

// ---------------------------------------------------------------------------

struct KernelState : FieldState {
  MeasureView mu;
  std::optional<KernelWeights> weights;
};

class GraphonField final : public VectorField {
 public:
  GraphonField(LabelKernel w, PairInteraction psi, int dim, int nodes)
      : w_(std::move(w)), psi_(std::move(psi)), dim_(dim), nodes_(nodes) {
    growth_ = GrowthProfile::constant(
        w_.sup_norm() * (psi_.at_origin + psi_.lipschitz),
        w_.sup_norm() * psi_.lipschitz);
  }
  int dim() const override { return dim_; }
  std::string name() const override { return "graphon"; }
  std::unique_ptr<FieldState> prepare(double t,
                                      const MeasureView& mu) const override {
    auto s = std::make_unique<KernelState>();
    s->t = t;
    s->mu = mu;
    s->weights.emplace(w_, *mu.marginal, mu.fibres, nodes_);
    return s;
  }
  void eval(const FieldState& base, double omega, std::span<const double> x,
            std::span<double> out) const override {
    const auto& s = static_cast<const KernelState&>(base);
    const std::size_t K = s.mu.fibres.size();
    auto& buf = scratch(K + static_cast<std::size_t>(dim_));
    std::span<double> coef(buf.data(), K);
    std::span<double> tmp(buf.data() + K, static_cast<std::size_t>(dim_));
    s.weights->at(omega, coef);
    std::fill(out.begin(), out.end(), 0.0);
    const auto d = static_cast<std::size_t>(dim_);
    for (std::size_t k = 0; k < K; ++k) {
      if (coef[k] == 0.0) continue;
      const FibreView& f = s.mu.fibres[k];
      const std::size_t n = f.size(dim_);
      for (std::size_t j = 0; j < n; ++j) {
        psi_.psi(x, f.coords.subspan(j * d, d), tmp);
        const double c = coef[k] * f.point_weight(j, n);
        for (std::size_t i = 0; i < d; ++i) out[i] += c * tmp[i];
      }
    }
  }
  std::optional<std::vector<double>> label_breaks() const override {
    if (w_.is_step()) return w_.breaks();
    return std::nullopt;
  }

 private:
  LabelKernel w_;
  PairInteraction psi_;
  int dim_;
  int nodes_;
};

// ---------------------------------------------------------------------------

struct KuramotoState : FieldState {
  std::vector<double> S, C;  // per fibre: E[sin y], E[cos y]
  std::vector<double> As, Ac;  // per omega block (step kernels)
  std::optional<KernelWeights> weights;
};

class KuramotoField final : public VectorField {
 public:
  KuramotoField(double K, LabelKernel w, int nodes)
      : K_(K), w_(std::move(w)), nodes_(nodes) {
    const double c = std::abs(K_) * w_.sup_norm();
    growth_ = GrowthProfile::constant(c, c);
  }
  int dim() const override { return 1; }
  std::string name() const override { return "kuramoto"; }
  std::unique_ptr<FieldState> prepare(double t,
                                      const MeasureView& mu) const override {
    auto s = std::make_unique<KuramotoState>();
    s->t = t;
    const std::size_t K = mu.fibres.size();
    s->S.resize(K);
    s->C.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
      const FibreView& f = mu.fibres[k];
      const std::size_t n = f.size(1);
      double sn = 0.0, cs = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double w = f.point_weight(j, n);
        sn += w * std::sin(f.coords[j]);
        cs += w * std::cos(f.coords[j]);
      }
      s->S[k] = sn;
      s->C[k] = cs;
    }
    s->weights.emplace(w_, *mu.marginal, mu.fibres, nodes_);
    if (w_.is_step()) {
      const std::size_t B = w_.blocks();
      s->As.assign(B, 0.0);
      s->Ac.assign(B, 0.0);
      for (std::size_t b = 0; b < B; ++b) {
        const auto row = s->weights->row(b);
        for (std::size_t k = 0; k < K; ++k) {
          s->As[b] += row[k] * s->S[k];
          s->Ac[b] += row[k] * s->C[k];
        }
      }
    }
    return s;
  }
  void eval(const FieldState& base, double omega, std::span<const double> x,
            std::span<double> out) const override {
    const auto& s = static_cast<const KuramotoState&>(base);
    double as = 0.0, ac = 0.0;
    if (w_.is_step()) {
      const std::size_t b = w_.block_of(omega);
      as = s.As[b];
      ac = s.Ac[b];
    } else {
      const std::size_t K = s.S.size();
      auto& buf = scratch(K);
      std::span<double> coef(buf.data(), K);
      s.weights->at(omega, coef);
      for (std::size_t k = 0; k < K; ++k) {
        as += coef[k] * s.S[k];
        ac += coef[k] * s.C[k];
      }
    }
    out[0] = K_ * (as * std::cos(x[0]) - ac * std::sin(x[0]));
  }
  std::optional<std::vector<double>> label_breaks() const override {
    if (w_.is_step()) return w_.breaks();
    return std::nullopt;
  }

 private:
  double K_;
  LabelKernel w_;
  int nodes_;
};

// ---------------------------------------------------------------------------

struct MMState : FieldState {
  MeasureView mu;
  double r = 0.0;
  std::vector<double> table;  // saturation term per omega block (step case)
  std::vector<std::vector<double>> theta_nodes;
};

class MichaelisMentenField final : public VectorField {
 public:
  MichaelisMentenField(MichaelisMentenParams p, int nodes)
      : p_(std::move(p)), nodes_(nodes) {
    const double kmin = p_.k.inf_value();
    const double amin = p_.a.lower();
    if (!(kmin > 0.0))
      throw ValidationError("Michaelis constant k must be bounded below by a "
                            "positive number");
    if (!(amin > 0.0))
      throw ValidationError("a(omega) must be bounded below by a positive "
                            "number");
    if (p_.beta.lower() < 0.0) throw ValidationError("beta must be >= 0");
    const double al = p_.alpha.sup_norm();
    const double g = p_.g.sup_norm();
    growth_ = GrowthProfile::constant(
        al + g, al / kmin + g * p_.beta.sup_norm() / amin);
    step_ = p_.alpha.is_step() && p_.k.is_step();
    if (step_) {
      breaks_ = union_breaks({&p_.alpha.breaks(), &p_.k.breaks()});
      const std::size_t B = breaks_.size() - 1;
      alpha_.resize(B * B);
      kappa_.resize(B * B);
      for (std::size_t b = 0; b < B; ++b)
        for (std::size_t c = 0; c < B; ++c) {
          const double wb = 0.5 * (breaks_[b] + breaks_[b + 1]);
          const double wc = 0.5 * (breaks_[c] + breaks_[c + 1]);
          alpha_[b * B + c] = p_.alpha(wb, wc);
          kappa_[b * B + c] = p_.k(wb, wc);
        }
    }
  }
  int dim() const override { return 1; }
  std::string name() const override { return "mm"; }
  bool nonnegative_state() const override { return true; }

  std::unique_ptr<FieldState> prepare(double t,
                                      const MeasureView& mu) const override {
    auto s = std::make_unique<MMState>();
    s->t = t;
    s->mu = mu;
    for (const auto& f : mu.fibres)
      for (double y : f.coords)
        if (y < 0.0 && p_.strict)
          throw DomainError("negative substrate state in Michaelis-Menten "
                            "field");
    for (const auto& f : mu.fibres) {
      const double beta = p_.beta.cell_average(*mu.marginal, f.cell, nodes_);
      s->r += f.weight * beta * clipped_mean(f);
    }
    if (step_) {
      const std::size_t B = breaks_.size() - 1;
      s->table.assign(B, 0.0);
      for (const auto& f : mu.fibres) {
        const std::size_t n = f.size(1);
        for (const auto& piece : split_by_breaks(*mu.marginal, f.cell, breaks_)) {
          const std::size_t c = piece.second;
          for (std::size_t b = 0; b < B; ++b) {
            const double kap = kappa_[b * B + c];
            double sat = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
              const double y = std::max(0.0, f.coords[j]);
              sat += f.point_weight(j, n) * y / (kap + y);
            }
            s->table[b] += piece.mass * alpha_[b * B + c] * sat;
          }
        }
      }
    } else {
      for (const auto& f : mu.fibres)
        s->theta_nodes.push_back(quantile_nodes(*mu.marginal, f.cell, nodes_));
    }
    return s;
  }

  void eval(const FieldState& base, double omega, std::span<const double>,
            std::span<double> out) const override {
    const auto& s = static_cast<const MMState&>(base);
    double sat = 0.0;
    if (step_) {
      const auto it =
          std::upper_bound(breaks_.begin() + 1, breaks_.end() - 1, omega);
      sat = s.table[static_cast<std::size_t>(it - breaks_.begin()) - 1];
    } else {
      for (std::size_t k = 0; k < s.mu.fibres.size(); ++k) {
        const FibreView& f = s.mu.fibres[k];
        const auto& th = s.theta_nodes[k];
        const std::size_t n = f.size(1);
        const double share = f.weight / static_cast<double>(th.size());
        for (double theta : th) {
          const double al = p_.alpha(omega, theta);
          const double kap = p_.k(omega, theta);
          double part = 0.0;
          for (std::size_t j = 0; j < n; ++j) {
            const double y = std::max(0.0, f.coords[j]);
            part += f.point_weight(j, n) * y / (kap + y);
          }
          sat += share * al * part;
        }
      }
    }
    out[0] = sat + p_.g(omega) * s.r / (p_.a(omega) + s.r);
  }

  std::optional<std::vector<double>> label_breaks() const override {
    if (!step_ || !p_.g.is_step() || !p_.a.is_step()) return std::nullopt;
    return union_breaks({&breaks_, &p_.g.breaks(), &p_.a.breaks()});
  }

 private:
  static double clipped_mean(const FibreView& f) {
    const std::size_t n = f.size(1);
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      s += f.point_weight(j, n) * std::max(0.0, f.coords[j]);
    return s;
  }

  MichaelisMentenParams p_;
  int nodes_;
  bool step_ = false;
  std::vector<double> breaks_;
  std::vector<double> alpha_, kappa_;
};

// ---------------------------------------------------------------------------

struct LeaderFollowerState : FieldState {
  const LabelMarginal* marginal = nullptr;
  double follower_mass = 0.0;
  std::vector<double> follower_moment;
};

class LeaderFollowerField final : public VectorField {
 public:
  explicit LeaderFollowerField(LeaderFollowerParams p) : p_(std::move(p)) {
    const auto d = static_cast<std::size_t>(p_.dim);
    if (p_.dim < 1) throw ValidationError("dimension must be positive");
    if (!p_.A.empty() && p_.A.size() != d * d)
      throw ValidationError("A must be dim x dim");
    if (!p_.b.empty() && p_.b.size() != d)
      throw ValidationError("b must have dim entries");
    if (p_.kappa < 0.0) throw ValidationError("kappa must be >= 0");
    double a = 0.0, bn = 0.0, u = 0.0;
    for (double v : p_.A) a += v * v;
    for (double v : p_.b) bn += v * v;
    for (const auto& c : p_.controls) {
      if (c.second.size() != d)
        throw ValidationError("control must have dim entries");
      double s = 0.0;
      for (double v : c.second) s += v * v;
      u = std::max(u, std::sqrt(s));
    }
    a = std::sqrt(a);
    bn = std::sqrt(bn);
    growth_ = GrowthProfile::constant(std::max(a + p_.kappa, bn + u),
                                      a + p_.kappa);
  }
  int dim() const override { return p_.dim; }
  std::string name() const override { return "leader_follower"; }
  std::unique_ptr<FieldState> prepare(double t,
                                      const MeasureView& mu) const override {
    auto s = std::make_unique<LeaderFollowerState>();
    s->t = t;
    s->marginal = mu.marginal;
    s->follower_moment.assign(static_cast<std::size_t>(p_.dim), 0.0);
    for (const auto& f : mu.fibres) {
      if (f.cell.atom) continue;
      s->follower_mass += f.weight;
      for (int c = 0; c < p_.dim; ++c)
        s->follower_moment[static_cast<std::size_t>(c)] +=
            f.weight * fibre_mean(f, p_.dim, c);
    }
    return s;
  }
  void eval(const FieldState& base, double omega, std::span<const double> x,
            std::span<double> out) const override {
    const auto& s = static_cast<const LeaderFollowerState&>(base);
    const auto d = static_cast<std::size_t>(p_.dim);
    for (std::size_t i = 0; i < d; ++i)
      out[i] = -p_.kappa * (s.follower_mass * x[i] - s.follower_moment[i]);
    if (s.marginal->atom_weight(omega) <= 0.0) return;
    for (std::size_t i = 0; i < d; ++i) {
      double v = p_.b.empty() ? 0.0 : p_.b[i];
      if (!p_.A.empty())
        for (std::size_t j = 0; j < d; ++j) v += p_.A[i * d + j] * x[j];
      out[i] += v;
    }
    for (const auto& c : p_.controls)
      if (std::abs(c.first - omega) <= kMergeTol)
        for (std::size_t i = 0; i < d; ++i) out[i] += c.second[i];
  }
  std::optional<std::vector<double>> label_breaks() const override {
    return std::vector<double>{0.0, 1.0};
  }

 private:
  LeaderFollowerParams p_;
};

// ---------------------------------------------------------------------------

struct LinearState : FieldState {
  std::vector<double> means;  // per fibre, row-major K x d
  std::optional<KernelWeights> wa, wb;
  std::vector<double> a_block;  // per a-block: sum_k c_k
  std::vector<double> b_block;  // per b-block: sum_k c_k mean_k, B x d
};

class LinearField final : public VectorField {
 public:
  LinearField(LabelKernel a, LabelKernel b, int dim, int nodes)
      : a_(std::move(a)), b_(std::move(b)), dim_(dim), nodes_(nodes) {
    const double c = std::max(a_.sup_norm(), b_.sup_norm());
    growth_ = GrowthProfile::constant(c, c);
  }
  int dim() const override { return dim_; }
  std::string name() const override { return "linear"; }
  std::unique_ptr<FieldState> prepare(double t,
                                      const MeasureView& mu) const override {
    auto s = std::make_unique<LinearState>();
    s->t = t;
    const std::size_t K = mu.fibres.size();
    const auto d = static_cast<std::size_t>(dim_);
    s->means.resize(K * d);
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t c = 0; c < d; ++c)
        s->means[k * d + c] =
            fibre_mean(mu.fibres[k], dim_, static_cast<int>(c));
    s->wa.emplace(a_, *mu.marginal, mu.fibres, nodes_);
    s->wb.emplace(b_, *mu.marginal, mu.fibres, nodes_);
    if (a_.is_step()) {
      s->a_block.assign(a_.blocks(), 0.0);
      for (std::size_t bl = 0; bl < a_.blocks(); ++bl)
        for (double c : s->wa->row(bl)) s->a_block[bl] += c;
    }
    if (b_.is_step()) {
      s->b_block.assign(b_.blocks() * d, 0.0);
      for (std::size_t bl = 0; bl < b_.blocks(); ++bl) {
        const auto row = s->wb->row(bl);
        for (std::size_t k = 0; k < K; ++k)
          for (std::size_t c = 0; c < d; ++c)
            s->b_block[bl * d + c] += row[k] * s->means[k * d + c];
      }
    }
    return s;
  }
  void eval(const FieldState& base, double omega, std::span<const double> x,
            std::span<double> out) const override {
    const auto& s = static_cast<const LinearState&>(base);
    const auto d = static_cast<std::size_t>(dim_);
    const std::size_t K = s.means.size() / d;
    auto& buf = scratch(K);
    std::span<double> coef(buf.data(), K);
    double acoef = 0.0;
    if (a_.is_step()) {
      acoef = s.a_block[a_.block_of(omega)];
    } else {
      s.wa->at(omega, coef);
      for (double c : coef) acoef += c;
    }
    for (std::size_t i = 0; i < d; ++i) out[i] = acoef * x[i];
    if (b_.is_step()) {
      const std::size_t bl = b_.block_of(omega);
      for (std::size_t i = 0; i < d; ++i) out[i] += s.b_block[bl * d + i];
    } else {
      s.wb->at(omega, coef);
      for (std::size_t k = 0; k < K; ++k)
        for (std::size_t i = 0; i < d; ++i)
          out[i] += coef[k] * s.means[k * d + i];
    }
  }
  std::optional<std::vector<double>> label_breaks() const override {
    if (!a_.is_step() || !b_.is_step()) return std::nullopt;
    return union_breaks({&a_.breaks(), &b_.breaks()});
  }

 private:
  LabelKernel a_, b_;
  int dim_;
  int nodes_;
};

}  // namespace

FieldPtr zero_field(int dim) { return std::make_shared<ZeroField>(dim); }

FieldPtr local_field(
    int dim,
    std::function<void(double, double, std::span<const double>,
                       std::span<double>)>
        f,
    GrowthProfile growth, std::optional<std::vector<double>> label_breaks) {
  return std::make_shared<LocalField>(dim, std::move(f), std::move(growth),
                                      std::move(label_breaks));
}

FieldPtr graphon_field(LabelKernel w, PairInteraction psi, int dim,
                       int theta_nodes) {
  return std::make_shared<GraphonField>(std::move(w), std::move(psi), dim,
                                        theta_nodes);
}

FieldPtr kuramoto_field(double K, LabelKernel w, int theta_nodes) {
  return std::make_shared<KuramotoField>(K, std::move(w), theta_nodes);
}

FieldPtr michaelis_menten_field(MichaelisMentenParams params, int theta_nodes) {
  return std::make_shared<MichaelisMentenField>(std::move(params), theta_nodes);
}

FieldPtr leader_follower_field(LeaderFollowerParams params) {
  return std::make_shared<LeaderFollowerField>(std::move(params));
}

FieldPtr linear_field(LabelKernel a, LabelKernel b, int dim, int theta_nodes) {
  return std::make_shared<LinearField>(std::move(a), std::move(b), dim,
                                       theta_nodes);
}

// ---------------------------------------------------------------------------
// Hypotheses check

namespace {

double vec_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

}  // namespace

HypothesesReport hypotheses_check(const VectorField& field,
                                  const HypothesesSampling& cfg) {
  const MarginalPtr pi =
      cfg.marginal ? cfg.marginal : make_marginal(LabelMarginal::uniform());
  const int d = field.dim();
  const bool nonneg = field.nonnegative_state();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<Cell> cells;
  if (pi->continuous_mass() > 0.0)
    for (int i = 0; i < cfg.cells; ++i)
      cells.push_back(Cell::interval(pi->quantile(double(i) / cfg.cells),
                                     pi->quantile(double(i + 1) / cfg.cells)));
  for (const auto& a : pi->atoms()) cells.push_back(Cell::at(a.omega));

  auto coordinate = [&](double centre, double spread) {
    const double v = centre + spread * (2.0 * unit(rng) - 1.0);
    return nonneg ? std::abs(v) : v;
  };
  auto sample_label = [&]() {
    double u = unit(rng);
    for (const auto& a : pi->atoms()) {
      if (u < a.weight) return a.omega;
      u -= a.weight;
    }
    return pi->quantile(std::min(1.0, u / pi->continuous_mass()));
  };

  HypothesesReport rep;
  for (int s = 0; s < cfg.samples; ++s) {
    std::vector<Fibre> fa, fb;
    for (const Cell& c : cells) {
      const double mass = pi->mass(c);
      if (!(mass > 0.0)) continue;
      std::vector<double> xa, xb;
      for (int j = 0; j < cfg.points_per_fibre; ++j)
        for (int k = 0; k < d; ++k) {
          const double v = coordinate(0.0, cfg.radius);
          xa.push_back(v);
          xb.push_back(coordinate(v, cfg.perturbation));
        }
      fa.push_back(Fibre{c, mass, DiscreteMeasure::uniform(d, xa)});
      fb.push_back(Fibre{c, mass, DiscreteMeasure::uniform(d, xb)});
    }
    const FibredMeasure mu(pi, d, std::move(fa));
    const FibredMeasure nu(pi, d, std::move(fb));
    std::vector<double> x(static_cast<std::size_t>(d)), y(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
      x[k] = coordinate(0.0, cfg.radius);
      y[k] = coordinate(x[k], cfg.perturbation);
    }
    const double t = cfg.t_max * unit(rng);
    const double omega = sample_label();

    const auto vx = field(t, mu, omega, x);
    const auto vy = field(t, nu, omega, y);
    const double m = field.growth().m(t);
    const double gden = m * (1.0 + vec_norm(x) + fibred_moment(mu, 1));
    const double gnum = vec_norm(vx);
    if (gnum > 0.0)
      rep.growth_ratio = std::max(
          rep.growth_ratio, gden > 0.0 ? gnum / gden : INFINITY);

    std::vector<double> dv(vx.size()), dx(x.size());
    for (std::size_t k = 0; k < dv.size(); ++k) dv[k] = vx[k] - vy[k];
    for (std::size_t k = 0; k < dx.size(); ++k) dx[k] = x[k] - y[k];
    const double R = std::max({support_radius(mu), support_radius(nu),
                               vec_norm(x), vec_norm(y)});
    const double lnum = vec_norm(dv);
    const double lden =
        field.growth().L(R, t) * (fibred_w(mu, nu, 1) + vec_norm(dx));
    if (lnum > 1e-14)
      rep.lipschitz_ratio = std::max(
          rep.lipschitz_ratio, lden > 0.0 ? lnum / lden : INFINITY);
    ++rep.samples;
  }
  return rep;
}

}  // namespace fibred
