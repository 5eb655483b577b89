#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "fibred/measures.hpp"

namespace fibred {

/// Label kernel w(omega, theta) on [0,1]^2, either piecewise constant on a
/// product of blocks (a step graphon) or a closed-form callback with a
/// declared sup norm.
class LabelKernel {
 public:
  static LabelKernel constant(double c);
  /// `breaks` = 0 = b_0 < ... < b_B = 1; `values` is B x B row-major with
  /// rows indexed by the omega block.
  static LabelKernel step(std::vector<double> breaks,
                          std::vector<double> values);
  static LabelKernel closed_form(std::function<double(double, double)> f,
                                 double sup_norm);

  bool is_step() const { return !fn_; }
  const std::vector<double>& breaks() const { return breaks_; }
  std::size_t blocks() const { return breaks_.size() - 1; }
  std::size_t block_of(double omega) const;
  double block_value(std::size_t row, std::size_t col) const {
    return values_[row * blocks() + col];
  }
  double operator()(double omega, double theta) const;
  double sup_norm() const { return sup_; }
  double inf_value() const { return inf_; }

 private:
  std::vector<double> breaks_{0.0, 1.0};
  std::vector<double> values_{0.0};
  std::function<double(double, double)> fn_;
  double sup_ = 0.0;
  double inf_ = 0.0;
};

/// Function of one label variable, step or closed form.
class LabelFunction {
 public:
  static LabelFunction constant(double c);
  static LabelFunction step(std::vector<double> breaks,
                            std::vector<double> values);
  /// `lower`/`upper` are declared bounds of f on [0,1].
  static LabelFunction closed_form(std::function<double(double)> f,
                                   double lower, double upper);

  bool is_step() const { return !fn_; }
  const std::vector<double>& breaks() const { return breaks_; }
  double operator()(double omega) const;
  double sup_norm() const { return std::max(std::abs(lo_), std::abs(hi_)); }
  double lower() const { return lo_; }
  double upper() const { return hi_; }
  /// (1/pi(A)) int_A f dpi; exact for steps, quantile midpoints otherwise.
  double cell_average(const LabelMarginal& pi, const Cell& cell,
                      int nodes) const;

 private:
  std::vector<double> breaks_{0.0, 1.0};
  std::vector<double> values_{0.0};
  std::function<double(double)> fn_;
  double lo_ = 0.0;
  double hi_ = 0.0;
};

/// Pieces of `cell` on which a step structure with `breaks` is constant,
/// with their pi-masses. Atom cells give themselves.
std::vector<CellOverlap> split_by_breaks(const LabelMarginal& pi,
                                         const Cell& cell,
                                         std::span<const double> breaks);

/// pi-quantile midpoints of an interval cell (the atom for atom cells).
std::vector<double> quantile_nodes(const LabelMarginal& pi, const Cell& cell,
                                   int nodes);

/// Integrated kernel weights c_k(omega) = int_{A_k} w(omega, theta) dpi(theta)
/// against a family of fibre cells A_k. Step kernels are tabulated per omega
/// block; closed forms use `theta_nodes` quantile nodes per cell.
class KernelWeights {
 public:
  KernelWeights(const LabelKernel& w, const LabelMarginal& pi,
                std::span<const FibreView> fibres, int theta_nodes);

  bool tabulated() const { return kernel_->is_step(); }
  std::size_t blocks() const { return kernel_->blocks(); }
  std::size_t block_of(double omega) const { return kernel_->block_of(omega); }
  /// Tabulated row for an omega block (step kernels only).
  std::span<const double> row(std::size_t block) const {
    return {table_.data() + block * cells_, cells_};
  }
  void at(double omega, std::span<double> out) const;

 private:
  const LabelKernel* kernel_;
  std::size_t cells_;
  std::vector<double> table_;
  std::vector<double> nodes_;
  std::vector<std::size_t> node_start_;
  std::vector<double> node_mass_;
};

}  // namespace fibred
