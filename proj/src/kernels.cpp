#include "fibred/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "fibred/error.hpp"

namespace fibred {

namespace {

void check_breaks(const std::vector<double>& breaks) {
  if (breaks.size() < 2 || breaks.front() != 0.0 || breaks.back() != 1.0)
    throw ValidationError("step breaks must run from 0 to 1");
  for (std::size_t i = 1; i < breaks.size(); ++i)
    if (!(breaks[i] > breaks[i - 1]))
      throw ValidationError("step breaks must increase");
}

std::size_t find_block(const std::vector<double>& breaks, double omega) {
  const auto it = std::upper_bound(breaks.begin() + 1, breaks.end() - 1, omega);
  return static_cast<std::size_t>(it - breaks.begin()) - 1;
}

}  // namespace

LabelKernel LabelKernel::constant(double c) {
  return step({0.0, 1.0}, {c});
}

LabelKernel LabelKernel::step(std::vector<double> breaks,
                              std::vector<double> values) {
  check_breaks(breaks);
  const std::size_t b = breaks.size() - 1;
  if (values.size() != b * b)
    throw ValidationError("step kernel needs B*B values");
  LabelKernel k;
  k.breaks_ = std::move(breaks);
  k.values_ = std::move(values);
  k.sup_ = 0.0;
  k.inf_ = k.values_.front();
  for (double v : k.values_) {
    if (!std::isfinite(v)) throw ValidationError("kernel value not finite");
    k.sup_ = std::max(k.sup_, std::abs(v));
    k.inf_ = std::min(k.inf_, v);
  }
  return k;
}

LabelKernel LabelKernel::closed_form(std::function<double(double, double)> f,
                                     double sup_norm) {
  if (!(sup_norm >= 0.0)) throw ValidationError("sup norm must be >= 0");
  LabelKernel k;
  k.fn_ = std::move(f);
  k.sup_ = sup_norm;
  k.inf_ = -sup_norm;
  return k;
}

std::size_t LabelKernel::block_of(double omega) const {
  return find_block(breaks_, omega);
}

double LabelKernel::operator()(double omega, double theta) const {
  if (fn_) return fn_(omega, theta);
  return block_value(block_of(omega), block_of(theta));
}

LabelFunction LabelFunction::constant(double c) { return step({0.0, 1.0}, {c}); }

LabelFunction LabelFunction::step(std::vector<double> breaks,
                                  std::vector<double> values) {
  check_breaks(breaks);
  if (values.size() != breaks.size() - 1)
    throw ValidationError("step function needs one value per block");
  LabelFunction f;
  f.breaks_ = std::move(breaks);
  f.values_ = std::move(values);
  f.lo_ = *std::min_element(f.values_.begin(), f.values_.end());
  f.hi_ = *std::max_element(f.values_.begin(), f.values_.end());
  return f;
}

LabelFunction LabelFunction::closed_form(std::function<double(double)> f,
                                         double lower, double upper) {
  if (!(lower <= upper)) throw ValidationError("invalid declared bounds");
  LabelFunction g;
  g.fn_ = std::move(f);
  g.lo_ = lower;
  g.hi_ = upper;
  return g;
}

double LabelFunction::operator()(double omega) const {
  if (fn_) return fn_(omega);
  return values_[find_block(breaks_, omega)];
}

double LabelFunction::cell_average(const LabelMarginal& pi, const Cell& cell,
                                   int nodes) const {
  if (cell.atom) return (*this)(cell.lo);
  if (!fn_) {
    double s = 0.0, m = 0.0;
    for (const auto& piece : split_by_breaks(pi, cell, breaks_)) {
      s += piece.mass * values_[piece.second];
      m += piece.mass;
    }
    if (!(m > 0.0)) throw DegenerateCellError("cell has zero label mass");
    return s / m;
  }
  double s = 0.0;
  const auto om = quantile_nodes(pi, cell, nodes);
  for (double w : om) s += fn_(w);
  return s / static_cast<double>(om.size());
}

std::vector<CellOverlap> split_by_breaks(const LabelMarginal& pi,
                                         const Cell& cell,
                                         std::span<const double> breaks) {
  std::vector<CellOverlap> out;
  if (cell.atom) {
    std::vector<double> b(breaks.begin(), breaks.end());
    out.push_back(CellOverlap{cell, pi.mass(cell), 0, find_block(b, cell.lo)});
    return out;
  }
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double lo = std::max(cell.lo, breaks[i]);
    const double hi = std::min(cell.hi, breaks[i + 1]);
    if (!(hi > lo)) continue;
    const Cell c = Cell::interval(lo, hi);
    const double m = pi.mass(c);
    if (m > 1e-15) out.push_back(CellOverlap{c, m, 0, i});
  }
  return out;
}

std::vector<double> quantile_nodes(const LabelMarginal& pi, const Cell& cell,
                                   int nodes) {
  if (cell.atom) return {cell.lo};
  const double u0 = pi.cdf(cell.lo);
  const double u1 = pi.cdf(cell.hi);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(nodes));
  for (int l = 0; l < nodes; ++l)
    out.push_back(pi.quantile(u0 + (u1 - u0) * (l + 0.5) / nodes));
  return out;
}

KernelWeights::KernelWeights(const LabelKernel& w, const LabelMarginal& pi,
                             std::span<const FibreView> fibres,
                             int theta_nodes)
    : kernel_(&w), cells_(fibres.size()) {
  if (w.is_step()) {
    const std::size_t B = w.blocks();
    // overlap masses of each fibre cell with each theta block
    std::vector<double> ov(cells_ * B, 0.0);
    for (std::size_t k = 0; k < cells_; ++k)
      for (const auto& piece : split_by_breaks(pi, fibres[k].cell, w.breaks()))
        ov[k * B + piece.second] += piece.mass;
    table_.assign(B * cells_, 0.0);
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t k = 0; k < cells_; ++k) {
        double s = 0.0;
        for (std::size_t c = 0; c < B; ++c)
          s += w.block_value(b, c) * ov[k * B + c];
        table_[b * cells_ + k] = s;
      }
    return;
  }
  node_start_.reserve(cells_ + 1);
  for (std::size_t k = 0; k < cells_; ++k) {
    node_start_.push_back(nodes_.size());
    const auto om = quantile_nodes(pi, fibres[k].cell, theta_nodes);
    nodes_.insert(nodes_.end(), om.begin(), om.end());
    node_mass_.push_back(fibres[k].weight / static_cast<double>(om.size()));
  }
  node_start_.push_back(nodes_.size());
}

void KernelWeights::at(double omega, std::span<double> out) const {
  if (kernel_->is_step()) {
    const auto r = row(block_of(omega));
    std::copy(r.begin(), r.end(), out.begin());
    return;
  }
  for (std::size_t k = 0; k < cells_; ++k) {
    double s = 0.0;
    for (std::size_t l = node_start_[k]; l < node_start_[k + 1]; ++l)
      s += (*kernel_)(omega, nodes_[l]);
    out[k] = s * node_mass_[k];
  }
}

}  // namespace fibred
