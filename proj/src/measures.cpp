#include "fibred/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fibred/error.hpp"

namespace fibred {

bool cell_less(const Cell& a, const Cell& b) {
  if (a.lo != b.lo) return a.lo < b.lo;
  if (a.atom != b.atom) return a.atom;
  return a.hi < b.hi;
}

// ---------------------------------------------------------------------------
// DiscreteMeasure

namespace {

void check_points(int dim, const std::vector<double>& coords,
                  const std::vector<double>& weights) {
  if (dim < 1) throw ValidationError("dimension must be positive");
  if (weights.empty()) throw ValidationError("measure has no points");
  if (coords.size() != weights.size() * static_cast<std::size_t>(dim))
    throw ValidationError("coordinate count does not match dimension");
  for (double x : coords)
    if (!std::isfinite(x)) throw ValidationError("point is not finite");
  for (double w : weights)
    if (!(w > 0.0) || !std::isfinite(w))
      throw ValidationError("point weight must be positive");
}

double sum(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0);
}

double norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

}  // namespace

DiscreteMeasure::DiscreteMeasure(int dim, std::vector<double> coords,
                                 std::vector<double> weights) {
  check_points(dim, coords, weights);
  const double total = sum(weights);
  if (std::abs(total - 1.0) > kWeightTol)
    throw ValidationError("point weights sum to " + std::to_string(total));
  if (total != 1.0)
    for (double& w : weights) w /= total;
  dim_ = dim;
  coords_ = std::move(coords);
  weights_ = std::move(weights);
}

DiscreteMeasure DiscreteMeasure::normalised(int dim, std::vector<double> coords,
                                            std::vector<double> weights) {
  check_points(dim, coords, weights);
  const double total = sum(weights);
  for (double& w : weights) w /= total;
  DiscreteMeasure m;
  m.dim_ = dim;
  m.coords_ = std::move(coords);
  m.weights_ = std::move(weights);
  return m;
}

DiscreteMeasure DiscreteMeasure::dirac(std::span<const double> x) {
  return DiscreteMeasure(static_cast<int>(x.size()),
                         std::vector<double>(x.begin(), x.end()), {1.0});
}

DiscreteMeasure DiscreteMeasure::uniform(int dim, std::vector<double> coords) {
  const std::size_t n = coords.size() / static_cast<std::size_t>(dim);
  return normalised(dim, std::move(coords), std::vector<double>(n, 1.0));
}

DiscreteMeasure DiscreteMeasure::merged(double tol) const {
  const std::size_t n = size();
  const auto d = static_cast<std::size_t>(dim_);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(
        coords_.begin() + static_cast<std::ptrdiff_t>(a * d),
        coords_.begin() + static_cast<std::ptrdiff_t>((a + 1) * d),
        coords_.begin() + static_cast<std::ptrdiff_t>(b * d),
        coords_.begin() + static_cast<std::ptrdiff_t>((b + 1) * d));
  });
  DiscreteMeasure out;
  out.dim_ = dim_;
  out.coords_.reserve(coords_.size());
  out.weights_.reserve(n);
  for (std::size_t idx : order) {
    auto p = point(idx);
    bool same = !out.weights_.empty();
    if (same) {
      const double* rep = out.coords_.data() + out.coords_.size() - d;
      for (std::size_t c = 0; c < d && same; ++c)
        same = std::abs(rep[c] - p[c]) <= tol;
    }
    if (same) {
      out.weights_.back() += weights_[idx];
    } else {
      out.coords_.insert(out.coords_.end(), p.begin(), p.end());
      out.weights_.push_back(weights_[idx]);
    }
  }
  return out;
}

std::vector<double> DiscreteMeasure::barycentre() const {
  std::vector<double> m(static_cast<std::size_t>(dim_), 0.0);
  for (std::size_t i = 0; i < size(); ++i) {
    auto p = point(i);
    for (std::size_t c = 0; c < m.size(); ++c) m[c] += weights_[i] * p[c];
  }
  return m;
}

double DiscreteMeasure::moment(int p) const {
  double s = 0.0;
  for (std::size_t i = 0; i < size(); ++i)
    s += weights_[i] * std::pow(norm(point(i)), p);
  return p == 1 ? s : std::pow(s, 1.0 / p);
}

double DiscreteMeasure::radius() const {
  double r = 0.0;
  for (std::size_t i = 0; i < size(); ++i) r = std::max(r, norm(point(i)));
  return r;
}

DiscreteMeasure DiscreteMeasure::mixture(
    std::span<const DiscreteMeasure* const> parts,
    std::span<const double> lambdas) {
  if (parts.empty() || parts.size() != lambdas.size())
    throw ValidationError("mixture needs one weight per part");
  std::size_t used = 0;
  const DiscreteMeasure* last = nullptr;
  for (std::size_t i = 0; i < parts.size(); ++i)
    if (lambdas[i] > 0.0) {
      ++used;
      last = parts[i];
    }
  if (used == 0) throw DegenerateCellError("mixture has zero total weight");
  if (used == 1) return *last;
  const int dim = last->dim();
  std::vector<double> coords;
  std::vector<double> weights;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (!(lambdas[i] > 0.0)) continue;
    const DiscreteMeasure& m = *parts[i];
    if (m.dim() != dim) throw ValidationError("mixture of mixed dimensions");
    coords.insert(coords.end(), m.coords().begin(), m.coords().end());
    for (double w : m.weights()) weights.push_back(lambdas[i] * w);
  }
  return normalised(dim, std::move(coords), std::move(weights)).merged();
}

// ---------------------------------------------------------------------------
// FibredMeasure

FibredMeasure::FibredMeasure(MarginalPtr marginal, int dim,
                             std::vector<Fibre> fibres)
    : marginal_(std::move(marginal)), dim_(dim), fibres_(std::move(fibres)) {
  if (!marginal_) throw ValidationError("fibred measure without marginal");
  if (dim_ < 1) throw ValidationError("dimension must be positive");
  if (fibres_.empty()) throw ValidationError("fibred measure has no fibres");
  std::sort(fibres_.begin(), fibres_.end(),
            [](const Fibre& a, const Fibre& b) {
              return cell_less(a.cell, b.cell);
            });
  double total = 0.0;
  double prev_hi = 0.0;
  const Cell* prev_atom = nullptr;
  for (const Fibre& f : fibres_) {
    if (f.law.dim() != dim_ || f.law.size() == 0)
      throw ValidationError("fibre law has wrong dimension or no points");
    const Cell& c = f.cell;
    if (c.atom) {
      if (prev_atom && prev_atom->lo == c.lo)
        throw ValidationError("repeated atom cell");
      prev_atom = &c;
    } else {
      if (!(c.lo >= 0.0 && c.hi <= 1.0 && c.lo < c.hi))
        throw ValidationError("invalid interval cell");
      if (c.lo < prev_hi - kMergeTol)
        throw ValidationError("overlapping interval cells");
      prev_hi = c.hi;
    }
    const double expect = marginal_->mass(c);
    if (!(expect > 0.0)) throw DegenerateCellError("cell has zero label mass");
    if (std::abs(f.weight - expect) > kWeightTol)
      throw ValidationError("fibre weight differs from label mass of cell");
    total += f.weight;
  }
  if (std::abs(total - 1.0) > 1e-10)
    throw ValidationError("fibres do not cover the label marginal");
}

FibredMeasure FibredMeasure::product(MarginalPtr marginal,
                                     const DiscreteMeasure& rho) {
  std::vector<Fibre> fibres;
  for (const Cell& c : marginal->support_cells())
    fibres.push_back(Fibre{c, marginal->mass(c), rho});
  const int dim = rho.dim();
  return FibredMeasure(std::move(marginal), dim, std::move(fibres));
}

FibredMeasure FibredMeasure::on_partition(const Partition& part,
                                          std::vector<DiscreteMeasure> laws) {
  if (laws.size() != part.size())
    throw ValidationError("one law per partition cell required");
  std::vector<Fibre> fibres;
  for (std::size_t i = 0; i < part.size(); ++i) {
    const Cell& c = part.cells[i];
    // split copies of an atom collapse back into one fibre
    std::size_t end = i + 1;
    while (c.atom && end < part.size() && part.cells[end] == c) ++end;
    if (end > i + 1) {
      std::vector<const DiscreteMeasure*> group;
      std::vector<double> lam;
      for (std::size_t k = i; k < end; ++k) {
        group.push_back(&laws[k]);
        lam.push_back(part.masses[k]);
      }
      fibres.push_back(Fibre{c, part.marginal->mass(c),
                             DiscreteMeasure::mixture(group, lam)});
      i = end - 1;
      continue;
    }
    fibres.push_back(
        Fibre{c, part.marginal->mass(c), std::move(laws[i])});
  }
  const int dim = fibres.front().law.dim();
  return FibredMeasure(part.marginal, dim, std::move(fibres));
}

std::size_t FibredMeasure::support_size() const {
  std::size_t n = 0;
  for (const auto& f : fibres_) n += f.law.size();
  return n;
}

MeasureView view_of(const FibredMeasure& mu) {
  MeasureView v;
  v.marginal = &mu.marginal();
  v.dim = mu.dim();
  v.fibres.reserve(mu.fibres().size());
  for (const auto& f : mu.fibres())
    v.fibres.push_back(FibreView{f.cell, f.weight, f.law.coords(),
                                 f.law.weights()});
  return v;
}

// ---------------------------------------------------------------------------
// Refinement

std::vector<CellOverlap> overlap_cells(const LabelMarginal& pi,
                                       std::span<const Cell> a,
                                       std::span<const Cell> b) {
  std::vector<CellOverlap> out;
  // atoms
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].atom) continue;
    for (std::size_t j = 0; j < b.size(); ++j)
      if (b[j].atom && std::abs(a[i].lo - b[j].lo) <= kMergeTol) {
        out.push_back(CellOverlap{a[i], pi.mass(a[i]), i, j});
        break;
      }
  }
  // intervals, both families sorted by left end
  std::vector<std::size_t> ia, ib;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!a[i].atom) ia.push_back(i);
  for (std::size_t j = 0; j < b.size(); ++j)
    if (!b[j].atom) ib.push_back(j);
  auto by_lo = [](std::span<const Cell> cells) {
    return [cells](std::size_t x, std::size_t y) {
      return cells[x].lo < cells[y].lo;
    };
  };
  std::sort(ia.begin(), ia.end(), by_lo(a));
  std::sort(ib.begin(), ib.end(), by_lo(b));
  std::size_t p = 0, q = 0;
  while (p < ia.size() && q < ib.size()) {
    const Cell& ca = a[ia[p]];
    const Cell& cb = b[ib[q]];
    const double lo = std::max(ca.lo, cb.lo);
    const double hi = std::min(ca.hi, cb.hi);
    if (hi - lo > kMergeTol) {
      const Cell c = Cell::interval(lo, hi);
      const double m = pi.mass(c);
      if (m > 1e-15) out.push_back(CellOverlap{c, m, ia[p], ib[q]});
    }
    if (ca.hi < cb.hi)
      ++p;
    else
      ++q;
  }
  std::sort(out.begin(), out.end(),
            [](const CellOverlap& x, const CellOverlap& y) {
              return cell_less(x.cell, y.cell);
            });
  return out;
}

std::vector<CellOverlap> common_refinement(const FibredMeasure& a,
                                           const FibredMeasure& b) {
  if (!a.marginal().same_as(b.marginal()))
    throw IncomparableMarginalsError(
        "fibred measures have different label marginals");
  if (a.dim() != b.dim())
    throw ValidationError("fibred measures have different dimensions");
  std::vector<Cell> ca, cb;
  for (const auto& f : a.fibres()) ca.push_back(f.cell);
  for (const auto& f : b.fibres()) cb.push_back(f.cell);
  auto out = overlap_cells(a.marginal(), ca, cb);
  double total = 0.0;
  for (const auto& o : out) total += o.mass;
  if (std::abs(total - 1.0) > 1e-10)
    throw IncomparableMarginalsError(
        "cell weights disagree after common refinement");
  return out;
}

// ---------------------------------------------------------------------------
// Summaries

double fibred_moment(const MeasureView& mu, int p) {
  if (p < 1) throw ValidationError("moment order must be positive");
  double s = 0.0;
  for (const auto& f : mu.fibres) {
    const std::size_t n = f.size(mu.dim);
    double fs = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double r = 0.0;
      for (int c = 0; c < mu.dim; ++c) {
        const double x = f.coords[j * static_cast<std::size_t>(mu.dim) +
                                  static_cast<std::size_t>(c)];
        r += x * x;
      }
      fs += f.point_weight(j, n) * std::pow(std::sqrt(r), p);
    }
    s += f.weight * fs;
  }
  return p == 1 ? s : std::pow(s, 1.0 / p);
}

double fibred_moment(const FibredMeasure& mu, int p) {
  return fibred_moment(view_of(mu), p);
}

double support_radius(const FibredMeasure& mu) {
  double r = 0.0;
  for (const auto& f : mu.fibres()) r = std::max(r, f.law.radius());
  return r;
}

FibredMeasure conditional_expectation(const FibredMeasure& mu,
                                      const Partition& part) {
  if (!mu.marginal().same_as(*part.marginal))
    throw IncomparableMarginalsError("partition uses a different marginal");
  std::vector<Cell> fc;
  for (const auto& f : mu.fibres()) fc.push_back(f.cell);
  const auto ov = overlap_cells(mu.marginal(), part.cells, fc);
  std::vector<std::vector<const DiscreteMeasure*>> parts(part.size());
  std::vector<std::vector<double>> lams(part.size());
  for (const auto& o : ov) {
    parts[o.first].push_back(&mu.fibres()[o.second].law);
    lams[o.first].push_back(o.mass);
  }
  std::vector<DiscreteMeasure> laws;
  laws.reserve(part.size());
  for (std::size_t i = 0; i < part.size(); ++i) {
    if (parts[i].empty())
      throw DegenerateCellError("partition cell " + std::to_string(i) +
                                " carries no mass");
    laws.push_back(DiscreteMeasure::mixture(parts[i], lams[i]));
  }
  return FibredMeasure::on_partition(part, std::move(laws));
}

DiscreteMeasure space_marginal(const FibredMeasure& mu) {
  std::vector<double> coords;
  std::vector<double> weights;
  for (const auto& f : mu.fibres()) {
    coords.insert(coords.end(), f.law.coords().begin(), f.law.coords().end());
    for (double w : f.law.weights()) weights.push_back(f.weight * w);
  }
  return DiscreteMeasure::normalised(mu.dim(), std::move(coords),
                                     std::move(weights))
      .merged();
}

std::vector<CellBarycentre> barycentres(const FibredMeasure& mu) {
  std::vector<CellBarycentre> out;
  out.reserve(mu.fibres().size());
  for (const auto& f : mu.fibres())
    out.push_back(CellBarycentre{f.cell, f.law.barycentre()});
  return out;
}

FibredMeasure push_forward(
    const FibredMeasure& mu,
    const std::function<void(const Cell&, std::span<const double>,
                             std::span<double>)>& map) {
  std::vector<Fibre> fibres;
  fibres.reserve(mu.fibres().size());
  const auto d = static_cast<std::size_t>(mu.dim());
  for (const auto& f : mu.fibres()) {
    std::vector<double> coords(f.law.coords().size());
    for (std::size_t j = 0; j < f.law.size(); ++j)
      map(f.cell, f.law.point(j), std::span<double>(coords.data() + j * d, d));
    fibres.push_back(
        Fibre{f.cell, f.weight,
              DiscreteMeasure::normalised(mu.dim(), std::move(coords),
                                          f.law.weights())
                  .merged()});
  }
  return FibredMeasure(mu.marginal_ptr(), mu.dim(), std::move(fibres));
}

}  // namespace fibred
