#include "fibred/discretize.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "fibred/error.hpp"
#include "fibred/transport.hpp"

namespace fibred {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void push_equal_mass(const LabelMarginal& pi, double lo, double hi, int n,
                     Partition& out) {
  const double u0 = pi.cdf(lo);
  const double u1 = pi.cdf(hi);
  double prev = lo;
  for (int i = 1; i <= n; ++i) {
    const double next =
        i == n ? hi : pi.quantile(u0 + (u1 - u0) * static_cast<double>(i) / n);
    const Cell c = Cell::interval(prev, next);
    out.cells.push_back(c);
    out.masses.push_back(pi.mass(c));
    prev = next;
  }
}

}  // namespace

std::uint64_t cell_seed(std::uint64_t seed, std::uint64_t cell) {
  return seed ^ splitmix64(cell);
}

Partition equipartition(MarginalPtr pi, int N) {
  if (!pi->nonatomic())
    throw NonatomicRequiredError("equipartition requires a nonatomic marginal");
  return label_partition(std::move(pi), N);
}

Partition label_partition(MarginalPtr pi, int n) {
  if (n < 1) throw ValidationError("partition size must be positive");
  Partition p;
  p.marginal = pi;
  if (pi->continuous_mass() > 0.0) push_equal_mass(*pi, 0.0, 1.0, n, p);
  for (const auto& a : pi->atoms()) {
    p.cells.push_back(Cell::at(a.omega));
    p.masses.push_back(a.weight);
  }
  // keep cells ordered by position
  std::vector<std::size_t> order(p.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return cell_less(p.cells[a], p.cells[b]);
  });
  Partition sorted;
  sorted.marginal = pi;
  for (std::size_t i : order) {
    sorted.cells.push_back(p.cells[i]);
    sorted.masses.push_back(p.masses[i]);
  }
  return sorted;
}

Partition refine(const Partition& coarse, int m) {
  if (m < 1) throw ValidationError("refinement factor must be positive");
  Partition fine;
  fine.marginal = coarse.marginal;
  fine.cells.reserve(coarse.size() * static_cast<std::size_t>(m));
  fine.masses.reserve(coarse.size() * static_cast<std::size_t>(m));
  for (std::size_t k = 0; k < coarse.size(); ++k) {
    const Cell& c = coarse.cells[k];
    if (c.atom) {
      for (int l = 0; l < m; ++l) {
        fine.cells.push_back(c);
        fine.masses.push_back(coarse.masses[k] / m);
      }
    } else {
      push_equal_mass(*coarse.marginal, c.lo, c.hi, m, fine);
    }
  }
  return fine;
}

Partition coarsen(const Partition& fine, int m) {
  if (m < 1 || fine.size() % static_cast<std::size_t>(m) != 0)
    throw ValidationError("partition size is not a multiple of the factor");
  Partition coarse;
  coarse.marginal = fine.marginal;
  const auto mm = static_cast<std::size_t>(m);
  for (std::size_t k = 0; k < fine.size() / mm; ++k) {
    const Cell& first = fine.cells[k * mm];
    const Cell& last = fine.cells[k * mm + mm - 1];
    double mass = 0.0;
    for (std::size_t l = 0; l < mm; ++l) mass += fine.masses[k * mm + l];
    coarse.cells.push_back(first.atom ? first
                                      : Cell::interval(first.lo, last.hi));
    coarse.masses.push_back(mass);
  }
  return coarse;
}

AveragedField average_field(const VectorField& v, const Partition& part,
                            int q) {
  if (q < 1) throw ValidationError("quadrature needs at least one node");
  const LabelMarginal& pi = *part.marginal;
  const auto breaks = v.label_breaks();
  AveragedField avg;
  avg.offset.reserve(part.size() + 1);
  for (const Cell& c : part.cells) {
    avg.offset.push_back(avg.nodes.size());
    if (c.atom) {
      avg.nodes.push_back(c.lo);
      avg.weights.push_back(1.0);
    } else if (breaks) {
      const auto pieces = split_by_breaks(pi, c, *breaks);
      double total = 0.0;
      for (const auto& p : pieces) total += p.mass;
      if (!(total > 0.0)) throw DegenerateCellError("cell has zero mass");
      for (const auto& p : pieces) {
        avg.nodes.push_back(quantile_nodes(pi, p.cell, 1).front());
        avg.weights.push_back(p.mass / total);
      }
    } else {
      for (double w : quantile_nodes(pi, c, q)) {
        avg.nodes.push_back(w);
        avg.weights.push_back(1.0 / q);
      }
    }
  }
  avg.offset.push_back(avg.nodes.size());
  return avg;
}

void eval_averaged(const VectorField& v, const FieldState& state,
                   const AveragedField& avg, std::size_t i,
                   std::span<const double> x, std::span<double> out) {
  const std::size_t b = avg.offset[i];
  const std::size_t e = avg.offset[i + 1];
  if (e - b == 1) {
    v.eval(state, avg.nodes[b], x, out);
    return;
  }
  double tmp[16];
  std::vector<double> heap;
  std::span<double> t;
  if (out.size() <= 16) {
    t = std::span<double>(tmp, out.size());
  } else {
    heap.resize(out.size());
    t = heap;
  }
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t l = b; l < e; ++l) {
    v.eval(state, avg.nodes[l], x, t);
    for (std::size_t c = 0; c < out.size(); ++c) out[c] += avg.weights[l] * t[c];
  }
}

ParticleSample sample_initial(const FibredMeasure& mu0, const Partition& coarse,
                              int m, std::uint64_t seed) {
  if (m < 1) throw ValidationError("need at least one particle per cell");
  if (!mu0.marginal().same_as(*coarse.marginal))
    throw IncomparableMarginalsError("partition uses a different marginal");
  std::vector<Cell> fc;
  for (const auto& f : mu0.fibres()) fc.push_back(f.cell);
  const auto ov = overlap_cells(mu0.marginal(), coarse.cells, fc);
  std::vector<std::vector<std::pair<std::size_t, double>>> pick(coarse.size());
  for (const auto& o : ov) pick[o.first].emplace_back(o.second, o.mass);
  for (std::size_t k = 0; k < coarse.size(); ++k)
    if (pick[k].empty())
      throw DegenerateCellError("coarse cell carries no initial mass");

  // cumulative point weights per fibre
  std::vector<std::vector<double>> cum(mu0.fibres().size());
  for (std::size_t f = 0; f < cum.size(); ++f) {
    double s = 0.0;
    for (double w : mu0.fibres()[f].law.weights()) cum[f].push_back(s += w);
  }

  const int d = mu0.dim();
  const auto mm = static_cast<std::size_t>(m);
  ParticleSample out;
  out.dim = d;
  out.per_cell = mm;
  out.x.resize(coarse.size() * mm * static_cast<std::size_t>(d));
  out.cell.resize(coarse.size() * mm);
  const auto cells = static_cast<std::ptrdiff_t>(coarse.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t kk = 0; kk < cells; ++kk) {
    const auto k = static_cast<std::size_t>(kk);
    std::mt19937_64 rng(cell_seed(seed, k));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto& choices = pick[k];
    double total = 0.0;
    for (const auto& c : choices) total += c.second;
    for (std::size_t l = 0; l < mm; ++l) {
      double u = unit(rng) * total;
      std::size_t f = choices.back().first;
      for (const auto& c : choices) {
        if (u < c.second) {
          f = c.first;
          break;
        }
        u -= c.second;
      }
      const auto& cw = cum[f];
      const double v = unit(rng) * cw.back();
      auto j = static_cast<std::size_t>(
          std::upper_bound(cw.begin(), cw.end(), v) - cw.begin());
      j = std::min(j, cw.size() - 1);
      const auto p = mu0.fibres()[f].law.point(j);
      const std::size_t i = k * mm + l;
      std::copy(p.begin(), p.end(),
                out.x.begin() + static_cast<std::ptrdiff_t>(i * p.size()));
      out.cell[i] = k;
    }
  }
  return out;
}

double total_variation(std::span<const double> values) {
  double s = 0.0;
  for (std::size_t i = 1; i < values.size(); ++i)
    s += std::abs(values[i] - values[i - 1]);
  return s;
}

double total_variation(
    std::size_t count,
    const std::function<double(std::size_t, std::size_t)>& dist) {
  double s = 0.0;
  for (std::size_t i = 1; i < count; ++i) s += dist(i - 1, i);
  return s;
}

double fibre_variation(const FibredMeasure& mu) {
  std::vector<const DiscreteMeasure*> laws;
  for (const auto& f : mu.fibres())
    if (!f.cell.atom) laws.push_back(&f.law);
  return total_variation(laws.size(), [&](std::size_t a, std::size_t b) {
    return mu.dim() == 1 ? w_1d(*laws[a], *laws[b], 1)
                         : w_discrete(*laws[a], *laws[b], 1).distance;
  });
}

}  // namespace fibred
