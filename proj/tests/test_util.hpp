#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "fibred/discretize.hpp"
#include "fibred/measures.hpp"

namespace fibred::test_util {

inline std::vector<double> normal_coords(std::mt19937_64& rng, std::size_t count,
                                         double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  std::vector<double> c(count);
  for (double& x : c) x = g(rng);
  return c;
}

inline DiscreteMeasure random_uniform(std::mt19937_64& rng, int dim, int n) {
  return DiscreteMeasure::uniform(
      dim, normal_coords(rng, static_cast<std::size_t>(dim * n)));
}

inline DiscreteMeasure random_weighted(std::mt19937_64& rng, int dim, int n) {
  std::uniform_real_distribution<double> u(0.1, 1.0);
  std::vector<double> w(static_cast<std::size_t>(n));
  for (double& x : w) x = u(rng);
  return DiscreteMeasure::normalised(
      dim, normal_coords(rng, static_cast<std::size_t>(dim * n)), std::move(w));
}

/// Piecewise constant on `label_partition(pi, cells)` with random fibres.
inline FibredMeasure random_fibred(std::mt19937_64& rng, MarginalPtr pi,
                                   int cells, int dim, int points) {
  const Partition part = label_partition(std::move(pi), cells);
  std::vector<DiscreteMeasure> laws;
  for (std::size_t k = 0; k < part.size(); ++k)
    laws.push_back(random_weighted(rng, dim, points));
  return FibredMeasure::on_partition(part, std::move(laws));
}

inline double euclid(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

/// min over permutations of (1/n sum |x_i - y_sigma(i)|^p)^{1/p}; equal-size
/// uniform measures only.
inline double brute_force_w(const DiscreteMeasure& a, const DiscreteMeasure& b,
                            int p) {
  std::vector<std::size_t> perm(a.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = INFINITY;
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i)
      s += std::pow(euclid(a.point(i), b.point(perm[i])), p);
    best = std::min(best, s / static_cast<double>(perm.size()));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return std::pow(best, 1.0 / p);
}

}  // namespace fibred::test_util
