#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "fibred/discretize.hpp"
#include "fibred/fields.hpp"
#include "fibred/particle_kernels.hpp"
#include "fibred/transport.hpp"

namespace {

using namespace fibred;

struct VelocitySetup {
  FieldPtr field;
  Partition coarse;
  Partition fine;
  AveragedField avg;
  std::vector<std::size_t> cells;
  std::vector<double> x;
  std::vector<double> out;
  std::size_t per_cell = 0;

  VelocitySetup(int n, int m, bool kuramoto) {
    auto pi = make_marginal(LabelMarginal::uniform());
    const LabelKernel w = LabelKernel::closed_form(
        [](double a, double b) { return 1.0 - std::max(a, b); }, 1.0);
    field = kuramoto ? kuramoto_field(1.0, w)
                     : graphon_field(w, difference_interaction(1.0), 1);
    coarse = label_partition(pi, n);
    fine = refine(coarse, m);
    avg = average_field(*field, fine);
    per_cell = static_cast<std::size_t>(m);
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g;
    for (std::size_t i = 0; i < fine.size(); ++i) {
      cells.push_back(i);
      x.push_back(g(rng));
    }
    out.resize(x.size());
  }
};

template <bool Parallel>
void velocities(benchmark::State& st) {
  VelocitySetup s(static_cast<int>(st.range(0)), static_cast<int>(st.range(1)),
                  st.range(2) != 0);
  const auto view = particle_view(s.coarse, 1, s.per_cell, s.x);
  const auto state = s.field->prepare(0.0, view);
  for (auto _ : st) {
    if constexpr (Parallel)
      particle_velocities(*s.field, *state, s.avg, s.cells, 1, s.x, s.out);
    else
      particle_velocities_serial(*s.field, *state, s.avg, s.cells, 1, s.x, s.out);
    benchmark::DoNotOptimize(s.out.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<int64_t>(s.x.size()));
}

FibredMeasure random_measure(MarginalPtr pi, int cells, int points,
                             std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  const Partition part = label_partition(pi, cells);
  std::vector<DiscreteMeasure> laws;
  for (int k = 0; k < cells; ++k) {
    std::vector<double> c;
    for (int j = 0; j < points; ++j) c.push_back(g(rng));
    laws.push_back(DiscreteMeasure::uniform(1, std::move(c)));
  }
  return FibredMeasure::on_partition(part, std::move(laws));
}

template <bool Parallel>
void fibred_distance(benchmark::State& st) {
  auto pi = make_marginal(LabelMarginal::uniform());
  const int cells = static_cast<int>(st.range(0));
  const int points = static_cast<int>(st.range(1));
  const FibredMeasure a = random_measure(pi, cells, points, 1);
  const FibredMeasure b = random_measure(pi, cells, points, 2);
  for (auto _ : st) {
    const double d = Parallel ? fibred_w(a, b, 2) : fibred_w_serial(a, b, 2);
    benchmark::DoNotOptimize(d);
  }
}

}  // namespace

BENCHMARK(velocities<false>)->Args({32, 1024, 0})->Args({32, 1024, 1});
BENCHMARK(velocities<true>)->Args({32, 1024, 0})->Args({32, 1024, 1});
BENCHMARK(fibred_distance<false>)->Args({256, 256});
BENCHMARK(fibred_distance<true>)->Args({256, 256});

BENCHMARK_MAIN();
