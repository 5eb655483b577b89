#include "fibred/particle_kernels.hpp"

namespace fibred {

MeasureView particle_view(const Partition& coarse, int dim,
                          std::size_t per_cell, std::span<const double> x) {
  MeasureView v;
  v.marginal = coarse.marginal.get();
  v.dim = dim;
  v.fibres.reserve(coarse.size());
  const std::size_t stride = per_cell * static_cast<std::size_t>(dim);
  for (std::size_t k = 0; k < coarse.size(); ++k)
    v.fibres.push_back(FibreView{coarse.cells[k], coarse.masses[k],
                                 x.subspan(k * stride, stride), {}});
  return v;
}

void particle_velocities_serial(const VectorField& v, const FieldState& state,
                                const AveragedField& avg,
                                std::span<const std::size_t> field_cell,
                                int dim, std::span<const double> x,
                                std::span<double> out) {
  const auto d = static_cast<std::size_t>(dim);
  for (std::size_t i = 0; i < field_cell.size(); ++i)
    eval_averaged(v, state, avg, field_cell[i], x.subspan(i * d, d),
                  out.subspan(i * d, d));
}

void particle_velocities(const VectorField& v, const FieldState& state,
                         const AveragedField& avg,
                         std::span<const std::size_t> field_cell, int dim,
                         std::span<const double> x, std::span<double> out) {
  const auto d = static_cast<std::size_t>(dim);
  const auto n = static_cast<std::ptrdiff_t>(field_cell.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    eval_averaged(v, state, avg, field_cell[i], x.subspan(i * d, d),
                  out.subspan(i * d, d));
  }
}

}  // namespace fibred
