#pragma once

#include <cstddef>
#include <span>

#include "fibred/discretize.hpp"
#include "fibred/fields.hpp"
#include "fibred/measures.hpp"

namespace fibred {

/// Empirical fibred view of particle states: coarse cell k carries the
/// uniform law of particles k * per_cell .. (k + 1) * per_cell - 1.
MeasureView particle_view(const Partition& coarse, int dim,
                          std::size_t per_cell, std::span<const double> x);

/// out_i = averaged field of cell `field_cell[i]` evaluated at x_i.
void particle_velocities(const VectorField& v, const FieldState& state,
                         const AveragedField& avg,
                         std::span<const std::size_t> field_cell, int dim,
                         std::span<const double> x, std::span<double> out);

/// Single-threaded reference for `particle_velocities`.
void particle_velocities_serial(const VectorField& v, const FieldState& state,
                                const AveragedField& avg,
                                std::span<const std::size_t> field_cell,
                                int dim, std::span<const double> x,
                                std::span<double> out);

}  // namespace fibred
