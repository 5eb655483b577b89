#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fibred/analysis.hpp"
#include "fibred/dynamics.hpp"
#include "fibred/fields.hpp"
#include "fibred/io.hpp"
#include "fibred/measures.hpp"

namespace fibred {

/// A model built from its config entry, with what the analysis needs.
struct Model {
  FieldPtr field;
  /// Kernel and sup|Psi| on B(0, 2R)^2 for kernel models, used for the
  /// variation of the field map.
  std::optional<LabelKernel> kernel;
  std::function<double(double R)> psi_sup;
};

/// "model": {"type": "graphon" | "kuramoto" | "mm" | "leader_follower" |
/// "linear" | "zero" | "local_step", ...}; an optional "growth": {"m", "L"}
/// overrides the declared profile.
Model model_from_json(const json& j, const LabelMarginal& pi);

LabelKernel kernel_from_json(const json& j);
LabelFunction function_from_json(const json& j);

/// "initial": {"file": path} (relative to the config directory),
/// {"type": "product", "points": [[...]], "weights": [...]} or
/// {"type": "affine", "cells": K, "points": P, "center": [...],
///  "slope": [...], "spread": [...]}: on cell k with label midpoint w the
/// fibre is uniform on center + slope * w + spread * u, u in [-1/2, 1/2].
FibredMeasure initial_from_json(const json& j, MarginalPtr pi, int dim,
                                const std::string& base_dir);

struct SweepSpec {
  std::vector<int> n;
  std::vector<int> m;  // resolved per n
};

struct ReferenceSpec {
  int n_ref = 64;
  int m_ref = 4096;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::string base_dir = ".";
  json model;
  MarginalPtr marginal;
  json initial;
  double T = 1.0;
  int steps = 200;
  Integrator integrator = Integrator::rk4;
  int record_every = 1;
  int p = 1;
  int n = 8;
  int m = 8;
  SweepSpec sweep;
  std::vector<std::uint64_t> seeds{1};
  std::optional<ReferenceSpec> reference;
  std::vector<int> calibration_sizes{100, 1000, 10000};
  int calibration_seeds = 20;
  std::uint64_t seed = 42;
  json validate;

  TimeGrid grid() const { return {T, steps}; }
};

/// Throws ValidationError on malformed or inconsistent configs.
ExperimentConfig config_from_json(const json& j, const std::string& base_dir);
ExperimentConfig read_config(const std::string& path);

/// Each returns the process exit code and writes its files under `out_dir`.
int run_simulate(const ExperimentConfig& cfg, const std::string& out_dir,
                 std::ostream& log);
int run_converge(const ExperimentConfig& cfg, const std::string& out_dir,
                 std::ostream& log);
int run_validate(const ExperimentConfig& cfg, const std::string& out_dir,
                 std::ostream& log);

/// sup over the recorded nodes of W_{pi,1} between a particle run and a
/// stored reference run, both on the same recorded steps.
double sup_fibred_w1(const MeasureCurve& run, const MeasureCurve& reference);

}  // namespace fibred
