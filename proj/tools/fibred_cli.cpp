#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <utility>

#include "CLI11.hpp"

#ifdef FIBRED_HAS_OPENMP
#include <omp.h>
#endif

#include "fibred/error.hpp"
#include "fibred/experiment.hpp"
#include "fibred/io.hpp"
#include "fibred/transport.hpp"

namespace {

using namespace fibred;

int cmd_metric(const std::string& a_path, const std::string& b_path, int p,
               const std::string& metric, bool plan) {
  const FibredMeasure a = read_measure(a_path);
  const FibredMeasure b = read_measure(b_path);
  if (a.dim() != b.dim()) throw ValidationError("measures have different dimensions");
  if (metric == "classical") {
    if (plan) throw ValidationError("--plan is only available for the fibred metric");
    std::cout << format_number(classical_w_product(a, b, p)) << '\n';
    return 0;
  }
  const double d = fibred_w(a, b, p);
  std::cout << format_number(d) << '\n';
  if (plan) {
    json cells = json::array();
    for (const auto& o : common_refinement(a, b)) {
      const auto r = w_discrete(a.fibres()[o.first].law, b.fibres()[o.second].law, p);
      json entry = plan_to_json(r);
      entry["cell"] = {o.cell.lo, o.cell.hi};
      entry["mass"] = o.mass;
      cells.push_back(std::move(entry));
    }
    std::cout << json({{"distance", d}, {"p", p}, {"cells", cells}}).dump(2) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fibred Wasserstein metrics and particle approximations"};
  app.require_subcommand(1);
  app.fallthrough();

  int threads = 0;
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out_dir = "out";
  app.add_option("--threads", threads, "OpenMP threads (0 keeps the default)");

  auto* metric = app.add_subcommand("metric", "Distance between two measure files");
  std::string file_a, file_b, metric_name = "fibred";
  int p = 1;
  bool plan = false;
  metric->add_option("file_a", file_a)->required();
  metric->add_option("file_b", file_b)->required();
  metric->add_option("--p", p)->check(CLI::IsMember({1, 2}));
  metric->add_option("--metric", metric_name)
      ->check(CLI::IsMember({"fibred", "classical"}));
  metric->add_flag("--plan", plan, "Print the per-cell transport plans as JSON");

  std::string mode;
  const std::pair<const char*, const char*> runs[] = {
      {"simulate", "Particle solve: trajectory.csv, curve.json, barycentre.csv"},
      {"converge", "Sweep over (n, seed) against a high-resolution reference"},
      {"validate", "Check hypotheses and a-priori bounds along a solve"}};
  for (const auto& [name, help] : runs) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "Experiment JSON")->required();
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--seed", seed, "Overrides the config seed");
    sub->callback([&mode, name] { mode = name; });
  }
  metric->callback([&mode] { mode = "metric"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

#ifdef FIBRED_HAS_OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#endif

  try {
    if (mode == "metric") return cmd_metric(file_a, file_b, p, metric_name, plan);
    ExperimentConfig cfg = read_config(config);
    if (seed) cfg.seed = *seed;
    if (mode == "simulate") return run_simulate(cfg, out_dir, std::cout);
    if (mode == "converge") return run_converge(cfg, out_dir, std::cout);
    return run_validate(cfg, out_dir, std::cout);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
