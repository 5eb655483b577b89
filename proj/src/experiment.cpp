#include "fibred/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>

#include "fibred/discretize.hpp"
#include "fibred/error.hpp"
#include "fibred/transport.hpp"

namespace fibred {

namespace {

template <class F>
auto guarded(const std::string& what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ValidationError(what + ": " + e.what());
  }
}

std::vector<double> flat_values(const json& j) {
  std::vector<double> out;
  for (const auto& v : j) {
    if (v.is_array())
      for (const auto& x : v) out.push_back(x.get<double>());
    else
      out.push_back(v.get<double>());
  }
  return out;
}

double vec_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

FieldPtr with_growth(FieldPtr f, const json& j) {
  if (!j.contains("growth")) return f;
  const auto& g = j.at("growth");
  auto mut = std::const_pointer_cast<VectorField>(f);
  mut->set_growth(GrowthProfile::constant(g.at("m").get<double>(),
                                          g.at("L").get<double>()));
  return f;
}

std::filesystem::path out_path(const std::string& dir, const char* file) {
  return std::filesystem::path(dir) / file;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ValidationError("cannot create output directory '" + dir + "'");
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw ValidationError("cannot write '" + p.string() + "'");
  return out;
}

SolveOptions solve_options(const ExperimentConfig& cfg, bool store) {
  SolveOptions o;
  o.integrator = cfg.integrator;
  o.record_every = cfg.record_every;
  o.store = store;
  return o;
}

struct Pipeline {
  Partition coarse;
  Partition fine;
  ParticleSample x0;
};

Pipeline build_pipeline(const FibredMeasure& mu0, MarginalPtr pi, int n, int m,
                        std::uint64_t seed) {
  Pipeline p;
  p.coarse = label_partition(std::move(pi), n);
  p.fine = refine(p.coarse, m);
  p.x0 = sample_initial(mu0, p.coarse, m, seed);
  return p;
}

}  // namespace

LabelKernel kernel_from_json(const json& j) {
  return guarded("invalid kernel", [&] {
    if (j.is_number()) return LabelKernel::constant(j.get<double>());
    const std::string type = j.at("type").get<std::string>();
    if (type == "constant") return LabelKernel::constant(j.at("value").get<double>());
    if (type == "step")
      return LabelKernel::step(j.at("breaks").get<std::vector<double>>(),
                               flat_values(j.at("values")));
    if (type == "formula") {
      const std::string name = j.at("name").get<std::string>();
      const double c = j.value("scale", 1.0);
      if (name == "exp_diff")
        return LabelKernel::closed_form(
            [c](double w, double t) { return c * std::exp(-std::abs(w - t)); },
            std::abs(c));
      if (name == "one_minus_max")
        return LabelKernel::closed_form(
            [c](double w, double t) { return c * (1.0 - std::max(w, t)); },
            std::abs(c));
      if (name == "product")
        return LabelKernel::closed_form(
            [c](double w, double t) { return c * w * t; }, std::abs(c));
      if (name == "cos_diff")
        return LabelKernel::closed_form(
            [c](double w, double t) {
              return 0.5 * c * (1.0 + std::cos(2.0 * std::numbers::pi * (w - t)));
            },
            std::abs(c));
      throw ValidationError("unknown kernel formula '" + name + "'");
    }
    throw ValidationError("unknown kernel type '" + type + "'");
  });
}

LabelFunction function_from_json(const json& j) {
  return guarded("invalid label function", [&] {
    if (j.is_number()) return LabelFunction::constant(j.get<double>());
    const std::string type = j.at("type").get<std::string>();
    if (type == "constant")
      return LabelFunction::constant(j.at("value").get<double>());
    if (type == "step")
      return LabelFunction::step(j.at("breaks").get<std::vector<double>>(),
                                 j.at("values").get<std::vector<double>>());
    if (type == "affine") {
      const double a = j.at("a").get<double>();
      const double b = j.at("b").get<double>();
      return LabelFunction::closed_form([a, b](double w) { return a + b * w; },
                                        std::min(a, a + b), std::max(a, a + b));
    }
    throw ValidationError("unknown label function type '" + type + "'");
  });
}

Model model_from_json(const json& j, const LabelMarginal& pi) {
  return guarded("invalid model", [&] {
    const std::string type = j.at("type").get<std::string>();
    Model model;
    if (type == "graphon") {
      const int dim = j.value("dim", 1);
      const auto& in = j.at("interaction");
      const std::string it = in.at("type").get<std::string>();
      PairInteraction psi;
      if (it == "difference") {
        const double c = in.at("c").get<double>();
        psi = difference_interaction(c);
        model.psi_sup = [c](double R) { return std::abs(c) * 4.0 * R; };
      } else if (it == "sine") {
        if (dim != 1) throw ValidationError("sine interaction needs dim 1");
        const double K = in.at("K").get<double>();
        psi = sine_interaction(K);
        model.psi_sup = [K](double) { return std::abs(K); };
      } else if (it == "constant") {
        const auto c = in.at("value").get<std::vector<double>>();
        if (c.size() != static_cast<std::size_t>(dim))
          throw ValidationError("constant interaction has the wrong dimension");
        const double s = vec_norm(c);
        psi = constant_interaction(c);
        model.psi_sup = [s](double) { return s; };
      } else {
        throw ValidationError("unknown interaction type '" + it + "'");
      }
      model.kernel = kernel_from_json(j.at("kernel"));
      model.field = graphon_field(*model.kernel, psi, dim);
    } else if (type == "kuramoto") {
      const double K = j.at("K").get<double>();
      model.kernel = kernel_from_json(j.at("kernel"));
      model.psi_sup = [K](double) { return std::abs(K); };
      model.field = kuramoto_field(K, *model.kernel);
    } else if (type == "mm") {
      MichaelisMentenParams p;
      if (j.contains("alpha")) p.alpha = kernel_from_json(j.at("alpha"));
      if (j.contains("k")) p.k = kernel_from_json(j.at("k"));
      if (j.contains("beta")) p.beta = function_from_json(j.at("beta"));
      if (j.contains("g")) p.g = function_from_json(j.at("g"));
      if (j.contains("a")) p.a = function_from_json(j.at("a"));
      p.strict = j.value("strict", true);
      model.field = michaelis_menten_field(std::move(p));
    } else if (type == "leader_follower") {
      LeaderFollowerParams p;
      p.dim = j.value("dim", 1);
      p.A = j.value("A", std::vector<double>{});
      p.b = j.value("b", std::vector<double>{});
      p.kappa = j.value("kappa", 1.0);
      if (j.contains("controls"))
        for (const auto& c : j.at("controls"))
          p.controls.emplace_back(c.at("omega").get<double>(),
                                  c.at("u").get<std::vector<double>>());
      for (const auto& [omega, u] : p.controls)
        if (!(pi.atom_weight(omega) > 0.0))
          throw ValidationError("control placed at a label that is not an atom");
      model.field = leader_follower_field(std::move(p));
    } else if (type == "linear") {
      model.field = linear_field(kernel_from_json(j.at("a")),
                                 kernel_from_json(j.at("b")), j.value("dim", 1));
    } else if (type == "zero") {
      model.field = zero_field(j.value("dim", 1));
    } else if (type == "local_step") {
      const int dim = j.value("dim", 1);
      auto breaks = j.at("breaks").get<std::vector<double>>();
      const auto values = j.at("values").get<std::vector<std::vector<double>>>();
      if (values.size() + 1 != breaks.size())
        throw ValidationError("local_step needs one value per block");
      double m = 0.0;
      for (const auto& v : values) {
        if (v.size() != static_cast<std::size_t>(dim))
          throw ValidationError("local_step value has the wrong dimension");
        m = std::max(m, vec_norm(v));
      }
      const LabelKernel blocks = LabelKernel::step(
          breaks, std::vector<double>(values.size() * values.size(), 0.0));
      model.field = local_field(
          dim,
          [values, blocks](double, double omega, std::span<const double>,
                           std::span<double> out) {
            const auto& v = values[blocks.block_of(omega)];
            std::copy(v.begin(), v.end(), out.begin());
          },
          GrowthProfile::constant(m, 0.0), std::move(breaks));
    } else {
      throw ValidationError("unknown model type '" + type + "'");
    }
    model.field = with_growth(model.field, j);
    return model;
  });
}

FibredMeasure initial_from_json(const json& j, MarginalPtr pi, int dim,
                                const std::string& base_dir) {
  return guarded("invalid initial measure", [&] {
    if (j.contains("file")) {
      std::filesystem::path p(j.at("file").get<std::string>());
      if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
      FibredMeasure mu = read_measure(p.string());
      if (!mu.marginal().same_as(*pi))
        throw IncomparableMarginalsError(
            "initial measure uses a different marginal than the config");
      if (mu.dim() != dim)
        throw ValidationError("initial measure dimension differs from the model");
      return mu;
    }
    const std::string type = j.at("type").get<std::string>();
    if (type == "product") {
      std::vector<double> coords;
      for (const auto& p : j.at("points")) {
        const auto x = p.get<std::vector<double>>();
        if (x.size() != static_cast<std::size_t>(dim))
          throw ValidationError("initial point has the wrong dimension");
        coords.insert(coords.end(), x.begin(), x.end());
      }
      const auto n = coords.size() / static_cast<std::size_t>(dim);
      std::vector<double> w = j.value(
          "weights", std::vector<double>(n, 1.0 / static_cast<double>(n)));
      return FibredMeasure::product(
          pi, DiscreteMeasure(dim, std::move(coords), std::move(w)));
    }
    if (type == "affine") {
      const int K = j.at("cells").get<int>();
      const int P = j.at("points").get<int>();
      if (K < 1 || P < 1) throw ValidationError("affine datum needs cells, points >= 1");
      const auto d = static_cast<std::size_t>(dim);
      const auto center = j.value("center", std::vector<double>(d, 0.0));
      const auto slope = j.value("slope", std::vector<double>(d, 0.0));
      const auto spread = j.value("spread", std::vector<double>(d, 0.0));
      if (center.size() != d || slope.size() != d || spread.size() != d)
        throw ValidationError("affine datum vectors must have length dim");
      const Partition part = label_partition(pi, K);
      std::vector<DiscreteMeasure> laws;
      for (const Cell& c : part.cells) {
        const double w = quantile_nodes(*pi, c, 1).front();
        std::vector<double> coords;
        for (int i = 0; i < P; ++i) {
          const double u = (i + 0.5) / P - 0.5;
          for (std::size_t k = 0; k < d; ++k)
            coords.push_back(center[k] + slope[k] * w + spread[k] * u);
        }
        laws.push_back(DiscreteMeasure::uniform(dim, std::move(coords)).merged());
      }
      return FibredMeasure::on_partition(part, std::move(laws));
    }
    throw ValidationError("unknown initial measure type '" + type + "'");
  });
}

ExperimentConfig config_from_json(const json& j, const std::string& base_dir) {
  return guarded("invalid config", [&] {
    ExperimentConfig c;
    c.base_dir = base_dir;
    c.name = j.value("name", c.name);
    c.model = j.at("model");
    c.marginal = j.contains("marginal") ? marginal_from_json(j.at("marginal"))
                                        : make_marginal(LabelMarginal::uniform());
    c.initial = j.at("initial");
    c.T = j.value("T", c.T);
    c.steps = j.value("steps", c.steps);
    c.integrator = parse_integrator(j.value("integrator", std::string("rk4")));
    c.record_every = j.value("record_every", c.record_every);
    c.p = j.value("p", c.p);
    c.n = j.value("n", c.n);
    c.m = j.value("m", c.m);
    c.seed = j.value("seed", c.seed);
    check_grid(c.grid());
    if (c.record_every < 1) throw ValidationError("record_every must be positive");
    if (c.p != 1 && c.p != 2) throw ValidationError("p must be 1 or 2");
    if (c.n < 1 || c.m < 1) throw ValidationError("n and m must be positive");
    if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (c.seeds.empty()) throw ValidationError("seeds must not be empty");
    if (j.contains("sweep")) {
      const auto& s = j.at("sweep");
      c.sweep.n = s.at("n").get<std::vector<int>>();
      if (c.sweep.n.empty()) throw ValidationError("sweep needs at least one n");
      const auto& rule = s.at("m");
      if (rule.is_string()) {
        if (rule.get<std::string>() != "n_squared")
          throw ValidationError("unknown m rule '" + rule.get<std::string>() + "'");
        for (int n : c.sweep.n) c.sweep.m.push_back(n * n);
      } else {
        c.sweep.m = rule.get<std::vector<int>>();
        if (c.sweep.m.size() != c.sweep.n.size())
          throw ValidationError("sweep m list must match the n list");
      }
      for (std::size_t i = 0; i < c.sweep.n.size(); ++i)
        if (c.sweep.n[i] < 1 || c.sweep.m[i] < 1)
          throw ValidationError("sweep sizes must be positive");
    }
    if (j.contains("reference")) {
      const auto& r = j.at("reference");
      if (r.value("mode", std::string("high_res")) != "high_res")
        throw ValidationError("reference mode must be high_res");
      ReferenceSpec ref;
      ref.n_ref = r.at("n_ref").get<int>();
      ref.m_ref = r.value("m_ref", ref.n_ref * ref.n_ref);
      if (!c.sweep.n.empty() &&
          ref.n_ref < 4 * *std::max_element(c.sweep.n.begin(), c.sweep.n.end()))
        throw ValidationError("n_ref must be at least 4 * max(n)");
      if (ref.m_ref < 1) throw ValidationError("m_ref must be positive");
      c.reference = ref;
    }
    if (j.contains("calibration")) {
      const auto& cal = j.at("calibration");
      c.calibration_sizes = cal.value("sizes", c.calibration_sizes);
      c.calibration_seeds = cal.value("seeds", c.calibration_seeds);
    }
    if (j.contains("validate")) c.validate = j.at("validate");
    return c;
  });
}

ExperimentConfig read_config(const std::string& path) {
  const auto dir = std::filesystem::path(path).parent_path();
  return config_from_json(read_json(path), dir.empty() ? "." : dir.string());
}

double sup_fibred_w1(const MeasureCurve& run, const MeasureCurve& reference) {
  return curve_distance(run, reference, CurveMetric::fibred_w1).sup;
}

int run_simulate(const ExperimentConfig& cfg, const std::string& out_dir,
                 std::ostream& log) {
  const Model model = model_from_json(cfg.model, *cfg.marginal);
  const VectorField& v = *model.field;
  const FibredMeasure mu0 =
      initial_from_json(cfg.initial, cfg.marginal, v.dim(), cfg.base_dir);
  const Pipeline p = build_pipeline(mu0, cfg.marginal, cfg.n, cfg.m, cfg.seed);
  const TrajectoryEnsemble traj =
      solve_particles(v, p.fine, p.coarse, p.x0, cfg.grid(), solve_options(cfg, true));
  const MeasureCurve curve = empirical_curve(traj, p.coarse);

  ensure_dir(out_dir);
  {
    auto out = open_out(out_path(out_dir, "trajectory.csv"));
    write_trajectory_csv(out, traj);
  }
  write_json(out_path(out_dir, "curve.json").string(), curve_to_json(curve));
  {
    auto out = open_out(out_path(out_dir, "barycentre.csv"));
    out << "t";
    for (int c = 0; c < v.dim(); ++c) out << ",bary_" << c;
    out << '\n';
    for (std::size_t s = 0; s < curve.size(); ++s) {
      out << format_number(curve.times[s]);
      for (double x : space_marginal(curve.measures[s]).barycentre())
        out << ',' << format_number(x);
      out << '\n';
    }
  }
  log << "simulated " << traj.size() << " particles (" << v.name() << ") over "
      << cfg.steps << " steps; outputs in " << out_dir << '\n';
  return 0;
}

int run_converge(const ExperimentConfig& cfg, const std::string& out_dir,
                 std::ostream& log) {
  if (cfg.sweep.n.empty()) throw ValidationError("converge needs a sweep");
  if (!cfg.reference) throw ValidationError("converge needs a reference spec");
  const Model model = model_from_json(cfg.model, *cfg.marginal);
  const VectorField& v = *model.field;
  const FibredMeasure mu0 =
      initial_from_json(cfg.initial, cfg.marginal, v.dim(), cfg.base_dir);
  const auto clock = [] { return std::chrono::steady_clock::now(); };
  const auto seconds = [](auto a, auto b) {
    return std::chrono::duration<double>(b - a).count();
  };

  const ReferenceSpec ref = *cfg.reference;
  const auto t_ref = clock();
  const Pipeline rp = build_pipeline(mu0, cfg.marginal, ref.n_ref, ref.m_ref,
                                     cell_seed(cfg.seed, 0x5eedULL));
  const MeasureCurve reference = empirical_curve(
      solve_particles(v, rp.fine, rp.coarse, rp.x0, cfg.grid(),
                      solve_options(cfg, true)),
      rp.coarse);
  log << "reference n_ref=" << ref.n_ref << " m_ref=" << ref.m_ref << " done in "
      << format_number(seconds(t_ref, clock())) << " s\n";

  std::vector<ConvergenceRecord> records;
  for (std::size_t i = 0; i < cfg.sweep.n.size(); ++i) {
    const int n = cfg.sweep.n[i];
    const int m = cfg.sweep.m[i];
    for (std::uint64_t s : cfg.seeds) {
      const auto t0 = clock();
      const Pipeline p = build_pipeline(
          mu0, cfg.marginal, n, m,
          cell_seed(cfg.seed ^ s, (static_cast<std::uint64_t>(n) << 32) ^ s));
      const MeasureCurve curve = empirical_curve(
          solve_particles(v, p.fine, p.coarse, p.x0, cfg.grid(),
                          solve_options(cfg, true)),
          p.coarse);
      ConvergenceRecord r;
      r.n = n;
      r.m = m;
      r.N = n * m;
      r.seed = s;
      r.sup_t_error = sup_fibred_w1(curve, reference);
      r.runtime_seconds = seconds(t0, clock());
      records.push_back(r);
    }
    log << "n=" << n << " m=" << m << " done\n";
  }

  const double r0 = support_radius(mu0);
  const StabilityConstants k = stability_constants(v, r0, cfg.T);
  std::vector<DiscreteMeasure> targets;
  const int n_max = *std::max_element(cfg.sweep.n.begin(), cfg.sweep.n.end());
  const FibredMeasure avg =
      conditional_expectation(mu0, label_partition(cfg.marginal, n_max));
  const auto& fs = avg.fibres();
  const std::size_t stride = std::max<std::size_t>(1, fs.size() / 4);
  for (std::size_t f = 0; f < fs.size(); f += stride) targets.push_back(fs[f].law);
  double C_d = 0.0;
  if (v.dim() == 1 && r0 > 0.0)
    C_d = calibrate_C_d(targets, r0, cfg.calibration_sizes, cfg.calibration_seeds,
                        cell_seed(cfg.seed, 0xca1ULL));

  std::optional<double> var_V;
  if (model.kernel)
    var_V = kernel_field_variation(*model.kernel, *cfg.marginal,
                                   model.psi_sup(k.R_r), cfg.T);
  const double var_mu0 = fibre_variation(mu0);

  std::map<int, std::pair<double, int>> by_n;
  for (const auto& r : records) {
    by_n[r.N].first += r.sup_t_error;
    by_n[r.N].second += 1;
  }
  json bounds = json::array();
  bool ok = true;
  if (var_V) {
    for (const auto& [N, e] : by_n) {
      BoundReport b;
      b.name = "quantitative_bound_N" + std::to_string(N);
      b.t = cfg.T;
      b.lhs = e.first / e.second;
      b.rhs = quantitative_bound(var_mu0, *var_V, r0, v.dim(), N, k.D_r, C_d);
      ok = ok && b.pass();
      bounds.push_back(bound_to_json(b));
    }
  }

  json fit = nullptr;
  if (by_n.size() >= 4) {
    const FitResult f = fit_rate(records);
    fit = {{"slope", f.slope}, {"intercept", f.intercept}, {"residual", f.residual}};
  }

  ensure_dir(out_dir);
  {
    auto out = open_out(out_path(out_dir, "records.csv"));
    out << "N,n,m,seed,sup_t_error\n";
    for (const auto& r : records)
      out << r.N << ',' << r.n << ',' << r.m << ',' << r.seed << ','
          << format_number(r.sup_t_error) << '\n';
  }
  {
    auto out = open_out(out_path(out_dir, "timings.csv"));
    out << "N,n,m,seed,runtime_seconds\n";
    for (const auto& r : records)
      out << r.N << ',' << r.n << ',' << r.m << ',' << r.seed << ','
          << format_number(r.runtime_seconds) << '\n';
  }
  json recs = json::array();
  for (const auto& r : records)
    recs.push_back({{"N", r.N}, {"n", r.n}, {"m", r.m}, {"seed", r.seed},
                    {"sup_t_error", r.sup_t_error}});
  json summary = {
      {"experiment", cfg.name},
      {"reference", {{"mode", "high_res"}, {"n_ref", ref.n_ref}, {"m_ref", ref.m_ref}}},
      {"records", recs},
      {"fit", fit},
      {"bounds", bounds},
      {"constants",
       {{"R_r", k.R_r},
        {"C_T", k.C_T},
        {"D_r", k.D_r},
        {"C_d_fitted", C_d},
        {"var_mu0", var_mu0},
        {"var_V", var_V ? json(*var_V) : json(nullptr)}}}};
  write_json(out_path(out_dir, "summary.json").string(), summary);

  if (!fit.is_null())
    log << "fitted slope " << format_number(fit["slope"].get<double>()) << '\n';
  return ok ? 0 : 2;
}

int run_validate(const ExperimentConfig& cfg, const std::string& out_dir,
                 std::ostream& log) {
  const Model model = model_from_json(cfg.model, *cfg.marginal);
  const VectorField& v = *model.field;
  const FibredMeasure mu0 =
      initial_from_json(cfg.initial, cfg.marginal, v.dim(), cfg.base_dir);

  std::vector<BoundReport> reports;
  HypothesesSampling hs;
  hs.marginal = cfg.marginal;
  hs.t_max = cfg.T;
  hs.seed = cfg.seed;
  const HypothesesReport h = hypotheses_check(v, hs);
  reports.push_back({"growth_hypothesis", 0.0, h.growth_ratio, 1.0});
  reports.push_back({"lipschitz_hypothesis", 0.0, h.lipschitz_ratio, 1.0});

  const Pipeline p = build_pipeline(mu0, cfg.marginal, cfg.n, cfg.m, cfg.seed);
  const TrajectoryEnsemble traj =
      solve_particles(v, p.fine, p.coarse, p.x0, cfg.grid(), solve_options(cfg, true));
  for (auto& b : apriori_bounds(traj, v)) reports.push_back(std::move(b));

  if (cfg.validate.is_object() && cfg.validate.contains("pair")) {
    const FibredMeasure nu0 =
        initial_from_json(cfg.validate.at("pair"), cfg.marginal, v.dim(), cfg.base_dir);
    const MeasureCurve mu = flow_picard(v, mu0, cfg.grid()).curve;
    const MeasureCurve nu = flow_picard(v, nu0, cfg.grid()).curve;
    for (auto& b : stability_envelope(mu, nu, v, v)) reports.push_back(std::move(b));
  }

  ensure_dir(out_dir);
  auto out = open_out(out_path(out_dir, "bounds.csv"));
  out << "name,t,lhs,rhs,slack,pass\n";
  for (const auto& b : reports)
    out << b.name << ',' << format_number(b.t) << ',' << format_number(b.lhs) << ','
        << format_number(b.rhs) << ',' << format_number(b.slack()) << ','
        << (b.pass() ? 1 : 0) << '\n';

  std::vector<std::string> order;
  std::map<std::string, std::pair<int, const BoundReport*>> worst;
  bool ok = true;
  for (const auto& b : reports) {
    auto it = worst.find(b.name);
    if (it == worst.end()) {
      order.push_back(b.name);
      worst[b.name] = {1, &b};
    } else {
      it->second.first += 1;
      if (b.slack() < it->second.second->slack()) it->second.second = &b;
    }
    ok = ok && b.pass();
  }
  for (const auto& name : order) {
    const auto& [count, b] = worst[name];
    log << (b->pass() ? "PASS " : "FAIL ") << name << " nodes=" << count
        << " worst_slack=" << format_number(b->slack()) << " at t="
        << format_number(b->t) << '\n';
  }
  return ok ? 0 : 2;
}

}  // namespace fibred
