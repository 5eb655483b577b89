#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "fibred/error.hpp"
#include "fibred/experiment.hpp"
#include "fibred/io.hpp"
#include "test_util.hpp"

using namespace fibred;

TEST(Json, MarginalRoundTrip) {
  for (const auto& pi : {LabelMarginal::uniform(),
                         LabelMarginal::from_atoms({{0.2, 0.4}, {0.9, 0.6}}),
                         LabelMarginal::mixed({{0.5, 0.25}}, {0.0, 1.0})}) {
    const auto back = marginal_from_json(marginal_to_json(pi));
    EXPECT_TRUE(back->same_as(pi));
  }
  EXPECT_THROW(marginal_from_json(json{{"type", "gamma"}}), ValidationError);
}

TEST(Json, MeasureRoundTripPreservesDistances) {
  std::mt19937_64 rng(4);
  auto pi = make_marginal(LabelMarginal::mixed({{0.3, 0.2}}, {0.0, 1.0}));
  const auto mu = test_util::random_fibred(rng, pi, 3, 2, 3);
  const auto back = measure_from_json(measure_to_json(mu));
  EXPECT_EQ(fibred_w(mu, back, 2), 0.0);
  EXPECT_EQ(back.fibres().size(), mu.fibres().size());
}

TEST(Json, MalformedMeasuresAreValidationErrors) {
  json j = measure_to_json(FibredMeasure::product(
      make_marginal(LabelMarginal::uniform()), DiscreteMeasure::dirac(std::vector<double>{0.0})));
  j["fibres"][0]["weight"] = 0.7;
  EXPECT_THROW(measure_from_json(j), ValidationError);
  j.erase("fibres");
  EXPECT_THROW(measure_from_json(j), ValidationError);
}

TEST(Json, FormatNumberUsesTwelveDigits) {
  EXPECT_EQ(format_number(0.8), "0.8");
  EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333333");
}

TEST(Config, RejectsCoarseReference) {
  const json j = {{"model", {{"type", "zero"}, {"dim", 1}}},
                  {"initial", {{"type", "product"}, {"points", {{0.0}}}, {"weights", {1.0}}}},
                  {"sweep", {{"n", {4, 8}}, {"m", "n_squared"}}},
                  {"reference", {{"n_ref", 16}}}};
  EXPECT_THROW(config_from_json(j, "."), ValidationError);
  json ok = j;
  ok["reference"]["n_ref"] = 32;
  const auto cfg = config_from_json(ok, ".");
  EXPECT_EQ(cfg.sweep.m, (std::vector<int>{16, 64}));
  EXPECT_EQ(cfg.reference->m_ref, 1024);
}

TEST(Config, ModelCatalogue) {
  const auto pi = LabelMarginal::uniform();
  const json specs[] = {
      {{"type", "kuramoto"}, {"K", 1.0}, {"kernel", {{"type", "constant"}, {"value", 1.0}}}},
      {{"type", "linear"}, {"a", 0.0}, {"b", 0.5}, {"dim", 1}},
      {{"type", "zero"}, {"dim", 2}},
      {{"type", "local_step"}, {"dim", 1}, {"breaks", {0.0, 0.5, 1.0}}, {"values", {{0.0}, {1.0}}}}};
  for (const auto& s : specs) {
    const auto m = model_from_json(s, pi);
    ASSERT_TRUE(m.field) << s.dump();
  }
  EXPECT_THROW(model_from_json(json{{"type", "pressure"}}, pi), ValidationError);
}

TEST(Simulate, ZeroFieldIsDeterministicAndConstant) {
  const auto dir = std::filesystem::temp_directory_path() / "fibred_io_test";
  std::filesystem::remove_all(dir);
  const json j = {{"model", {{"type", "zero"}, {"dim", 1}}},
                  {"initial", {{"type", "product"}, {"points", {{0.0}, {2.0}}}, {"weights", {0.5, 0.5}}}},
                  {"T", 1.0}, {"steps", 4}, {"n", 2}, {"m", 2}, {"seed", 3}};
  const auto cfg = config_from_json(j, ".");
  std::ostringstream log;
  ASSERT_EQ(run_simulate(cfg, (dir / "a").string(), log), 0);
  ASSERT_EQ(run_simulate(cfg, (dir / "b").string(), log), 0);
  const auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  EXPECT_EQ(slurp(dir / "a" / "trajectory.csv"), slurp(dir / "b" / "trajectory.csv"));
  EXPECT_EQ(slurp(dir / "a" / "curve.json"), slurp(dir / "b" / "curve.json"));
  const json curve = read_json((dir / "a" / "curve.json").string());
  EXPECT_EQ(curve.front()["fibres"], curve.back()["fibres"]);
  std::filesystem::remove_all(dir);
}
