#include <fstream>

#include <gtest/gtest.h>

#include "hgt/scenario.hpp"

using namespace hgt;

namespace {
const char* minimal =
    "trait_min = 0\ntrait_max = 1\n"
    "b = 2\nd = 1\nC = 1\n"
    "K = 100\ninitial = 0.5:100\n";
}

TEST(Scenario, CampaignPresets) {
  for (auto [name, tau] : {std::pair{"tau0", 0.0}, {"tau02", 0.2}, {"tau06", 0.6}, {"tau07", 0.7}, {"tau10", 1.0}}) {
    SCOPED_TRACE(name);
    auto sc = preset(name);
    EXPECT_EQ(sc.space().x_min(), 0.0);
    EXPECT_EQ(sc.space().x_max(), 4.0);
    EXPECT_DOUBLE_EQ(sc.rates.b(1.0), 3.0);
    EXPECT_DOUBLE_EQ(sc.rates.d(2.0), 1.0);
    EXPECT_DOUBLE_EQ(sc.rates.C(1.0, 3.0), 0.5);
    EXPECT_DOUBLE_EQ(sc.rates.tau(2.0, 1.0), tau);
    EXPECT_EQ(sc.rates.tau(1.0, 2.0), 0.0);
    EXPECT_TRUE(sc.rates.frequency_dependent());
    EXPECT_DOUBLE_EQ(sc.mutation.p, 0.03);
    EXPECT_DOUBLE_EQ(sc.mutation.sigma, 0.1);
    EXPECT_EQ(sc.K.value(), 1000);
    EXPECT_EQ(sc.run.t_max, 2000.0);
  }
  EXPECT_TRUE(preset("tau0").rates.transfer_free());
}

TEST(Scenario, TwoTraitDensityDependentPreset) {
  auto sc = preset("fig2a");
  const double x = 0.25, y = 0.75;
  EXPECT_DOUBLE_EQ(sc.rates.b(x), 1.0);
  EXPECT_DOUBLE_EQ(sc.rates.b(y), 0.5);
  EXPECT_EQ(sc.rates.d(x), 0.0);
  EXPECT_EQ(sc.rates.C(x, y), 1.0);
  EXPECT_EQ(sc.K.value(), 1000);
  EXPECT_DOUBLE_EQ(flux_rate(y, x, sc.rates), 0.7);
  EXPECT_TRUE(sc.rates.density_dependent());
  EXPECT_EQ(sc.mutation.p, 0.0);
  ASSERT_EQ(sc.initial.size(), 2u);
}

TEST(Scenario, Fig2CdPiecewiseCompetition) {
  for (const char* name : {"fig2c", "fig2d"}) {
    auto sc = preset(name);
    const double x = 0.25, y = 0.75;
    EXPECT_EQ(sc.rates.C(x, x), 2.0);
    EXPECT_EQ(sc.rates.C(x, y), 1.0);
    EXPECT_EQ(sc.rates.C(y, x), 2.0);
    EXPECT_EQ(sc.rates.C(y, y), 4.0);
    EXPECT_DOUBLE_EQ(sc.rates.b(x), 1.0);
    EXPECT_DOUBLE_EQ(sc.rates.b(y), 0.8);
  }
  EXPECT_DOUBLE_EQ(preset("fig2c").rates.tau(0.75, 0.25), 5.0);
  EXPECT_DOUBLE_EQ(preset("fig2d").rates.tau(0.75, 0.25), 0.5);
}

TEST(Scenario, AllPresetsParse) {
  auto names = preset_names();
  EXPECT_EQ(names.size(), 11u);
  for (const auto& n : names) {
    auto sc = preset(n);
    EXPECT_EQ(sc.name, n);
    EXPECT_NO_THROW(sc.validate());
  }
  EXPECT_THROW(preset("nope"), ScenarioError);
}

TEST(Scenario, Defaults) {
  auto sc = parse_scenario(minimal);
  EXPECT_EQ(sc.rates.beta, 0.0);
  EXPECT_EQ(sc.rates.mu, 1.0);
  EXPECT_TRUE(sc.rates.transfer_free());
  EXPECT_EQ(sc.mutation.p, 0.0);
  EXPECT_EQ(sc.mutation.boundary, BoundaryPolicy::resample);
  EXPECT_EQ(sc.viability, Viability::strict);
  EXPECT_EQ(sc.run.event_limit, 1'000'000'000LL);
}

TEST(Scenario, CommentsBlankLinesAndMerging) {
  auto sc = parse_scenario(std::string("# header\n\n") + minimal + "seed = 1e3  # trailing\nevent_limit = 1e9\n" +
                           "boundary = clamp\n");
  EXPECT_EQ(sc.run.seed, 1000u);
  EXPECT_EQ(sc.mutation.boundary, BoundaryPolicy::clamp);
  auto merged = parse_scenario(
      "trait_min = 0\ntrait_max = 1\nb = 2\nd = 1\nC = 1\nK = 100\ninitial = 0.5:10, 0.25:3, 0.5:5\n");
  ASSERT_EQ(merged.initial.size(), 2u);
  EXPECT_EQ(merged.initial[0].count, 15);
}

TEST(Scenario, MissingKRejected) {
  try {
    parse_scenario("trait_min = 0\ntrait_max = 1\nb = 2\nd = 1\nC = 1\ninitial = 0.5:100\n");
    FAIL();
  } catch (const ScenarioError& e) {
    EXPECT_NE(std::string(e.what()).find("'K'"), std::string::npos);
  }
}

TEST(Scenario, ErrorsCarryLineNumbers) {
  auto line_of = [](const std::string& text) {
    try {
      parse_scenario(text);
    } catch (const ScenarioError& e) {
      return e.line();
    }
    return -1;
  };
  EXPECT_EQ(line_of(std::string(minimal) + "bogus = 1\n"), 8);
  EXPECT_EQ(line_of(std::string(minimal) + "p = abc\n"), 8);
  EXPECT_EQ(line_of(std::string(minimal) + "tau = exp(x\n"), 8);
  EXPECT_EQ(line_of(std::string(minimal) + "K = 5\n"), 8);
  EXPECT_EQ(line_of("no equals sign\n"), 1);
  EXPECT_EQ(line_of(std::string(minimal) + "viability = maybe\n"), 8);
}

TEST(Scenario, ValidationGate) {
  EXPECT_THROW(parse_scenario("trait_min = 0\ntrait_max = 1\nb = 1\nd = 1\nC = 1\nK = 100\ninitial = 0.5:1\n"),
               ScenarioError);
  EXPECT_THROW(parse_scenario(std::string(minimal) + "beta = 0\nmu = 0\n"), ScenarioError);
  EXPECT_THROW(parse_scenario("trait_min = 0\ntrait_max = 1\nb = 2\nd = 1\nC = 1\nK = 100\ninitial = 1.5:1\n"),
               ScenarioError);
  EXPECT_THROW(parse_scenario(std::string(minimal) + "t_max = -1\n"), ScenarioError);
  EXPECT_THROW(parse_scenario(std::string(minimal) + "p = 2\n"), ScenarioError);
}

TEST(Scenario, LoadFromFile) {
  std::string path = ::testing::TempDir() + "/scenario_test.txt";
  {
    std::ofstream f(path);
    f << preset_text("tau06");
  }
  auto sc = load_scenario_file(path);
  EXPECT_EQ(sc.name, "tau06");
  EXPECT_DOUBLE_EQ(sc.rates.tau(2, 1), 0.6);
  EXPECT_THROW(load_scenario_file(path + ".missing"), ScenarioError);
}

TEST(Scenario, ShippedScenarioFilesMatchPresets) {
  for (const auto& n : preset_names()) {
    std::string path = std::string(HGT_SOURCE_DIR) + "/scenarios/" + n + ".txt";
    std::ifstream f(path);
    ASSERT_TRUE(f) << path;
    auto sc = load_scenario_file(path);
    auto ps = preset(n);
    EXPECT_EQ(sc.rates.birth, ps.rates.birth) << n;
    EXPECT_EQ(sc.rates.death, ps.rates.death) << n;
    EXPECT_EQ(sc.rates.competition, ps.rates.competition) << n;
    EXPECT_EQ(sc.rates.transfer, ps.rates.transfer) << n;
    EXPECT_EQ(sc.rates.beta, ps.rates.beta) << n;
    EXPECT_EQ(sc.rates.mu, ps.rates.mu) << n;
    EXPECT_EQ(sc.K.value(), ps.K.value()) << n;
    EXPECT_EQ(sc.initial, ps.initial) << n;
    EXPECT_EQ(sc.mutation.p, ps.mutation.p) << n;
  }
}
