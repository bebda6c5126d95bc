#include <random>

#include <gtest/gtest.h>

#include "hgt/model.hpp"
#include "hgt/scenario.hpp"
#include "support.hpp"

using namespace hgt;
using testing_support::rates;

TEST(Model, GrowthRate) {
  auto r = preset("tau0").rates;
  EXPECT_DOUBLE_EQ(growth_rate(1.0, r), 2.0);
  EXPECT_DOUBLE_EQ(growth_rate(0.0, r), 3.0);
  auto offset = rates("0.3 + 0.25", "0.3", "1", "0", 0, 1);
  for (double x : {0.0, 1.0, 4.0}) EXPECT_NEAR(growth_rate(x, offset), 0.25, 1e-15);
  EXPECT_THROW(growth_rate(4.5, r), std::domain_error);
  EXPECT_THROW(growth_rate(-0.1, r), std::domain_error);
}

TEST(Model, LogisticEquilibrium) {
  auto sc = preset("tau0");
  EXPECT_DOUBLE_EQ(logistic_equilibrium(1.0, sc.rates), 4.0);
  EXPECT_DOUBLE_EQ(logistic_equilibrium(0.0, sc.rates), 6.0);
  EXPECT_DOUBLE_EQ(logistic_equilibrium(1.0, sc.rates) * sc.K.as_double(), 4000.0);
  EXPECT_DOUBLE_EQ(logistic_equilibrium(0.0, sc.rates) * sc.K.as_double(), 6000.0);
  auto unit = rates("1.5", "0.5", "1", "0", 0, 1);
  EXPECT_DOUBLE_EQ(logistic_equilibrium(2.0, unit), 1.0);
}

TEST(Model, TransferKernel) {
  auto fd = rates("2", "1", "1", "0.7", 0, 1);
  EXPECT_DOUBLE_EQ(transfer_kernel_h(1, 2, 4.0, fd), 0.175);
  auto zero = rates("2", "1", "1", "0", 0, 1);
  for (double m : {0.1, 1.0, 10.0}) EXPECT_EQ(transfer_kernel_h(1, 2, m, zero), 0.0);
  auto dd = rates("2", "1", "1", "5", 1, 0);
  for (double m : {0.0, 0.5, 7.0}) EXPECT_DOUBLE_EQ(transfer_kernel_h(1, 2, m, dd), 5.0);
  EXPECT_THROW(transfer_kernel_h(1, 2, 0.0, fd), std::domain_error);
  EXPECT_THROW(transfer_kernel_h(1, 2, -1.0, dd), std::invalid_argument);
}

TEST(Model, TransferKernelMonotoneInMass) {
  auto bda = rates("2", "1", "1", "exp(x - y)", 0.4, 0.8);
  auto dd = rates("2", "1", "1", "exp(x - y)", 0.4, 0.0);
  double prev = std::numeric_limits<double>::infinity();
  for (double m = 0.0; m <= 20.0; m += 0.25) {
    double h = transfer_kernel_h(1.0, 0.5, m, bda);
    EXPECT_LE(h, prev);
    prev = h;
    EXPECT_DOUBLE_EQ(transfer_kernel_h(1.0, 0.5, m, dd), transfer_kernel_h(1.0, 0.5, 0.0, dd));
  }
}

TEST(Model, FluxRate) {
  auto uni = rates("2", "1", "1", "0.7 * (x > y)", 0, 1);
  EXPECT_DOUBLE_EQ(flux_rate(2.0, 1.0, uni), 0.7);
  EXPECT_DOUBLE_EQ(flux_rate(1.0, 2.0, uni), -0.7);
  EXPECT_EQ(flux_rate(1.5, 1.5, uni), 0.0);
  auto ex = rates("2", "1", "1", "exp(x - y)", 0, 1);
  for (double h : {0.01, 0.1, 0.5}) EXPECT_NEAR(flux_rate(1.0 + h, 1.0, ex), std::exp(h) - std::exp(-h), 1e-13);
}

TEST(ModelProperty, FluxAntisymmetry) {
  auto r = rates("2", "1", "1", "exp(x - y) + 0.3 * (x > y) + abs(x - 2 * y)", 0, 1);
  std::mt19937_64 g(1);
  std::uniform_real_distribution<double> u(0, 4);
  for (int i = 0; i < 1000; ++i) {
    double x = u(g), y = u(g);
    EXPECT_EQ(flux_rate(x, y, r), -flux_rate(y, x, r));
  }
}

TEST(ModelProperty, PositivityOnValidationGrid) {
  for (const auto& name : preset_names()) {
    auto sc = preset(name);
    if (sc.viability == Viability::lenient) continue;
    for (double x : sc.space().validation_grid()) {
      EXPECT_GT(growth_rate(x, sc.rates), 0.0) << name;
      EXPECT_GT(logistic_equilibrium(x, sc.rates), 0.0) << name;
    }
  }
}

TEST(Validation, RejectsNonViableRates) {
  auto r = rates("1", "1", "1", "0", 0, 1);
  EXPECT_THROW(validate(r, Viability::strict), ValidationError);
  auto late = rates("4 - x", "0.5", "1", "0", 0, 1);  // b - d <= 0 from x = 3.5
  EXPECT_THROW(validate(late, Viability::strict), ValidationError);
  std::vector<double> start{1.0};
  EXPECT_NO_THROW(validate(late, Viability::lenient, start));
  std::vector<double> bad{3.9};
  EXPECT_THROW(validate(late, Viability::lenient, bad), ValidationError);
}

TEST(Validation, RejectsBadKernels) {
  EXPECT_THROW(validate(rates("2", "1", "0", "0", 0, 1), Viability::strict), ValidationError);
  EXPECT_THROW(validate(rates("2", "1", "x - 1", "0", 0, 1), Viability::strict), ValidationError);
  EXPECT_THROW(validate(rates("2", "1", "1", "x - y", 0, 1), Viability::strict), ValidationError);
  EXPECT_THROW(validate(rates("2", "1", "1", "0", 0, 0), Viability::strict), ValidationError);
  EXPECT_THROW(validate(rates("2", "-1", "1", "0", 0, 1), Viability::strict), ValidationError);
  EXPECT_THROW(validate(rates("2", "1", "1", "0", -1, 1), Viability::strict), ValidationError);
  EXPECT_NO_THROW(validate(rates("2", "1", "1", "0", 0, 1), Viability::strict));
}

TEST(Types, TraitSpace) {
  EXPECT_THROW(TraitSpace(1.0, 1.0), ValidationError);
  EXPECT_THROW(TraitSpace(2.0, 1.0), ValidationError);
  TraitSpace s(0, 4);
  EXPECT_EQ(s.clamp(5.0), 4.0);
  EXPECT_EQ(s.clamp(-1.0), 0.0);
  auto g = s.validation_grid();
  EXPECT_EQ(g.size(), 1026u);
  EXPECT_EQ(g.front(), 0.0);
  EXPECT_EQ(g.back(), 4.0);
}

TEST(Types, ScalingK) {
  EXPECT_THROW(ScalingK(0), ValidationError);
  EXPECT_EQ(ScalingK(1).value(), 1);
}

TEST(Types, PopulationInvariants) {
  Population p({{1.0, 3}, {0.5, 2}, {1.0, 4}});
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p.total(), 9);
  EXPECT_EQ(p.count(1.0), 7);
  EXPECT_EQ(p.species()[0].trait, 0.5);
  EXPECT_DOUBLE_EQ(p.mass(ScalingK(3)), 3.0);
  p.remove(0.5, 2);
  EXPECT_EQ(p.size(), 1u);
  EXPECT_EQ(p.count(0.5), 0);
  EXPECT_THROW(p.remove(0.5), std::invalid_argument);
  EXPECT_THROW(p.remove(1.0, 8), std::invalid_argument);
  p.add(2.0, 1);
  EXPECT_NEAR(p.mean_trait(), (7.0 + 2.0) / 8.0, 1e-15);
  EXPECT_GT(p.trait_variance(), 0.0);
}

TEST(Types, ReplacementTransferMap) {
  TransferModel t;
  auto [a, b] = t.apply(2.0, 1.0);
  EXPECT_EQ(a, 2.0);
  EXPECT_EQ(b, 2.0);
}

TEST(Mutation, SamplesStayInTraitSpace) {
  TraitSpace s(0, 1);
  Rng rng(3);
  for (auto policy : {BoundaryPolicy::resample, BoundaryPolicy::clamp}) {
    MutationKernel m{0.1, 0.5, policy};
    for (int i = 0; i < 20000; ++i) {
      double z = m.sample(i % 2 ? 0.0 : 1.0, s, rng);
      ASSERT_TRUE(s.contains(z));
    }
  }
}

TEST(Mutation, ResampleKeepsGaussianShapeInside) {
  TraitSpace s(-10, 10);
  Rng rng(5);
  MutationKernel m{0.1, 0.2, BoundaryPolicy::resample};
  double sum = 0, sum2 = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    double z = m.sample(1.0, s, rng) - 1.0;
    sum += z, sum2 += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 4 * 0.2 / std::sqrt(n));
  EXPECT_NEAR(sum2 / n, 0.04, 0.04 * 0.02);
}

TEST(Mutation, KernelChecks) {
  EXPECT_THROW((MutationKernel{1.5, 0.1}).check(), ValidationError);
  EXPECT_THROW((MutationKernel{0.1, 0.0}).check(), ValidationError);
}

TEST(Rng, DerivedSeedsAreFixed) {
  EXPECT_EQ(derive_seed(1, 0), derive_seed(1, 0));
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
  EXPECT_EQ(mix64(0), 0xE220A8397B1DCDAFULL);
}

TEST(Rng, VariateMoments) {
  Rng r(9);
  const int n = 200000;
  double se = 0, sn = 0, sn2 = 0;
  for (int i = 0; i < n; ++i) {
    se += r.exponential(2.0);
    double z = r.normal();
    sn += z, sn2 += z * z;
    auto k = r.below(7);
    ASSERT_LT(k, 7u);
  }
  EXPECT_NEAR(se / n, 0.5, 0.01);
  EXPECT_NEAR(sn / n, 0.0, 0.01);
  EXPECT_NEAR(sn2 / n, 1.0, 0.01);
}
