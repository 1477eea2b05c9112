#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_support.hpp"

using namespace gaw;

TEST(EvalCost, ProductCoupling) {
  const InstanceFile ex = example_degenerate();
  for (double lambda : {0.0, 2.0}) {
    EXPECT_NEAR(eval_cost(ex.mu(), ex.nu(), BlockContraction::zero(1, 2), lambda), 81.0, 1e-13);
  }
}

TEST(EvalCost, FlatDirectionOfNonUniqueExample) {
  const InstanceFile ex = example_nonunique();
  for (double rho : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
    EXPECT_NEAR(eval_cost(ex.mu(), ex.nu(), BlockContraction::diagonal({rho, 1.0}), 0.0), 78.25,
                1e-12);
  }
}

TEST(EvalCost, EqualsTransportPlusLambdaKl) {
  std::mt19937_64 rng(40);
  for (int rep = 0; rep < 100; ++rep) {
    const Index d = 1 + rep % 3;
    const Index steps = 1 + rep % 3;
    const ProcessLaw mu = gaw::testing::random_law(d, steps, rng);
    const ProcessLaw nu = gaw::testing::random_law(d, steps, rng);
    const BlockContraction p = gaw::testing::random_block_contraction(d, steps, rng, 0.95);
    const double lambda = 0.1 + rep % 5;
    EXPECT_NEAR(eval_cost(mu, nu, p, lambda),
                eval_cost(mu, nu, p, 0.0) + lambda * coupling_entropy(p),
                1e-10 * (1.0 + eval_cost(mu, nu, p, lambda)));

    // Transport part from the joint covariance: E|X - Y|^2.
    const GaussianCoupling pi = build_coupling(mu, nu, p);
    const double transport = (mu.mean() - nu.mean()).squaredNorm() + mu.cov().trace() +
                             nu.cov().trace() - 2.0 * pi.cross().trace();
    EXPECT_NEAR(eval_cost(mu, nu, p, 0.0), transport, 1e-10 * (1.0 + transport));
  }
}

TEST(EvalCost, SingularEntropy) {
  const InstanceFile ex = example_degenerate();
  try {
    eval_cost(ex.mu(), ex.nu(), BlockContraction::diagonal({1.0, 0.2}), 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SingularEntropy);
  }
}

TEST(ParamSearch, DegenerateExampleGrid) {
  const InstanceFile ex = example_degenerate();
  const ParamSearchResult r = param_search(ex.mu(), ex.nu(), 0.0);
  EXPECT_NEAR(r.best_value, 77.0, 1e-6);
  EXPECT_LT(max_abs(r.best_p.dense() - (Mat(2, 2) << -1, 0, 0, 1).finished()), 1e-12);
  EXPECT_EQ(r.tie_count, 1u);
}

TEST(ParamSearch, RegularizedMatchesClosedForm) {
  const InstanceFile ex = example_degenerate();
  for (double lambda : {0.1, 1.0, 5.0}) {
    const SolveReport closed = solve_aw(ex.mu(), ex.nu(), lambda);
    const ParamSearchResult r = param_search(ex.mu(), ex.nu(), lambda);
    EXPECT_NEAR(r.best_value, closed.value, 1e-6);
    EXPECT_GE(r.best_value, closed.value - 1e-9);
    EXPECT_LT(max_abs(r.best_p.dense() - closed.p_opt.dense()), 1e-6);
  }
}

TEST(ParamSearch, ReportsTiesForFlatDirection) {
  const InstanceFile ex = example_nonunique();
  ParamSearchConfig cfg;
  cfg.grid_points_per_axis = 21;
  const ParamSearchResult r = param_search(ex.mu(), ex.nu(), 0.0, cfg);
  EXPECT_NEAR(r.best_value, 78.25, 1e-9);
  EXPECT_EQ(r.tie_count, 21u);
  ASSERT_FALSE(r.ties.empty());
  for (const BlockContraction& p : r.ties) EXPECT_EQ(p.block(2)(0, 0), 1.0);
}

TEST(ParamSearch, OneStepMatchesW2) {
  std::mt19937_64 rng(41);
  for (int rep = 0; rep < 10; ++rep) {
    const ProcessLaw mu = gaw::testing::random_law(1, 1, rng);
    const ProcessLaw nu = gaw::testing::random_law(1, 1, rng);
    const double lambda = rep % 2 ? 0.5 : 0.0;
    EXPECT_NEAR(param_search(mu, nu, lambda).best_value, solve_w2(mu, nu, lambda).value, 1e-6);
  }
}

TEST(ParamSearch, DescentForBlocks) {
  const InstanceFile ex = example_multidim();
  const ParamSearchResult r = param_search(ex.mu(), ex.nu(), 0.0);
  EXPECT_NEAR(r.best_value, 6.0 - 14.0 * std::sqrt(2.0) / 5.0, 1e-4);
  EXPECT_LT(max_abs(r.best_p.block(1) - example_rotation().transpose()), 1e-3);

  std::mt19937_64 rng(42);
  for (int rep = 0; rep < 5; ++rep) {
    const ProcessLaw mu = gaw::testing::random_law(2, 2, rng);
    const ProcessLaw nu = gaw::testing::random_law(2, 2, rng);
    const double lambda = rep % 2 ? 1.0 : 0.0;
    const double closed = solve_aw(mu, nu, lambda).value;
    const double found = param_search(mu, nu, lambda).best_value;
    EXPECT_GE(found, closed - 1e-6);
    EXPECT_NEAR(found, closed, 1e-4 * (1.0 + closed));
  }
}

TEST(ParamSearch, DeterministicFromSeed) {
  const InstanceFile ex = example_multidim();
  ParamSearchConfig cfg;
  cfg.seed = 77;
  const ParamSearchResult a = param_search(ex.mu(), ex.nu(), 0.5, cfg);
  const ParamSearchResult b = param_search(ex.mu(), ex.nu(), 0.5, cfg);
  EXPECT_EQ(a.best_value, b.best_value);
  EXPECT_EQ(a.best_p.dense(), b.best_p.dense());
}

TEST(ParamSearch, ConfigErrors) {
  const InstanceFile ex = example_degenerate();
  ParamSearchConfig cfg;
  cfg.grid_points_per_axis = 2;
  EXPECT_THROW(param_search(ex.mu(), ex.nu(), 0.0, cfg), Error);
  cfg.grid_points_per_axis = 201;
  cfg.max_evaluations = 100;
  try {
    param_search(ex.mu(), ex.nu(), 0.0, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BudgetExceeded);
  }
}

TEST(MonteCarlo, ProductAndOptimalCouplings) {
  const InstanceFile ex = example_degenerate();
  const ProcessLaw mu = ex.mu();
  const ProcessLaw nu = ex.nu();
  const CostEstimate prod =
      sample_cost_estimate(gaussian_coupling_source(mu, nu, BlockContraction::zero(1, 2)), 0.0,
                           200000, 1);
  EXPECT_NEAR(prod.transport_mean, 81.0, 3.0 * prod.transport_stderr);
  const CostEstimate opt = sample_cost_estimate(
      gaussian_coupling_source(mu, nu, solve_aw(mu, nu, 0.0).p_opt), 0.0, 200000, 2);
  EXPECT_NEAR(opt.transport_mean, 77.0, 3.0 * opt.transport_stderr + 1e-9);
}

TEST(MonteCarlo, CoinFlipMixtureIsOptimal) {
  const InstanceFile ex = example_nonunique();
  const CostEstimate est =
      sample_cost_estimate(coin_flip_mixture_source(ex.mu(), ex.nu()), 0.0, 200000, 3);
  EXPECT_NEAR(est.transport_mean, 78.25, 3.0 * est.transport_stderr);
  EXPECT_TRUE(std::isinf(est.kl));
}

TEST(MonteCarlo, RegularizedObjective) {
  const InstanceFile ex = example_degenerate();
  const SolveReport r = solve_aw(ex.mu(), ex.nu(), 1.0);
  const CostEstimate est =
      sample_cost_estimate(gaussian_coupling_source(ex.mu(), ex.nu(), r.p_opt), 1.0, 200000, 4);
  EXPECT_NEAR(est.kl, coupling_entropy(r.p_opt), 1e-14);
  EXPECT_NEAR(est.objective, r.value, 3.0 * est.transport_stderr);
}
