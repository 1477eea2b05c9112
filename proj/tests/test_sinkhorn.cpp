#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"

using namespace gaw;

namespace {

Mat squared_distance(const Vec& x, const Vec& y) {
  Mat c(x.size(), y.size());
  for (Index i = 0; i < x.size(); ++i)
    for (Index j = 0; j < y.size(); ++j) c(i, j) = (x(i) - y(j)) * (x(i) - y(j));
  return c;
}

Vec gaussian_weights(const Vec& grid) {
  Vec w = (-0.5 * grid.array().square()).exp();
  return w / w.sum();
}

}  // namespace

TEST(EntropicOt, ScalarGaussiansOnGrid) {
  const Vec grid = Vec::LinSpaced(400, -6.0, 6.0);
  const Vec w = gaussian_weights(grid);
  const EntropicResult r = entropic_ot(squared_distance(grid, grid), w, w, 4.0, {});
  const ProcessLaw g = make_law(1, 1, Vec::Zero(1), Mat::Identity(1, 1));
  EXPECT_NEAR(r.value, solve_w2(g, g, 4.0).value, 1e-2 * solve_w2(g, g, 4.0).value);
  EXPECT_LE(r.marginal_error, 1e-11);
}

TEST(EntropicOt, SmallLambdaStaysStable) {
  const Vec grid = Vec::LinSpaced(200, -6.0, 6.0);
  const Vec w = gaussian_weights(grid);
  const Vec shifted = Vec::LinSpaced(200, -3.0, 9.0);
  const EntropicResult r = entropic_ot(squared_distance(grid, shifted), w, w, 0.01, {});
  EXPECT_TRUE(std::isfinite(r.value));
  EXPECT_NEAR(r.transport, 9.0, 0.05);
}

TEST(EntropicOt, DivergenceReported) {
  const Vec grid = Vec::LinSpaced(50, -3.0, 3.0);
  const Vec w = gaussian_weights(grid);
  SinkhornConfig cfg;
  cfg.max_iters = 1;
  cfg.convergence_tol = 1e-15;
  try {
    entropic_ot(squared_distance(grid, grid * 2.0), w, w, 0.05, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SinkhornDiverged);
  }
}

TEST(MonotoneOt, MatchesSortedCoupling) {
  // Equal-weight atoms: the comonotone plan pairs them in order.
  const Vec x = (Vec(4) << -1.0, 0.0, 2.0, 5.0).finished();
  const Vec y = (Vec(4) << 1.0, 1.5, 3.0, 4.0).finished();
  const Vec w = Vec::Constant(4, 0.25);
  double expected = 0.0;
  for (Index i = 0; i < 4; ++i) expected += 0.25 * (x(i) - y(i)) * (x(i) - y(i));
  EXPECT_NEAR(monotone_ot(squared_distance(x, y), w, w, false), expected, 1e-15);
  double anti = 0.0;
  for (Index i = 0; i < 4; ++i) anti += 0.25 * (x(i) - y(3 - i)) * (x(i) - y(3 - i));
  EXPECT_NEAR(monotone_ot(squared_distance(x, y), w, w, true), anti, 1e-15);
}

TEST(DiscreteInstance, Invariants) {
  const InstanceFile ex = example_degenerate();
  const DiscreteInstance inst = DiscreteInstance::build(ex.mu(), ex.nu(), 60);
  EXPECT_EQ(inst.d, 1);
  EXPECT_EQ(inst.steps, 2);
  EXPECT_NEAR(inst.weights_x1.sum(), 1.0, 1e-12);
  EXPECT_NEAR(inst.weights_y1.sum(), 1.0, 1e-12);
  for (const Vec* g : {&inst.grid_x1, &inst.grid_y1, &inst.grid_x2, &inst.grid_y2}) {
    for (Index i = 1; i < g->size(); ++i) EXPECT_LT((*g)(i - 1), (*g)(i));
  }
  EXPECT_LE(inst.grid_x1(0), -6.0);
  EXPECT_GE(inst.grid_x1(59), 6.0);
  const double sd_x2 = std::sqrt(ex.A(1, 1));
  EXPECT_LE(inst.grid_x2(0), -6.0 * sd_x2);
  EXPECT_GE(inst.grid_x2(59), 6.0 * sd_x2);
  // Conditionals come from the exact Gaussian conditioning.
  for (Index i : {0, 17, 59}) {
    const GaussianMoments c = condition(ex.mu(), 1, Vec::Constant(1, inst.grid_x1(i)));
    EXPECT_NEAR(inst.cond_mean_x(i), c.mean(0), 1e-12);
    EXPECT_NEAR(inst.cond_std_x(i) * inst.cond_std_x(i), c.cov(0, 0), 1e-12);
  }
}

TEST(DiscreteInstance, UnsupportedShapes) {
  const InstanceFile ex = example_multidim();
  try {
    DiscreteInstance::build(ex.mu(), ex.nu(), 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnsupportedDimension);
  }
  const ProcessLaw g = make_law(1, 1, Vec::Zero(1), Mat::Identity(1, 1));
  EXPECT_THROW(DiscreteInstance::build(g, g, 10), Error);
}

TEST(NestedSinkhorn, DegenerateExampleExact) {
  const InstanceFile ex = example_degenerate();
  const double v = nested_sinkhorn(DiscreteInstance::build(ex.mu(), ex.nu(), 120), 0.0);
  EXPECT_NEAR(v, 77.0, 0.02 * 77.0);
}

TEST(NestedSinkhorn, DegenerateExampleEntropic) {
  const InstanceFile ex = example_degenerate();
  const double closed = solve_aw(ex.mu(), ex.nu(), 1.0).value;
  const double v = nested_sinkhorn(DiscreteInstance::build(ex.mu(), ex.nu(), 120), 1.0);
  EXPECT_NEAR(v, closed, 0.02 * closed);
}

TEST(NestedSinkhorn, SameLawIsZero) {
  // Identical laws discretize to identical measures, so the diagonal plan is exact.
  const ProcessLaw mu = example_degenerate().mu();
  for (Index n : {20, 40, 80}) {
    EXPECT_NEAR(nested_sinkhorn(DiscreteInstance::build(mu, mu, n), 0.0), 0.0, 1e-12);
  }
}

TEST(NestedSinkhorn, RefinementReducesError) {
  const InstanceFile ex = example_degenerate();
  for (double lambda : {0.0, 1.0}) {
    const double closed = solve_aw(ex.mu(), ex.nu(), lambda).value;
    double prev = std::numeric_limits<double>::infinity();
    for (Index n : {15, 30, 60}) {
      const double err =
          std::abs(nested_sinkhorn(DiscreteInstance::build(ex.mu(), ex.nu(), n), lambda) - closed);
      EXPECT_LT(err, prev) << "lambda=" << lambda << " n=" << n;
      prev = err;
    }
  }
}

TEST(NestedSinkhorn, NonUniqueExample) {
  const InstanceFile ex = example_nonunique();
  for (double lambda : {0.0, 0.5}) {
    const double closed = solve_aw(ex.mu(), ex.nu(), lambda).value;
    const double v = nested_sinkhorn(DiscreteInstance::build(ex.mu(), ex.nu(), 80), lambda);
    EXPECT_NEAR(v, closed, 0.02 * closed) << "lambda=" << lambda;
  }
}
