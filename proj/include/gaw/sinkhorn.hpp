#pragma once

// Discretized dynamic-programming oracle for d = 1, T = 2.
//
// V_1(x_1, y_1) is the entropic (or exact, for lambda = 0) transport cost
// between the discretized conditional laws of the second step, and
// V_0 = min over couplings of the first-step marginals of
//   E[|x_1 - y_1|^2 + V_1(x_1, y_1)] + lambda KL(pi_1 | mu_1 x nu_1).
// KL is taken against the discretized product reference at each stage, so
// the stage contributions add up to the KL against the discrete mu x nu.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "gaw/gausslaw.hpp"

namespace gaw {

struct SinkhornConfig {
  // Relative weight below which a grid point is dropped from a support.
  double epsilon_floor = 1e-14;
  Index max_iters = 20000;
  // L1 violation of the row marginal at which iteration stops.
  double convergence_tol = 1e-11;
};

struct EntropicResult {
  double value = 0.0;  // <pi, C> + lambda KL(pi | a x b)
  double transport = 0.0;
  Vec f;  // potentials, pi_kl = a_k b_l exp((f_k + g_l - C_kl) / lambda)
  Vec g;
  Index iterations = 0;
  double marginal_error = 0.0;
};

namespace detail {

inline double log_sum_exp(const Eigen::Ref<const Vec>& z) {
  const double m = z.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((z.array() - m).exp().sum());
}

// f_k = -lambda log sum_l b_l exp((g_l - C_kl) / lambda)
inline void c_transform_rows(const Mat& cost, const Vec& log_b, const Vec& g, double lambda,
                             Vec& f) {
  f.resize(cost.rows());
  Vec z(cost.cols());
  for (Index k = 0; k < cost.rows(); ++k) {
    z = log_b + (g - cost.row(k).transpose()) / lambda;
    f(k) = -lambda * log_sum_exp(z);
  }
}

inline void c_transform_cols(const Mat& cost, const Vec& log_a, const Vec& f, double lambda,
                             Vec& g) {
  g.resize(cost.cols());
  Vec z(cost.rows());
  for (Index l = 0; l < cost.cols(); ++l) {
    z = log_a + (f - cost.col(l)) / lambda;
    g(l) = -lambda * log_sum_exp(z);
  }
}

}  // namespace detail

/// Entropic OT between discrete measures a, b with cost C and reference a x b.
///
/// Log-stabilized scaling iterations: potentials are absorbed into the kernel
/// whenever the scalings drift, so the kernel entries stay representable.
/// `f0`/`g0` warm-start the potentials when given (`g0` alone is enough).
inline EntropicResult entropic_ot(const Mat& cost, const Vec& a, const Vec& b, double lambda,
                                  const SinkhornConfig& cfg, const Vec* g0 = nullptr) {
  require(lambda > 0.0, ErrorKind::InvalidInput, "entropic_ot needs lambda > 0");
  require(cost.rows() == a.size() && cost.cols() == b.size(), ErrorKind::DimensionMismatch,
          "cost matrix does not match the marginals");
  require(a.minCoeff() > 0.0 && b.minCoeff() > 0.0, ErrorKind::InvalidInput,
          "marginal weights must be positive");
  const Vec log_a = a.array().log();
  const Vec log_b = b.array().log();

  EntropicResult r;
  r.g = (g0 != nullptr && g0->size() == b.size()) ? *g0 : Vec::Zero(b.size());
  detail::c_transform_rows(cost, log_b, r.g, lambda, r.f);
  detail::c_transform_cols(cost, log_a, r.f, lambda, r.g);

  const Index n = cost.rows();
  const Index m = cost.cols();
  Mat kernel(n, m);
  Vec u = Vec::Ones(n);
  Vec v = Vec::Ones(m);
  auto rebuild = [&] {
    r.f.array() += lambda * u.array().log();
    r.g.array() += lambda * v.array().log();
    kernel = ((-cost).colwise() + r.f).rowwise() + r.g.transpose();
    kernel = (kernel.array() / lambda).exp().matrix();
    // Fold the reference weights in: pi = diag(a u) K diag(b v).
    kernel = a.asDiagonal() * kernel * b.asDiagonal();
    u.setOnes();
    v.setOnes();
  };
  rebuild();

  constexpr double kAbsorb = 1e30;
  Vec kv(n), ktu(m);
  r.marginal_error = std::numeric_limits<double>::infinity();
  for (Index it = 1; it <= cfg.max_iters; ++it) {
    r.iterations = it;
    kv.noalias() = kernel * v;
    if (!(kv.minCoeff() > 0.0) || !kv.allFinite()) {
      // Kernel rows underflowed; fall back to an exact log-domain sweep.
      r.f.array() += lambda * u.array().log();
      r.g.array() += lambda * v.array().log();
      u.setOnes();
      v.setOnes();
      detail::c_transform_rows(cost, log_b, r.g, lambda, r.f);
      detail::c_transform_cols(cost, log_a, r.f, lambda, r.g);
      kernel = ((-cost).colwise() + r.f).rowwise() + r.g.transpose();
      kernel = a.asDiagonal() * (kernel.array() / lambda).exp().matrix() * b.asDiagonal();
      continue;
    }
    u = a.cwiseQuotient(kv);
    ktu.noalias() = kernel.transpose() * u;
    v = b.cwiseQuotient(ktu);
    // Columns are now exact; measure the row violation.
    kv.noalias() = kernel * v;
    r.marginal_error = (u.cwiseProduct(kv) - a).cwiseAbs().sum();
    if (r.marginal_error <= cfg.convergence_tol) break;
    if (u.maxCoeff() > kAbsorb || v.maxCoeff() > kAbsorb || u.minCoeff() < 1.0 / kAbsorb ||
        v.minCoeff() < 1.0 / kAbsorb) {
      rebuild();
    }
  }
  require(r.marginal_error <= cfg.convergence_tol, ErrorKind::SinkhornDiverged,
          "marginal violation " + std::to_string(r.marginal_error) + " after " +
              std::to_string(r.iterations) + " iterations");

  // pi = diag(u) K diag(v); log(pi / (a b)) = (F_k + G_l - C_kl) / lambda.
  const Mat plan = u.asDiagonal() * kernel * v.asDiagonal();
  r.f.array() += lambda * u.array().log();
  r.g.array() += lambda * v.array().log();
  const Vec rows = plan.rowwise().sum();
  const Vec cols = plan.colwise().sum().transpose();
  r.transport = plan.cwiseProduct(cost).sum();
  r.value = rows.dot(r.f) + cols.dot(r.g);
  return r;
}

/// Exact OT between discrete measures on sorted supports for a cost with the
/// Monge property, via the north-west corner rule. `reverse_b` walks b from
/// its last atom (anti-monotone coupling).
inline double monotone_ot(const Mat& cost, const Vec& a, const Vec& b, bool reverse_b) {
  require(cost.rows() == a.size() && cost.cols() == b.size(), ErrorKind::DimensionMismatch,
          "cost matrix does not match the marginals");
  const Index n = a.size();
  const Index m = b.size();
  auto col = [&](Index j) { return reverse_b ? m - 1 - j : j; };
  Index i = 0;
  Index j = 0;
  double ra = a(0);
  double rb = b(col(0));
  double total = 0.0;
  for (;;) {
    const double mass = std::min(ra, rb);
    total += mass * cost(i, col(j));
    ra -= mass;
    rb -= mass;
    if (ra <= rb) {
      if (++i == n) break;
      ra = a(i);
    } else {
      if (++j == m) break;
      rb = b(col(j));
    }
  }
  return total;
}

/// Gridded marginals and conditional laws of two d = 1, T = 2 Gaussian laws.
struct DiscreteInstance {
  Index d = 1;
  Index steps = 2;
  double width_sigmas = 6.0;
  Vec grid_x1, grid_y1;  // first step, sorted
  Vec weights_x1, weights_y1;
  Vec grid_x2, grid_y2;          // second step, sorted
  Vec cond_mean_x, cond_std_x;   // conditional law of x_2 at each grid_x1 point
  Vec cond_mean_y, cond_std_y;

  static DiscreteInstance build(const ProcessLaw& mu, const ProcessLaw& nu, Index points,
                                double width_sigmas = 6.0) {
    require_same_shape(mu, nu);
    require(mu.d() == 1 && mu.steps() == 2, ErrorKind::UnsupportedDimension,
            "the discretized oracle supports d = 1, T = 2 only");
    require(points >= 3, ErrorKind::InvalidInput, "need at least 3 grid points per stage");
    DiscreteInstance inst;
    inst.width_sigmas = width_sigmas;
    build_side(mu, points, width_sigmas, inst.grid_x1, inst.weights_x1, inst.grid_x2,
               inst.cond_mean_x, inst.cond_std_x);
    build_side(nu, points, width_sigmas, inst.grid_y1, inst.weights_y1, inst.grid_y2,
               inst.cond_mean_y, inst.cond_std_y);
    return inst;
  }

  Index points() const { return grid_x1.size(); }

 private:
  static void build_side(const ProcessLaw& law, Index points, double w, Vec& grid1, Vec& weights1,
                         Vec& grid2, Vec& cond_mean, Vec& cond_std) {
    const double sd1 = std::sqrt(law.cov()(0, 0));
    const Vec z = Vec::LinSpaced(points, -w, w);
    grid1 = law.mean()(0) + sd1 * z.array();
    weights1 = (-0.5 * z.array().square()).exp();
    weights1 /= weights1.sum();

    const ConditionalLaw cond = conditional_law(law, 1);
    const double slope = cond.mean_shift(0, 0);
    const double sd2 = std::sqrt(cond.cov(0, 0));
    cond_mean.resize(points);
    cond_std = Vec::Constant(points, sd2);
    for (Index i = 0; i < points; ++i) {
      cond_mean(i) = cond.mean_at(Vec::Constant(1, grid1(i)))(0);
    }
    // Every conditional keeps its own +-w sd window inside the grid.
    const double half = w * (std::abs(slope) * sd1 + sd2);
    grid2 = law.mean()(1) + Vec::LinSpaced(points, -half, half).array();
  }
};

namespace detail {

struct Support {
  Index lo = 0;
  Vec weights;
};

/// Gaussian N(mean, sd^2) restricted to a sorted grid and renormalized.
inline Support gridded_gaussian(const Vec& grid, double mean, double sd, double floor) {
  const Vec dens = (-0.5 * ((grid.array() - mean) / sd).square()).exp();
  const double top = dens.maxCoeff();
  require(top > 0.0, ErrorKind::NumericalFailure, "conditional law falls outside the grid");
  Index lo = 0;
  Index hi = grid.size();
  while (lo < hi && dens(lo) < floor * top) ++lo;
  while (hi > lo && dens(hi - 1) < floor * top) --hi;
  Support s;
  s.lo = lo;
  s.weights = dens.segment(lo, hi - lo);
  s.weights /= s.weights.sum();
  return s;
}

/// Cheaper of the comonotone and anti-monotone plans. Exact when the cost
/// has the Monge property in either direction, which the first-stage cost of
/// two Gaussian laws has up to discretization noise in V_1.
inline double exact_monotone(const Mat& cost, const Vec& a, const Vec& b) {
  return std::min(monotone_ot(cost, a, b, false), monotone_ot(cost, a, b, true));
}

}  // namespace detail

/// Backward induction over the two steps; returns the V_0 approximation.
inline double nested_sinkhorn(const DiscreteInstance& inst, double lambda,
                              const SinkhornConfig& cfg = {}) {
  require(std::isfinite(lambda) && lambda >= 0.0, ErrorKind::InvalidInput,
          "lambda must be a finite non-negative number");
  require(cfg.max_iters >= 1, ErrorKind::InvalidInput, "max_iters must be >= 1");
  const Index n = inst.points();

  std::vector<detail::Support> sx, sy;
  sx.reserve(static_cast<std::size_t>(n));
  sy.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    sx.push_back(detail::gridded_gaussian(inst.grid_x2, inst.cond_mean_x(i), inst.cond_std_x(i),
                                          cfg.epsilon_floor));
    sy.push_back(detail::gridded_gaussian(inst.grid_y2, inst.cond_mean_y(i), inst.cond_std_y(i),
                                          cfg.epsilon_floor));
  }

  // Second-step costs on the full grids.
  const Mat full_cost =
      (inst.grid_x2.replicate(1, inst.grid_y2.size()).rowwise() - inst.grid_y2.transpose())
          .array()
          .square()
          .matrix();

  Mat stage1_cost(n, n);
  // Potentials on the absolute y_2 grid, carried from pair to pair.
  Vec g_abs = Vec::Zero(inst.grid_y2.size());
  Vec g_row_start = g_abs;
  for (Index i = 0; i < n; ++i) {
    const detail::Support& px = sx[static_cast<std::size_t>(i)];
    g_abs = g_row_start;
    for (Index j = 0; j < n; ++j) {
      const detail::Support& py = sy[static_cast<std::size_t>(j)];
      const Mat cost =
          full_cost.block(px.lo, py.lo, px.weights.size(), py.weights.size());
      double v = 0.0;
      if (lambda == 0.0) {
        v = monotone_ot(cost, px.weights, py.weights, false);
      } else {
        const Vec g0 = g_abs.segment(py.lo, py.weights.size());
        EntropicResult r = entropic_ot(cost, px.weights, py.weights, lambda, cfg, &g0);
        g_abs.segment(py.lo, py.weights.size()) = r.g;
        if (j == 0) g_row_start = g_abs;
        v = r.value;
      }
      const double dx = inst.grid_x1(i) - inst.grid_y1(j);
      stage1_cost(i, j) = dx * dx + v;
    }
  }

  if (lambda == 0.0) {
    return detail::exact_monotone(stage1_cost, inst.weights_x1, inst.weights_y1);
  }
  return entropic_ot(stage1_cost, inst.weights_x1, inst.weights_y1, lambda, cfg).value;
}

}  // namespace gaw
