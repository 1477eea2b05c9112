#pragma once

// Verification engines that never touch the closed form: direct evaluation
// of the bi-causal objective of pi_P, brute-force search over block
// contractions, and Monte Carlo cost estimates.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "gaw/coupling.hpp"

namespace gaw {

/// Transport cost plus lambda * KL(pi_P | mu x nu) of the Gaussian coupling pi_P:
///   |a-b|^2 + tr(A+B) - sum_t [2 tr(P_t N_t) + (lambda/2) log det(I - P_t P_t^T)].
inline double eval_cost(const ProcessLaw& mu, const ProcessLaw& nu, const BlockContraction& p,
                        double lambda) {
  require_same_shape(mu, nu);
  require(std::isfinite(lambda) && lambda >= 0.0, ErrorKind::InvalidInput,
          "lambda must be a finite non-negative number");
  require(p.d() == mu.d() && p.steps() == mu.steps(), ErrorKind::DimensionMismatch,
          "contraction shape does not match the laws");
  const Index d = mu.d();
  const Mat cross = nu.chol().transpose() * mu.chol();
  double total = (mu.mean() - nu.mean()).squaredNorm() + mu.cov().trace() + nu.cov().trace();
  for (Index t = 1; t <= mu.steps(); ++t) {
    const Mat& pt = p.block(t);
    total -= 2.0 * (pt * block(cross, t, t, d)).trace();
    if (lambda > 0.0) {
      const double ld = log_det_spd(Mat::Identity(d, d) - pt * pt.transpose());
      require(std::isfinite(ld), ErrorKind::SingularEntropy,
              "block " + std::to_string(t) + " has unit singular value; KL is infinite");
      total -= 0.5 * lambda * ld;
    }
  }
  return total;
}

/// KL(pi_P | mu x nu) = -1/2 log det(I - P P^T).
inline double coupling_entropy(const BlockContraction& p) {
  double ld = 0.0;
  for (const Mat& b : p.blocks()) ld += log_det_spd(Mat::Identity(p.d(), p.d()) - b * b.transpose());
  return -0.5 * ld;
}

struct ParamSearchConfig {
  Index grid_points_per_axis = 201;
  Index random_restarts = 24;
  std::uint64_t seed = 1;
  // Grid points within this of the best value are reported as ties.
  double tolerance = 1e-9;
  std::uint64_t max_evaluations = 20'000'000;
  Index descent_iterations = 4000;
  std::size_t max_reported_ties = 64;
};

struct ParamSearchResult {
  double best_value = std::numeric_limits<double>::infinity();
  BlockContraction best_p = BlockContraction::identity(1, 1);
  std::vector<BlockContraction> ties;  // near-optimal grid points (d = 1 only)
  std::size_t tie_count = 0;
  std::uint64_t evaluations = 0;
};

namespace detail {

/// Per-stage objective 2 tr(P N) + (lambda/2) log det(I - P P^T); -inf on the boundary.
inline double stage_gain(const Mat& p, const Mat& n, double lambda) {
  double g = 2.0 * (p * n).trace();
  if (lambda > 0.0) {
    const double ld = log_det_spd(Mat::Identity(p.rows(), p.rows()) - p * p.transpose());
    if (!std::isfinite(ld)) return -std::numeric_limits<double>::infinity();
    g += 0.5 * lambda * ld;
  }
  return g;
}

/// Clips singular values at `cap`, the nearest point of the spectral ball.
inline Mat project_to_ball(const Mat& p, double cap) {
  Eigen::JacobiSVD<Mat> dec(p, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Vec s = dec.singularValues().cwiseMin(cap);
  return dec.matrixU() * s.asDiagonal() * dec.matrixV().transpose();
}

inline double golden_max(const std::function<double(double)>& f, double lo, double hi,
                         double xtol) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - r * (hi - lo);
  double x2 = lo + r * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  while (hi - lo > xtol) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + r * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - r * (hi - lo);
      f1 = f(x1);
    }
  }
  return 0.5 * (lo + hi);
}

inline ParamSearchResult grid_search_scalar(const ProcessLaw& mu, const ProcessLaw& nu,
                                            double lambda, const ParamSearchConfig& cfg) {
  const Index steps = mu.steps();
  const Index k = cfg.grid_points_per_axis;
  double total = 1.0;
  for (Index t = 0; t < steps; ++t) total *= static_cast<double>(k);
  require(total <= static_cast<double>(cfg.max_evaluations), ErrorKind::BudgetExceeded,
          std::to_string(k) + "^" + std::to_string(steps) + " grid evaluations exceed budget " +
              std::to_string(cfg.max_evaluations));

  std::vector<double> axis(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i) {
    axis[static_cast<std::size_t>(i)] = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(k - 1);
  }
  const std::size_t count = static_cast<std::size_t>(total);
  std::vector<double> values(count);
  std::vector<double> entries(static_cast<std::size_t>(steps));
  std::vector<std::size_t> idx(static_cast<std::size_t>(steps), 0);

  ParamSearchResult out;
  std::size_t best_flat = 0;
  for (std::size_t flat = 0; flat < count; ++flat) {
    std::size_t rem = flat;
    for (Index t = steps - 1; t >= 0; --t) {
      idx[static_cast<std::size_t>(t)] = rem % static_cast<std::size_t>(k);
      rem /= static_cast<std::size_t>(k);
      entries[static_cast<std::size_t>(t)] = axis[idx[static_cast<std::size_t>(t)]];
    }
    double v = std::numeric_limits<double>::infinity();
    const bool boundary = std::any_of(entries.begin(), entries.end(),
                                      [](double e) { return std::abs(e) >= 1.0; });
    if (lambda == 0.0 || !boundary) v = eval_cost(mu, nu, BlockContraction::diagonal(entries), lambda);
    values[flat] = v;
    ++out.evaluations;
    if (v < out.best_value) {
      out.best_value = v;
      best_flat = flat;
    }
  }

  auto entries_of = [&](std::size_t flat) {
    std::vector<double> e(static_cast<std::size_t>(steps));
    for (Index t = steps - 1; t >= 0; --t) {
      e[static_cast<std::size_t>(t)] = axis[flat % static_cast<std::size_t>(k)];
      flat /= static_cast<std::size_t>(k);
    }
    return e;
  };

  for (std::size_t flat = 0; flat < count; ++flat) {
    if (values[flat] <= out.best_value + cfg.tolerance) {
      ++out.tie_count;
      if (out.ties.size() < cfg.max_reported_ties) {
        out.ties.push_back(BlockContraction::diagonal(entries_of(flat)));
      }
    }
  }

  std::vector<double> best = entries_of(best_flat);
  if (lambda > 0.0) {
    // The objective is strictly concave in each entry; refine axis by axis
    // inside the bracketing grid cell.
    const double h = 2.0 / static_cast<double>(k - 1);
    const double edge = 1.0 - 1e-15;
    for (int sweep = 0; sweep < 3; ++sweep) {
      for (Index t = 0; t < steps; ++t) {
        const std::size_t ti = static_cast<std::size_t>(t);
        const double lo = std::max(-edge, best[ti] - h);
        const double hi = std::min(edge, best[ti] + h);
        auto f = [&](double x) {
          std::vector<double> e = best;
          e[ti] = x;
          ++out.evaluations;
          return -eval_cost(mu, nu, BlockContraction::diagonal(e), lambda);
        };
        best[ti] = golden_max(f, lo, hi, 1e-12);
      }
    }
    const double refined = eval_cost(mu, nu, BlockContraction::diagonal(best), lambda);
    if (refined < out.best_value) out.best_value = refined;
  }
  out.best_p = BlockContraction::diagonal(best);
  return out;
}

inline Mat random_contraction(Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Mat g(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) g(i, j) = normal(rng);
  const double norm = spectral_norm(g);
  return norm > 0.0 ? Mat(g * (unif(rng) / norm)) : g;
}

inline ParamSearchResult descent_search(const ProcessLaw& mu, const ProcessLaw& nu, double lambda,
                                        const ParamSearchConfig& cfg) {
  const Index d = mu.d();
  const Index steps = mu.steps();
  const Mat cross = nu.chol().transpose() * mu.chol();
  std::vector<Mat> n_blocks;
  for (Index t = 1; t <= steps; ++t) n_blocks.push_back(block(cross, t, t, d));
  const double cap = lambda > 0.0 ? 1.0 - 1e-9 : 1.0;
  const Mat id = Mat::Identity(d, d);

  ParamSearchResult out;
  require(cfg.random_restarts >= 1, ErrorKind::InvalidInput, "random_restarts must be >= 1");
  std::vector<Mat> best_blocks;
  double best_gain = -std::numeric_limits<double>::infinity();
  for (Index restart = 0; restart < cfg.random_restarts; ++restart) {
    // Restart streams depend only on (seed, restart).
    std::seed_seq seq{static_cast<std::uint64_t>(cfg.seed), static_cast<std::uint64_t>(restart)};
    std::mt19937_64 rng(seq);
    std::vector<Mat> blocks;
    double gain_total = 0.0;
    for (Index t = 0; t < steps; ++t) {
      const Mat& n = n_blocks[static_cast<std::size_t>(t)];
      Mat p = project_to_ball(random_contraction(d, rng), cap);
      double g = stage_gain(p, n, lambda);
      double step = 0.5;
      for (Index it = 0; it < cfg.descent_iterations; ++it) {
        Mat grad = 2.0 * n.transpose();
        if (lambda > 0.0) grad -= lambda * (id - p * p.transpose()).ldlt().solve(p);
        bool moved = false;
        while (step > 1e-14) {
          Mat cand = project_to_ball(p + step * grad, cap);
          const double gc = stage_gain(cand, n, lambda);
          out.evaluations += 1;
          if (gc > g) {
            moved = max_abs(cand - p) > 0.0;
            p = std::move(cand);
            g = gc;
            step *= 2.0;
            break;
          }
          step *= 0.5;
        }
        if (!moved) break;
      }
      gain_total += g;
      blocks.push_back(std::move(p));
    }
    if (gain_total > best_gain) {
      best_gain = gain_total;
      best_blocks = blocks;
    }
  }
  out.best_p = BlockContraction::make(d, best_blocks);
  out.best_value = eval_cost(mu, nu, out.best_p, lambda);
  return out;
}

}  // namespace detail

/// Minimizes eval_cost over block contractions: an exhaustive grid over the
/// diagonal entries (with golden-section refinement when lambda > 0) for d = 1,
/// random-restart projected ascent on each block for d > 1.
inline ParamSearchResult param_search(const ProcessLaw& mu, const ProcessLaw& nu, double lambda,
                                      const ParamSearchConfig& cfg = {}) {
  require_same_shape(mu, nu);
  require(std::isfinite(lambda) && lambda >= 0.0, ErrorKind::InvalidInput,
          "lambda must be a finite non-negative number");
  require(cfg.grid_points_per_axis >= 3, ErrorKind::InvalidInput,
          "grid_points_per_axis must be >= 3");
  if (mu.d() == 1) return detail::grid_search_scalar(mu, nu, lambda, cfg);
  return detail::descent_search(mu, nu, lambda, cfg);
}

// ---------------------------------------------------------------------------
// Monte Carlo

/// Draws one (x, y) pair from a coupling.
using PairSampler = std::function<void(std::mt19937_64&, Vec& x, Vec& y)>;

/// A coupling to be checked by simulation, with its KL against mu x nu
/// supplied analytically (+inf when the coupling is singular).
struct CouplingSource {
  PairSampler sample;
  double kl = 0.0;
};

struct CostEstimate {
  double transport_mean = 0.0;
  double transport_stderr = 0.0;
  double kl = 0.0;
  double objective = 0.0;  // transport_mean + lambda * kl (kl ignored when lambda = 0)
  std::size_t samples = 0;
};

inline CostEstimate sample_cost_estimate(const CouplingSource& source, double lambda,
                                         std::size_t n_samples, std::uint64_t seed) {
  require(n_samples >= 1, ErrorKind::InvalidInput, "n_samples must be >= 1");
  std::mt19937_64 rng(seed);
  Vec x, y;
  // Welford accumulation.
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    source.sample(rng, x, y);
    const double c = (x - y).squaredNorm();
    const double delta = c - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (c - mean);
  }
  CostEstimate out;
  out.samples = n_samples;
  out.transport_mean = mean;
  const double var = n_samples > 1 ? m2 / static_cast<double>(n_samples - 1) : 0.0;
  out.transport_stderr = std::sqrt(var / static_cast<double>(n_samples));
  out.kl = source.kl;
  out.objective = lambda > 0.0 ? mean + lambda * source.kl : mean;
  return out;
}

/// Samples pi_P as (a + L Z, b + M (P^T Z + (I - P^T P)^{1/2} W)) with Z, W iid N(0, I).
inline CouplingSource gaussian_coupling_source(const ProcessLaw& mu, const ProcessLaw& nu,
                                               const BlockContraction& p) {
  require_same_shape(mu, nu);
  const Mat pd = p.dense();
  const Index n = mu.dim();
  const Mat resid = sym_sqrt(Mat::Identity(n, n) - pd.transpose() * pd);
  CouplingSource src;
  src.sample = [a = mu.mean(), b = nu.mean(), l = mu.chol(), m = nu.chol(), pt = Mat(pd.transpose()),
                resid, n](std::mt19937_64& rng, Vec& x, Vec& y) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vec z(n), w(n);
    for (Index i = 0; i < n; ++i) z(i) = normal(rng);
    for (Index i = 0; i < n; ++i) w(i) = normal(rng);
    x = a + l * z;
    y = b + m * (pt * z + resid * w);
  };
  const double ld = [&] {
    double s = 0.0;
    for (const Mat& blk : p.blocks())
      s += log_det_spd(Mat::Identity(p.d(), p.d()) - blk * blk.transpose());
    return s;
  }();
  src.kl = std::isfinite(ld) ? -0.5 * ld : std::numeric_limits<double>::infinity();
  return src;
}

/// Non-Gaussian bi-causal coupling for d = 1, T = 2: Z^Y_1 = W Z_1 with W a
/// fair +-1 coin independent of everything, Z^Y_2 = Z_2. Both mixture
/// components (P_1 = +1 and P_1 = -1) are singular, so its KL is +inf; it is
/// only meaningful as an unregularized optimizer when (M^T L)_{1,1} = 0.
inline CouplingSource coin_flip_mixture_source(const ProcessLaw& mu, const ProcessLaw& nu) {
  require_same_shape(mu, nu);
  require(mu.d() == 1 && mu.steps() == 2, ErrorKind::UnsupportedDimension,
          "the coin-flip mixture is defined for d = 1, T = 2");
  CouplingSource src;
  src.sample = [a = mu.mean(), b = nu.mean(), l = mu.chol(), m = nu.chol()](std::mt19937_64& rng,
                                                                           Vec& x, Vec& y) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::bernoulli_distribution coin(0.5);
    Vec zx(2), zy(2);
    zx(0) = normal(rng);
    zx(1) = normal(rng);
    const double w = coin(rng) ? 1.0 : -1.0;
    zy(0) = w * zx(0);
    zy(1) = zx(1);
    x = a + l * zx;
    y = b + m * zy;
  };
  src.kl = std::numeric_limits<double>::infinity();
  return src;
}

}  // namespace gaw
