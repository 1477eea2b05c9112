#pragma once

// Random instance generators and reference computations that avoid the
// library's own code paths (no Cholesky, no SVD).

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "gaw/gaw.hpp"

namespace gaw::testing {

inline Mat random_matrix(Index r, Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Mat m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = n(rng);
  return m;
}

/// SPD with eigenvalues bounded away from zero.
inline Mat random_spd(Index n, std::mt19937_64& rng, double floor = 0.2) {
  const Mat g = random_matrix(n, n, rng);
  return symmetrize(g * g.transpose() / static_cast<double>(n) + floor * Mat::Identity(n, n));
}

/// Largest singular value by power iteration on X^T X.
inline double power_norm(const Mat& x, int iters = 2000) {
  if (x.norm() == 0.0) return 0.0;
  Vec v = Vec::Ones(x.cols()) / std::sqrt(static_cast<double>(x.cols()));
  v(0) += 0.1;
  double lambda = 0.0;
  for (int i = 0; i < iters; ++i) {
    Vec w = x.transpose() * (x * v);
    lambda = w.norm();
    if (lambda == 0.0) return 0.0;
    v = w / lambda;
  }
  return std::sqrt(lambda);
}

/// Singular values of a 2x2 matrix from the characteristic polynomial of X^T X.
inline std::pair<double, double> singular_values_2x2(const Mat& x) {
  const Mat g = x.transpose() * x;
  const double tr = g.trace();
  const double det = g.determinant();
  const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
  return {std::sqrt(tr / 2.0 + disc), std::sqrt(std::max(0.0, tr / 2.0 - disc))};
}

/// d x d block with spectral norm exactly `norm` (up to power-iteration accuracy).
inline Mat contraction_with_norm(Index d, double norm, std::mt19937_64& rng) {
  const Mat g = random_matrix(d, d, rng);
  return g * (norm / power_norm(g));
}

inline BlockContraction random_block_contraction(Index d, Index steps, std::mt19937_64& rng,
                                                 double max_norm = 1.0) {
  std::uniform_real_distribution<double> u(0.0, max_norm);
  std::vector<Mat> blocks;
  for (Index t = 0; t < steps; ++t) blocks.push_back(contraction_with_norm(d, u(rng), rng));
  return BlockContraction::make(d, std::move(blocks));
}

inline ProcessLaw random_law(Index d, Index steps, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec mean(d * steps);
  for (Index i = 0; i < mean.size(); ++i) mean(i) = n(rng);
  return make_law(d, steps, mean, random_spd(d * steps, rng));
}

/// Conditional law by the Schur complement, using LU solves only.
inline GaussianMoments schur_condition(const Vec& mean, const Mat& cov, Index head,
                                       const Vec& x_head) {
  const Index tail = cov.rows() - head;
  const Mat saa = cov.topLeftCorner(head, head);
  const Mat sba = cov.bottomLeftCorner(tail, head);
  const Mat sbb = cov.bottomRightCorner(tail, tail);
  const Eigen::PartialPivLU<Mat> lu(saa);
  GaussianMoments out;
  out.mean = mean.tail(tail) + sba * lu.solve(x_head - mean.head(head));
  out.cov = sbb - sba * lu.solve(Mat(sba.transpose()));
  return out;
}

/// Textbook Gaussian KL with LU determinants and an explicit inverse.
inline double kl_reference(const Vec& mp, const Mat& cp, const Vec& mq, const Mat& cq) {
  const Eigen::PartialPivLU<Mat> lq(cq);
  const Mat qinv = lq.inverse();
  const Vec dm = mq - mp;
  const double n = static_cast<double>(mp.size());
  return 0.5 * ((qinv * cp).trace() - n + dm.dot(qinv * dm) +
                std::log(cq.determinant()) - std::log(cp.determinant()));
}

/// argmax over a dense grid of x in (-1, 1) of 2 s x + (lambda/2) log(1 - x^2).
inline double f_lambda_grid(double s, double lambda, int points = 2'000'001) {
  double best = -1.0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (int i = 1; i < points - 1; ++i) {
    const double x = -1.0 + 2.0 * i / (points - 1);
    const double v = 2.0 * s * x + 0.5 * lambda * std::log1p(-x * x);
    if (v > best_val) {
      best_val = v;
      best = x;
    }
  }
  return best;
}

/// Scale a law so that ||cov||_2 <= cap.
inline ProcessLaw capped_law(Index d, Index steps, std::mt19937_64& rng, double cap) {
  const ProcessLaw base = random_law(d, steps, rng);
  const double norm = power_norm(base.cov());
  const double s = norm > cap ? cap / norm : 1.0;
  return make_law(d, steps, base.mean(), symmetrize(s * base.cov()));
}

}  // namespace gaw::testing
