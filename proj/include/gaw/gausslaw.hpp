#pragma once

// Non-degenerate Gaussian laws of R^d-valued processes with T steps, stored
// as a mean in R^{dT} and a covariance with its cached lower Cholesky factor.

#include <string>
#include <utility>

#include "gaw/matcore.hpp"

namespace gaw {

class ProcessLaw {
 public:
  static ProcessLaw make(Index d, Index steps, Vec mean, Mat cov,
                         const Tolerances& tol = kDefaultTolerances) {
    require(d >= 1 && steps >= 1, ErrorKind::DimensionMismatch,
            "d and T must be positive (got d=" + std::to_string(d) + ", T=" +
                std::to_string(steps) + ")");
    const Index n = d * steps;
    require(mean.size() == n, ErrorKind::DimensionMismatch,
            "mean has length " + std::to_string(mean.size()) + ", expected d*T=" +
                std::to_string(n));
    require(cov.rows() == n && cov.cols() == n, ErrorKind::DimensionMismatch,
            "covariance is " + std::to_string(cov.rows()) + "x" + std::to_string(cov.cols()) +
                ", expected " + std::to_string(n) + "x" + std::to_string(n));
    require_finite(mean, "mean");
    return ProcessLaw(d, steps, std::move(mean), SpdMat::make(std::move(cov), tol));
  }

  Index d() const { return d_; }
  Index steps() const { return steps_; }
  Index dim() const { return d_ * steps_; }
  const Vec& mean() const { return mean_; }
  const Mat& cov() const { return cov_.value(); }
  const Mat& chol() const { return cov_.chol(); }

 private:
  ProcessLaw(Index d, Index steps, Vec mean, SpdMat cov)
      : d_(d), steps_(steps), mean_(std::move(mean)), cov_(std::move(cov)) {}

  Index d_;
  Index steps_;
  Vec mean_;
  SpdMat cov_;
};

inline ProcessLaw make_law(Index d, Index steps, Vec mean, Mat cov,
                           const Tolerances& tol = kDefaultTolerances) {
  return ProcessLaw::make(d, steps, std::move(mean), std::move(cov), tol);
}

inline void require_same_shape(const ProcessLaw& mu, const ProcessLaw& nu) {
  require(mu.d() == nu.d() && mu.steps() == nu.steps(), ErrorKind::DimensionMismatch,
          "laws differ in shape: (d=" + std::to_string(mu.d()) + ",T=" +
              std::to_string(mu.steps()) + ") vs (d=" + std::to_string(nu.d()) + ",T=" +
              std::to_string(nu.steps()) + ")");
}

struct GaussianMoments {
  Vec mean;
  Mat cov;
};

/// Law of x_{>t} given x_{<=t}. The covariance does not depend on the
/// conditioning point, so it is computed once and reused.
struct ConditionalLaw {
  Index t = 0;
  Mat mean_shift;  // L_{>t,<=t} L_{<=t,<=t}^{-1}
  Vec head_mean;   // a_{<=t}
  Vec base_mean;   // a_{>t}
  Mat cov;         // L_{>t,>t} L_{>t,>t}^T

  Vec mean_at(const Vec& x_head) const {
    require(x_head.size() == head_mean.size(), ErrorKind::DimensionMismatch,
            "conditioning vector has length " + std::to_string(x_head.size()) +
                ", expected " + std::to_string(head_mean.size()));
    return base_mean + mean_shift * (x_head - head_mean);
  }
};

/// Conditional law given the first t steps, 1 <= t <= T-1, from Cholesky blocks.
inline ConditionalLaw conditional_law(const ProcessLaw& law, Index t) {
  require(t >= 1 && t <= law.steps() - 1, ErrorKind::IndexOutOfRange,
          "conditioning step " + std::to_string(t) + " outside 1.." +
              std::to_string(law.steps() - 1));
  const Index head = law.d() * t;
  const Index tail = law.dim() - head;
  const Mat& l = law.chol();
  const Mat l_head = l.topLeftCorner(head, head);
  const Mat l_cross = l.bottomLeftCorner(tail, head);
  const Mat l_tail = l.bottomRightCorner(tail, tail);

  ConditionalLaw out;
  out.t = t;
  // X (L_hh) = L_th  <=>  L_hh^T X^T = L_th^T
  out.mean_shift = l_head.transpose()
                       .triangularView<Eigen::Upper>()
                       .solve(l_cross.transpose())
                       .transpose();
  out.head_mean = law.mean().head(head);
  out.base_mean = law.mean().tail(tail);
  out.cov = l_tail * l_tail.transpose();
  return out;
}

inline GaussianMoments condition(const ProcessLaw& law, Index t, const Vec& x_head) {
  ConditionalLaw c = conditional_law(law, t);
  Vec m = c.mean_at(x_head);
  return {std::move(m), std::move(c.cov)};
}

/// KL(p | q) between Gaussians on the same space.
inline double kl_gaussians(const GaussianMoments& p, const GaussianMoments& q) {
  const Index n = p.mean.size();
  require(q.mean.size() == n && p.cov.rows() == n && p.cov.cols() == n && q.cov.rows() == n &&
              q.cov.cols() == n,
          ErrorKind::DimensionMismatch, "KL arguments have different dimensions");
  const Mat lp = cholesky(symmetrize(p.cov));
  const Mat lq = cholesky(symmetrize(q.cov));
  const auto lq_view = lq.triangularView<Eigen::Lower>();
  const Mat w = lq_view.solve(lp);  // L_q^{-1} L_p, so tr(Q^{-1} P) = ||w||_F^2
  const Vec z = lq_view.solve(q.mean - p.mean);
  const double log_det_q = 2.0 * lq.diagonal().array().log().sum();
  const double log_det_p = 2.0 * lp.diagonal().array().log().sum();
  const double kl =
      0.5 * (w.squaredNorm() - static_cast<double>(n) + z.squaredNorm() + log_det_q - log_det_p);
  return std::max(kl, 0.0);
}

}  // namespace gaw
