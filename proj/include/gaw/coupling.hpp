#pragma once

// Gaussian bi-causal couplings pi_P between two process laws. Every such
// coupling has cross covariance L P M^T for a block-diagonal contraction P.

#include <string>
#include <utility>
#include <vector>

#include "gaw/gausslaw.hpp"

namespace gaw {

/// Block-diagonal P = diag(P_1, ..., P_T) with each d x d block a contraction.
class BlockContraction {
 public:
  static BlockContraction make(Index d, std::vector<Mat> blocks,
                               const Tolerances& tol = kDefaultTolerances) {
    require(d >= 1 && !blocks.empty(), ErrorKind::DimensionMismatch,
            "block contraction needs d >= 1 and at least one block");
    for (std::size_t t = 0; t < blocks.size(); ++t) {
      const Mat& b = blocks[t];
      require(b.rows() == d && b.cols() == d, ErrorKind::DimensionMismatch,
              "block " + std::to_string(t + 1) + " is " + std::to_string(b.rows()) + "x" +
                  std::to_string(b.cols()) + ", expected " + std::to_string(d) + "x" +
                  std::to_string(d));
      require_finite(b, "contraction block");
      const double norm = spectral_norm(b);
      require(norm <= 1.0 + tol.contraction, ErrorKind::ContractionViolation,
              "block " + std::to_string(t + 1) + " has spectral norm " + std::to_string(norm));
    }
    return BlockContraction(d, std::move(blocks));
  }

  static BlockContraction identity(Index d, Index steps) {
    return BlockContraction(d, std::vector<Mat>(static_cast<std::size_t>(steps),
                                                Mat::Identity(d, d)));
  }

  static BlockContraction zero(Index d, Index steps) {
    return BlockContraction(d, std::vector<Mat>(static_cast<std::size_t>(steps), Mat::Zero(d, d)));
  }

  /// Diagonal P for d = 1 with the given entries.
  static BlockContraction diagonal(const std::vector<double>& entries,
                                   const Tolerances& tol = kDefaultTolerances) {
    std::vector<Mat> blocks;
    blocks.reserve(entries.size());
    for (double e : entries) blocks.push_back(Mat::Constant(1, 1, e));
    return make(1, std::move(blocks), tol);
  }

  Index d() const { return d_; }
  Index steps() const { return static_cast<Index>(blocks_.size()); }
  const std::vector<Mat>& blocks() const { return blocks_; }
  /// Block P_t, 1-based.
  const Mat& block(Index t) const {
    require(t >= 1 && t <= steps(), ErrorKind::IndexOutOfRange,
            "block " + std::to_string(t) + " outside 1.." + std::to_string(steps()));
    return blocks_[static_cast<std::size_t>(t - 1)];
  }

  Mat dense() const {
    const Index n = d_ * steps();
    Mat p = Mat::Zero(n, n);
    for (Index t = 0; t < steps(); ++t) {
      p.block(t * d_, t * d_, d_, d_) = blocks_[static_cast<std::size_t>(t)];
    }
    return p;
  }

 private:
  BlockContraction(Index d, std::vector<Mat> blocks) : d_(d), blocks_(std::move(blocks)) {}

  Index d_;
  std::vector<Mat> blocks_;
};

/// Gaussian law on R^{2dT} for the pair (X, Y).
class GaussianCoupling {
 public:
  GaussianCoupling(Index d, Index steps, Vec mean, Mat cov)
      : d_(d), steps_(steps), mean_(std::move(mean)), cov_(std::move(cov)) {
    const Index n = 2 * d * steps;
    require(mean_.size() == n && cov_.rows() == n && cov_.cols() == n,
            ErrorKind::DimensionMismatch, "coupling moments do not match 2dT");
  }

  Index d() const { return d_; }
  Index steps() const { return steps_; }
  Index dim() const { return d_ * steps_; }
  const Vec& mean() const { return mean_; }
  const Mat& cov() const { return cov_; }

  Vec mean_x() const { return mean_.head(dim()); }
  Vec mean_y() const { return mean_.tail(dim()); }
  Mat cov_xx() const { return cov_.topLeftCorner(dim(), dim()); }
  Mat cov_yy() const { return cov_.bottomRightCorner(dim(), dim()); }
  /// Cross block E[(X - a)(Y - b)^T].
  Mat cross() const { return cov_.topRightCorner(dim(), dim()); }

 private:
  Index d_;
  Index steps_;
  Vec mean_;
  Mat cov_;
};

inline GaussianCoupling coupling_from_cross(const ProcessLaw& mu, const ProcessLaw& nu,
                                            const Mat& cross) {
  require_same_shape(mu, nu);
  const Index n = mu.dim();
  require(cross.rows() == n && cross.cols() == n, ErrorKind::DimensionMismatch,
          "cross covariance must be dT x dT");
  Vec mean(2 * n);
  mean << mu.mean(), nu.mean();
  Mat cov(2 * n, 2 * n);
  cov << mu.cov(), cross, cross.transpose(), nu.cov();
  return GaussianCoupling(mu.d(), mu.steps(), std::move(mean), std::move(cov));
}

/// pi_P with cross block L P M^T.
inline GaussianCoupling build_coupling(const ProcessLaw& mu, const ProcessLaw& nu,
                                       const BlockContraction& p) {
  require_same_shape(mu, nu);
  require(p.d() == mu.d() && p.steps() == mu.steps(), ErrorKind::DimensionMismatch,
          "contraction shape does not match the laws");
  return coupling_from_cross(mu, nu, mu.chol() * p.dense() * nu.chol().transpose());
}

struct BicausalCheck {
  bool bicausal = false;
  Mat p;                         // L^{-1} C M^{-T}
  double off_block_max = 0.0;    // largest |entry| outside the diagonal blocks
  double max_block_norm = 0.0;   // largest ||P_t||_2
};

/// Tests a Gaussian coupling of (mu, nu) for bi-causality.
inline BicausalCheck is_bicausal(const ProcessLaw& mu, const ProcessLaw& nu,
                                 const GaussianCoupling& coupling,
                                 const Tolerances& tol = kDefaultTolerances) {
  require_same_shape(mu, nu);
  require(coupling.d() == mu.d() && coupling.steps() == mu.steps(),
          ErrorKind::DimensionMismatch, "coupling shape does not match the laws");
  const double ax = max_abs(coupling.cov_xx() - mu.cov());
  const double by = max_abs(coupling.cov_yy() - nu.cov());
  require(ax <= tol.marginal_rel * std::max(1.0, max_abs(mu.cov())) &&
              by <= tol.marginal_rel * std::max(1.0, max_abs(nu.cov())),
          ErrorKind::MarginalMismatch,
          "coupling marginals differ from the laws (" + std::to_string(ax) + ", " +
              std::to_string(by) + ")");
  require(max_abs(coupling.mean_x() - mu.mean()) <= tol.marginal_rel * (1.0 + max_abs(mu.mean())) &&
              max_abs(coupling.mean_y() - nu.mean()) <=
                  tol.marginal_rel * (1.0 + max_abs(nu.mean())),
          ErrorKind::MarginalMismatch, "coupling means differ from the laws");

  const auto l = mu.chol().triangularView<Eigen::Lower>();
  const auto m = nu.chol().triangularView<Eigen::Lower>();
  // P = L^{-1} C M^{-T}  =>  (M^{-1} (L^{-1} C)^T)^T
  const Mat lc = l.solve(coupling.cross());
  BicausalCheck out;
  out.p = m.solve(lc.transpose()).transpose();

  const Index d = mu.d();
  const Index steps = mu.steps();
  for (Index s = 0; s < steps; ++s) {
    for (Index t = 0; t < steps; ++t) {
      const Mat blk = out.p.block(s * d, t * d, d, d);
      if (s == t) {
        out.max_block_norm = std::max(out.max_block_norm, spectral_norm(blk));
      } else {
        out.off_block_max = std::max(out.off_block_max, max_abs(blk));
      }
    }
  }
  out.bicausal =
      out.off_block_max <= tol.bicausal && out.max_block_norm <= 1.0 + tol.contraction;
  return out;
}

/// Largest ||P_t P_t^T - I||_2 over the blocks.
inline double monge_defect(const BlockContraction& p) {
  double worst = 0.0;
  for (const Mat& b : p.blocks()) {
    worst = std::max(worst, spectral_norm(b * b.transpose() - Mat::Identity(p.d(), p.d())));
  }
  return worst;
}

/// pi_P is supported on the graph of a map iff P P^T = I.
inline bool monge_check(const BlockContraction& p, const Tolerances& tol = kDefaultTolerances) {
  return monge_defect(p) <= tol.monge;
}

/// Affine map y = H x + offset pushing mu onto nu.
struct MongeMap {
  Mat h;
  Vec offset;

  Vec apply(const Vec& x) const { return h * x + offset; }
};

inline MongeMap monge_map(const ProcessLaw& mu, const ProcessLaw& nu, const BlockContraction& p,
                          const Tolerances& tol = kDefaultTolerances) {
  require_same_shape(mu, nu);
  require(p.d() == mu.d() && p.steps() == mu.steps(), ErrorKind::DimensionMismatch,
          "contraction shape does not match the laws");
  const double defect = monge_defect(p);
  require(defect <= tol.monge, ErrorKind::NotMonge,
          "P P^T deviates from I by " + std::to_string(defect));
  // H = M P^T L^{-1}  =>  H^T = L^{-T} P M^T
  const Mat pt_mt = p.dense() * nu.chol().transpose();
  const Mat ht = mu.chol().transpose().triangularView<Eigen::Upper>().solve(pt_mt);
  MongeMap out{ht.transpose(), Vec()};
  out.offset = nu.mean() - out.h * mu.mean();
  return out;
}

/// Largest |entry| of H strictly above the block diagonal.
inline double upper_block_max(const Mat& h, Index d) {
  const Index steps = h.rows() / d;
  double worst = 0.0;
  for (Index s = 0; s < steps; ++s) {
    for (Index t = s + 1; t < steps; ++t) {
      worst = std::max(worst, max_abs(h.block(s * d, t * d, d, d)));
    }
  }
  return worst;
}

struct Interpolant {
  double t = 0.0;
  Vec mean;
  Mat cov;
  double min_eigenvalue = 0.0;
};

/// Law of (1 - t) X + t Y for (X, Y) drawn from the coupling.
inline Interpolant interpolate(const GaussianCoupling& coupling, double t) {
  require(t >= 0.0 && t <= 1.0, ErrorKind::InvalidInput,
          "interpolation time " + std::to_string(t) + " outside [0,1]");
  const double s = 1.0 - t;
  Interpolant out;
  out.t = t;
  out.mean = s * coupling.mean_x() + t * coupling.mean_y();
  const Mat c = coupling.cross();
  out.cov = s * s * coupling.cov_xx() + s * t * (c + c.transpose()) + t * t * coupling.cov_yy();
  out.min_eigenvalue = min_eigenvalue(out.cov);
  return out;
}

}  // namespace gaw
