#pragma once

// Closed-form entropic adapted Wasserstein distance between Gaussian process
// laws, its optimal bi-causal coupling, and the classical entropic W2
// counterpart.
//
// With A = L L^T, B = M M^T and N_t = (M^T L)_{t,t} = U_t S_t V_t^T:
//
//   AW^2 = |a-b|^2 + tr(A+B) - 2 tr(D S) - (lambda/2) log det(I - D^2),
//   D = f_lambda(S),  P_t = V_t D_t U_t^T.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "gaw/coupling.hpp"

namespace gaw {

/// How to fill D entries for zero singular values when lambda = 0.
enum class ZeroMode {
  one,   // D_ii = 1: P_t orthogonal, the coupling is Monge
  zero,  // D_ii = 0: the lambda -> 0 limit of the entropic optimizers
};

struct SolveOptions {
  ZeroMode zero_mode = ZeroMode::one;
  Tolerances tol{};
};

struct StageSvd {
  Index t = 0;
  Mat n;  // (M^T L)_{t,t}
  Mat u;
  Vec s;
  Mat v;
};

struct SolveReport {
  double lambda = 0.0;
  double value = 0.0;          // AW^2_{2,lambda}
  double mean_term = 0.0;      // |a - b|^2
  double trace_term = 0.0;     // tr(A + B)
  double coupling_term = 0.0;  // 2 tr(D S)
  double entropy_term = 0.0;   // -(lambda/2) log det(I - D^2)
  std::vector<StageSvd> stages;
  BlockContraction p_opt = BlockContraction::identity(1, 1);
  Vec s_diag;
  Vec d_lambda_diag;
  bool unique = false;
  bool monge = false;
};

/// M^T L, whose diagonal blocks drive both the value and the optimizer.
inline Mat cross_factor(const ProcessLaw& mu, const ProcessLaw& nu) {
  return nu.chol().transpose() * mu.chol();
}

inline void require_lambda(double lambda) {
  require(std::isfinite(lambda) && lambda >= 0.0, ErrorKind::InvalidInput,
          "lambda must be a finite non-negative number");
}

inline SolveReport solve_aw(const ProcessLaw& mu, const ProcessLaw& nu, double lambda,
                            const SolveOptions& opts = {}) {
  require_same_shape(mu, nu);
  require_lambda(lambda);
  const Index d = mu.d();
  const Index steps = mu.steps();
  const Mat cross = cross_factor(mu, nu);

  SolveReport r;
  r.lambda = lambda;
  r.mean_term = (mu.mean() - nu.mean()).squaredNorm();
  r.trace_term = mu.cov().trace() + nu.cov().trace();
  r.s_diag.resize(d * steps);
  r.d_lambda_diag.resize(d * steps);

  std::vector<Mat> blocks;
  blocks.reserve(static_cast<std::size_t>(steps));
  for (Index t = 1; t <= steps; ++t) {
    StageSvd st;
    st.t = t;
    st.n = block(cross, t, t, d);
    Svd dec = svd(st.n);
    st.u = std::move(dec.u);
    st.s = std::move(dec.s);
    st.v = std::move(dec.v);
    r.s_diag.segment((t - 1) * d, d) = st.s;
    for (Index i = 0; i < d; ++i) r.d_lambda_diag((t - 1) * d + i) = f_lambda(st.s(i), lambda);
    r.stages.push_back(std::move(st));
  }

  const double s_max = r.s_diag.size() ? r.s_diag.maxCoeff() : 0.0;
  const double zero_cut = opts.tol.zero_singular_rel * s_max;
  bool all_positive = true;
  for (Index i = 0; i < r.s_diag.size(); ++i) {
    if (!(r.s_diag(i) > zero_cut)) all_positive = false;
  }
  r.unique = lambda > 0.0 || all_positive;

  double trace_ds = 0.0;
  double log_det = 0.0;
  for (Index i = 0; i < r.s_diag.size(); ++i) {
    const double dl = r.d_lambda_diag(i);
    trace_ds += dl * r.s_diag(i);
    if (lambda > 0.0) log_det += std::log1p(-dl * dl);
  }
  r.coupling_term = 2.0 * trace_ds;
  r.entropy_term = lambda > 0.0 ? -0.5 * lambda * log_det : 0.0;
  r.value = r.mean_term + r.trace_term - r.coupling_term + r.entropy_term;

  for (const StageSvd& st : r.stages) {
    Vec dvec(d);
    for (Index i = 0; i < d; ++i) {
      const double s = st.s(i);
      if (lambda > 0.0) {
        dvec(i) = f_lambda(s, lambda);
      } else if (s > zero_cut) {
        dvec(i) = 1.0;
      } else {
        dvec(i) = opts.zero_mode == ZeroMode::one ? 1.0 : 0.0;
      }
    }
    blocks.push_back(st.v * dvec.asDiagonal() * st.u.transpose());
  }
  r.p_opt = BlockContraction::make(d, std::move(blocks), opts.tol);
  r.monge = monge_check(r.p_opt, opts.tol);
  return r;
}

inline GaussianCoupling optimal_coupling(const ProcessLaw& mu, const ProcessLaw& nu,
                                         const SolveReport& report) {
  return build_coupling(mu, nu, report.p_opt);
}

struct W2Report {
  double lambda = 0.0;
  double value = 0.0;  // W^2_{2,lambda}
  Mat c_lambda;        // optimal cross covariance
  Mat k_lambda;        // A^{-1/2} C B^{-1/2}
  Mat coupling_cov;    // [[A, C], [C^T, B]]
};

/// Entropic 2-Wasserstein distance between the laws seen as Gaussians on R^{dT}.
inline W2Report solve_w2(const ProcessLaw& mu, const ProcessLaw& nu, double lambda) {
  require_same_shape(mu, nu);
  require_lambda(lambda);
  const Mat& a = mu.cov();
  const Mat& b = nu.cov();
  const Index n = mu.dim();
  const Mat a_half = sym_sqrt(a);
  const Mat a_inv_half = sym_inv_sqrt(a);
  const Mat b_inv_half = sym_inv_sqrt(b);
  const Mat inner = symmetrize(a_half * b * a_half);
  const Mat id = Mat::Identity(n, n);

  W2Report r;
  r.lambda = lambda;
  r.c_lambda = 0.5 * a_half * sym_sqrt(4.0 * inner + 0.25 * lambda * lambda * id) * a_inv_half -
               0.25 * lambda * id;
  r.k_lambda = a_inv_half * r.c_lambda * b_inv_half;
  double entropy = 0.0;
  if (lambda > 0.0) {
    entropy = -0.5 * lambda * log_det_spd(id - r.k_lambda * r.k_lambda.transpose());
  }
  r.value = (mu.mean() - nu.mean()).squaredNorm() + a.trace() + b.trace() -
            2.0 * r.c_lambda.trace() + entropy;
  r.coupling_cov.resize(2 * n, 2 * n);
  r.coupling_cov << a, r.c_lambda, r.c_lambda.transpose(), b;
  return r;
}

inline GaussianCoupling w2_coupling(const ProcessLaw& mu, const ProcessLaw& nu,
                                    const W2Report& report) {
  return coupling_from_cross(mu, nu, report.c_lambda);
}

/// sum_i g(sigma_i(N)) - sum_t g(N_tt) for N = M^T L and d = 1; equals
/// AW^2 - W^2 and is non-negative.
inline double trace_gap(const ProcessLaw& mu, const ProcessLaw& nu, double lambda) {
  require_same_shape(mu, nu);
  require_lambda(lambda);
  require(mu.d() == 1, ErrorKind::UnsupportedDimension,
          "trace gap is defined for d = 1, got d=" + std::to_string(mu.d()));
  const Mat n = cross_factor(mu, nu);
  const Svd dec = svd(n);
  double gap = 0.0;
  for (Index i = 0; i < n.rows(); ++i) {
    gap += g_lambda(dec.s(i), lambda) - g_lambda(n(i, i), lambda);
  }
  return gap;
}

}  // namespace gaw
