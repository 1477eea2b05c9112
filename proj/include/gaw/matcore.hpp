#pragma once

// Small dense matrix primitives used throughout the library. Matrices are
// Eigen column-major doubles; time/block indices in this library are
// 1-based (block (1,1) is the top-left d x d block) to match the usual
// path notation x = (x_1, ..., x_T).

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "gaw/errors.hpp"
#include "gaw/tolerances.hpp"

namespace gaw {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Index = Eigen::Index;

inline bool all_finite(const Mat& x) { return x.allFinite(); }

inline double max_abs(const Mat& x) {
  return x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff();
}

inline void require_square(const Mat& x, const char* what) {
  require(x.rows() == x.cols(), ErrorKind::DimensionMismatch,
          std::string(what) + " must be square, got " + std::to_string(x.rows()) + "x" +
              std::to_string(x.cols()));
}

inline void require_finite(const Mat& x, const char* what) {
  require(all_finite(x), ErrorKind::InvalidInput, std::string(what) + " has non-finite entries");
}

/// Lower Cholesky factor with positive diagonal.
///
/// A pivot at or below `tol.spd_rel * max_i A_ii` is treated as zero and the
/// matrix is rejected as degenerate. Only the lower triangle of `a` is read.
inline Mat cholesky(const Mat& a, const Tolerances& tol = kDefaultTolerances) {
  require_square(a, "cholesky input");
  require_finite(a, "cholesky input");
  const Index n = a.rows();
  Mat l = Mat::Zero(n, n);
  if (n == 0) return l;
  const double scale = a.diagonal().maxCoeff();
  require(scale > 0.0, ErrorKind::NotPositiveDefinite,
          "largest diagonal entry is not positive; the law is degenerate");
  const double floor = tol.spd_rel * scale;
  for (Index j = 0; j < n; ++j) {
    double pivot = a(j, j) - l.row(j).head(j).squaredNorm();
    if (!(pivot > floor)) {
      fail(ErrorKind::NotPositiveDefinite,
           "pivot " + std::to_string(j) + " is " + std::to_string(pivot) +
               " (floor " + std::to_string(floor) +
               "); covariance must be non-degenerate");
    }
    const double ljj = std::sqrt(pivot);
    l(j, j) = ljj;
    for (Index i = j + 1; i < n; ++i) {
      l(i, j) = (a(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / ljj;
    }
  }
  return l;
}

/// Symmetric positive definite matrix with its cached Cholesky factor.
class SpdMat {
 public:
  static SpdMat make(Mat a, const Tolerances& tol = kDefaultTolerances) {
    require_square(a, "covariance");
    require_finite(a, "covariance");
    const double asym = max_abs(a - a.transpose());
    require(asym <= tol.symmetry_rel * std::max(max_abs(a), 1e-300), ErrorKind::InvalidInput,
            "covariance is not symmetric (max asymmetry " + std::to_string(asym) + ")");
    Mat l = cholesky(a, tol);
    return SpdMat(std::move(a), std::move(l));
  }

  Index dim() const { return value_.rows(); }
  const Mat& value() const { return value_; }
  const Mat& chol() const { return chol_; }

 private:
  SpdMat(Mat value, Mat chol) : value_(std::move(value)), chol_(std::move(chol)) {}

  Mat value_;
  Mat chol_;
};

/// X = U diag(s) V^T with s non-negative and descending.
struct Svd {
  Mat u;
  Vec s;
  Mat v;

  Mat s_matrix() const { return s.asDiagonal(); }
  Mat reconstruct() const { return u * s.asDiagonal() * v.transpose(); }
};

inline Svd svd(const Mat& x) {
  require_square(x, "svd input");
  require_finite(x, "svd input");
  const Index n = x.rows();
  if (n == 0) return {Mat(0, 0), Vec(0), Mat(0, 0)};
  if (max_abs(x) == 0.0) return {Mat::Identity(n, n), Vec::Zero(n), Mat::Identity(n, n)};
  Eigen::JacobiSVD<Mat> dec(x, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Svd out{dec.matrixU(), dec.singularValues(), dec.matrixV()};
  const double residual = max_abs(out.reconstruct() - x);
  require(residual <= 1e-10 * std::max(1.0, max_abs(x)) * static_cast<double>(n),
          ErrorKind::NumericalFailure, "SVD did not converge");
  return out;
}

inline double spectral_norm(const Mat& x) {
  require_finite(x, "spectral_norm input");
  if (x.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> dec(x);
  return dec.singularValues()(0);
}

/// Maximizer of 2 s x + (lambda/2) log(1 - x^2) over x in (-1, 1) for
/// lambda > 0; sign(s) with sign(0) = 0 for lambda = 0.
inline double f_lambda(double s, double lambda) {
  if (s == 0.0) return 0.0;
  const double sign = s > 0.0 ? 1.0 : -1.0;
  if (lambda == 0.0) return sign;
  const double c = lambda / (4.0 * std::abs(s));
  // Reciprocal form of sqrt(c^2 + 1) - c; no cancellation for large c.
  return sign / (std::hypot(c, 1.0) + c);
}

/// 2 s f(s) + (lambda/2) log(1 - f(s)^2), the per-singular-value optimum.
inline double g_lambda(double s, double lambda) {
  const double f = f_lambda(s, lambda);
  const double entropic = lambda == 0.0 ? 0.0 : 0.5 * lambda * std::log1p(-f * f);
  return 2.0 * s * f + entropic;
}

/// Block (s, t) of size d x d, 1-based.
inline Mat block(const Mat& x, Index s, Index t, Index d) {
  require(d > 0 && s >= 1 && t >= 1 && s * d <= x.rows() && t * d <= x.cols(),
          ErrorKind::IndexOutOfRange,
          "block (" + std::to_string(s) + "," + std::to_string(t) + ") with d=" +
              std::to_string(d) + " outside " + std::to_string(x.rows()) + "x" +
              std::to_string(x.cols()));
  return x.block((s - 1) * d, (t - 1) * d, d, d);
}

/// Leading ds x dt submatrix (block rows 1..s, block columns 1..t).
inline Mat leading_block(const Mat& x, Index s, Index t, Index d) {
  require(d > 0 && s >= 1 && t >= 1 && s * d <= x.rows() && t * d <= x.cols(),
          ErrorKind::IndexOutOfRange,
          "leading block (" + std::to_string(s) + "," + std::to_string(t) + ") with d=" +
              std::to_string(d) + " outside " + std::to_string(x.rows()) + "x" +
              std::to_string(x.cols()));
  return x.topLeftCorner(s * d, t * d);
}

inline Mat symmetrize(const Mat& x) { return 0.5 * (x + x.transpose()); }

/// Principal square root of a symmetric positive semidefinite matrix.
inline Mat sym_sqrt(const Mat& x) {
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(x));
  require(es.info() == Eigen::Success, ErrorKind::NumericalFailure, "eigendecomposition failed");
  Vec ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

/// Inverse principal square root of a symmetric positive definite matrix.
inline Mat sym_inv_sqrt(const Mat& x) {
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(x));
  require(es.info() == Eigen::Success, ErrorKind::NumericalFailure, "eigendecomposition failed");
  require(es.eigenvalues().minCoeff() > 0.0, ErrorKind::NotPositiveDefinite,
          "inverse square root of a singular matrix");
  Vec ev = es.eigenvalues().cwiseSqrt().cwiseInverse();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

inline double min_eigenvalue(const Mat& x) {
  if (x.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(x), Eigen::EigenvaluesOnly);
  require(es.info() == Eigen::Success, ErrorKind::NumericalFailure, "eigendecomposition failed");
  return es.eigenvalues().minCoeff();
}

/// log det of a symmetric positive semidefinite matrix; -inf when singular.
inline double log_det_spd(const Mat& x) {
  if (x.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(x), Eigen::EigenvaluesOnly);
  require(es.info() == Eigen::Success, ErrorKind::NumericalFailure, "eigendecomposition failed");
  if (es.eigenvalues().minCoeff() <= 0.0) return -std::numeric_limits<double>::infinity();
  return es.eigenvalues().array().log().sum();
}

}  // namespace gaw
