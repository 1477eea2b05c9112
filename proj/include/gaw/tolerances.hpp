#pragma once

namespace gaw {

// Default numerical thresholds. Every function that consumes one of these
// also accepts a `Tolerances` argument so callers can override them.
struct Tolerances {
  // Cholesky pivot floor, relative to the largest diagonal entry.
  double spd_rel = 1e-10;
  // Allowed asymmetry of a covariance, relative to its max-abs entry.
  double symmetry_rel = 1e-12;
  // A singular value counts as zero below zero_rel * max singular value.
  double zero_singular_rel = 1e-9;
  // Slack on ||P_t||_2 <= 1.
  double contraction = 1e-9;
  // Max |entry| of off-diagonal blocks of L^{-1} C M^{-T} for bi-causality.
  double bicausal = 1e-9;
  // max_t ||P_t P_t^T - I|| for the Monge criterion.
  double monge = 1e-9;
  // Relative marginal agreement for couplings.
  double marginal_rel = 1e-10;
  // Block lower triangularity check for Monge maps.
  double triangular = 1e-10;
};

inline constexpr Tolerances kDefaultTolerances{};

}  // namespace gaw
