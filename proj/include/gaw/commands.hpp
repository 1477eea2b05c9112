#pragma once

// The solve / verify / interpolate / examples commands, independent of any
// argument parser.

#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gaw/instances.hpp"
#include "gaw/io.hpp"
#include "gaw/oracle.hpp"
#include "gaw/sinkhorn.hpp"
#include "gaw/solver.hpp"

namespace gaw {

enum ExitCode : int {
  kExitOk = 0,
  kExitInputError = 2,
  kExitGapExceeded = 3,
  kExitNumericalFailure = 4,
};

inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NumericalFailure:
    case ErrorKind::SingularEntropy:
    case ErrorKind::BudgetExceeded:
    case ErrorKind::SinkhornDiverged:
      return kExitNumericalFailure;
    default:
      return kExitInputError;
  }
}

struct SolveFlags {
  std::optional<double> lambda;
  ZeroMode zero_mode = ZeroMode::one;
  bool with_w2 = false;
};

inline double effective_lambda(const InstanceFile& inst, const std::optional<double>& lambda) {
  const double l = lambda.value_or(inst.lambda);
  require_lambda(l);
  return l;
}

inline ResultFile cmd_solve(const InstanceFile& inst, const SolveFlags& flags = {}) {
  const ProcessLaw mu = inst.mu();
  const ProcessLaw nu = inst.nu();
  const double lambda = effective_lambda(inst, flags.lambda);
  const SolveReport report = solve_aw(mu, nu, lambda, {flags.zero_mode, kDefaultTolerances});
  ResultFile out = ResultFile::from_report(mu, nu, report);
  if (flags.with_w2) out.add_w2(solve_w2(mu, nu, lambda));
  if (inst.p_override) {
    const BlockContraction p = BlockContraction::make(inst.d, *inst.p_override);
    const double cost = eval_cost(mu, nu, p, lambda);
    out.doc["override"] = {{"P", detail::blocks_json(p)},
                           {"cost", cost},
                           {"monge", monge_check(p)},
                           {"gap", cost - report.value}};
  }
  return out;
}

enum class OracleChoice { param, dp, both };

struct VerifyFlags {
  SolveFlags solve;
  OracleChoice oracle = OracleChoice::param;
  std::optional<Index> grid;  // points per axis (param) and per stage (dp)
  std::uint64_t seed = 1;
};

struct VerifyTolerances {
  double param_grid = 1e-6;
  double param_descent = 1e-4;
  double dp = 2e-2;
};

inline double relative_gap(double oracle, double closed) {
  return std::abs(oracle - closed) / std::max(1.0, std::abs(closed));
}

struct VerifyOutcome {
  ResultFile result;
  bool within_tolerance = true;
};

inline VerifyOutcome cmd_verify(const InstanceFile& inst, const VerifyFlags& flags = {},
                                const VerifyTolerances& tols = {}) {
  const bool use_dp = flags.oracle != OracleChoice::param;
  const bool use_param = flags.oracle != OracleChoice::dp;
  if (use_dp) {
    require(inst.d == 1 && inst.steps == 2, ErrorKind::UnsupportedDimension,
            "the dp oracle needs d = 1 and T = 2 (got d=" + std::to_string(inst.d) +
                ", T=" + std::to_string(inst.steps) + ")");
  }
  VerifyOutcome out{cmd_solve(inst, flags.solve), true};
  const ProcessLaw mu = inst.mu();
  const ProcessLaw nu = inst.nu();
  const double lambda = effective_lambda(inst, flags.solve.lambda);
  const double closed = out.result.doc["value"].get<double>();

  Json oracle;
  if (use_param) {
    ParamSearchConfig cfg;
    cfg.seed = flags.seed;
    if (flags.grid) cfg.grid_points_per_axis = *flags.grid;
    const ParamSearchResult ps = param_search(mu, nu, lambda, cfg);
    const bool grid = inst.d == 1;
    const double tol = grid ? tols.param_grid : tols.param_descent;
    const double gap = relative_gap(ps.best_value, closed);
    Json ties = Json::array();
    for (const BlockContraction& p : ps.ties) ties.push_back(detail::blocks_json(p));
    Json param = {{"method", grid ? "grid" : "descent"},
                  {"value", ps.best_value},
                  {"gap", gap},
                  {"tolerance", tol},
                  {"P", detail::blocks_json(ps.best_p)},
                  {"tie_count", ps.tie_count},
                  {"ties", std::move(ties)},
                  {"evaluations", ps.evaluations}};
    if (inst.steps == 1) {
      param["w2_gap"] = relative_gap(ps.best_value, solve_w2(mu, nu, lambda).value);
    }
    out.within_tolerance = out.within_tolerance && gap <= tol;
    oracle["param"] = std::move(param);
  }
  if (use_dp) {
    const Index points = flags.grid.value_or(120);
    const double v = nested_sinkhorn(DiscreteInstance::build(mu, nu, points), lambda);
    const double gap = relative_gap(v, closed);
    oracle["dp"] = {{"value", v}, {"gap", gap}, {"tolerance", tols.dp}, {"grid", points}};
    out.within_tolerance = out.within_tolerance && gap <= tols.dp;
  }
  oracle["within_tolerance"] = out.within_tolerance;
  out.result.doc["oracle"] = std::move(oracle);
  return out;
}

enum class Which { aw, aw_reg, w2, w2_reg };

struct InterpolateFlags {
  std::optional<double> lambda;
  std::optional<std::vector<double>> times;
  Which which = Which::aw;
  ZeroMode zero_mode = ZeroMode::one;
};

inline std::vector<double> default_times() {
  std::vector<double> t;
  for (int i = 0; i <= 10; ++i) t.push_back(i / 10.0);
  return t;
}

/// CSV: t, mean components, covariance entries (row-major), min eigenvalue.
inline std::string cmd_interpolate(const InstanceFile& inst, const InterpolateFlags& flags = {}) {
  const ProcessLaw mu = inst.mu();
  const ProcessLaw nu = inst.nu();
  const bool reg = flags.which == Which::aw_reg || flags.which == Which::w2_reg;
  const double lambda = reg ? effective_lambda(inst, flags.lambda) : 0.0;
  const bool adapted = flags.which == Which::aw || flags.which == Which::aw_reg;
  const GaussianCoupling coupling =
      adapted ? optimal_coupling(mu, nu, solve_aw(mu, nu, lambda, {flags.zero_mode, {}}))
              : w2_coupling(mu, nu, solve_w2(mu, nu, lambda));
  std::vector<double> times = flags.times ? *flags.times : inst.times.value_or(default_times());

  const Index n = mu.dim();
  std::ostringstream os;
  os << "t";
  for (Index i = 1; i <= n; ++i) os << ",mean_" << i;
  for (Index i = 1; i <= n; ++i) {
    for (Index j = 1; j <= n; ++j) os << ",cov_" << i << "_" << j;
  }
  os << ",min_eig\n";
  for (double t : times) {
    const Interpolant ip = interpolate(coupling, t);
    os << detail::format_real(t);
    for (Index i = 0; i < n; ++i) os << "," << detail::format_real(ip.mean(i));
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) os << "," << detail::format_real(ip.cov(i, j));
    }
    os << "," << detail::format_real(ip.min_eigenvalue) << "\n";
  }
  return os.str();
}

}  // namespace gaw
