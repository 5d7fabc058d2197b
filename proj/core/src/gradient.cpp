#include "stiefelgd/gradient.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <string>

#include "stiefelgd/geometry.hpp"

namespace stiefelgd {

namespace {

// Smallest reciprocal condition number accepted for [[phi, Y]].
constexpr double kMinRcond = 1e-14;

SolveConfig tolerance_mode(SolveConfig config) {
  config.fixed_iters.reset();
  return config;
}

SolveConfig fixed_mode(SolveConfig config, int fixed_iters) {
  config.method = SolveMethod::krylov_cg;
  config.fixed_iters = fixed_iters;
  return config;
}

SearchDirection finish(const DiscreteOperatorA& op, const Frame& phi, Frame eta, int effort,
                       DirectionKind kind, int fixed_iters) {
  const double gram = a_form(op, eta, eta);
  const double slope = descent_slope(op, phi, eta);
  return SearchDirection{std::move(eta), gram, effort, kind, slope, fixed_iters, false};
}

}  // namespace

double descent_slope(const DiscreteOperatorA& op, const Frame& phi, const Frame& eta) {
  const Frame t = project_tangent_h(phi, eta);
  return a_form(op, phi, t) - op.model().shift() * inner_h(phi, t);
}

SearchDirection riemannian_gradient(const EnergyModel& model, const Frame& phi,
                                    const SolveConfig& config) {
  const DiscreteOperatorA op(model, phi);
  const SolveResult x = solve(op, phi, tolerance_mode(config));
  const GramMatrix g = sym(outer_product(phi, x.solution));
  Eigen::LLT<Matrix> llt(g);
  if (llt.info() != Eigen::Success) {
    throw DegenerateFrameError("riemannian_gradient: [[phi, A^{-1} phi]] is not positive definite");
  }
  const Matrix g_inv = llt.solve(Matrix::Identity(g.rows(), g.cols()));
  Frame eta = multiply_right(x.solution, g_inv) - phi;
  return finish(op, phi, std::move(eta), x.report.total_iterations(), DirectionKind::exact_grad,
                0);
}

SearchDirection inexact_gradient(const EnergyModel& model, const Frame& phi, int fixed_iters,
                                 const SolveConfig& config) {
  if (fixed_iters < 1) throw ConfigError("inexact_gradient: fixed_iters must be >= 1");
  const DiscreteOperatorA op(model, phi);
  const GramMatrix lambda = sym(outer_product(phi, op.apply(phi)));
  Eigen::LLT<Matrix> llt(lambda);
  if (llt.info() != Eigen::Success) {
    throw DegenerateFrameError("inexact_gradient: [[phi, A phi]] is not positive definite");
  }
  const Frame start =
      multiply_right(phi, llt.solve(Matrix::Identity(lambda.rows(), lambda.cols())));
  const SolveResult y = solve(op, phi, fixed_mode(config, fixed_iters), start);
  const GramMatrix m = outer_product(phi, y.solution);
  Eigen::PartialPivLU<Matrix> lu(m);
  if (!(lu.rcond() > kMinRcond)) {
    throw DegenerateFrameError("inexact_gradient: [[phi, Y]] is singular (rcond " +
                               std::to_string(lu.rcond()) + "); too few inner steps");
  }
  Frame eta = multiply_right(y.solution, lu.inverse()) - phi;
  return finish(op, phi, std::move(eta), y.report.total_iterations(),
                DirectionKind::inexact_grad, fixed_iters);
}

SearchDirection safeguarded_inexact_gradient(const EnergyModel& model, const Frame& phi,
                                             int fixed_iters, const SolveConfig& config,
                                             int max_doublings) {
  int effort = 0;
  int iters = fixed_iters;
  for (int attempt = 0; attempt <= max_doublings; ++attempt, iters *= 2) {
    try {
      SearchDirection dir = inexact_gradient(model, phi, iters, config);
      effort += dir.inner_effort;
      if (dir.slope < 0.0) {
        dir.inner_effort = effort;
        return dir;
      }
    } catch (const DegenerateFrameError&) {
      // Too few inner steps; the fixed-mode solve still ran iters per column.
      effort += iters * phi.n_orbitals();
    }
  }
  SearchDirection exact = riemannian_gradient(model, phi, config);
  exact.inner_effort += effort;
  exact.fell_back_to_exact = true;
  return exact;
}

SearchDirection dcm_direction(const EnergyModel& model, const Frame& phi, int fixed_iters,
                              const SolveConfig& config) {
  if (fixed_iters < 1) throw ConfigError("dcm_direction: fixed_iters must be >= 1");
  const DiscreteOperatorA op(model, phi);
  const Residual res = residual(op, phi);
  const SolveResult z = solve(op, res.r, fixed_mode(config, fixed_iters));
  return finish(op, phi, -z.solution, z.report.total_iterations(), DirectionKind::dcm,
                fixed_iters);
}

}  // namespace stiefelgd
