#pragma once

#include "stiefelgd/linear_solver.hpp"

namespace stiefelgd {

enum class DirectionKind { exact_grad, inexact_grad, dcm };

struct SearchDirection {
  Frame direction;             ///< eta, approximately -grad E(phi)
  double gram_of_direction;    ///< a_phi(eta, eta), shifted form
  int inner_effort = 0;        ///< total inner Krylov iterations
  DirectionKind kind = DirectionKind::exact_grad;
  double slope = 0.0;          ///< d/dt E(R(phi, t eta)) at t = 0
  int fixed_iters_used = 0;    ///< inner steps per column (inexact / dcm)
  bool fell_back_to_exact = false;
};

/// Slope of the energy along eta through any retraction: D E(phi)[t] with t
/// the H-tangent part of eta. Equals D E(phi)[eta] for tangent eta.
double descent_slope(const DiscreteOperatorA& op, const Frame& phi, const Frame& eta);

/// eta = -(phi - X G^{-1}), X = A_phi^{-1} phi solved to config.rel_tol,
/// G = [[phi, X]] factored by Cholesky. Throws DegenerateFrameError if G is
/// not positive definite.
SearchDirection riemannian_gradient(const EnergyModel& model, const Frame& phi,
                                    const SolveConfig& config);

/// eta = -(phi - Y [[phi, Y]]^{-1}) where Y is fixed_iters preconditioned CG
/// steps toward A_phi^{-1} phi from the warm start phi [[phi, A_phi phi]]^{-1}.
SearchDirection inexact_gradient(const EnergyModel& model, const Frame& phi, int fixed_iters,
                                 const SolveConfig& config);

/// Inexact gradient with a descent safeguard: while the slope is not
/// negative, double fixed_iters (at most max_doublings times), then fall
/// back to the exact gradient.
SearchDirection safeguarded_inexact_gradient(const EnergyModel& model, const Frame& phi,
                                             int fixed_iters, const SolveConfig& config,
                                             int max_doublings = 4);

/// eta = -B r with r = A_phi phi - phi [[phi, A_phi phi]] and B realised by
/// fixed_iters preconditioned CG steps on A_phi z = r from zero.
SearchDirection dcm_direction(const EnergyModel& model, const Frame& phi, int fixed_iters,
                              const SolveConfig& config);

}  // namespace stiefelgd
