#include "stiefelgd/linear_solver.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <string>
#include <tuple>

namespace stiefelgd {

void SolveConfig::validate() const {
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw ConfigError("rel_tol must lie in (0, 1)");
  if (max_iters < 1) throw ConfigError("max_iters must be >= 1");
  if (fixed_iters && *fixed_iters < 1) throw ConfigError("fixed_iters must be >= 1");
  if (!(kinetic_shift_c0 > 0.0)) throw ConfigError("kinetic_shift_c0 must be > 0");
}

int SolveReport::total_iterations() const {
  return std::accumulate(iterations_per_column.begin(), iterations_per_column.end(), 0);
}

KineticShiftFactor::KineticShiftFactor(const GridSpec& grid, double kinetic_coefficient,
                                       double c0) {
  SparseMatrix m = assemble_negative_laplacian(grid) * kinetic_coefficient;
  SparseMatrix id(m.rows(), m.cols());
  id.setIdentity();
  m += c0 * id;
  ldlt_.compute(m);
  if (ldlt_.info() != Eigen::Success) throw NotSpdError("kinetic_shift factorization failed");
}

Matrix KineticShiftFactor::solve(const Matrix& r) const { return ldlt_.solve(r); }

std::shared_ptr<const KineticShiftFactor> kinetic_shift_factor(const GridSpec& grid,
                                                               double kinetic_coefficient,
                                                               double c0) {
  using Key = std::tuple<int, int, double, int, double, double>;
  static std::mutex mutex;
  static std::map<Key, std::shared_ptr<const KineticShiftFactor>> cache;
  const Key key{grid.dimension, grid.points_per_axis, grid.domain_length,
                static_cast<int>(grid.boundary), kinetic_coefficient, c0};
  std::lock_guard lock(mutex);
  auto& slot = cache[key];
  if (!slot) slot = std::make_shared<const KineticShiftFactor>(grid, kinetic_coefficient, c0);
  return slot;
}

Preconditioner::Preconditioner(PreconditionerKind kind, const DiscreteOperatorA& op, double c0)
    : kind_(kind) {
  switch (kind_) {
    case PreconditionerKind::none:
      break;
    case PreconditionerKind::diagonal:
      inverse_diagonal_ = op.diagonal().cwiseInverse();
      break;
    case PreconditionerKind::kinetic_shift:
      kinetic_ = kinetic_shift_factor(op.grid(), op.model().kinetic_coefficient(), c0);
      break;
  }
}

Matrix Preconditioner::apply(const Matrix& r) const {
  switch (kind_) {
    case PreconditionerKind::none:
      return r;
    case PreconditionerKind::diagonal:
      return inverse_diagonal_.asDiagonal() * r;
    case PreconditionerKind::kinetic_shift:
      return kinetic_->solve(r);
  }
  return r;
}

Frame apply_preconditioner(PreconditionerKind kind, const DiscreteOperatorA& op, const Frame& r,
                           double c0) {
  return Frame(r.grid(), Preconditioner(kind, op, c0).apply(r.values()));
}

namespace {

struct ColumnOutcome {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

// Preconditioned CG on one column. x holds the initial iterate on entry.
ColumnOutcome pcg_column(const DiscreteOperatorA& op, const Preconditioner& precond,
                         const Vector& b, Vector& x, const SolveConfig& config) {
  ColumnOutcome out;
  const double b_norm = b.norm();
  if (b_norm == 0.0) {
    x.setZero();
    out.converged = true;
    return out;
  }
  const bool fixed = config.fixed_iters.has_value();
  const int limit = fixed ? *config.fixed_iters : config.max_iters;
  const double target = config.rel_tol * b_norm;

  Vector r = b - op.apply(Matrix(x)).col(0);
  double r_norm = r.norm();
  if (!fixed && r_norm <= target) {
    out.converged = true;
    out.relative_residual = r_norm / b_norm;
    return out;
  }
  Vector z = precond.apply(r).col(0);
  Vector p = z;
  double rz = r.dot(z);
  while (out.iterations < limit) {
    // Past this floor the recurrence only feeds roundoff back into x.
    if (r_norm <= std::numeric_limits<double>::epsilon() * b_norm) break;
    const Vector ap = op.apply(Matrix(p)).col(0);
    const double curvature = p.dot(ap);
    if (!(curvature > 0.0)) {
      throw NotSpdError("CG detected non-positive curvature p^T A p = " +
                        std::to_string(curvature));
    }
    const double step = rz / curvature;
    x += step * p;
    r -= step * ap;
    ++out.iterations;
    r_norm = r.norm();
    if (!fixed && r_norm <= target) {
      // Confirm against the true residual before accepting.
      r = b - op.apply(Matrix(x)).col(0);
      r_norm = r.norm();
      if (r_norm <= target) break;
      z = precond.apply(r).col(0);
      p = z;
      rz = r.dot(z);
      continue;
    }
    z = precond.apply(r).col(0);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  r = b - op.apply(Matrix(x)).col(0);
  out.relative_residual = r.norm() / b_norm;
  out.converged = fixed || out.relative_residual <= config.rel_tol;
  return out;
}

SolveResult solve_direct(const DiscreteOperatorA& op, const Frame& b) {
  if (b.n_dof() > kMaxDenseDof) {
    throw ConfigError("direct_dense solve limited to n_dof <= " + std::to_string(kMaxDenseDof) +
                      ", got " + std::to_string(b.n_dof()));
  }
  Eigen::LLT<Matrix> llt(op.assemble_dense());
  if (llt.info() != Eigen::Success) throw NotSpdError("dense Cholesky of A_phi failed");
  Matrix x = llt.solve(b.values());
  SolveReport report;
  const Matrix res = op.apply(x) - b.values();
  for (int j = 0; j < b.n_orbitals(); ++j) {
    const double bn = b.column(j).norm();
    report.iterations_per_column.push_back(0);
    report.final_relative_residuals.push_back(bn > 0.0 ? res.col(j).norm() / bn : 0.0);
  }
  return SolveResult{Frame(b.grid(), std::move(x)), std::move(report)};
}

}  // namespace

SolveResult solve(const DiscreteOperatorA& op, const Frame& b, const SolveConfig& config,
                  const std::optional<Frame>& warm_start) {
  config.validate();
  if (b.grid() != op.grid()) throw DimensionError("solve: right-hand side on another grid");
  if (warm_start) require_compatible(b, *warm_start, "solve (warm start)");
  if (config.method == SolveMethod::direct_dense) return solve_direct(op, b);

  const Preconditioner precond(config.preconditioner, op, config.kinetic_shift_c0);
  Matrix x = warm_start ? warm_start->values() : Matrix::Zero(b.n_dof(), b.n_orbitals());
  SolveReport report;
  bool all_converged = true;
  for (int j = 0; j < b.n_orbitals(); ++j) {
    Vector xj = x.col(j);
    const ColumnOutcome col = pcg_column(op, precond, b.column(j), xj, config);
    x.col(j) = xj;
    report.iterations_per_column.push_back(col.iterations);
    report.final_relative_residuals.push_back(col.relative_residual);
    all_converged = all_converged && col.converged;
  }
  if (!all_converged) {
    throw NonConvergenceError("CG did not reach rel_tol " + std::to_string(config.rel_tol) +
                                  " within " + std::to_string(config.max_iters) + " iterations",
                              std::move(report));
  }
  return SolveResult{Frame(b.grid(), std::move(x)), std::move(report)};
}

}  // namespace stiefelgd
