#pragma once

#include <Eigen/SparseCholesky>

#include <memory>
#include <optional>
#include <vector>

#include "stiefelgd/energy.hpp"

namespace stiefelgd {

enum class SolveMethod { krylov_cg, direct_dense };
enum class PreconditionerKind { none, diagonal, kinetic_shift };

/// Largest grid for which the dense path assembles A_phi.
inline constexpr Eigen::Index kMaxDenseDof = 8192;

struct SolveConfig {
  SolveMethod method = SolveMethod::krylov_cg;
  double rel_tol = 1e-8;
  int max_iters = 500;
  /// This many CG steps per column, ignoring rel_tol; stops early only at
  /// the roundoff floor.
  std::optional<int> fixed_iters;
  PreconditionerKind preconditioner = PreconditionerKind::kinetic_shift;
  /// Shift c0 of the kinetic_shift preconditioner (-Delta_h + c0 I)^{-1}.
  double kinetic_shift_c0 = 1.0;

  void validate() const;
};

struct SolveReport {
  std::vector<int> iterations_per_column;
  std::vector<double> final_relative_residuals;

  int total_iterations() const;
};

struct SolveResult {
  Frame solution;
  SolveReport report;
};

class NonConvergenceError : public std::runtime_error {
 public:
  NonConvergenceError(const std::string& what, SolveReport report)
      : std::runtime_error(what), report_(std::move(report)) {}
  const SolveReport& report() const { return report_; }

 private:
  SolveReport report_;
};

/// Sparse Cholesky of c (-Delta_h) + c0 I. Built once per (grid, c, c0) and
/// shared read-only afterwards.
class KineticShiftFactor {
 public:
  KineticShiftFactor(const GridSpec& grid, double kinetic_coefficient, double c0);
  Matrix solve(const Matrix& r) const;

 private:
  Eigen::SimplicialLDLT<SparseMatrix> ldlt_;
};

std::shared_ptr<const KineticShiftFactor> kinetic_shift_factor(const GridSpec& grid,
                                                               double kinetic_coefficient,
                                                               double c0);

/// The preconditioner action B^{-1} r for one anchored operator.
class Preconditioner {
 public:
  Preconditioner(PreconditionerKind kind, const DiscreteOperatorA& op, double c0 = 1.0);
  Matrix apply(const Matrix& r) const;
  PreconditionerKind kind() const { return kind_; }

 private:
  PreconditionerKind kind_;
  Vector inverse_diagonal_;
  std::shared_ptr<const KineticShiftFactor> kinetic_;
};

Frame apply_preconditioner(PreconditionerKind kind, const DiscreteOperatorA& op, const Frame& r,
                           double c0 = 1.0);

/// Columnwise solve of A_phi X = B.
///
/// Tolerance mode stops when ||A x_j - b_j||_H <= rel_tol ||b_j||_H, measured
/// on the true residual, and throws NonConvergenceError after max_iters. With
/// fixed_iters set, each column runs exactly that many preconditioned CG
/// steps (fewer only if the residual vanishes). Negative curvature throws
/// NotSpdError. Columns are independent and processed in order.
SolveResult solve(const DiscreteOperatorA& op, const Frame& b, const SolveConfig& config,
                  const std::optional<Frame>& warm_start = std::nullopt);

}  // namespace stiefelgd
