#pragma once

#include <Eigen/SparseCore>

#include <filesystem>

#include "stiefelgd/frame.hpp"

namespace stiefelgd {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Applies the 3-point (1D) or 5-point (2D) stencil of -Delta_h columnwise.
Matrix apply_negative_laplacian(const GridSpec& grid, const Matrix& v);

/// Assembled -Delta_h as a sparse symmetric matrix.
SparseMatrix assemble_negative_laplacian(const GridSpec& grid);

/// Diagonal entry of the -Delta_h stencil (2 d / h^2).
double laplacian_diagonal(const GridSpec& grid);

/// Smallest eigenvalue of -Delta_h, known in closed form.
double laplacian_min_eigenvalue(const GridSpec& grid);

/// V(r) = omega^2 |r - r0|^2 / 2 with r0 = (center, ..., center).
Vector harmonic_potential(const GridSpec& grid, double omega, double center);

/// Square well: 0 on [lo, hi]^d, height elsewhere.
Vector well_potential(const GridSpec& grid, double lo, double hi, double height);

/// Plain text, one value per grid point in row-major order.
Vector load_potential(const std::filesystem::path& path, const GridSpec& grid);

/// Energy E(phi) = 1/2 a0(phi,phi) + 1/2 int Gamma(rho) with
/// a0(v,w) = c (grad v, grad w) + (V v, w), gamma(rho) = kappa rho and
/// Gamma(rho) = kappa rho^2 / 2, acting on the total density. N = 1 gives the
/// Gross-Pitaevskii energy.
///
/// The shift sigma enters the operator A_phi (and hence the metric) but not
/// E. The constructor checks a sufficient condition for coercivity of the
/// shifted form: c lambda_min(-Delta_h) + min V + sigma > 0.
class EnergyModel {
 public:
  EnergyModel(const GridSpec& grid, Vector potential, double kappa, double shift,
              int n_orbitals, double kinetic_coefficient = 1.0);

  const GridSpec& grid() const { return grid_; }
  const Vector& potential() const { return potential_; }
  double kappa() const { return kappa_; }
  double shift() const { return shift_; }
  int n_orbitals() const { return n_orbitals_; }
  double kinetic_coefficient() const { return kinetic_coefficient_; }

  /// gamma(rho) pointwise.
  Vector gamma(const Vector& rho) const { return kappa_ * rho; }

 private:
  GridSpec grid_;
  Vector potential_;
  double kappa_;
  double shift_;
  int n_orbitals_;
  double kinetic_coefficient_;
};

/// A_phi + sigma I anchored at a fixed frame phi. The anchor density is cached
/// so every apply is a stencil plus one diagonal multiply.
class DiscreteOperatorA {
 public:
  DiscreteOperatorA(const EnergyModel& model, const Frame& anchor);

  const EnergyModel& model() const { return *model_; }
  const GridSpec& grid() const { return model_->grid(); }
  /// V + gamma(rho_phi) + sigma at each grid point.
  const Vector& multiplier() const { return multiplier_; }
  const Vector& anchor_density() const { return rho_; }

  Frame apply(const Frame& v) const;
  Matrix apply(const Matrix& v) const;
  /// Stencil diagonal plus multiplier.
  Vector diagonal() const;
  /// Dense n_dof x n_dof matrix; only for small grids.
  Matrix assemble_dense() const;

 private:
  const EnergyModel* model_;
  Vector rho_;
  Vector multiplier_;
};

double energy(const EnergyModel& model, const Frame& phi);

/// a0(v, v) without gamma and without shift.
double a0_form(const EnergyModel& model, const Frame& v, const Frame& w);
double a0_norm(const EnergyModel& model, const Frame& v);

/// Shifted a_phi(v, w) through the operator.
double a_form(const DiscreteOperatorA& op, const Frame& v, const Frame& w);
double a_norm(const DiscreteOperatorA& op, const Frame& v);

/// D E(phi)[v] = a_phi(phi, v), unshifted.
/// E(to) - E(from) from the difference d = to - from, so that small changes
/// between nearby frames are resolved well below the rounding level of E itself.
double energy_difference(const EnergyModel& model, const Frame& to, const Frame& from);

double directional_derivative(const EnergyModel& model, const Frame& phi, const Frame& v);

struct Residual {
  Frame r;            ///< A phi - phi Lambda
  GramMatrix lambda;  ///< [[phi, A phi]] including the shift
};

Residual residual(const EnergyModel& model, const Frame& phi);
Residual residual(const DiscreteOperatorA& op, const Frame& phi);

/// Eigenvalues of Lambda - sigma I in ascending order.
Vector lagrange_eigenvalues(const EnergyModel& model, const GramMatrix& lambda);

}  // namespace stiefelgd
