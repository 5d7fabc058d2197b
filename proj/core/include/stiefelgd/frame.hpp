#pragma once

#include <Eigen/Dense>

#include <cstdint>

#include "stiefelgd/errors.hpp"

namespace stiefelgd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// N x N matrix of pairwise L2 products (outer product of two frames).
using GramMatrix = Eigen::MatrixXd;

enum class Boundary { dirichlet_zero, periodic };

/// Uniform tensor grid on [0, L]^d. Dirichlet grids hold interior points
/// only (h = L/(n+1)); periodic grids hold n points per axis (h = L/n).
/// The quadrature is lumped: every point carries weight h^d.
struct GridSpec {
  int dimension = 1;
  int points_per_axis = 2;
  double domain_length = 1.0;
  Boundary boundary = Boundary::dirichlet_zero;

  /// Validating constructor; throws ConfigError.
  static GridSpec make(int dimension, int points_per_axis, double domain_length,
                       Boundary boundary = Boundary::dirichlet_zero);

  double spacing() const;
  double weight() const;
  Eigen::Index n_dof() const;
  /// Coordinate of the i-th point along one axis.
  double coordinate(int i) const;

  bool operator==(const GridSpec&) const = default;
};

/// N-tuple of grid functions: one column per orbital, n_dof rows.
/// Immutable once constructed; all entries are finite.
class Frame {
 public:
  Frame(const GridSpec& grid, Matrix values);

  static Frame zeros(const GridSpec& grid, int n_orbitals);

  const GridSpec& grid() const { return grid_; }
  const Matrix& values() const { return values_; }
  Eigen::Index n_dof() const { return values_.rows(); }
  int n_orbitals() const { return static_cast<int>(values_.cols()); }
  auto column(int j) const { return values_.col(j); }

  Frame operator+(const Frame& other) const;
  Frame operator-(const Frame& other) const;
  Frame operator-() const;
  Frame operator*(double s) const;
  friend Frame operator*(double s, const Frame& v) { return v * s; }

  /// Same grid and orbital count.
  bool compatible(const Frame& other) const;

 private:
  GridSpec grid_;
  Matrix values_;
};

void require_compatible(const Frame& v, const Frame& w, const char* where);

/// [[v, w]]_{ij} = weight * sum_r v_i(r) w_j(r).
GramMatrix outer_product(const Frame& v, const Frame& w);

/// (v, w)_H = trace [[v, w]].
double inner_h(const Frame& v, const Frame& w);
double norm_h(const Frame& v);

/// rho(r) = sum_j phi_j(r)^2.
Vector density(const Frame& phi);

/// v S, the frame whose columns are the combinations sum_i v_i S_ij.
Frame multiply_right(const Frame& v, const Matrix& s);

/// Symmetric part (A + A^T) / 2.
Matrix sym(const Matrix& a);

/// Seeded standard-normal frame (not orthonormalized).
Frame gaussian_frame(const GridSpec& grid, int n_orbitals, std::uint64_t seed);

}  // namespace stiefelgd
