#include "stiefelgd/energy.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

namespace stiefelgd {

namespace {

// Neighbor index along one axis, or -1 for a Dirichlet boundary.
inline int neighbor(int i, int step, int n, Boundary boundary) {
  const int j = i + step;
  if (j >= 0 && j < n) return j;
  if (boundary == Boundary::periodic) return (j + n) % n;
  return -1;
}

}  // namespace

Matrix apply_negative_laplacian(const GridSpec& grid, const Matrix& v) {
  if (v.rows() != grid.n_dof()) throw DimensionError("apply_negative_laplacian: row mismatch");
  const int n = grid.points_per_axis;
  const double inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
  const double diag = 2.0 * grid.dimension * inv_h2;
  Matrix out(v.rows(), v.cols());
  for (Eigen::Index c = 0; c < v.cols(); ++c) {
    const auto in = v.col(c);
    auto res = out.col(c);
    if (grid.dimension == 1) {
      for (int i = 0; i < n; ++i) {
        double s = diag * in(i);
        const int l = neighbor(i, -1, n, grid.boundary);
        const int r = neighbor(i, +1, n, grid.boundary);
        if (l >= 0) s -= inv_h2 * in(l);
        if (r >= 0) s -= inv_h2 * in(r);
        res(i) = s;
      }
    } else {
      for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
          const int k = iy * n + ix;
          double s = diag * in(k);
          for (int step : {-1, +1}) {
            const int jx = neighbor(ix, step, n, grid.boundary);
            const int jy = neighbor(iy, step, n, grid.boundary);
            if (jx >= 0) s -= inv_h2 * in(iy * n + jx);
            if (jy >= 0) s -= inv_h2 * in(jy * n + ix);
          }
          res(k) = s;
        }
      }
    }
  }
  return out;
}

SparseMatrix assemble_negative_laplacian(const GridSpec& grid) {
  const int n = grid.points_per_axis;
  const double inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
  const double diag = 2.0 * grid.dimension * inv_h2;
  std::vector<Eigen::Triplet<double>> triplets;
  const Eigen::Index n_dof = grid.n_dof();
  triplets.reserve(static_cast<std::size_t>(n_dof) * (2 * grid.dimension + 1));
  for (Eigen::Index k = 0; k < n_dof; ++k) {
    triplets.emplace_back(k, k, diag);
    const int ix = static_cast<int>(grid.dimension == 1 ? k : k % n);
    const int iy = static_cast<int>(grid.dimension == 1 ? 0 : k / n);
    for (int step : {-1, +1}) {
      const int jx = neighbor(ix, step, n, grid.boundary);
      if (jx >= 0) triplets.emplace_back(k, iy * n + jx, -inv_h2);
      if (grid.dimension == 2) {
        const int jy = neighbor(iy, step, n, grid.boundary);
        if (jy >= 0) triplets.emplace_back(k, jy * n + ix, -inv_h2);
      }
    }
  }
  // Duplicates (n = 2, periodic) are summed, matching the stencil.
  SparseMatrix lap(n_dof, n_dof);
  lap.setFromTriplets(triplets.begin(), triplets.end());
  return lap;
}

double laplacian_diagonal(const GridSpec& grid) {
  return 2.0 * grid.dimension / (grid.spacing() * grid.spacing());
}

double laplacian_min_eigenvalue(const GridSpec& grid) {
  if (grid.boundary == Boundary::periodic) return 0.0;
  const double h = grid.spacing();
  const double s = std::sin(std::numbers::pi * h / (2.0 * grid.domain_length));
  return grid.dimension * 4.0 / (h * h) * s * s;
}

Vector harmonic_potential(const GridSpec& grid, double omega, double center) {
  const int n = grid.points_per_axis;
  Vector v(grid.n_dof());
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    const double x = grid.coordinate(static_cast<int>(k % n)) - center;
    double r2 = x * x;
    if (grid.dimension == 2) {
      const double y = grid.coordinate(static_cast<int>(k / n)) - center;
      r2 += y * y;
    }
    v(k) = 0.5 * omega * omega * r2;
  }
  return v;
}

Vector well_potential(const GridSpec& grid, double lo, double hi, double height) {
  if (!(lo < hi)) throw ConfigError("well potential needs lo < hi");
  const int n = grid.points_per_axis;
  auto inside = [&](double x) { return x >= lo && x <= hi; };
  Vector v(grid.n_dof());
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    bool in = inside(grid.coordinate(static_cast<int>(k % n)));
    if (grid.dimension == 2) in = in && inside(grid.coordinate(static_cast<int>(k / n)));
    v(k) = in ? 0.0 : height;
  }
  return v;
}

Vector load_potential(const std::filesystem::path& path, const GridSpec& grid) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open potential file " + path.string());
  std::vector<double> values;
  double x = 0.0;
  while (in >> x) values.push_back(x);
  if (!in.eof()) throw ConfigError("potential file " + path.string() + ": malformed value");
  if (static_cast<Eigen::Index>(values.size()) != grid.n_dof()) {
    throw ConfigError("potential file " + path.string() + " has " +
                      std::to_string(values.size()) + " values, grid needs " +
                      std::to_string(grid.n_dof()));
  }
  return Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

EnergyModel::EnergyModel(const GridSpec& grid, Vector potential, double kappa, double shift,
                         int n_orbitals, double kinetic_coefficient)
    : grid_(grid),
      potential_(std::move(potential)),
      kappa_(kappa),
      shift_(shift),
      n_orbitals_(n_orbitals),
      kinetic_coefficient_(kinetic_coefficient) {
  if (potential_.size() != grid_.n_dof()) {
    throw DimensionError("potential has " + std::to_string(potential_.size()) +
                         " values, grid has " + std::to_string(grid_.n_dof()));
  }
  if (!potential_.allFinite()) throw NonFiniteError("potential has non-finite values");
  if (!(kappa_ >= 0.0) || !std::isfinite(kappa_)) throw ConfigError("kappa must be >= 0");
  if (!std::isfinite(shift_)) throw ConfigError("shift must be finite");
  if (n_orbitals_ < 1) throw ConfigError("n_orbitals must be >= 1");
  if (n_orbitals_ > grid_.n_dof()) throw ConfigError("more orbitals than grid points");
  if (!(kinetic_coefficient_ >= 0.0)) throw ConfigError("kinetic coefficient must be >= 0");
  const double lower =
      kinetic_coefficient_ * laplacian_min_eigenvalue(grid_) + potential_.minCoeff() + shift_;
  if (!(lower > 0.0)) {
    throw ConfigError("shifted form is not coercive: c*lambda_min(-Delta) + min V + sigma = " +
                      std::to_string(lower) + " (increase sigma)");
  }
}

DiscreteOperatorA::DiscreteOperatorA(const EnergyModel& model, const Frame& anchor)
    : model_(&model), rho_(density(anchor)) {
  if (anchor.grid() != model.grid()) throw DimensionError("operator anchor is on another grid");
  multiplier_ = model.potential() + model.gamma(rho_) +
                Vector::Constant(rho_.size(), model.shift());
}

Matrix DiscreteOperatorA::apply(const Matrix& v) const {
  Matrix out = apply_negative_laplacian(grid(), v);
  out *= model_->kinetic_coefficient();
  out += multiplier_.asDiagonal() * v;
  return out;
}

Frame DiscreteOperatorA::apply(const Frame& v) const {
  if (v.grid() != grid()) throw DimensionError("operator applied to a frame on another grid");
  return Frame(grid(), apply(v.values()));
}

Vector DiscreteOperatorA::diagonal() const {
  return multiplier_.array() + model_->kinetic_coefficient() * laplacian_diagonal(grid());
}

Matrix DiscreteOperatorA::assemble_dense() const {
  Matrix dense = Matrix(assemble_negative_laplacian(grid())) * model_->kinetic_coefficient();
  dense.diagonal() += multiplier_;
  return dense;
}

double a0_form(const EnergyModel& model, const Frame& v, const Frame& w) {
  require_compatible(v, w, "a0_form");
  const Matrix lv = apply_negative_laplacian(model.grid(), v.values());
  double sum = 0.0;
  for (int j = 0; j < v.n_orbitals(); ++j) {
    sum += model.kinetic_coefficient() * lv.col(j).dot(w.column(j));
    sum += (model.potential().array() * v.column(j).array() * w.column(j).array()).sum();
  }
  return model.grid().weight() * sum;
}

double a0_norm(const EnergyModel& model, const Frame& v) {
  return std::sqrt(std::max(0.0, a0_form(model, v, v)));
}

double a_form(const DiscreteOperatorA& op, const Frame& v, const Frame& w) {
  return inner_h(op.apply(v), w);
}

double a_norm(const DiscreteOperatorA& op, const Frame& v) {
  return std::sqrt(std::max(0.0, a_form(op, v, v)));
}

double energy(const EnergyModel& model, const Frame& phi) {
  if (phi.grid() != model.grid()) throw DimensionError("energy: frame on another grid");
  const Vector rho = density(phi);
  const double nonlinear = 0.5 * model.kappa() * rho.squaredNorm();
  return 0.5 * a0_form(model, phi, phi) + 0.5 * model.grid().weight() * nonlinear;
}

double energy_difference(const EnergyModel& model, const Frame& to, const Frame& from) {
  require_compatible(to, from, "energy_difference");
  if (to.grid() != model.grid()) throw DimensionError("energy_difference: frame on another grid");
  const Frame d = to - from;
  const Frame s = to + from;
  Vector drho = Vector::Zero(model.grid().n_dof());
  for (int j = 0; j < d.n_orbitals(); ++j) drho.array() += d.column(j).array() * s.column(j).array();
  const Vector srho = density(to) + density(from);
  return 0.5 * a0_form(model, d, s) + 0.25 * model.kappa() * model.grid().weight() * drho.dot(srho);
}

double directional_derivative(const EnergyModel& model, const Frame& phi, const Frame& v) {
  const DiscreteOperatorA op(model, phi);
  return a_form(op, phi, v) - model.shift() * inner_h(phi, v);
}

Residual residual(const DiscreteOperatorA& op, const Frame& phi) {
  const Frame aphi = op.apply(phi);
  GramMatrix lambda = outer_product(phi, aphi);
  Frame r = aphi - multiply_right(phi, lambda);
  return Residual{std::move(r), std::move(lambda)};
}

Residual residual(const EnergyModel& model, const Frame& phi) {
  return residual(DiscreteOperatorA(model, phi), phi);
}

Vector lagrange_eigenvalues(const EnergyModel& model, const GramMatrix& lambda) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym(lambda), Eigen::EigenvaluesOnly);
  return eig.eigenvalues().array() - model.shift();
}

}  // namespace stiefelgd
