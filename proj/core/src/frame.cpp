#include "stiefelgd/frame.hpp"

#include <cmath>
#include <random>
#include <string>

namespace stiefelgd {

GridSpec GridSpec::make(int dimension, int points_per_axis, double domain_length,
                        Boundary boundary) {
  if (dimension != 1 && dimension != 2) {
    throw ConfigError("grid dimension must be 1 or 2, got " + std::to_string(dimension));
  }
  if (points_per_axis < 2) {
    throw ConfigError("grid needs at least 2 points per axis");
  }
  if (!(domain_length > 0.0) || !std::isfinite(domain_length)) {
    throw ConfigError("domain length must be positive and finite");
  }
  return GridSpec{dimension, points_per_axis, domain_length, boundary};
}

double GridSpec::spacing() const {
  return boundary == Boundary::dirichlet_zero ? domain_length / (points_per_axis + 1)
                                              : domain_length / points_per_axis;
}

double GridSpec::weight() const { return std::pow(spacing(), dimension); }

Eigen::Index GridSpec::n_dof() const {
  Eigen::Index n = 1;
  for (int d = 0; d < dimension; ++d) n *= points_per_axis;
  return n;
}

double GridSpec::coordinate(int i) const {
  return boundary == Boundary::dirichlet_zero ? (i + 1) * spacing() : i * spacing();
}

Frame::Frame(const GridSpec& grid, Matrix values) : grid_(grid), values_(std::move(values)) {
  if (values_.rows() != grid_.n_dof()) {
    throw DimensionError("frame has " + std::to_string(values_.rows()) + " rows, grid has " +
                         std::to_string(grid_.n_dof()) + " points");
  }
  if (values_.cols() < 1) throw DimensionError("frame needs at least one orbital");
  if (!values_.allFinite()) throw NonFiniteError("frame contains non-finite entries");
}

Frame Frame::zeros(const GridSpec& grid, int n_orbitals) {
  return Frame(grid, Matrix::Zero(grid.n_dof(), n_orbitals));
}

bool Frame::compatible(const Frame& other) const {
  return grid_ == other.grid_ && values_.cols() == other.values_.cols();
}

void require_compatible(const Frame& v, const Frame& w, const char* where) {
  if (!v.compatible(w)) {
    throw DimensionError(std::string(where) + ": frames differ in grid or orbital count (" +
                         std::to_string(v.n_orbitals()) + " vs " +
                         std::to_string(w.n_orbitals()) + ")");
  }
}

Frame Frame::operator+(const Frame& other) const {
  require_compatible(*this, other, "operator+");
  return Frame(grid_, values_ + other.values_);
}

Frame Frame::operator-(const Frame& other) const {
  require_compatible(*this, other, "operator-");
  return Frame(grid_, values_ - other.values_);
}

Frame Frame::operator-() const { return Frame(grid_, -values_); }

Frame Frame::operator*(double s) const { return Frame(grid_, s * values_); }

GramMatrix outer_product(const Frame& v, const Frame& w) {
  require_compatible(v, w, "outer_product");
  return v.grid().weight() * (v.values().transpose() * w.values());
}

double inner_h(const Frame& v, const Frame& w) {
  require_compatible(v, w, "inner_h");
  // Column-by-column so the trace never forms the off-diagonal products.
  double sum = 0.0;
  for (int j = 0; j < v.n_orbitals(); ++j) sum += v.column(j).dot(w.column(j));
  return v.grid().weight() * sum;
}

double norm_h(const Frame& v) { return std::sqrt(std::max(0.0, inner_h(v, v))); }

Vector density(const Frame& phi) { return phi.values().rowwise().squaredNorm(); }

Frame multiply_right(const Frame& v, const Matrix& s) {
  if (s.rows() != v.n_orbitals()) {
    throw DimensionError("multiply_right: frame has " + std::to_string(v.n_orbitals()) +
                         " orbitals, matrix has " + std::to_string(s.rows()) + " rows");
  }
  return Frame(v.grid(), v.values() * s);
}

Matrix sym(const Matrix& a) { return 0.5 * (a + a.transpose()); }

Frame gaussian_frame(const GridSpec& grid, int n_orbitals, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix values(grid.n_dof(), n_orbitals);
  // Column-major fill keeps the stream order independent of Eigen internals.
  for (Eigen::Index j = 0; j < values.cols(); ++j)
    for (Eigen::Index i = 0; i < values.rows(); ++i) values(i, j) = normal(rng);
  return Frame(grid, std::move(values));
}

}  // namespace stiefelgd
