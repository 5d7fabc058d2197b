#include "stiefelgd/geometry.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>

namespace stiefelgd {

namespace {

Eigen::SelfAdjointEigenSolver<Matrix> gram_eigen(const GramMatrix& gram, const char* where) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym(gram));
  if (eig.info() != Eigen::Success) {
    throw RankDeficiencyError(std::string(where) + ": eigendecomposition failed");
  }
  const Vector& d = eig.eigenvalues();
  if (!(d(d.size() - 1) > 0.0) || d(0) <= kRankTolerance * d(d.size() - 1)) {
    throw RankDeficiencyError(std::string(where) + ": Gram matrix is rank deficient (min eig " +
                              std::to_string(d(0)) + ")");
  }
  return eig;
}

}  // namespace

bool is_on_stiefel(const Frame& phi, double tol) {
  const int n = phi.n_orbitals();
  return (outer_product(phi, phi) - Matrix::Identity(n, n)).norm() <= tol;
}

TangentCheckReport is_tangent(const Frame& phi, const Frame& eta) {
  const GramMatrix ep = outer_product(eta, phi);
  const int n = phi.n_orbitals();
  TangentCheckReport report;
  report.skew_defect = (ep + ep.transpose()).norm();
  report.on_manifold_defect = (outer_product(phi, phi) - Matrix::Identity(n, n)).norm();
  return report;
}

GramMatrix solve_lyapunov(const GramMatrix& g, const GramMatrix& c) {
  if (g.rows() != g.cols() || c.rows() != g.rows() || c.cols() != g.cols()) {
    throw DimensionError("solve_lyapunov: G and C must be square of equal size");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym(g));
  if (eig.info() != Eigen::Success) throw NotSpdError("solve_lyapunov: eigensolver failed");
  const Vector& d = eig.eigenvalues();
  if (!(d(0) > 0.0)) {
    throw NotSpdError("solve_lyapunov: G is not positive definite (min eig " +
                      std::to_string(d(0)) + ")");
  }
  const Matrix& q = eig.eigenvectors();
  Matrix ct = q.transpose() * c * q;
  for (Eigen::Index i = 0; i < ct.rows(); ++i)
    for (Eigen::Index j = 0; j < ct.cols(); ++j) ct(i, j) /= d(i) + d(j);
  return sym(q * ct * q.transpose());
}

Frame project_tangent(const Frame& phi, const Frame& v, const OperatorInverse& a_solve) {
  require_compatible(phi, v, "project_tangent");
  const Frame x = a_solve(phi);
  require_compatible(phi, x, "project_tangent (solver output)");
  const GramMatrix g = sym(outer_product(phi, x));
  GramMatrix s;
  try {
    s = solve_lyapunov(g, 2.0 * sym(outer_product(v, phi)));
  } catch (const NotSpdError& e) {
    throw DegenerateFrameError(std::string("project_tangent: ") + e.what());
  }
  return v - multiply_right(x, s);
}

Frame project_tangent_h(const Frame& phi, const Frame& v) {
  return v - multiply_right(phi, sym(outer_product(phi, v)));
}

Frame retract_polar(const Frame& phi, const Frame& eta) {
  const Frame sum = phi + eta;
  const auto eig = gram_eigen(outer_product(sum, sum), "retract_polar");
  const Matrix& q = eig.eigenvectors();
  const Vector inv_sqrt = eig.eigenvalues().cwiseSqrt().cwiseInverse();
  return multiply_right(sum, q * inv_sqrt.asDiagonal() * q.transpose());
}

QrFactors qr_mgs(const Frame& v) {
  const int n = v.n_orbitals();
  const double w = v.grid().weight();
  Matrix work = v.values();
  Matrix r = Matrix::Zero(n, n);
  double max_sq = 0.0;
  for (int j = 0; j < n; ++j) max_sq = std::max(max_sq, w * work.col(j).squaredNorm());
  for (int i = 0; i < n; ++i) {
    const double rii_sq = w * work.col(i).squaredNorm();
    if (!(max_sq > 0.0) || rii_sq <= kRankTolerance * max_sq) {
      throw RankDeficiencyError("qr_mgs: column " + std::to_string(i) +
                                " is numerically dependent on its predecessors");
    }
    r(i, i) = std::sqrt(rii_sq);
    work.col(i) /= r(i, i);
    for (int j = i + 1; j < n; ++j) {
      r(i, j) = w * work.col(j).dot(work.col(i));
      work.col(j) -= r(i, j) * work.col(i);
    }
  }
  return QrFactors{Frame(v.grid(), std::move(work)), std::move(r)};
}

Frame retract_qr_mgs(const Frame& phi, const Frame& eta) { return qr_mgs(phi + eta).q; }

Frame retract_qr_cholesky(const Frame& phi, const Frame& eta) {
  const Frame sum = phi + eta;
  const GramMatrix gram = sym(outer_product(sum, sum));
  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw RankDeficiencyError("retract_qr_cholesky: Gram matrix is not positive definite");
  }
  const Matrix f = llt.matrixU();
  const double max_diag = gram.diagonal().maxCoeff();
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    if (f(i, i) * f(i, i) <= kRankTolerance * max_diag) {
      throw RankDeficiencyError("retract_qr_cholesky: Gram matrix is rank deficient");
    }
  }
  Matrix values = sum.values();
  f.triangularView<Eigen::Upper>().solveInPlace<Eigen::OnTheRight>(values);
  return Frame(sum.grid(), std::move(values));
}

Frame retract(Retraction kind, const Frame& phi, const Frame& eta) {
  switch (kind) {
    case Retraction::polar:
      return retract_polar(phi, eta);
    case Retraction::qr_mgs:
      return retract_qr_mgs(phi, eta);
    case Retraction::qr_cholesky:
      return retract_qr_cholesky(phi, eta);
  }
  throw ConfigError("unknown retraction");
}

}  // namespace stiefelgd
