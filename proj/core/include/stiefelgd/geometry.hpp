#pragma once

#include <functional>
#include <utility>

#include "stiefelgd/frame.hpp"

namespace stiefelgd {

/// Relative eigenvalue floor below which a Gram matrix counts as singular.
inline constexpr double kRankTolerance = 1e-12;

struct TangentCheckReport {
  double skew_defect = 0.0;         ///< ||[[eta,phi]] + [[phi,eta]]||_F
  double on_manifold_defect = 0.0;  ///< ||[[phi,phi]] - I||_F
};

/// Applies A_phi^{-1} columnwise.
using OperatorInverse = std::function<Frame(const Frame&)>;

bool is_on_stiefel(const Frame& phi, double tol);

TangentCheckReport is_tangent(const Frame& phi, const Frame& eta);

/// Symmetric S with G S + S G = C, via G = Q D Q^T and
/// S = Q [ (Q^T C Q)_ij / (d_i + d_j) ] Q^T. Throws NotSpdError when G is
/// not positive definite.
GramMatrix solve_lyapunov(const GramMatrix& g, const GramMatrix& c);

/// a_phi-orthogonal projection of v onto the tangent space at phi.
///
/// With X = A^{-1} phi and G = [[phi, X]], the normal component of v is X S
/// where S solves G S + S G = 2 sym([[v, phi]]). Only N operator solves are
/// needed. Throws DegenerateFrameError if G is not positive definite.
Frame project_tangent(const Frame& phi, const Frame& v, const OperatorInverse& a_solve);

/// H-orthogonal projection onto the tangent space: v - phi sym([[phi, v]]).
Frame project_tangent_h(const Frame& phi, const Frame& v);

/// Polar retraction (phi+eta) Q D^{-1/2} Q^T with [[phi+eta, phi+eta]] = Q D Q^T.
/// The Gram matrix of the sum is used directly rather than I + [[eta,eta]].
Frame retract_polar(const Frame& phi, const Frame& eta);

struct QrFactors {
  Frame q;
  Matrix r;  ///< upper triangular, positive diagonal
};

/// Modified Gram-Schmidt in the weighted L2 product: v = q R.
QrFactors qr_mgs(const Frame& v);

/// qR retraction evaluated by modified Gram-Schmidt on phi + eta.
Frame retract_qr_mgs(const Frame& phi, const Frame& eta);

/// qR retraction (phi+eta) F^{-1} with [[phi+eta, phi+eta]] = F^T F.
Frame retract_qr_cholesky(const Frame& phi, const Frame& eta);

enum class Retraction { polar, qr_mgs, qr_cholesky };

Frame retract(Retraction kind, const Frame& phi, const Frame& eta);

}  // namespace stiefelgd
