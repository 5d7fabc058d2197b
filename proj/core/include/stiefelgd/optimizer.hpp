#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stiefelgd/geometry.hpp"
#include "stiefelgd/gradient.hpp"

namespace stiefelgd {

/// Inputs of the non-monotone line search.
struct LineSearchParams {
  double alpha = 0.95;
  double beta = 1e-4;
  double delta = 0.5;
  double gamma_min = 1e-4;
  double gamma_max = 1.0;
  double gamma0 = 1e-2;
  int max_backtracks = 25;

  void validate() const;
};

/// Weighted average c_n of past energies with weight q_n.
struct NonmonotoneAverage {
  double c = 0.0;
  double q = 1.0;

  explicit NonmonotoneAverage(double initial_energy) : c(initial_energy) {}
  /// q <- alpha q + 1, c <- (1 - 1/q) c + E / q.
  void update(double alpha, double energy);
};

struct IterationRecord {
  int n = 0;
  double energy = 0.0;
  double energy_change = 0.0;  ///< E(phi_n) - E(phi_{n-1}) via energy_difference; 0 at n = 0
  double residual_h_norm = 0.0;
  double grad_a_norm = 0.0;  ///< sqrt(a_phi(eta, eta)) of the direction used
  double step_size = 0.0;    ///< tau_n; 0 on the terminal record
  int backtracks = 0;
  int inner_iterations = 0;
  double c_n = 0.0;
  double q_n = 1.0;
  double wall_time_s = 0.0;
  double direction_gram = 0.0;  ///< a_phi(eta, eta)
  double slope = 0.0;           ///< d/dt E(R(phi, t eta)) at 0
};

enum class Termination { residual_tol, max_iter, line_search_failure, degenerate_frame, solver_failure };

std::string to_string(Termination t);

struct RunResult {
  Frame final_frame;
  Vector eigenvalues;  ///< eigenvalues of Lambda - sigma I at the final frame
  std::vector<IterationRecord> history;
  bool converged = false;
  Termination termination = Termination::max_iter;
  std::string message;
  /// Every iterate, kept only with RunOptions::log_frames.
  std::vector<Frame> frames;

  double final_energy() const { return history.back().energy; }
  int total_inner_iterations() const;
};

struct RunOptions {
  double tol = 1e-6;  ///< on the H-norm of the residual
  int max_iter = 2000;
  SolveConfig solver;
  Retraction retraction = Retraction::polar;
  bool log_frames = false;
};

/// Seeded Gaussian frame orthonormalized by modified Gram-Schmidt.
Frame initial_guess(const GridSpec& grid, int n_orbitals, std::uint64_t seed);

/// phi_{n+1} = R(phi_n, tau eta_n) with eta_n = -grad E(phi_n).
RunResult rgd_fixed_step(const EnergyModel& model, const Frame& phi0, double tau,
                         const RunOptions& options);

/// Riemannian gradient descent with the non-monotone line search and
/// alternating Barzilai-Borwein trial steps. fixed_iters is used by the
/// inexact and dcm directions; the inexact direction is safeguarded.
RunResult rgd_line_search(const EnergyModel& model, const Frame& phi0,
                          const LineSearchParams& params, DirectionKind direction,
                          int fixed_iters, const RunOptions& options);

/// Empirical descent (r2) and step-size (r3) ratios per step:
///   r2(n) = (E_n - E_{n+1}) / (||grad||_{a_phi} ||phi_{n+1} - phi_n||_{a0})
///   r3(n) = ||phi_{n+1} - phi_n||_{a0} / ||grad||_{a_phi}
/// NaN where ||grad|| < 100 eps. Needs a run with log_frames.
struct StepDiagnostics {
  int n = 0;
  double r2 = 0.0;
  double r3 = 0.0;
};

std::vector<StepDiagnostics> diagnostics_a2_a3(const EnergyModel& model, const RunResult& run);

/// True when the final energy sits more than 10 tol above the best known
/// ground-state energy, i.e. the run settled on another critical point.
bool settled_above_ground_state(const RunResult& run, double ground_energy, double tol);

/// Re-checks E_{n+1} <= c_n - beta tau_n a(eta_n, eta_n) on every accepted
/// step; returns the number of violations.
int count_nonmonotone_violations(const RunResult& run, const LineSearchParams& params);

}  // namespace stiefelgd
