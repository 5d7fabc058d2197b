#include "stiefelgd/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>

namespace stiefelgd {

void LineSearchParams::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
  if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("beta must lie in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
  if (!(gamma_min > 0.0 && gamma_min < gamma_max)) {
    throw ConfigError("need 0 < gamma_min < gamma_max");
  }
  if (!(gamma0 > 0.0)) throw ConfigError("gamma0 must be > 0");
  if (max_backtracks < 0) throw ConfigError("max_backtracks must be >= 0");
}

void NonmonotoneAverage::update(double alpha, double energy) {
  q = alpha * q + 1.0;
  c = (1.0 - 1.0 / q) * c + energy / q;
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::residual_tol:
      return "residual_tol";
    case Termination::max_iter:
      return "max_iter";
    case Termination::line_search_failure:
      return "line_search_failure";
    case Termination::degenerate_frame:
      return "degenerate_frame";
    case Termination::solver_failure:
      return "solver_failure";
  }
  return "unknown";
}

int RunResult::total_inner_iterations() const {
  return std::accumulate(history.begin(), history.end(), 0,
                         [](int acc, const IterationRecord& r) { return acc + r.inner_iterations; });
}

Frame initial_guess(const GridSpec& grid, int n_orbitals, std::uint64_t seed) {
  return qr_mgs(gaussian_frame(grid, n_orbitals, seed)).q;
}

namespace {

// Either accepts a step (returns tau, fills candidate/energy) or reports failure.
struct StepOutcome {
  bool accepted = false;
  double tau = 0.0;
  int backtracks = 0;
  std::optional<Frame> next;
  double next_energy = 0.0;
};

struct DescentState {
  int n = 0;
  const Frame* phi = nullptr;
  const SearchDirection* direction = nullptr;
  double energy = 0.0;
};

using DirectionFn = std::function<SearchDirection(const Frame&)>;
using StepFn = std::function<StepOutcome(const DescentState&, IterationRecord&)>;

void require_on_manifold(const EnergyModel& model, const Frame& phi0) {
  if (phi0.grid() != model.grid() || phi0.n_orbitals() != model.n_orbitals()) {
    throw DimensionError("initial frame does not match the model's grid or orbital count");
  }
  if (!is_on_stiefel(phi0, 1e-8)) throw ConfigError("initial frame is not on the Stiefel manifold");
}

RunResult run_descent(const EnergyModel& model, const Frame& phi0, const RunOptions& options,
                      const DirectionFn& direction_fn, const StepFn& step_fn) {
  require_on_manifold(model, phi0);
  options.solver.validate();
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();

  RunResult result{phi0, Vector(), {}, false, Termination::max_iter, "", {}};
  Frame phi = phi0;
  std::optional<Frame> prev;
  for (int n = 0;; ++n) {
    IterationRecord rec;
    rec.n = n;
    const DiscreteOperatorA op(model, phi);
    const Residual res = residual(op, phi);
    rec.energy = energy(model, phi);
    if (prev) rec.energy_change = energy_difference(model, phi, *prev);
    rec.residual_h_norm = norm_h(res.r);
    result.final_frame = phi;
    result.eigenvalues = lagrange_eigenvalues(model, res.lambda);
    if (options.log_frames) result.frames.push_back(phi);

    std::optional<SearchDirection> dir;
    try {
      dir = direction_fn(phi);
    } catch (const DegenerateFrameError& e) {
      result.termination = Termination::degenerate_frame;
      result.message = e.what();
    } catch (const RankDeficiencyError& e) {
      result.termination = Termination::degenerate_frame;
      result.message = e.what();
    } catch (const NonConvergenceError& e) {
      result.termination = Termination::solver_failure;
      result.message = e.what();
    } catch (const NotSpdError& e) {
      result.termination = Termination::solver_failure;
      result.message = e.what();
    }
    if (dir) {
      rec.direction_gram = dir->gram_of_direction;
      rec.grad_a_norm = std::sqrt(std::max(0.0, dir->gram_of_direction));
      rec.inner_iterations = dir->inner_effort;
      rec.slope = dir->slope;
    }

    auto finish = [&](Termination t) {
      if (dir) result.termination = t;
      result.converged = result.termination == Termination::residual_tol;
      rec.wall_time_s = std::chrono::duration<double>(Clock::now() - start).count();
      result.history.push_back(rec);
      return result;
    };
    if (!dir) return finish(result.termination);
    if (rec.residual_h_norm <= options.tol) return finish(Termination::residual_tol);
    if (n >= options.max_iter) return finish(Termination::max_iter);

    DescentState state{n, &phi, &*dir, rec.energy};
    StepOutcome step;
    try {
      step = step_fn(state, rec);
    } catch (const RankDeficiencyError& e) {
      result.termination = Termination::degenerate_frame;
      result.message = e.what();
      dir.reset();
      return finish(result.termination);
    }
    if (!step.accepted) {
      result.message = "no step satisfied the acceptance test within " +
                       std::to_string(step.backtracks) + " backtracks";
      return finish(Termination::line_search_failure);
    }
    rec.step_size = step.tau;
    rec.backtracks = step.backtracks;
    rec.wall_time_s = std::chrono::duration<double>(Clock::now() - start).count();
    result.history.push_back(rec);
    prev = std::move(phi);
    phi = std::move(*step.next);
  }
}

}  // namespace

RunResult rgd_fixed_step(const EnergyModel& model, const Frame& phi0, double tau,
                         const RunOptions& options) {
  if (!(tau > 0.0)) throw ConfigError("fixed step size tau must be > 0");
  const DirectionFn direction = [&](const Frame& phi) {
    return riemannian_gradient(model, phi, options.solver);
  };
  const StepFn step = [&](const DescentState& s, IterationRecord& rec) {
    rec.c_n = s.energy;
    rec.q_n = 1.0;
    StepOutcome out;
    out.next = retract(options.retraction, *s.phi, s.direction->direction * tau);
    out.accepted = true;
    out.tau = tau;
    return out;
  };
  return run_descent(model, phi0, options, direction, step);
}

RunResult rgd_line_search(const EnergyModel& model, const Frame& phi0,
                          const LineSearchParams& params, DirectionKind kind, int fixed_iters,
                          const RunOptions& options) {
  params.validate();
  if (kind != DirectionKind::exact_grad && fixed_iters < 1) {
    throw ConfigError("inexact and dcm directions need fixed_iters >= 1");
  }
  const DirectionFn direction = [&](const Frame& phi) {
    switch (kind) {
      case DirectionKind::exact_grad:
        return riemannian_gradient(model, phi, options.solver);
      case DirectionKind::inexact_grad:
        return safeguarded_inexact_gradient(model, phi, fixed_iters, options.solver);
      case DirectionKind::dcm:
        return dcm_direction(model, phi, fixed_iters, options.solver);
    }
    throw ConfigError("unknown direction kind");
  };

  NonmonotoneAverage average(energy(model, phi0));
  std::optional<Frame> prev_phi;
  std::optional<Frame> prev_eta;
  const StepFn step = [&](const DescentState& s, IterationRecord& rec) {
    const Frame& phi = *s.phi;
    const Frame& eta = s.direction->direction;
    double gamma = params.gamma0;
    if (s.n > 0) {
      const Frame sv = phi - *prev_phi;
      const Frame yv = *prev_eta - eta;
      const double ss = inner_h(sv, sv);
      const double sy = std::abs(inner_h(sv, yv));
      const double yy = inner_h(yv, yv);
      const double floor = 1e-14 * std::max(1.0, ss);
      if (s.n % 2 == 1) {
        gamma = sy < floor ? params.gamma_max : ss / sy;
      } else {
        gamma = yy < floor ? params.gamma_max : sy / yy;
      }
    }
    gamma = std::max(params.gamma_min, std::min(gamma, params.gamma_max));

    rec.c_n = average.c;
    rec.q_n = average.q;
    const double gram = s.direction->gram_of_direction;
    StepOutcome out;
    double tau = gamma;
    for (int k = 0; k <= params.max_backtracks; ++k, tau *= params.delta) {
      Frame candidate = retract(options.retraction, phi, eta * tau);
      const double e = energy(model, candidate);
      out.backtracks = k;
      if (e <= average.c - params.beta * tau * gram) {
        out.accepted = true;
        out.tau = tau;
        out.next = std::move(candidate);
        out.next_energy = e;
        break;
      }
    }
    if (out.accepted) {
      average.update(params.alpha, out.next_energy);
      prev_phi = phi;
      prev_eta = eta;
    }
    return out;
  };
  return run_descent(model, phi0, options, direction, step);
}

std::vector<StepDiagnostics> diagnostics_a2_a3(const EnergyModel& model, const RunResult& run) {
  if (run.frames.size() != run.history.size()) {
    throw ConfigError("diagnostics_a2_a3 needs a run recorded with log_frames");
  }
  constexpr double kTiny = 100.0 * std::numeric_limits<double>::epsilon();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<StepDiagnostics> out;
  for (std::size_t i = 0; i + 1 < run.history.size(); ++i) {
    const IterationRecord& rec = run.history[i];
    StepDiagnostics d;
    d.n = rec.n;
    const double grad = rec.grad_a_norm;
    const double step = a0_norm(model, run.frames[i + 1] - run.frames[i]);
    if (grad < kTiny) {
      d.r2 = d.r3 = nan;
    } else {
      d.r3 = step / grad;
      d.r2 = step > 0.0 ? -run.history[i + 1].energy_change / (grad * step) : nan;
    }
    out.push_back(d);
  }
  return out;
}

bool settled_above_ground_state(const RunResult& run, double ground_energy, double tol) {
  return run.final_energy() - ground_energy > 10.0 * tol;
}

int count_nonmonotone_violations(const RunResult& run, const LineSearchParams& params) {
  int violations = 0;
  for (std::size_t i = 0; i + 1 < run.history.size(); ++i) {
    const IterationRecord& rec = run.history[i];
    const double bound = rec.c_n - params.beta * rec.step_size * rec.direction_gram;
    if (!(run.history[i + 1].energy <= bound)) ++violations;
  }
  return violations;
}

}  // namespace stiefelgd
