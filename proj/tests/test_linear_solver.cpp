#include <gtest/gtest.h>

#include "stiefelgd/errors.hpp"
#include "test_support.hpp"

using namespace stiefelgd;
using namespace testing_support;

namespace {

double column_relative_residual(const DiscreteOperatorA& op, const Frame& x, const Frame& b, int j) {
  const Matrix r = op.apply(x.values()) - b.values();
  return r.col(j).norm() / b.values().col(j).norm();
}

}  // namespace

TEST(SolveConfigTest, Validation) {
  SolveConfig c;
  EXPECT_NO_THROW(c.validate());
  c.rel_tol = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = SolveConfig{};
  c.fixed_iters = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Solve, ZeroRightHandSide) {
  const EnergyModel m = reference_gpe(32);
  const DiscreteOperatorA op(m, random_point(m.grid(), 1, 1));
  const SolveResult r = solve(op, Frame::zeros(m.grid(), 1), SolveConfig{});
  EXPECT_EQ(norm_h(r.solution), 0.0);
  EXPECT_EQ(r.report.total_iterations(), 0);
}

TEST(Solve, IdentityLikeOperator) {
  const GridSpec g = grid1d(30);
  const EnergyModel m(g, Vector::Zero(30), 0.0, 1.0, 2, 0.0);
  const DiscreteOperatorA op(m, Frame::zeros(g, 2));
  const Frame b = gaussian_frame(g, 2, 2);
  SolveConfig c;
  c.preconditioner = PreconditionerKind::none;
  const SolveResult r = solve(op, b, c);
  EXPECT_LE(norm_h(r.solution - b), 1e-14 * norm_h(b));
  for (int it : r.report.iterations_per_column) EXPECT_EQ(it, 1);
}

class SolveAgainstDense : public ::testing::TestWithParam<PreconditionerKind> {};

TEST_P(SolveAgainstDense, MatchesFactorization) {
  const EnergyModel m = reference_coupled(64, 2, 20.0);
  const DiscreteOperatorA op(m, random_point(m.grid(), 2, 3));
  const Frame b = gaussian_frame(m.grid(), 2, 4);
  SolveConfig c;
  c.preconditioner = GetParam();
  const SolveResult r = solve(op, b, c);
  const Matrix dense = op.assemble_dense().llt().solve(b.values());
  EXPECT_LE((r.solution.values() - dense).norm(), 1e-7 * dense.norm());
  const SolveResult direct = solve(op, b, direct_config());
  EXPECT_LE((direct.solution.values() - dense).norm(), 1e-12 * dense.norm());
  EXPECT_LE((r.solution.values() - direct.solution.values()).norm(), 10 * c.rel_tol * dense.norm());
  for (int j = 0; j < 2; ++j) {
    EXPECT_LE(column_relative_residual(op, r.solution, b, j), c.rel_tol);
    EXPECT_LE(r.report.final_relative_residuals[j], c.rel_tol);
  }
}

INSTANTIATE_TEST_SUITE_P(Kinds, SolveAgainstDense,
                         ::testing::Values(PreconditionerKind::none, PreconditionerKind::diagonal,
                                           PreconditionerKind::kinetic_shift));

TEST(Solve, KineticShiftNeedsFewerIterations) {
  const EnergyModel m = reference_gpe(128);
  const DiscreteOperatorA op(m, smooth_point(m.grid(), 1, 5));
  const Frame b = gaussian_frame(m.grid(), 1, 6);
  SolveConfig none;
  none.preconditioner = PreconditionerKind::none;
  SolveConfig ks;
  ks.preconditioner = PreconditionerKind::kinetic_shift;
  EXPECT_LT(solve(op, b, ks).report.total_iterations(), solve(op, b, none).report.total_iterations());
}

TEST(Solve, FixedIterationsAndWarmStart) {
  const EnergyModel m = reference_gpe(64);
  const Frame phi = smooth_point(m.grid(), 1, 7);
  const DiscreteOperatorA op(m, phi);
  SolveConfig c;
  c.fixed_iters = 3;
  const SolveResult r = solve(op, phi, c);
  EXPECT_EQ(r.report.iterations_per_column[0], 3);
  const Frame exact = solve(op, phi, direct_config()).solution;
  const SolveResult warm = solve(op, phi, c, exact);
  EXPECT_LE(norm_h(warm.solution - exact), 1e-9 * norm_h(exact));
}

TEST(Solve, NonConvergenceCarriesReport) {
  const EnergyModel m = reference_gpe(256);
  const DiscreteOperatorA op(m, smooth_point(m.grid(), 1, 8));
  SolveConfig c;
  c.preconditioner = PreconditionerKind::none;
  c.max_iters = 2;
  c.rel_tol = 1e-12;
  try {
    solve(op, gaussian_frame(m.grid(), 1, 9), c);
    FAIL() << "expected non-convergence";
  } catch (const NonConvergenceError& e) {
    ASSERT_EQ(e.report().iterations_per_column.size(), 1u);
    EXPECT_GT(e.report().final_relative_residuals[0], c.rel_tol);
  }
}

TEST(Solve, DirectRefusesLargeProblems) {
  const GridSpec g = GridSpec::make(2, 100, 1.0);
  const EnergyModel m(g, Vector::Zero(g.n_dof()), 0.0, 0.0, 1);
  const DiscreteOperatorA op(m, Frame::zeros(g, 1));
  EXPECT_THROW(solve(op, gaussian_frame(g, 1, 1), direct_config()), ConfigError);
}

TEST(Solve, PeriodicTwoDimensional) {
  const GridSpec g = GridSpec::make(2, 12, 1.0, Boundary::periodic);
  const EnergyModel m(g, harmonic_potential(g, 4.0, 0.5), 5.0, 1.0, 2);
  const DiscreteOperatorA op(m, random_point(g, 2, 10));
  const Frame b = gaussian_frame(g, 2, 11);
  const SolveResult r = solve(op, b, SolveConfig{});
  const SolveResult d = solve(op, b, direct_config());
  EXPECT_LE(norm_h(r.solution - d.solution), 10 * 1e-8 * norm_h(d.solution));
}

TEST(Preconditioner, Kinds) {
  const GridSpec g = grid1d(40);
  const EnergyModel m(g, Vector::Constant(40, 2.0), 0.0, 0.0, 1);
  const DiscreteOperatorA op(m, Frame::zeros(g, 1));
  const Frame r = gaussian_frame(g, 1, 12);
  EXPECT_EQ(norm_h(apply_preconditioner(PreconditionerKind::none, op, r) - r), 0.0);
  const Frame d = apply_preconditioner(PreconditionerKind::diagonal, op, r);
  EXPECT_LE(norm_h(d - r * (1.0 / (laplacian_diagonal(g) + 2.0))), 1e-14);
  const Frame k = apply_preconditioner(PreconditionerKind::kinetic_shift, op, r);
  const Matrix back = apply_negative_laplacian(g, k.values()) + k.values();
  EXPECT_LE((back - r.values()).norm(), 1e-10 * r.values().norm());
}
