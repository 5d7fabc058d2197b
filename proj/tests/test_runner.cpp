#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "stiefelgd/errors.hpp"
#include "stiefelgd/runner.hpp"
#include "test_support.hpp"

using namespace stiefelgd;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("stiefelgd_runner_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path_ / name) << text;
    return path_ / name;
  }

 private:
  fs::path path_;
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(cell);
    rows.push_back(row);
  }
  return rows;
}

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_run_config(in, "/base");
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

const char* kSmall =
    "[model]\n"
    "type = gpe\n"
    "n = 64\n"
    "kappa = 50\n"
    "[run]\n"
    "methods = rgd_ls, dcm\n";

}  // namespace

TEST(ParseConfig, DefaultsAndOverrides) {
  const RunConfig c = parse(
      "[model]\ntype = coupled\nn = 32\nn_orbitals = 2\nboundary = periodic\nkappa = 3\n"
      "potential = file\npotential_file = v.txt\nseed = 9\n"
      "[solver]\nrel_tol = 1e-9\npreconditioner = diagonal\n"
      "[run]\nmethods = rgd_fixed, rgd_ls_inexact\ntol = 1e-7\nmax_iter = 50\n"
      "[rgd_fixed]\ntau = 0.2\nretraction = qr_cholesky\n"
      "[rgd_ls_inexact]\nfixed_iters = 5\nalpha = 0.5\n"
      "[output]\ndirectory = out\ncsv = false\n");
  EXPECT_EQ(c.model.type, "coupled");
  EXPECT_EQ(c.model.n, 32);
  EXPECT_EQ(c.model.boundary, Boundary::periodic);
  EXPECT_EQ(c.model.potential_file, fs::path("/base/v.txt"));
  EXPECT_EQ(c.model.seed, 9u);
  EXPECT_EQ(c.solver.rel_tol, 1e-9);
  EXPECT_EQ(c.solver.preconditioner, PreconditionerKind::diagonal);
  EXPECT_EQ(c.tol, 1e-7);
  EXPECT_EQ(c.max_iter, 50);
  ASSERT_EQ(c.methods.size(), 2u);
  EXPECT_EQ(c.methods[0].name, "rgd_fixed");
  EXPECT_EQ(c.methods[0].tau, 0.2);
  EXPECT_EQ(c.methods[0].retraction, Retraction::qr_cholesky);
  EXPECT_EQ(c.methods[1].fixed_iters, 5);
  EXPECT_EQ(c.methods[1].line_search.alpha, 0.5);
  EXPECT_EQ(c.methods[1].line_search.beta, 1e-4);
  EXPECT_EQ(c.output.directory, fs::path("/base/out"));
  EXPECT_FALSE(c.output.csv);
  EXPECT_TRUE(c.output.summary);
}

TEST(ParseConfig, Diagnostics) {
  EXPECT_NE(error_of("[model]\nn = 3x\n[run]\nmethods = rgd_ls\n").find("model.n"), std::string::npos);
  EXPECT_NE(error_of("[model]\ncolour = red\n[run]\nmethods = rgd_ls\n").find("model.colour: unknown key"),
            std::string::npos);
  EXPECT_NE(error_of("[model]\n[extra]\n[run]\nmethods = rgd_ls\n").find("unknown section"), std::string::npos);
  EXPECT_NE(error_of("[model]\n[run]\nmethods = newton\n").find("unknown method"), std::string::npos);
  EXPECT_NE(error_of("[model]\n[run]\nmethods =\n").find("run.methods"), std::string::npos);
  EXPECT_NE(error_of("[model]\n[run]\n").find("run.methods"), std::string::npos);
  EXPECT_NE(error_of("[run]\nmethods = rgd_ls\n").find("[model]"), std::string::npos);
  EXPECT_NE(error_of("[model]\nthis line is broken\n").find("line 2"), std::string::npos);
  EXPECT_NE(error_of("[model]\ntype = gpe\nn_orbitals = 2\n[run]\nmethods = rgd_ls\n").find("model.n_orbitals"),
            std::string::npos);
  EXPECT_NE(error_of("[model]\n[run]\nmethods = rgd_ls\n[rgd_ls]\ntau = 1\n").find("rgd_ls.tau"),
            std::string::npos);
  EXPECT_NE(error_of("[model]\n[run]\nmethods = rgd_ls\n[rgd_ls]\ngamma_min = 5\n").find("rgd_ls"),
            std::string::npos);
  EXPECT_NE(error_of("[model]\n[run]\nmethods = rgd_ls, rgd_ls\n").find("twice"), std::string::npos);
  EXPECT_NE(error_of("[model]\nboundary = neumann\n[run]\nmethods = rgd_ls\n").find("model.boundary"),
            std::string::npos);
}

TEST(BuildModel, Potentials) {
  ModelConfig m;
  m.n = 16;
  m.potential = "zero";
  EXPECT_EQ(build_model(m).potential().norm(), 0.0);
  m.potential = "well";
  EXPECT_GT(build_model(m).potential().maxCoeff(), 0.0);
  m.potential = "harmonic";
  m.center = 0.0;
  EXPECT_GT(build_model(m).potential()(15), build_model(m).potential()(0));
}

TEST(RunSolve, WritesCsvAndSummary) {
  TempDir dir;
  const fs::path cfg = dir.write("run.ini", kSmall);
  std::ostringstream log;
  ASSERT_EQ(run_solve(cfg, CliOverrides{}, log), 0) << log.str();
  for (const char* m : {"rgd_ls", "dcm"}) {
    const auto rows = read_csv(dir.path() / (std::string(m) + ".csv"));
    ASSERT_GE(rows.size(), 2u);
    std::string header;
    for (std::size_t i = 0; i < rows[0].size(); ++i) header += (i ? "," : "") + rows[0][i];
    EXPECT_EQ(header, "iter,energy,residual_h_norm,grad_a_norm,step_size,backtracks,inner_iterations,wall_time_s");
    for (std::size_t r = 1; r < rows.size(); ++r) {
      ASSERT_EQ(rows[r].size(), 8u);
      EXPECT_EQ(std::stoi(rows[r][0]), static_cast<int>(r - 1));
      for (int c : {1, 2, 3, 4, 7}) EXPECT_TRUE(std::isfinite(std::stod(rows[r][c])));
    }
    EXPECT_LE(std::stod(rows.back()[2]), 1e-6);
  }
  const std::string summary = read_file(dir.path() / "summary.txt");
  EXPECT_NE(summary.find("[rgd_ls]"), std::string::npos);
  EXPECT_NE(summary.find("[dcm]"), std::string::npos);
  EXPECT_NE(summary.find("termination = residual_tol"), std::string::npos);
}

TEST(RunSolve, RowCountMatchesIterations) {
  const RunConfig c = parse(kSmall);
  const EnergyModel model = build_model(c.model);
  const MethodOutcome o = run_method(model, initial_guess(model.grid(), 1, c.model.seed), c.methods[0], c);
  std::ostringstream csv;
  write_history_csv(csv, o.result);
  const std::string text = csv.str();
  EXPECT_EQ(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')), o.result.history.size() + 1);
}

TEST(RunSolve, TwoMethodsAgree) {
  const RunConfig c = parse(kSmall);
  const EnergyModel model = build_model(c.model);
  const Frame phi0 = initial_guess(model.grid(), 1, 1);
  const double a = run_method(model, phi0, c.methods[0], c).result.final_energy();
  const double b = run_method(model, phi0, c.methods[1], c).result.final_energy();
  EXPECT_NEAR(a, b, 1e-7);
}

TEST(RunSolve, ExitCodes) {
  TempDir dir;
  std::ostringstream log;
  EXPECT_EQ(run_solve(dir.write("empty.ini", "[model]\n[run]\nmethods =\n"), {}, log), 2);
  EXPECT_EQ(run_solve(dir.write("bad.ini", "[model]\nn = -4\n[run]\nmethods = rgd_ls\n"), {}, log), 2);
  EXPECT_EQ(run_solve(dir.path() / "missing.ini", {}, log), 2);
  EXPECT_EQ(run_solve(dir.write("short.ini", "[model]\nn = 64\nkappa = 50\n[run]\nmethods = rgd_fixed\nmax_iter = 3\n"),
                      {}, log),
            1);
  EXPECT_NE(log.str().find("max_iter"), std::string::npos);
}

TEST(RunSolve, OverridesApply) {
  TempDir dir;
  const fs::path cfg = dir.write("run.ini", kSmall);
  CliOverrides o;
  o.out_dir = dir.path() / "elsewhere";
  o.seed = 42;
  std::ostringstream log;
  ASSERT_EQ(run_solve(cfg, o, log), 0);
  const std::string summary = read_file(dir.path() / "elsewhere" / "summary.txt");
  EXPECT_NE(summary.find("seed = 42"), std::string::npos);
}

TEST(Oracle, AnalyticLaplacianSpectrum) {
  ModelConfig m;
  m.n = 64;
  m.potential = "zero";
  m.n_orbitals = 1;
  const DenseEigenpairs p = dense_oracle(build_model(m), 5);
  const double h = 1.0 / 65;
  for (int k = 1; k <= 5; ++k) {
    const double s = std::sin(k * std::numbers::pi * h / 2);
    EXPECT_NEAR(p.eigenvalues(k - 1), 4 / (h * h) * s * s, 1e-10 * 4 / (h * h));
  }
  EXPECT_NEAR(p.vectors.col(0).squaredNorm() * h, 1.0, 1e-12);
}

TEST(Oracle, HarmonicStrictlyIncreasingAndMatchesSolve) {
  TempDir dir;
  const fs::path cfg = dir.write(
      "lin.ini", "[model]\ntype = coupled\nn = 128\nn_orbitals = 3\nkappa = 0\n[run]\nmethods = rgd_ls\n");
  std::ostringstream log;
  ASSERT_EQ(run_oracle(cfg, {}, log), 0) << log.str();
  ASSERT_EQ(run_solve(cfg, {}, log), 0) << log.str();
  const auto rows = read_csv(dir.path() / "oracle_eigs.csv");
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0][0], "index");
  std::vector<double> eig;
  for (int r = 1; r <= 3; ++r) eig.push_back(std::stod(rows[r][1]));
  EXPECT_LT(eig[0], eig[1]);
  EXPECT_LT(eig[1], eig[2]);

  const std::string summary = read_file(dir.path() / "summary.txt");
  const auto pos = summary.find("eigenvalues = ");
  ASSERT_NE(pos, std::string::npos);
  std::stringstream line(summary.substr(pos + 14, summary.find('\n', pos) - pos - 14));
  std::vector<double> solved;
  std::string cell;
  while (std::getline(line, cell, ',')) solved.push_back(std::stod(cell));
  ASSERT_EQ(solved.size(), 3u);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(solved[k], eig[k], 1e-8);

  const auto vrows = read_csv(dir.path() / "oracle_vectors.csv");
  EXPECT_EQ(vrows.size(), 129u);
}

TEST(Oracle, ExitCodes) {
  TempDir dir;
  std::ostringstream log;
  EXPECT_EQ(run_oracle(dir.write("nl.ini", "[model]\nkappa = 1\n[run]\nmethods = rgd_ls\n"), {}, log), 2);
  EXPECT_EQ(run_oracle(dir.write("big.ini", "[model]\ndimension = 2\nn = 100\n[run]\nmethods = rgd_ls\n"), {}, log),
            2);
}
