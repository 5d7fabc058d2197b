#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stiefelgd/optimizer.hpp"

namespace stiefelgd {

/// [model] section.
struct ModelConfig {
  std::string type = "gpe";  ///< gpe (N = 1) or coupled
  int dimension = 1;
  int n = 128;
  double length = 1.0;
  Boundary boundary = Boundary::dirichlet_zero;
  std::string potential = "harmonic";  ///< harmonic | well | zero | file
  double omega = 10.0;
  std::optional<double> center;  ///< defaults to length / 2
  double well_lo = 0.25;
  double well_hi = 0.75;
  double well_height = 100.0;
  std::filesystem::path potential_file;
  double kappa = 0.0;
  double sigma = 0.0;
  int n_orbitals = 1;
  std::uint64_t seed = 1;
};

/// One requested method and its [<method>] section.
struct MethodConfig {
  std::string name;  ///< rgd_fixed | rgd_ls | rgd_ls_inexact | dcm
  double tau = 0.1;
  LineSearchParams line_search;
  int fixed_iters = 3;
  Retraction retraction = Retraction::polar;
};

struct OutputConfig {
  std::filesystem::path directory = ".";
  bool csv = true;
  bool summary = true;
};

struct RunConfig {
  ModelConfig model;
  std::vector<MethodConfig> methods;
  SolveConfig solver;
  double tol = 1e-6;
  int max_iter = 2000;
  OutputConfig output;
};

/// Parses an INI run description. Syntax errors carry the line number;
/// value errors name the offending section.key. Throws ConfigError.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(std::istream& in, const std::filesystem::path& base_dir = ".");

EnergyModel build_model(const ModelConfig& config);

struct MethodOutcome {
  MethodConfig method;
  RunResult result;
};

MethodOutcome run_method(const EnergyModel& model, const Frame& phi0, const MethodConfig& method,
                         const RunConfig& config, bool log_frames = false);

/// CSV header: iter,energy,residual_h_norm,grad_a_norm,step_size,backtracks,
/// inner_iterations,wall_time_s; reals as %.12e.
void write_history_csv(std::ostream& out, const RunResult& result);
void write_summary(std::ostream& out, const RunConfig& config,
                   const std::vector<MethodOutcome>& outcomes);

struct DenseEigenpairs {
  Vector eigenvalues;  ///< ascending, shift removed
  Matrix vectors;      ///< H-normalized columns
};

/// Lowest count eigenpairs of the assembled linear operator (kappa = 0).
DenseEigenpairs dense_oracle(const EnergyModel& model, int count);

struct CliOverrides {
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::uint64_t> seed;
  bool log_frames = false;
};

/// `solve`: 0 when every method converged, 1 on numerical failure, 2 on a
/// malformed config.
int run_solve(const std::filesystem::path& config_path, const CliOverrides& overrides,
              std::ostream& log);

/// `oracle`: writes oracle_eigs.csv and oracle_vectors.csv; 2 unless kappa = 0
/// and n_dof <= 8192.
int run_oracle(const std::filesystem::path& config_path, const CliOverrides& overrides,
               std::ostream& log);

}  // namespace stiefelgd
