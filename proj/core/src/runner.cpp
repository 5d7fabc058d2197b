#include "stiefelgd/runner.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace stiefelgd {

namespace {

namespace pt = boost::property_tree;

const std::set<std::string> kMethodNames{"rgd_fixed", "rgd_ls", "rgd_ls_inexact", "dcm"};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& field, const std::string& text) {
  const std::string s = trim(text);
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError(field + ": cannot parse '" + text + "' as a number");
  }
  return value;
}

bool parse_bool(const std::string& field, const std::string& text) {
  const std::string s = trim(text);
  if (s == "true" || s == "yes" || s == "1" || s == "on") return true;
  if (s == "false" || s == "no" || s == "0" || s == "off") return false;
  throw ConfigError(field + ": expected a boolean, got '" + text + "'");
}

// Reads keys from one INI section and rejects keys nobody asked for.
class SectionReader {
 public:
  SectionReader(const pt::ptree& root, std::string name) : name_(std::move(name)) {
    if (auto child = root.get_child_optional(name_)) section_ = &*child;
  }


  std::optional<std::string> raw(const std::string& key) {
    used_.insert(key);
    if (!section_) return std::nullopt;
    if (auto v = section_->get_optional<std::string>(pt::ptree::path_type(key, '\0'))) {
      return trim(*v);
    }
    return std::nullopt;
  }

  std::string field(const std::string& key) const { return name_ + "." + key; }

  std::string get_string(const std::string& key, const std::string& fallback) {
    return raw(key).value_or(fallback);
  }
  double get_double(const std::string& key, double fallback) {
    const auto v = raw(key);
    return v ? parse_number<double>(field(key), *v) : fallback;
  }
  int get_int(const std::string& key, int fallback) {
    const auto v = raw(key);
    return v ? parse_number<int>(field(key), *v) : fallback;
  }
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) {
    const auto v = raw(key);
    return v ? parse_number<std::uint64_t>(field(key), *v) : fallback;
  }
  bool get_bool(const std::string& key, bool fallback) {
    const auto v = raw(key);
    return v ? parse_bool(field(key), *v) : fallback;
  }

  void reject_unknown() const {
    if (!section_) return;
    for (const auto& [key, value] : *section_) {
      if (!used_.contains(key)) throw ConfigError(field(key) + ": unknown key");
    }
  }

 private:
  const pt::ptree* section_ = nullptr;
  std::string name_;
  std::set<std::string> used_;
};

Boundary parse_boundary(const std::string& field, const std::string& s) {
  if (s == "dirichlet" || s == "dirichlet_zero") return Boundary::dirichlet_zero;
  if (s == "periodic") return Boundary::periodic;
  throw ConfigError(field + ": expected dirichlet or periodic, got '" + s + "'");
}

Retraction parse_retraction(const std::string& field, const std::string& s) {
  if (s == "polar") return Retraction::polar;
  if (s == "qr" || s == "qr_mgs") return Retraction::qr_mgs;
  if (s == "qr_cholesky" || s == "cholesky") return Retraction::qr_cholesky;
  throw ConfigError(field + ": expected polar, qr_mgs or qr_cholesky, got '" + s + "'");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Wraps cheap parameter validation so the message names the section.
template <typename Fn>
void validated(const std::string& section, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    throw ConfigError(section + ": " + e.what());
  }
}

std::string format_real(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12e", x);
  return buf;
}

}  // namespace

RunConfig parse_run_config(std::istream& in, const std::filesystem::path& base_dir) {
  const std::string text(std::istreambuf_iterator<char>(in), {});
  pt::ptree root;
  try {
    std::istringstream buffer(text);
    pt::ini_parser::read_ini(buffer, root);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("line " + std::to_string(e.line()) + ": " + e.message());
  }
  // The INI reader drops sections without keys, so headers are collected from the text.
  std::set<std::string> headers;
  {
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
      const auto b = line.find_first_not_of(" \t");
      const auto e = line.find_last_not_of(" \t\r");
      if (b == std::string::npos || line[b] != '[' || line[e] != ']') continue;
      const std::string inner = line.substr(b + 1, e - b - 1);
      const auto ib = inner.find_first_not_of(" \t");
      headers.insert(ib == std::string::npos
                         ? std::string()
                         : inner.substr(ib, inner.find_last_not_of(" \t") - ib + 1));
    }
  }
  const std::set<std::string> known_sections{"model", "solver", "run", "output", "rgd_fixed",
                                             "rgd_ls", "rgd_ls_inexact", "dcm"};
  for (const std::string& name : headers) {
    if (!known_sections.contains(name)) throw ConfigError("[" + name + "]: unknown section");
  }
  for (const auto& [name, section] : root) {
    if (section.empty() && !section.data().empty()) {
      throw ConfigError(name + ": key outside of any section");
    }
    headers.insert(name);
  }

  RunConfig cfg;
  {
    SectionReader s(root, "model");
    if (!headers.contains("model")) throw ConfigError("model: section [model] is required");
    ModelConfig& m = cfg.model;
    m.type = s.get_string("type", m.type);
    if (m.type != "gpe" && m.type != "coupled") {
      throw ConfigError(s.field("type") + ": expected gpe or coupled, got '" + m.type + "'");
    }
    m.dimension = s.get_int("dimension", m.dimension);
    m.n = s.get_int("n", m.n);
    m.length = s.get_double("length", m.length);
    m.boundary = parse_boundary(s.field("boundary"), s.get_string("boundary", "dirichlet"));
    m.potential = s.get_string("potential", m.potential);
    m.omega = s.get_double("omega", m.omega);
    if (auto c = s.raw("center")) m.center = parse_number<double>(s.field("center"), *c);
    m.well_lo = s.get_double("well_lo", m.well_lo);
    m.well_hi = s.get_double("well_hi", m.well_hi);
    m.well_height = s.get_double("well_height", m.well_height);
    if (auto f = s.raw("potential_file")) {
      const std::filesystem::path p(*f);
      m.potential_file = p.is_absolute() ? p : base_dir / p;
    }
    m.kappa = s.get_double("kappa", m.kappa);
    m.sigma = s.get_double("sigma", m.sigma);
    m.n_orbitals = s.get_int("n_orbitals", m.n_orbitals);
    m.seed = s.get_u64("seed", m.seed);
    s.reject_unknown();
    if (m.type == "gpe" && m.n_orbitals != 1) {
      throw ConfigError(s.field("n_orbitals") + ": gpe model has exactly one orbital");
    }
    if (m.potential == "file" && m.potential_file.empty()) {
      throw ConfigError(s.field("potential_file") + ": required when potential = file");
    }
    if (m.potential != "harmonic" && m.potential != "well" && m.potential != "zero" &&
        m.potential != "file") {
      throw ConfigError(s.field("potential") + ": expected harmonic, well, zero or file");
    }
  }
  {
    SectionReader s(root, "solver");
    SolveConfig& sc = cfg.solver;
    const std::string method = s.get_string("method", "krylov_cg");
    if (method == "krylov_cg" || method == "cg") {
      sc.method = SolveMethod::krylov_cg;
    } else if (method == "direct_dense" || method == "direct") {
      sc.method = SolveMethod::direct_dense;
    } else {
      throw ConfigError(s.field("method") + ": expected krylov_cg or direct_dense");
    }
    sc.rel_tol = s.get_double("rel_tol", sc.rel_tol);
    sc.max_iters = s.get_int("max_iters", sc.max_iters);
    const std::string pc = s.get_string("preconditioner", "kinetic_shift");
    if (pc == "none") {
      sc.preconditioner = PreconditionerKind::none;
    } else if (pc == "diagonal") {
      sc.preconditioner = PreconditionerKind::diagonal;
    } else if (pc == "kinetic_shift") {
      sc.preconditioner = PreconditionerKind::kinetic_shift;
    } else {
      throw ConfigError(s.field("preconditioner") + ": expected none, diagonal or kinetic_shift");
    }
    sc.kinetic_shift_c0 = s.get_double("kinetic_shift_c0", sc.kinetic_shift_c0);
    s.reject_unknown();
    validated("solver", [&] { sc.validate(); });
  }
  std::vector<std::string> names;
  {
    SectionReader s(root, "run");
    cfg.tol = s.get_double("tol", cfg.tol);
    cfg.max_iter = s.get_int("max_iter", cfg.max_iter);
    names = split_list(s.get_string("methods", ""));
    s.reject_unknown();
    if (!(cfg.tol > 0.0)) throw ConfigError(s.field("tol") + ": must be > 0");
    if (cfg.max_iter < 0) throw ConfigError(s.field("max_iter") + ": must be >= 0");
    if (names.empty()) throw ConfigError(s.field("methods") + ": at least one method is required");
  }
  std::set<std::string> seen;
  for (const std::string& name : names) {
    if (!kMethodNames.contains(name)) {
      throw ConfigError("run.methods: unknown method '" + name +
                        "' (expected rgd_fixed, rgd_ls, rgd_ls_inexact, dcm)");
    }
    if (!seen.insert(name).second) throw ConfigError("run.methods: '" + name + "' listed twice");
    SectionReader s(root, name);
    MethodConfig mc;
    mc.name = name;
    mc.retraction = parse_retraction(s.field("retraction"), s.get_string("retraction", "polar"));
    if (name == "rgd_fixed") {
      mc.tau = s.get_double("tau", mc.tau);
      if (!(mc.tau > 0.0)) throw ConfigError(s.field("tau") + ": must be > 0");
    } else {
      LineSearchParams& ls = mc.line_search;
      ls.alpha = s.get_double("alpha", ls.alpha);
      ls.beta = s.get_double("beta", ls.beta);
      ls.delta = s.get_double("delta", ls.delta);
      ls.gamma_min = s.get_double("gamma_min", ls.gamma_min);
      ls.gamma_max = s.get_double("gamma_max", ls.gamma_max);
      ls.gamma0 = s.get_double("gamma0", ls.gamma0);
      ls.max_backtracks = s.get_int("max_backtracks", ls.max_backtracks);
      validated(name, [&] { ls.validate(); });
      if (name != "rgd_ls") {
        mc.fixed_iters = s.get_int("fixed_iters", mc.fixed_iters);
        if (mc.fixed_iters < 1) throw ConfigError(s.field("fixed_iters") + ": must be >= 1");
      }
    }
    s.reject_unknown();
    cfg.methods.push_back(mc);
  }
  {
    SectionReader s(root, "output");
    if (auto d = s.raw("directory")) {
      const std::filesystem::path p(*d);
      cfg.output.directory = p.is_absolute() ? p : base_dir / p;
    } else {
      cfg.output.directory = base_dir;
    }
    cfg.output.csv = s.get_bool("csv", cfg.output.csv);
    cfg.output.summary = s.get_bool("summary", cfg.output.summary);
    s.reject_unknown();
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_run_config(in, path.parent_path().empty() ? "." : path.parent_path());
}

EnergyModel build_model(const ModelConfig& m) {
  const GridSpec grid = GridSpec::make(m.dimension, m.n, m.length, m.boundary);
  Vector v;
  if (m.potential == "harmonic") {
    v = harmonic_potential(grid, m.omega, m.center.value_or(0.5 * m.length));
  } else if (m.potential == "well") {
    v = well_potential(grid, m.well_lo, m.well_hi, m.well_height);
  } else if (m.potential == "zero") {
    v = Vector::Zero(grid.n_dof());
  } else {
    v = load_potential(m.potential_file, grid);
  }
  return EnergyModel(grid, std::move(v), m.kappa, m.sigma, m.n_orbitals);
}

MethodOutcome run_method(const EnergyModel& model, const Frame& phi0, const MethodConfig& method,
                         const RunConfig& config, bool log_frames) {
  RunOptions opts;
  opts.tol = config.tol;
  opts.max_iter = config.max_iter;
  opts.solver = config.solver;
  opts.retraction = method.retraction;
  opts.log_frames = log_frames;
  if (method.name == "rgd_fixed") {
    return {method, rgd_fixed_step(model, phi0, method.tau, opts)};
  }
  DirectionKind kind = DirectionKind::exact_grad;
  if (method.name == "rgd_ls_inexact") kind = DirectionKind::inexact_grad;
  if (method.name == "dcm") kind = DirectionKind::dcm;
  return {method, rgd_line_search(model, phi0, method.line_search, kind, method.fixed_iters, opts)};
}

void write_history_csv(std::ostream& out, const RunResult& result) {
  out << "iter,energy,residual_h_norm,grad_a_norm,step_size,backtracks,inner_iterations,"
         "wall_time_s\n";
  for (const IterationRecord& r : result.history) {
    out << r.n << ',' << format_real(r.energy) << ',' << format_real(r.residual_h_norm) << ','
        << format_real(r.grad_a_norm) << ',' << format_real(r.step_size) << ',' << r.backtracks
        << ',' << r.inner_iterations << ',' << format_real(r.wall_time_s) << '\n';
  }
}

void write_summary(std::ostream& out, const RunConfig& config,
                   const std::vector<MethodOutcome>& outcomes) {
  const ModelConfig& m = config.model;
  out << "# stiefelgd run summary\n";
  out << "model = " << m.type << "\n";
  out << "dimension = " << m.dimension << "\n";
  out << "n = " << m.n << "\n";
  out << "n_orbitals = " << m.n_orbitals << "\n";
  out << "kappa = " << format_real(m.kappa) << "\n";
  out << "sigma = " << format_real(m.sigma) << "\n";
  out << "seed = " << m.seed << "\n";
  out << "tol = " << format_real(config.tol) << "\n";
  for (const MethodOutcome& o : outcomes) {
    const RunResult& r = o.result;
    out << "\n[" << o.method.name << "]\n";
    out << "converged = " << (r.converged ? "true" : "false") << "\n";
    out << "termination = " << to_string(r.termination) << "\n";
    out << "iterations = " << r.history.size() << "\n";
    out << "final_energy = " << format_real(r.final_energy()) << "\n";
    out << "final_residual_h_norm = " << format_real(r.history.back().residual_h_norm) << "\n";
    out << "eigenvalues = ";
    for (Eigen::Index i = 0; i < r.eigenvalues.size(); ++i) {
      out << (i ? ", " : "") << format_real(r.eigenvalues(i));
    }
    out << "\n";
    out << "total_inner_iterations = " << r.total_inner_iterations() << "\n";
    if (!r.message.empty()) out << "message = " << r.message << "\n";
  }
}

DenseEigenpairs dense_oracle(const EnergyModel& model, int count) {
  if (model.kappa() != 0.0) throw ConfigError("oracle requires kappa = 0 (linear problem)");
  if (model.grid().n_dof() > kMaxDenseDof) {
    throw ConfigError("oracle limited to n_dof <= " + std::to_string(kMaxDenseDof));
  }
  if (count < 1 || count > model.grid().n_dof()) throw ConfigError("oracle: bad eigenpair count");
  const DiscreteOperatorA op(model, Frame::zeros(model.grid(), 1));
  Eigen::SelfAdjointEigenSolver<Matrix> eig(op.assemble_dense());
  if (eig.info() != Eigen::Success) throw NotSpdError("oracle: dense eigensolve failed");
  DenseEigenpairs out;
  out.eigenvalues = eig.eigenvalues().head(count).array() - model.shift();
  out.vectors = eig.eigenvectors().leftCols(count) / std::sqrt(model.grid().weight());
  return out;
}

namespace {

RunConfig load_with_overrides(const std::filesystem::path& config_path,
                              const CliOverrides& overrides) {
  RunConfig cfg = load_run_config(config_path);
  if (overrides.out_dir) cfg.output.directory = *overrides.out_dir;
  if (overrides.seed) cfg.model.seed = *overrides.seed;
  return cfg;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

int run_solve(const std::filesystem::path& config_path, const CliOverrides& overrides,
              std::ostream& log) {
  RunConfig cfg;
  std::optional<EnergyModel> model;
  try {
    cfg = load_with_overrides(config_path, overrides);
    model.emplace(build_model(cfg.model));
  } catch (const std::invalid_argument& e) {
    log << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    log << "config error: " << e.what() << "\n";
    return 2;
  }

  std::filesystem::create_directories(cfg.output.directory);
  const Frame phi0 = initial_guess(model->grid(), model->n_orbitals(), cfg.model.seed);
  std::vector<MethodOutcome> outcomes;
  bool all_converged = true;
  for (const MethodConfig& method : cfg.methods) {
    MethodOutcome outcome = run_method(*model, phi0, method, cfg, overrides.log_frames);
    const RunResult& r = outcome.result;
    log << method.name << ": " << to_string(r.termination) << " after " << r.history.size()
        << " iterations, E = " << format_real(r.final_energy()) << "\n";
    if (!r.converged) {
      log << method.name << ": failed (" << to_string(r.termination) << ")"
          << (r.message.empty() ? "" : ": " + r.message) << "\n";
      all_converged = false;
    }
    if (cfg.output.csv) {
      auto out = open_output(cfg.output.directory / (method.name + ".csv"));
      write_history_csv(out, r);
    }
    outcomes.push_back(std::move(outcome));
  }
  if (cfg.output.summary) {
    auto out = open_output(cfg.output.directory / "summary.txt");
    write_summary(out, cfg, outcomes);
  }
  return all_converged ? 0 : 1;
}

int run_oracle(const std::filesystem::path& config_path, const CliOverrides& overrides,
               std::ostream& log) {
  try {
    const RunConfig cfg = load_with_overrides(config_path, overrides);
    const EnergyModel model = build_model(cfg.model);
    const DenseEigenpairs pairs = dense_oracle(model, model.n_orbitals());
    std::filesystem::create_directories(cfg.output.directory);
    {
      auto out = open_output(cfg.output.directory / "oracle_eigs.csv");
      out << "index,eigenvalue\n";
      for (Eigen::Index k = 0; k < pairs.eigenvalues.size(); ++k) {
        out << k + 1 << ',' << format_real(pairs.eigenvalues(k)) << '\n';
      }
    }
    {
      auto out = open_output(cfg.output.directory / "oracle_vectors.csv");
      out << "dof";
      for (Eigen::Index k = 0; k < pairs.vectors.cols(); ++k) out << ",phi_" << k + 1;
      out << '\n';
      for (Eigen::Index i = 0; i < pairs.vectors.rows(); ++i) {
        out << i;
        for (Eigen::Index k = 0; k < pairs.vectors.cols(); ++k) {
          out << ',' << format_real(pairs.vectors(i, k));
        }
        out << '\n';
      }
    }
    log << "oracle: wrote " << pairs.eigenvalues.size() << " eigenpairs to "
        << cfg.output.directory.string() << "\n";
    return 0;
  } catch (const std::invalid_argument& e) {
    log << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    log << "config error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace stiefelgd
