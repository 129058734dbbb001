#pragma once

#include "hypo/kl_expansion.hpp"
#include "hypo/runner.hpp"
#include "hypo/uq_hierarchy.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hypo {

/// Fully resolved run configuration. Grammar: one `key = value` per line,
/// `#` starts a comment, `[section]` prefixes the following keys with `section.`.
struct RunConfig {
  std::uint64_t seed = 7;
  std::string output_dir = "out";

  int mesh_nx = 16;
  double mesh_Lx = 1.0;

  int velocity_dim = 1;
  int velocity_n = 16;
  double velocity_vmax = 6.0;
  std::string velocity_kind = "uniform-midpoint";

  std::string sigma_family = "constant";
  double sigma_base = 1.0;
  double sigma_bump_amp = 0.0;
  double sigma_bump_width = 1.0;
  std::string sigma_z_coupling = "none";
  double sigma_z_coeff = 0.0;
  std::vector<double> sigma_table;
  double sigma_lambda = -1.0;
  double sigma_c_tilde = -1.0;

  double bc_c = 0.5;

  std::string potential_family = "zero";
  double potential_amplitude = 0.0;

  double solver_dt = 0.0;
  double solver_cfl = 0.5;
  double solver_t_end = 8.0;
  std::string solver_collision = "exponential";
  bool solver_debug_checks = false;

  int diagnostics_every = 10;
  double diagnostics_fit_t0 = 1.0;
  double diagnostics_fit_t1 = 8.0;
  double diagnostics_transient = 0.2;

  std::string init_family = "cosine";
  double init_amplitude = 0.1;
  double init_z_slope = 0.0;

  int uq_lmax = 1;
  double uq_z = 0.0;
  double uq_fd_delta = 1e-2;

  std::string kl_kernel = "brownian";
  int kl_n = 512;
  double kl_T = 1.0;
  double kl_length = 1.0;
  double kl_energy = 0.95;
  int kl_samples = 100000;
};

/// Parses text; throws InvalidConfig listing every violation, one per line.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Semantic checks; returns all violations (empty when valid).
std::vector<std::string> validate(const RunConfig& cfg);

/// Every key with its resolved value, in a form parse_config reads back.
std::string echo(const RunConfig& cfg);

/// Sets one dotted key from its textual value (used by CLI overrides).
void set_key(RunConfig& cfg, const std::string& key, const std::string& value);

GridPtr grid_from(const RunConfig& cfg);
CrossSectionSpec sigma_from(const RunConfig& cfg);
/// Model at parameter z; the potential is attached when `with_potential` and its family is not zero.
Model model_from(const RunConfig& cfg, bool with_potential, double z = 0.0);
SolverConfig solver_from(const RunConfig& cfg);
InitSpec init_from(const RunConfig& cfg);
RunOptions run_options_from(const RunConfig& cfg);
HierarchyOptions hierarchy_from(const RunConfig& cfg);
CovarianceKernel kl_kernel_from(const RunConfig& cfg);

} // namespace hypo
