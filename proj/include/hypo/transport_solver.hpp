#pragma once

#include "hypo/collision.hpp"
#include "hypo/geometry_bc.hpp"
#include "hypo/poisson_field.hpp"

#include <Eigen/Dense>

#include <complex>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hypo {

enum class CollisionMode { Explicit, Exponential };
CollisionMode parse_collision_mode(const std::string& s);
std::string to_string(CollisionMode m);

struct SolverConfig {
  double dt = 0.0; // 0 picks the largest step allowed by cfl
  double cfl = 0.5;
  double t_end = 8.0;
  CollisionMode mode = CollisionMode::Exponential;
  bool debug_checks = false;
  bool transport = true;
  bool collision = true;
};

/// Everything the dynamics depend on. `potential` present means the force term is active.
struct Model {
  SlabMesh mesh;
  GridPtr grid;
  CollisionKernel kernel;
  MaxwellBC bc;
  std::optional<PotentialV> potential;

  std::size_t nv() const { return grid->size(); }
  std::size_t size() const { return static_cast<std::size_t>(mesh.nx) * grid->size(); }
  /// Spatial weight of cell k in the norm: e^{-V_k} with a potential, 1 otherwise.
  double cell_weight(int k) const { return potential ? potential->weight(k) : 1.0; }
  /// Spatial equilibrium profile: e^{V_k}, or 1/Lx without potential.
  double eq_profile(int k) const { return potential ? std::exp(potential->V[k]) : 1.0 / mesh.Lx; }
};

/// Cell-major state: f[k * nv + i].
struct KineticState {
  std::vector<double> f;
  double t = 0.0;
};

double total_mass(const Model& m, std::span<const double> f);
/// sum_k dx cell_weight(k) sum_i w_i f^2 / M_i.
double state_norm2(const Model& m, std::span<const double> f);
std::vector<double> equilibrium(const Model& m, double mu);

struct StepCheck {
  double mass_drift = 0.0;    // relative, against the first step
  double max_wall_flux = 0.0; // relative to ||f||
  bool finite = true;
};

class Solver {
 public:
  Solver(Model model, SolverConfig cfg);

  const Model& model() const { return model_; }
  const SolverConfig& config() const { return cfg_; }
  double dt() const { return dt_; }
  std::size_t size() const { return model_.size(); }

  /// Largest dt satisfying the transport and force CFL limits at cfl = 1.
  static double cfl_limit(const Model& m);

  void transport_rhs(std::span<const double> f, std::span<double> out) const;
  void force_rhs(std::span<const double> f, std::span<double> out) const;
  void collision_rhs(std::span<const double> f, std::span<double> out) const;
  /// Full semi-discrete operator honoring the transport/collision switches.
  void rhs(std::span<const double> f, std::span<double> out) const;

  /// Wall values (outgoing trace plus Maxwell-reflected incoming part).
  std::vector<double> wall_values(std::span<const double> f, Wall w) const;
  double wall_flux(std::span<const double> f, Wall w) const;

  void transport_step(std::vector<double>& f, double h) const;
  void force_step(std::vector<double>& f, double h) const;
  void collision_step(std::vector<double>& f, double h);
  /// One Strang step of length dt() without bookkeeping.
  void advance(std::vector<double>& f);
  /// advance() plus time update and the per-step invariant checks.
  void step(KineticState& s);

  Eigen::MatrixXd dense_generator() const;
  /// Matrix of one full step.
  Eigen::MatrixXd step_matrix();

  const StepCheck& last_check() const { return check_; }

 private:
  const Eigen::MatrixXd& propagator(double h);
  void ssp_rk2(std::vector<double>& f, double h, void (Solver::*op)(std::span<const double>, std::span<double>) const) const;

  Model model_;
  SolverConfig cfg_;
  double dt_ = 0.0;
  double L_norm_ = 0.0;
  double mass0_ = std::numeric_limits<double>::quiet_NaN();
  StepCheck check_;

  // cached exp(hL) for the exponential collision mode
  double cached_h_ = -1.0;
  Eigen::MatrixXd exp_hL_;
  Eigen::VectorXd sym_evals_;
  Eigen::MatrixXd sym_evecs_;
};

/// Conserved functionals deflated by the oracle. Columns of `right` are the
/// corresponding stationary states, columns of `left` the functionals.
struct Deflation {
  Eigen::MatrixXd right;
  Eigen::MatrixXd left;
};

Deflation global_mass_deflation(const Model& m);
Deflation cell_mass_deflation(const Model& m);

struct OracleResult {
  double tau_h = 0.0;
  std::complex<double> slowest{0.0, 0.0};
  std::vector<std::complex<double>> spectrum; // sorted by decreasing real part
};

/// -max Re(eig) of A restricted to the complement of the deflated functionals.
OracleResult decay_rate_oracle(const Eigen::MatrixXd& A, const Deflation& d);

/// Stationary state of the full step with total mass mu (fixed point of step_matrix).
std::vector<double> discrete_equilibrium(Solver& s, double mu);

} // namespace hypo
