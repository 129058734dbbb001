#pragma once

#include "hypo/hypo_diagnostics.hpp"
#include "hypo/runner.hpp"

#include <cstdint>
#include <vector>

namespace hypo {

/// binom(n, k) as an exact integer-valued double.
double binomial(int n, int k);

/// S^l = sum_{k<l} binom(l, k) L_z^{l-k}(g^k), cell by cell. `dz[k-1]` holds L_z^k.
std::vector<double> build_source(int l, const std::vector<CollisionKernel>& dz,
                                 const std::vector<std::vector<double>>& levels, const Model& m);

struct HierarchyOptions {
  int lmax = 1;
  SolverConfig solver; // the collision sub-step is always the exact block exponential
  int every = 10;
  InitSpec init;       // f0(z) = eq + amplitude (1 + z_slope z) * perturbation
  double fit_t0 = 1.0;
  double transient = 0.2;
  std::uint64_t seed = 7;
};

/// e^{-a t} (1 + t)^l envelope fitted to one level's norm series.
struct Envelope {
  int level = 0;
  double a_fit = 0.0;
  double c0 = 0.0;
  double r2 = 0.0;
  bool ok = false; // a_fit > 0
};

struct LevelChecks {
  long records = 0;
  long t1_fail = 0;      // entropy estimate with source
  long source_fail = 0;  // ||S^l|| <= sum binom C~ ||g^k||
  long jsource_fail = 0; // ||j^S|| <= sum binom C_L ||g^k||
  double max_mass_drift = 0.0;
};

struct HierarchyResult {
  double z = 0.0;
  double dt = 0.0;
  ConstantsLedger ledger;
  std::vector<double> t;
  std::vector<std::vector<double>> norms;  // [level][record], level 0 measured from equilibrium
  std::vector<std::vector<double>> masses; // [level][record]
  std::vector<std::vector<double>> levels; // final states, level 0 is f itself
  std::vector<LevelChecks> checks;
  std::vector<Envelope> envelopes;
  // recursion-lemma inputs built from the ledger
  double a_paper = 0.0;
  std::vector<std::vector<double>> b_paper;
  std::vector<double> dz_op_norm;
  std::vector<double> dz_CL;
};

/// Initial hierarchy: g^0 = f0(z), g^1 = amplitude z_slope perturbation, higher levels zero.
std::vector<std::vector<double>> initial_levels(const Model& m, const InitSpec& init, double z, int lmax);

/// The kernel in `m` must be assembled at the hierarchy's z from `spec`.
HierarchyResult run_hierarchy(const Model& m, const CrossSectionSpec& spec, const HierarchyOptions& opt);

struct FdResult {
  std::vector<double> t;
  std::vector<double> norms; // ||g^l_fd|| per record
  std::vector<double> final_state;
};

/// Central differences of 2l+1 independent solves at z + m delta, m = -l..l.
FdResult fd_oracle(const Model& m, const CrossSectionSpec& spec, const HierarchyOptions& opt, double delta, int l);

/// Polynomial G^l with G^l(t) = h0[l] + sum_k b[l][k] int_0^t G^k.
struct RecursionBound {
  double a = 0.0;
  std::vector<std::vector<double>> b;
  std::vector<double> h0;
  std::vector<std::vector<double>> coeffs; // coeffs[l][p] multiplies t^p
  double G(int l, double t) const;
};

RecursionBound recursion_G(double a, const std::vector<std::vector<double>>& b, const std::vector<double>& h0);

struct RecursionCheck {
  bool ok = false;
  double max_ratio = 0.0;     // max h^l(t) / (e^{-at} G^l(t)) over the grid
  double max_equality_gap = 0.0; // equality case |h - e^{-at} G| relative
};

/// RK4 on dh^l/dt = -a h^l - d_l h^l + theta_l sum_k b[l][k] h^k. The equality case uses
/// d = 0, theta = 1; otherwise d_l >= 0 and theta_l in [0, 1] are drawn from `seed`.
RecursionCheck verify_recursion_lemma(double a, const std::vector<std::vector<double>>& b,
                                      const std::vector<double>& h0, double t_end, bool equality,
                                      std::uint64_t seed = 0);

} // namespace hypo
