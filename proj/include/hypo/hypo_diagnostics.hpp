#pragma once

#include "hypo/transport_solver.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hypo {

/// Constants entering the entropy estimates, computed on the discrete problem.
struct ConstantsLedger {
  double lambda = 0.0;   // configured lower bound of sigma
  double lambda_h = 0.0; // discrete collisional gap
  double C_L = 0.0;
  double C_p = 0.0;
  double D = 0.0;        // ||(v x v - I) M||_dnu
  double kappa = 0.0;    // max_k ||v_k M||_dnu
  double C_j = 0.0;      // sqrt(dim) * kappa
  double K = 0.0;        // probe-set H^2 ratio (heuristic)
  double D_gamma = 0.0;  // probe-set trace ratio (heuristic)
  double C_gamma = 0.0;  // ||v_2 sqrt(M)||_{gamma+}, zero for dim 1
  double moment_defect = 0.0; // |sum w (v1^2 - 1) M|

  bool potential = false;
  double c_V = 1.0, C_V = 1.0, D_V = 0.0, C_tilde_V = 1.0;

  double c = 0.0;
  double eta_tilde = 0.0;
  double eta = 0.0;
  double eta_bound[3] = {0.0, 0.0, 0.0}; // the three constraints before halving
  int eta_binding = -1;                  // index of the active one
  double c_eta = 0.0, C_eta = 0.0;
  double alpha = 0.0, beta = 0.0, delta = 0.0, omega = 0.0;
};

ConstantsLedger populate_ledger(const Model& m, std::uint64_t seed = 7);

/// Picks eta_tilde then eta at half the admissible bounds; fills c_eta, C_eta,
/// alpha, beta, delta and omega.
void choose_eta(ConstantsLedger& L, double c);

/// Everything the T-terms need from one state, evaluated on the perturbation g.
struct Snapshot {
  double t = 0.0;
  std::vector<double> rho;      // mean-removed density
  std::vector<double> j1;       // x-momentum per cell
  std::vector<double> S11;
  std::vector<double> jL1;
  PhiField phi;
  std::vector<double> dphi_cell;
  double norm2 = 0.0;    // ||g||^2 in the run's measure
  double perp2 = 0.0;    // ||g_perp||^2 in the run's measure
  double rho2 = 0.0;     // ||rho||^2 (du-weighted with a potential)
  double perp2_dx = 0.0; // unweighted in x
  double rho2_dx = 0.0;
  double j2_dx = 0.0;
  double H = 0.0;
  double bd_left = 0.0, bd_right = 0.0;
  double flux_left = 0.0, flux_right = 0.0;
};

Snapshot take_snapshot(const Model& m, std::span<const double> g, double t, double eta);

/// H = 1/2 ||g||^2 + eta <j, d_x phi>.
double entropy_H(const Model& m, std::span<const double> g, double eta);

struct EntropyReport {
  double t = 0.0;
  double mass = 0.0;
  double dist2 = 0.0; // ||f - eq||^2
  double perp2 = 0.0;
  double rho2 = 0.0;
  double H = 0.0;
  double T1 = 0.0, T2 = 0.0, T3 = 0.0, T4 = 0.0, T5 = 0.0, T6 = 0.0;
  double T2_boundary = 0.0;
  double dHdt = 0.0;
  double bd_left = 0.0, bd_right = 0.0;
  double flux_left = 0.0, flux_right = 0.0;
  double phi_flux_defect = 0.0; // ||j|| (||d_t D phi|| - ||j||)_+

  bool has_rates = false; // derivative terms need a previous record
  bool equiv_ok = true;
  bool t3_ok = true;
  bool t1_ok = true;
  bool t2n_ok = true;
  bool t2b_ok = true;
  bool t4_ok = true;
  bool t5_ok = true;
  bool gronwall_ok = true;
  bool all_ok() const { return equiv_ok && t3_ok && t1_ok && t2n_ok && t2b_ok && t4_ok && t5_ok && gronwall_ok; }
};

/// Norm-equivalence and T3 checks on a single snapshot.
EntropyReport static_report(const Model& m, const Snapshot& s, const ConstantsLedger& L);

/// All T-terms between two consecutive records plus the proof inequalities.
/// `source_bound` adds ||S|| ||g|| to the T1 bound (hierarchy levels).
EntropyReport dissipation_breakdown(const Model& m, const Snapshot& prev, const Snapshot& cur,
                                    const ConstantsLedger& L, double source_bound = 0.0);

struct FitResult {
  double a = 0.0;   // amplitude exp(intercept)
  double tau = 0.0; // minus the slope
  double C = 0.0;   // a / y(first record)
  double r2 = 0.0;
  std::size_t used = 0;
  bool truncated = false;
};

/// Least squares on log y against t over [t0, t1] after dropping the first
/// `transient` fraction of the records in the window.
FitResult fit_decay(std::span<const double> t, std::span<const double> y, double t0, double t1,
                    double transient = 0.2);

} // namespace hypo
