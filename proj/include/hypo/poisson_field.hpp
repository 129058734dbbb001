#pragma once

#include "hypo/geometry_bc.hpp"

#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace hypo {

/// Zero-mean solution of -phi'' = rho with phi' = 0 at both walls.
struct PhiField {
  std::vector<double> phi;   // cell values
  std::vector<double> dphi;  // face gradient, nx + 1 faces, zero at the walls
  double residual = 0.0;     // max_k |(-D^2 phi)_k - rho_k|
  double removed_mean = 0.0; // mean of rho projected out before solving
};

PhiField solve_poisson_neumann(std::span<const double> rho, const SlabMesh& mesh);

/// Face differences (u_{k+1} - u_k)/dx on interior faces, zero on the wall faces.
std::vector<double> face_gradient(std::span<const double> u, const SlabMesh& mesh);

/// Average of the two adjacent face values, one per cell.
std::vector<double> cell_average(std::span<const double> faces);

/// sum u^2 dx over cells.
double cell_norm2(std::span<const double> u, const SlabMesh& mesh);

/// sum u^2 dx over faces (wall faces carry zero by construction).
double face_norm2(std::span<const double> u, const SlabMesh& mesh);

/// 1 / sqrt(mu_1) for the discrete Neumann Laplacian.
double poincare_constant(const SlabMesh& mesh);

/// Closed-form first nonzero Neumann eigenvalue (4/dx^2) sin^2(pi / (2 nx)).
double neumann_mu1_closed_form(const SlabMesh& mesh);

enum class PotentialFamily { Zero, Cosine, Quadratic };
PotentialFamily parse_potential_family(const std::string& s);
std::string to_string(PotentialFamily f);

/// External potential, normalized so that sum e^V dx = 1.
struct PotentialV {
  PotentialFamily family = PotentialFamily::Zero;
  double amplitude = 0.0;
  double shift = 0.0;
  std::vector<double> V;      // cell centres
  std::vector<double> dV;     // analytic V' at cell centres
  std::vector<double> V_face; // nx + 1 faces
  double c_V = 1.0;  // min e^{-V}
  double C_V = 1.0;  // max e^{-V}
  double D_V = 0.0;  // ||V||_{C^2} of the unnormalized family
  double max_abs_dV = 0.0;
  double weight(int k) const { return std::exp(-V[k]); }
};

double potential_raw(PotentialFamily f, double a, double Lx, double x);
double potential_raw_dx(PotentialFamily f, double a, double Lx, double x);

/// Builds V_raw from a family and normalizes it.
PotentialV make_potential(PotentialFamily f, double amplitude, const SlabMesh& mesh);

/// Normalizes arbitrary cell values; the gradient is left zero.
PotentialV normalize_potential(std::span<const double> V_raw, const SlabMesh& mesh);

struct PhiEstimateReport {
  double grad_phi = 0.0;     // ||D phi||
  double cp_rho = 0.0;       // C_p ||rho||
  double dt_grad_phi = 0.0;  // ||(D phi_n - D phi_{n-1}) / dt||
  double j_norm = 0.0;       // ||j||
  bool poincare_ok = false;
  bool flux_ok = false;
};

/// Checks ||D phi|| <= C_p ||rho|| and ||d_t D phi|| <= ||j|| + slack.
PhiEstimateReport estimates_for_phi_check(const PhiField& prev, const PhiField& cur, std::span<const double> rho,
                                          std::span<const double> j, double dt, const SlabMesh& mesh,
                                          double slack);

} // namespace hypo
