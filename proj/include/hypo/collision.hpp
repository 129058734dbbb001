#pragma once

#include "hypo/velocity_space.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace hypo {

enum class SigmaFamily { Constant, GaussianBump, Table };
enum class ZCoupling { None, Affine, Exponential };

SigmaFamily parse_sigma_family(const std::string& s);
ZCoupling parse_z_coupling(const std::string& s);
std::string to_string(SigmaFamily f);
std::string to_string(ZCoupling c);

/// sigma(v, v*, z) = s(v, v*) * g(z) with
///   s = base                                         (constant)
///   s = base + bump_amp * exp(-(|v|^2+|v*|^2)/(2 w^2)) (gaussian-bump)
///   s = table[i][j]                                  (table, node-indexed)
/// and g(z) = 1, 1 + z_coeff*z or exp(z_coeff*z).
struct CrossSectionSpec {
  SigmaFamily family = SigmaFamily::Constant;
  double base = 1.0;
  double bump_amp = 0.0;
  double bump_width = 1.0;
  ZCoupling z_coupling = ZCoupling::None;
  double z_coeff = 0.0;
  std::vector<double> table; // row-major n x n, table family only
  double lambda = -1.0;      // configured floor; negative selects the analytic bound
  double c_tilde = -1.0;     // bound on ||L_z^k||; negative disables the check
};

/// Closed-form lower bound of sigma(., ., z) over all velocities.
double analytic_lambda(const CrossSectionSpec& spec, double z);

/// d^k/dz^k of the coupling factor g.
double coupling_derivative(const CrossSectionSpec& spec, double z, int k);

struct CollisionKernel {
  GridPtr grid;
  double z = 0.0;
  int order = 0;         // z-derivative order this matrix represents
  Eigen::MatrixXd sigma; // sigma(v_i, v_j, z) or its k-th z-derivative
  Eigen::VectorXd rate;  // rate_i = sum_j w_j sigma_ij M_j
  double lambda_bound = 0.0; // min entry
  double lambda_floor = 0.0; // configured lambda actually enforced
  double assumption2 = 0.0;  // sum w w sigma^2 M M (|v|^2 + |v*|^2)
  double op_norm = 0.0;      // dnu operator norm of the induced L (filled for z-derivatives)
  double sign = 1.0;         // fault injection only: -1 flips L
};

CollisionKernel assemble_kernel(const CrossSectionSpec& spec, GridPtr grid, double z);

/// (Lf)_i = sum_j w_j sigma_ij (M_i f_j - M_j f_i).
void apply_L(const CollisionKernel& k, std::span<const double> f, std::span<double> out);
std::vector<double> apply_L(const CollisionKernel& k, std::span<const double> f);

Vec2 j_L(const CollisionKernel& k, std::span<const double> f);

struct CoercivityReport {
  double lhs = 0.0;     // <Lf, f>_dnu
  double rhs = 0.0;     // -lambda ||f_perp||^2
  double h_form = 0.0;  // -1/2 sum w w sigma M M (h_i - h_j)^2
  bool ok = false;
  bool h_identity_ok = false;
};

CoercivityReport coercivity_check(const CollisionKernel& k, std::span<const double> f, double lambda);
CoercivityReport coercivity_check(const CollisionKernel& k, std::span<const double> f);

/// Dense L as a matrix acting on node values.
Eigen::MatrixXd collision_matrix(const CollisionKernel& k);

/// D L D^{-1} with D = diag(sqrt(w/M)); symmetric.
Eigen::MatrixXd symmetrized_matrix(const CollisionKernel& k);

/// Smallest nonzero eigenvalue of -L on the mass-zero subspace.
double spectral_gap(const CollisionKernel& k);

/// Spectral radius of L in dnu.
double operator_norm(const CollisionKernel& k);

/// Kernels of d^k sigma / dz^k for k = 1..l_max (index 0 holds k = 1).
std::vector<CollisionKernel> assemble_dz_kernels(const CrossSectionSpec& spec, GridPtr grid, double z, int l_max);

double constant_CL(const CollisionKernel& k);

} // namespace hypo
