#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace hypo {

enum class KernelFamily { Brownian, Exponential, Table };
KernelFamily parse_kernel_family(const std::string& s);
std::string to_string(KernelFamily f);

/// Autocorrelation R(t, s) on [0, T].
struct CovarianceKernel {
  KernelFamily family = KernelFamily::Brownian;
  double T = 1.0;
  double length = 1.0;       // exponential correlation length
  Eigen::MatrixXd table;     // values on the uniform n-point grid, table family only
  double operator()(double t, double s) const;
};

/// Eigenpairs on a uniform grid with trapezoid weights, eigenvalues descending.
/// Columns of psi are weight-orthonormal: sum_a w_a psi_i(t_a) psi_j(t_a) = delta_ij.
struct KLBasis {
  Eigen::VectorXd t;
  Eigen::VectorXd w;
  Eigen::VectorXd lambda;
  Eigen::MatrixXd psi;
  int d = 0;                    // truncation order
  double energy_fraction = 1.0; // sum_{i<=d} lambda_i / sum lambda_i
};

KLBasis nystrom_eig(const CovarianceKernel& k, int n);

/// Smallest d with sum_{i<=d} lambda_i >= energy * sum lambda_i.
KLBasis truncate(const KLBasis& basis, double energy);

struct PathSamples {
  Eigen::MatrixXd coeffs; // n_samples x d, Y_i ~ N(0, lambda_i)
  Eigen::MatrixXd paths;  // n_samples x n grid points
};

/// Sample s draws its coefficients from mt19937_64 seeded with seed_seq{seed, s}.
PathSamples sample_paths(const KLBasis& basis, int n_samples, std::uint64_t seed);

/// Y_i = sum_a w_a path(t_a) psi_i(t_a) for i <= d.
Eigen::VectorXd project_coeffs(const Eigen::VectorXd& path, const KLBasis& basis);

struct OrthogonalityReport {
  Eigen::MatrixXd gram;       // empirical E[Y_i Y_j]
  Eigen::MatrixXd normalized; // gram_ij / sqrt(lambda_i lambda_j)
  double max_offdiag = 0.0;
  double threshold = 0.0;     // 4 / sqrt(n_samples)
  double max_diag_z = 0.0;    // max |gram_ii - lambda_i| / (lambda_i sqrt(2/n))
  bool offdiag_ok = false;
  bool diag_ok = false;
  bool ok() const { return offdiag_ok && diag_ok; }
};

/// Gram statistics of a coefficient sample (rows are samples).
OrthogonalityReport gram_report(const Eigen::MatrixXd& coeffs, const Eigen::VectorXd& lambda);

/// Samples paths, projects them back and checks the coefficient Gram matrix.
OrthogonalityReport verify_orthogonality(const KLBasis& basis, int n_samples, std::uint64_t seed);

struct MercerReport {
  std::vector<int> orders;
  std::vector<double> errors;      // RMS of R - R_d over the probe pairs
  std::vector<double> diag_errors; // RMS of R(t,t) - R_d(t,t) at the first point of each pair
  bool monotone = false;      // off-diagonal errors; cross terms may change sign, so this can fail
  bool diag_monotone = false; // each added term is nonnegative on the diagonal
};

/// Partial Mercer sums at 10 seeded grid pairs for d = 1, 2, 4, ... up to the basis size.
MercerReport mercer_check(const CovarianceKernel& k, const KLBasis& full, std::uint64_t seed);

} // namespace hypo
