#include "hypo/collision.hpp"

#include "hypo/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace hypo {

SigmaFamily parse_sigma_family(const std::string& s) {
  if (s == "constant") return SigmaFamily::Constant;
  if (s == "gaussian-bump" || s == "bump") return SigmaFamily::GaussianBump;
  if (s == "table") return SigmaFamily::Table;
  throw InvalidConfig("sigma.family must be constant, gaussian-bump or table, got '" + s + "'");
}

ZCoupling parse_z_coupling(const std::string& s) {
  if (s == "none") return ZCoupling::None;
  if (s == "affine") return ZCoupling::Affine;
  if (s == "exponential") return ZCoupling::Exponential;
  throw InvalidConfig("sigma.z_coupling must be none, affine or exponential, got '" + s + "'");
}

std::string to_string(SigmaFamily f) {
  switch (f) {
    case SigmaFamily::Constant: return "constant";
    case SigmaFamily::GaussianBump: return "gaussian-bump";
    case SigmaFamily::Table: return "table";
  }
  return "?";
}

std::string to_string(ZCoupling c) {
  switch (c) {
    case ZCoupling::None: return "none";
    case ZCoupling::Affine: return "affine";
    case ZCoupling::Exponential: return "exponential";
  }
  return "?";
}

double coupling_derivative(const CrossSectionSpec& spec, double z, int k) {
  switch (spec.z_coupling) {
    case ZCoupling::None: return k == 0 ? 1.0 : 0.0;
    case ZCoupling::Affine:
      if (k == 0) return 1.0 + spec.z_coeff * z;
      return k == 1 ? spec.z_coeff : 0.0;
    case ZCoupling::Exponential:
      return std::pow(spec.z_coeff, k) * std::exp(spec.z_coeff * z);
  }
  return 0.0;
}

double analytic_lambda(const CrossSectionSpec& spec, double z) {
  const double g = coupling_derivative(spec, z, 0);
  switch (spec.family) {
    case SigmaFamily::Constant: return spec.base * g;
    case SigmaFamily::GaussianBump: return std::min(spec.base, spec.base + spec.bump_amp) * g;
    case SigmaFamily::Table: {
      if (spec.table.empty()) return 0.0;
      return *std::min_element(spec.table.begin(), spec.table.end()) * g;
    }
  }
  return 0.0;
}

namespace {

double shape(const CrossSectionSpec& spec, const VelocityGrid& g, std::size_t i, std::size_t j) {
  switch (spec.family) {
    case SigmaFamily::Constant: return spec.base;
    case SigmaFamily::GaussianBump: {
      const auto& a = g.nodes[i];
      const auto& b = g.nodes[j];
      const double r2 = a[0] * a[0] + a[1] * a[1] + b[0] * b[0] + b[1] * b[1];
      return spec.base + spec.bump_amp * std::exp(-r2 / (2.0 * spec.bump_width * spec.bump_width));
    }
    case SigmaFamily::Table: return spec.table[i * g.size() + j];
  }
  return 0.0;
}

void finish_kernel(CollisionKernel& k) {
  const auto& g = *k.grid;
  const auto M = g.M();
  const std::size_t n = g.size();
  k.rate.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += g.weights[j] * k.sigma(i, j) * M[j];
    k.rate(i) = s;
  }
  double a2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double vi = g.nodes[i][0] * g.nodes[i][0] + g.nodes[i][1] * g.nodes[i][1];
    for (std::size_t j = 0; j < n; ++j) {
      const double vj = g.nodes[j][0] * g.nodes[j][0] + g.nodes[j][1] * g.nodes[j][1];
      const double s = k.sigma(i, j);
      a2 += g.weights[i] * g.weights[j] * s * s * M[i] * M[j] * (vi + vj);
    }
  }
  k.assumption2 = a2;
  k.lambda_bound = k.sigma.minCoeff();
}

void validate_spec(const CrossSectionSpec& spec, const VelocityGrid& g) {
  if (spec.family == SigmaFamily::Table) {
    if (spec.table.size() != g.size() * g.size()) {
      std::ostringstream os;
      os << "sigma.table has " << spec.table.size() << " entries, grid needs " << g.size() * g.size();
      throw InvalidConfig(os.str());
    }
    if (spec.z_coupling != ZCoupling::None)
      throw InvalidConfig("sigma.table does not support z-coupling");
  }
  if (spec.family == SigmaFamily::GaussianBump && !(spec.bump_width > 0.0))
    throw InvalidConfig("sigma.bump_width must be positive");
}

} // namespace

CollisionKernel assemble_kernel(const CrossSectionSpec& spec, GridPtr grid, double z) {
  const auto& g = *grid;
  validate_spec(spec, g);
  const double gz = coupling_derivative(spec, z, 0);
  if (!(gz > 0.0)) {
    std::ostringstream os;
    os << "z-coupling factor is " << gz << " at z = " << z << "; sigma must stay positive";
    throw AssumptionViolation(os.str());
  }
  const double floor = spec.lambda >= 0.0 ? spec.lambda : analytic_lambda(spec, z);
  if (!(floor > 0.0)) throw AssumptionViolation("cross-section lower bound lambda must be positive");

  CollisionKernel k;
  k.grid = grid;
  k.z = z;
  k.lambda_floor = floor;
  const std::size_t n = g.size();
  k.sigma.resize(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const double s = shape(spec, g, i, j) * gz;
      if (s < floor * (1.0 - 1e-14)) {
        std::ostringstream os;
        os << "sigma(" << i << ", " << j << ") = " << s << " is below lambda = " << floor;
        throw AssumptionViolation(os.str());
      }
      k.sigma(i, j) = s;
      k.sigma(j, i) = s;
    }
  finish_kernel(k);
  return k;
}

void apply_L(const CollisionKernel& k, std::span<const double> f, std::span<double> out) {
  const auto& g = *k.grid;
  const auto M = g.M();
  const std::size_t n = g.size();
  for (std::size_t i = 0; i < n; ++i) {
    double gain = 0.0;
    for (std::size_t j = 0; j < n; ++j) gain += g.weights[j] * k.sigma(i, j) * f[j];
    out[i] = k.sign * (M[i] * gain - k.rate(i) * f[i]);
  }
}

std::vector<double> apply_L(const CollisionKernel& k, std::span<const double> f) {
  std::vector<double> out(f.size());
  apply_L(k, f, out);
  return out;
}

Vec2 j_L(const CollisionKernel& k, std::span<const double> f) {
  const auto Lf = apply_L(k, f);
  const auto& g = *k.grid;
  Vec2 j{};
  for (std::size_t i = 0; i < g.size(); ++i) {
    j[0] += g.weights[i] * g.nodes[i][0] * Lf[i];
    j[1] += g.weights[i] * g.nodes[i][1] * Lf[i];
  }
  return j;
}

CoercivityReport coercivity_check(const CollisionKernel& k, std::span<const double> f, double lambda) {
  const auto& g = *k.grid;
  const auto M = g.M();
  const std::size_t n = g.size();
  CoercivityReport r;
  const auto Lf = apply_L(k, f);
  r.lhs = inner_dnu(Lf, f, g);
  const auto p = project_pi(f, g);
  r.rhs = -lambda * norm2_dnu(p.perp, g);
  double q = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double hi = f[i] / M[i];
    for (std::size_t j = 0; j < n; ++j) {
      const double d = hi - f[j] / M[j];
      q += g.weights[i] * g.weights[j] * k.sigma(i, j) * M[i] * M[j] * d * d;
    }
  }
  r.h_form = -0.5 * q;
  r.ok = r.lhs <= r.rhs + 1e-12 * (1.0 + std::abs(r.rhs));
  const double scale = std::max({std::abs(r.lhs), std::abs(r.h_form), std::numeric_limits<double>::min()});
  r.h_identity_ok = std::abs(r.lhs - r.h_form) <= 1e-10 * scale || (r.lhs == 0.0 && r.h_form == 0.0);
  return r;
}

CoercivityReport coercivity_check(const CollisionKernel& k, std::span<const double> f) {
  return coercivity_check(k, f, k.lambda_bound);
}

Eigen::MatrixXd collision_matrix(const CollisionKernel& k) {
  const auto& g = *k.grid;
  const auto M = g.M();
  const std::size_t n = g.size();
  Eigen::MatrixXd A(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) A(i, j) = k.sign * M[i] * g.weights[j] * k.sigma(i, j);
  for (std::size_t i = 0; i < n; ++i) A(i, i) -= k.sign * k.rate(i);
  return A;
}

Eigen::MatrixXd symmetrized_matrix(const CollisionKernel& k) {
  const auto& g = *k.grid;
  const auto M = g.M();
  const std::size_t n = g.size();
  Eigen::VectorXd u(n);
  for (std::size_t i = 0; i < n; ++i) u(i) = std::sqrt(g.weights[i] * M[i]);
  Eigen::MatrixXd B(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) B(i, j) = k.sign * k.sigma(i, j) * u(i) * u(j);
  for (std::size_t i = 0; i < n; ++i) B(i, i) -= k.sign * k.rate(i);
  return B;
}

double spectral_gap(const CollisionKernel& k) {
  const auto& g = *k.grid;
  const std::size_t n = g.size();
  if (n > 4096) throw InvalidConfig("spectral_gap needs a grid with at most 4096 nodes");
  const auto M = g.M();
  Eigen::MatrixXd A = -symmetrized_matrix(k);
  Eigen::VectorXd u(n);
  for (std::size_t i = 0; i < n; ++i) u(i) = std::sqrt(g.weights[i] * M[i]);
  // Lift the mass mode above the rest of the spectrum.
  const double alpha = 1.0 + 2.0 * A.cwiseAbs().rowwise().sum().maxCoeff();
  A += alpha * u * u.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalFailure("spectral_gap eigensolve did not converge");
  return es.eigenvalues()(0);
}

double operator_norm(const CollisionKernel& k) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized_matrix(k), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalFailure("operator_norm eigensolve did not converge");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

std::vector<CollisionKernel> assemble_dz_kernels(const CrossSectionSpec& spec, GridPtr grid, double z, int l_max) {
  const auto& g = *grid;
  validate_spec(spec, g);
  if (l_max >= 1 && spec.family == SigmaFamily::Table)
    throw CompatibilityError("table cross-sections have no closed-form z-derivatives");
  std::vector<CollisionKernel> out;
  const std::size_t n = g.size();
  for (int order = 1; order <= l_max; ++order) {
    CollisionKernel k;
    k.grid = grid;
    k.z = z;
    k.order = order;
    const double dg = coupling_derivative(spec, z, order);
    k.sigma.resize(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) {
        const double s = shape(spec, g, i, j) * dg;
        k.sigma(i, j) = s;
        k.sigma(j, i) = s;
      }
    finish_kernel(k);
    k.op_norm = operator_norm(k);
    out.push_back(std::move(k));
  }
  return out;
}

double constant_CL(const CollisionKernel& k) { return std::sqrt(2.0 * k.assumption2); }

} // namespace hypo
