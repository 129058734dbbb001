#include "hypo/kl_expansion.hpp"

#include "hypo/error.hpp"
#include "hypo/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace hypo {

KernelFamily parse_kernel_family(const std::string& s) {
  if (s == "brownian") return KernelFamily::Brownian;
  if (s == "exponential") return KernelFamily::Exponential;
  if (s == "table") return KernelFamily::Table;
  throw InvalidConfig("kl.kernel must be brownian, exponential or table, got '" + s + "'");
}

std::string to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::Brownian: return "brownian";
    case KernelFamily::Exponential: return "exponential";
    case KernelFamily::Table: return "table";
  }
  return "?";
}

double CovarianceKernel::operator()(double t, double s) const {
  switch (family) {
    case KernelFamily::Brownian: return std::min(t, s);
    case KernelFamily::Exponential: return std::exp(-std::abs(t - s) / length);
    case KernelFamily::Table: {
      const int n = static_cast<int>(table.rows());
      const double h = T / (n - 1);
      const int a = static_cast<int>(std::lround(t / h));
      const int b = static_cast<int>(std::lround(s / h));
      return table(std::clamp(a, 0, n - 1), std::clamp(b, 0, n - 1));
    }
  }
  return 0.0;
}

KLBasis nystrom_eig(const CovarianceKernel& k, int n) {
  if (n < 16) throw InvalidConfig("kl.n must be at least 16");
  if (!(k.T > 0.0)) throw InvalidConfig("kl.T must be positive");
  if (k.family == KernelFamily::Exponential && !(k.length > 0.0)) throw InvalidConfig("kl.length must be positive");
  if (k.family == KernelFamily::Table && (k.table.rows() != n || k.table.cols() != n))
    throw InvalidConfig("table kernel must be n x n on the evaluation grid");
  KLBasis b;
  const double h = k.T / (n - 1);
  b.t.resize(n);
  b.w.resize(n);
  for (int a = 0; a < n; ++a) {
    b.t(a) = a * h;
    b.w(a) = (a == 0 || a == n - 1) ? 0.5 * h : h;
  }
  const Eigen::VectorXd sw = b.w.cwiseSqrt();
  Eigen::MatrixXd A(n, n);
  for (int a = 0; a < n; ++a)
    for (int c = a; c < n; ++c) {
      const double r = k.family == KernelFamily::Table ? 0.5 * (k.table(a, c) + k.table(c, a)) : k(b.t(a), b.t(c));
      A(a, c) = A(c, a) = sw(a) * r * sw(c);
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  if (es.info() != Eigen::Success) throw NumericalFailure("Nystrom eigensolve failed");
  const double trace = A.trace();
  if (es.eigenvalues()(0) < -1e-10 * std::abs(trace)) {
    std::ostringstream os;
    os << "covariance kernel is not positive semidefinite on the grid (smallest eigenvalue "
       << es.eigenvalues()(0) << ")";
    throw InvalidConfig(os.str());
  }
  b.lambda = es.eigenvalues().reverse();
  b.psi.resize(n, n);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd u = es.eigenvectors().col(n - 1 - i);
    Eigen::VectorXd p = u.cwiseQuotient(sw);
    Eigen::Index idx;
    p.cwiseAbs().maxCoeff(&idx);
    if (p(idx) < 0.0) p = -p;
    b.psi.col(i) = p;
  }
  b.d = n;
  b.energy_fraction = 1.0;
  return b;
}

KLBasis truncate(const KLBasis& basis, double energy) {
  if (!(energy > 0.0 && energy <= 1.0)) throw InvalidConfig("kl.energy must be in (0, 1]");
  const int n = static_cast<int>(basis.lambda.size());
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += std::max(basis.lambda(i), 0.0);
  int d = n;
  double acc = 0.0;
  if (energy < 1.0) {
    for (int i = 0; i < n; ++i) {
      acc += std::max(basis.lambda(i), 0.0);
      if (acc >= energy * total) {
        d = i + 1;
        break;
      }
    }
  }
  KLBasis out = basis;
  out.d = d;
  acc = 0.0;
  for (int i = 0; i < d; ++i) acc += std::max(basis.lambda(i), 0.0);
  out.energy_fraction = total > 0.0 ? acc / total : 1.0;
  return out;
}

namespace {

Eigen::VectorXd draw_coeffs(const KLBasis& basis, std::uint64_t seed, std::size_t s) {
  std::seed_seq seq{static_cast<std::uint64_t>(seed), static_cast<std::uint64_t>(s)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::VectorXd y(basis.d);
  for (int i = 0; i < basis.d; ++i) y(i) = std::sqrt(std::max(basis.lambda(i), 0.0)) * nd(rng);
  return y;
}

} // namespace

PathSamples sample_paths(const KLBasis& basis, int n_samples, std::uint64_t seed) {
  PathSamples out;
  out.coeffs.resize(n_samples, basis.d);
  out.paths.resize(n_samples, basis.t.size());
  const Eigen::MatrixXd psi = basis.psi.leftCols(basis.d);
  parallel_for(static_cast<std::size_t>(n_samples), [&](std::size_t s) {
    const Eigen::VectorXd y = draw_coeffs(basis, seed, s);
    out.coeffs.row(static_cast<Eigen::Index>(s)) = y.transpose();
    out.paths.row(static_cast<Eigen::Index>(s)) = (psi * y).transpose();
  });
  return out;
}

Eigen::VectorXd project_coeffs(const Eigen::VectorXd& path, const KLBasis& basis) {
  return basis.psi.leftCols(basis.d).transpose() * path.cwiseProduct(basis.w);
}

OrthogonalityReport gram_report(const Eigen::MatrixXd& coeffs, const Eigen::VectorXd& lambda) {
  const Eigen::Index S = coeffs.rows();
  const Eigen::Index d = coeffs.cols();
  OrthogonalityReport r;
  r.gram = coeffs.transpose() * coeffs / static_cast<double>(S);
  r.normalized = r.gram;
  r.threshold = 4.0 / std::sqrt(static_cast<double>(S));
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) {
      r.normalized(i, j) = r.gram(i, j) / std::sqrt(lambda(i) * lambda(j));
      if (i != j) r.max_offdiag = std::max(r.max_offdiag, std::abs(r.normalized(i, j)));
    }
  for (Eigen::Index i = 0; i < d; ++i) {
    const double se = lambda(i) * std::sqrt(2.0 / static_cast<double>(S));
    r.max_diag_z = std::max(r.max_diag_z, std::abs(r.gram(i, i) - lambda(i)) / se);
  }
  r.offdiag_ok = r.max_offdiag <= r.threshold;
  r.diag_ok = r.max_diag_z <= 3.0;
  return r;
}

OrthogonalityReport verify_orthogonality(const KLBasis& basis, int n_samples, std::uint64_t seed) {
  if (n_samples < 10000) throw InvalidConfig("verify_orthogonality needs at least 1e4 samples");
  const Eigen::MatrixXd psi = basis.psi.leftCols(basis.d);
  Eigen::MatrixXd coeffs(n_samples, basis.d);
  parallel_for(static_cast<std::size_t>(n_samples), [&](std::size_t s) {
    const Eigen::VectorXd path = psi * draw_coeffs(basis, seed, s);
    coeffs.row(static_cast<Eigen::Index>(s)) = project_coeffs(path, basis).transpose();
  });
  return gram_report(coeffs, basis.lambda.head(basis.d));
}

MercerReport mercer_check(const CovarianceKernel& k, const KLBasis& full, std::uint64_t seed) {
  const int n = static_cast<int>(full.t.size());
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, n - 1);
  std::vector<std::pair<int, int>> pairs;
  for (int p = 0; p < 10; ++p) pairs.emplace_back(pick(rng), pick(rng));
  MercerReport r;
  for (int d = 1;; d *= 2) {
    const int dd = std::min(d, n);
    auto R = [&](int a, int b) { return k.family == KernelFamily::Table ? k.table(a, b) : k(full.t(a), full.t(b)); };
    auto Rd = [&](int a, int b) {
      double s = 0.0;
      for (int i = 0; i < dd; ++i) s += full.lambda(i) * full.psi(a, i) * full.psi(b, i);
      return s;
    };
    double e2 = 0.0, d2 = 0.0;
    for (auto [a, b] : pairs) {
      const double e = R(a, b) - Rd(a, b), ed = R(a, a) - Rd(a, a);
      e2 += e * e;
      d2 += ed * ed;
    }
    r.orders.push_back(dd);
    r.errors.push_back(std::sqrt(e2 / pairs.size()));
    r.diag_errors.push_back(std::sqrt(d2 / pairs.size()));
    if (dd == n) break;
  }
  auto decreasing = [](const std::vector<double>& e) {
    for (std::size_t i = 1; i < e.size(); ++i)
      if (e[i] > e[i - 1] * (1.0 + 1e-9) + 1e-14) return false;
    return true;
  };
  r.monotone = decreasing(r.errors);
  r.diag_monotone = decreasing(r.diag_errors);
  return r;
}

} // namespace hypo
