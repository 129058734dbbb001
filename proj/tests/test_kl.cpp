#include "hypo/kl_expansion.hpp"

#include <doctest.h>

#include <cmath>

using namespace hypo;

namespace {

const KLBasis& brownian512() {
  static const KLBasis b = nystrom_eig(CovarianceKernel{}, 512);
  return b;
}

double analytic_lambda(int k) { return 1.0 / ((k - 0.5) * (k - 0.5) * M_PI * M_PI); }

} // namespace

TEST_SUITE("kl_expansion") {
  TEST_CASE("brownian spectrum") {
    const auto& b = brownian512();
    for (int k = 1; k <= 5; ++k) CHECK(b.lambda(k - 1) == doctest::Approx(analytic_lambda(k)).epsilon(0.01));
    CHECK(b.lambda(0) == doctest::Approx(0.4053).epsilon(1e-3));
    double sup = 0.0;
    for (Eigen::Index a = 0; a < b.t.size(); ++a)
      sup = std::max(sup, std::abs(b.psi(a, 0) - std::sqrt(2.0) * std::sin(M_PI * b.t(a) / 2.0)));
    CHECK(sup <= 1e-2);
  }

  TEST_CASE("exponential kernel spectrum decays") {
    CovarianceKernel k;
    k.family = KernelFamily::Exponential;
    k.length = 0.2;
    const auto b = nystrom_eig(k, 64);
    for (Eigen::Index i = 0; i < b.lambda.size(); ++i) {
      CHECK(b.lambda(i) > 0.0);
      if (i > 0) CHECK(b.lambda(i) <= b.lambda(i - 1));
    }
  }

  TEST_CASE("truncation order") {
    const auto& b = brownian512();
    CHECK(truncate(b, 1.0).d == 512);

    // the analytic eigenvalues sum to 1/2; find where they first reach 95%
    int d_analytic = 0;
    double s = 0.0;
    while (s < 0.95 * 0.5) s += analytic_lambda(++d_analytic);
    CHECK(truncate(b, 0.95).d == d_analytic);

    CovarianceKernel rank1;
    rank1.family = KernelFamily::Table;
    const int n = 32;
    rank1.table.resize(n, n);
    for (int a = 0; a < n; ++a)
      for (int c = 0; c < n; ++c) rank1.table(a, c) = std::cos(0.1 * a) * std::cos(0.1 * c);
    const auto b1 = nystrom_eig(rank1, n);
    for (double e : {0.1, 0.5, 0.999}) CHECK(truncate(b1, e).d == 1);
  }

  TEST_CASE("sampling") {
    const auto b1 = truncate(brownian512(), 0.5);
    REQUIRE(b1.d == 1);
    const auto p1 = sample_paths(b1, 5, 7);
    for (int r = 0; r < 5; ++r) {
      const double ratio = p1.paths(r, 100) / b1.psi(100, 0);
      for (Eigen::Index a = 1; a < p1.paths.cols(); ++a) CHECK(std::abs(p1.paths(r, a) - ratio * b1.psi(a, 0)) <= 1e-12);
    }

    const auto b = truncate(brownian512(), 0.95);
    const auto x = sample_paths(b, 3, 9), y = sample_paths(b, 3, 9);
    CHECK(x.paths == y.paths);

    const int N = 100000;
    const auto ps = sample_paths(b, N, 11);
    const Eigen::Index last = b.t.size() - 1;
    const double var = ps.paths.col(last).squaredNorm() / N;
    double want = 0.0;
    for (int i = 0; i < b.d; ++i) want += b.lambda(i) * b.psi(last, i) * b.psi(last, i);
    CHECK(var == doctest::Approx(want).epsilon(0.03));
  }

  TEST_CASE("projection") {
    const auto b = truncate(brownian512(), 0.95);
    const Eigen::VectorXd y3 = project_coeffs(b.psi.col(2), b);
    for (int i = 0; i < b.d; ++i) CHECK(std::abs(y3(i) - (i == 2 ? 1.0 : 0.0)) <= 1e-12);
    const Eigen::VectorXd yo = project_coeffs(brownian512().psi.col(b.d + 3), b);
    CHECK(yo.cwiseAbs().maxCoeff() <= 1e-12);
  }

  TEST_CASE("coefficient Gram matrix") {
    const auto b = truncate(brownian512(), 0.95);
    const auto r = verify_orthogonality(b, 100000, 7);
    CHECK(r.ok());
    CHECK(r.max_offdiag <= 0.05);

    const auto b1 = truncate(brownian512(), 0.5);
    CHECK(verify_orthogonality(b1, 10000, 7).offdiag_ok);

    // one coefficient built from another must be flagged
    auto ps = sample_paths(b, 20000, 5);
    ps.coeffs.col(2) = std::sqrt(b.lambda(2) / b.lambda(0)) * ps.coeffs.col(0);
    CHECK_FALSE(gram_report(ps.coeffs, b.lambda.head(b.d)).offdiag_ok);
  }

  TEST_CASE("indefinite tables are rejected") {
    CovarianceKernel k;
    k.family = KernelFamily::Table;
    k.table = -Eigen::MatrixXd::Identity(16, 16);
    CHECK_THROWS(nystrom_eig(k, 16));
  }
}
