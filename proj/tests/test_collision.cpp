#include "hypo/collision.hpp"
#include "hypo/error.hpp"
#include "support.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

using namespace hypo;

namespace {

GridPtr grid1() { return make_grid(1, 16, 6.0, GridKind::UniformMidpoint); }

CrossSectionSpec bump(double amp) {
  CrossSectionSpec s;
  s.family = SigmaFamily::GaussianBump;
  s.bump_amp = amp;
  s.bump_width = 1.2;
  return s;
}

double perp_norm2(const VelocityGrid& g, const std::vector<double>& f) { return norm2_dnu(project_pi(f, g).perp, g); }

} // namespace

TEST_SUITE("collision") {
  TEST_CASE("kernel evaluation") {
    const auto g = grid1();
    const auto k = assemble_kernel(CrossSectionSpec{}, g, 0.0);
    CHECK(k.sigma.minCoeff() == 1.0);
    CHECK(k.sigma.maxCoeff() == 1.0);
    CHECK(k.lambda_bound == 1.0);

    const auto flat = assemble_kernel(bump(0.0), g, 0.0);
    CHECK((flat.sigma - k.sigma).cwiseAbs().maxCoeff() == 0.0);

    CrossSectionSpec aff;
    aff.z_coupling = ZCoupling::Affine;
    aff.z_coeff = 0.3;
    const auto ka = assemble_kernel(aff, g, 0.5);
    CHECK(ka.sigma.minCoeff() == doctest::Approx(1.15).epsilon(1e-15));
    CHECK(ka.sigma.maxCoeff() == doctest::Approx(1.15).epsilon(1e-15));

    const auto kb = assemble_kernel(bump(0.4), g, 0.0);
    CHECK((kb.sigma - kb.sigma.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(kb.sigma.minCoeff() >= kb.lambda_floor);
    CHECK(std::isfinite(kb.assumption2));
  }

  TEST_CASE("unit cross-section acts as rho M - f") {
    const auto g = grid1();
    const auto k = assemble_kernel(CrossSectionSpec{}, g, 0.0);
    const auto M = g->M();
    const auto f = testing::randn(g->size(), 11);
    const auto Lf = apply_L(k, f);
    double rho = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) rho += g->weights[i] * f[i];
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(std::abs(Lf[i] - (rho * M[i] - f[i])) <= 1e-13);

    const auto p = project_pi(f, *g);
    const auto Lp = apply_L(k, p.perp);
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(std::abs(Lp[i] + p.perp[i]) <= 1e-13);
  }

  TEST_CASE("collisional momentum") {
    const auto g = grid1();
    const auto k = assemble_kernel(CrossSectionSpec{}, g, 0.0);
    const auto f = testing::randn(g->size(), 12);
    CHECK(j_L(k, f)[0] == doctest::Approx(-moments(f, *g).j[0]).epsilon(1e-12));
    const auto M = g->M();
    CHECK(std::abs(j_L(k, std::vector<double>(M.begin(), M.end()))[0]) <= 1e-15);

    const auto kb = assemble_kernel(bump(0.8), g, 0.0);
    const double CL = constant_CL(kb);
    for (int s = 0; s < 100; ++s) {
      const auto h = testing::randn(g->size(), 100 + s);
      CHECK(std::abs(j_L(kb, h)[0]) <= CL * std::sqrt(perp_norm2(*g, h)) * (1.0 + 1e-12));
    }
  }

  TEST_CASE("coercivity report") {
    const auto g = grid1();
    const auto k = assemble_kernel(CrossSectionSpec{}, g, 0.0);
    const auto M = g->M();
    const auto rM = coercivity_check(k, std::vector<double>(M.begin(), M.end()), 1.0);
    CHECK(std::abs(rM.lhs) <= 1e-15);
    CHECK(std::abs(rM.rhs) <= 1e-15);

    const auto f = testing::randn(g->size(), 13);
    const auto r = coercivity_check(k, f, 1.0);
    CHECK(r.lhs == doctest::Approx(-perp_norm2(*g, f)).epsilon(1e-12));

    const auto kb = assemble_kernel(bump(0.5), g, 0.0);
    const double gap = spectral_gap(kb);
    for (int s = 0; s < 100; ++s) CHECK(coercivity_check(kb, testing::randn(g->size(), 200 + s), gap).ok);
  }

  TEST_CASE("spectral gap") {
    const auto g = grid1();
    CrossSectionSpec two;
    two.base = 2.0;
    CHECK(std::abs(spectral_gap(assemble_kernel(two, g, 0.0)) - 2.0) <= 1e-10);

    const auto kb = assemble_kernel(bump(0.1), g, 0.0);
    const double gap = spectral_gap(kb);
    CHECK(gap >= kb.lambda_bound);
    CHECK(gap <= kb.lambda_bound + 0.2);

    // independent oracle: eigenvalues of the unsymmetrized matrix
    Eigen::EigenSolver<Eigen::MatrixXd> es(collision_matrix(kb));
    std::vector<double> re;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) re.push_back(-es.eigenvalues()(i).real());
    std::sort(re.begin(), re.end());
    CHECK(std::abs(re[0]) <= 1e-12);
    CHECK(re[1] == doctest::Approx(gap).epsilon(1e-9));

    // no random direction orthogonal to M beats the gap
    double best = 1e300;
    for (int s = 0; s < 2000; ++s) {
      const auto p = project_pi(testing::randn(g->size(), 300 + s), *g).perp;
      best = std::min(best, -inner_dnu(apply_L(kb, p), p, *g) / norm2_dnu(p, *g));
    }
    CHECK(best >= gap * (1.0 - 1e-12));
  }

  TEST_CASE("z-derivative kernels") {
    const auto g = grid1();
    CrossSectionSpec aff;
    aff.z_coupling = ZCoupling::Affine;
    aff.z_coeff = 0.3;
    const auto da = assemble_dz_kernels(aff, g, 0.7, 2);
    REQUIRE(da.size() == 2);
    CHECK(da[0].sigma.minCoeff() == doctest::Approx(0.3));
    CHECK(da[0].sigma.maxCoeff() == doctest::Approx(0.3));
    CHECK(da[1].sigma.cwiseAbs().maxCoeff() == 0.0);

    CrossSectionSpec ex;
    ex.z_coupling = ZCoupling::Exponential;
    ex.z_coeff = 0.2;
    const double z = 0.4;
    const auto de = assemble_dz_kernels(ex, g, z, 3);
    CHECK(de[2].sigma.maxCoeff() == doctest::Approx(0.008 * std::exp(0.2 * z)).epsilon(1e-13));

    auto bz = bump(0.6);
    bz.z_coupling = ZCoupling::Exponential;
    bz.z_coeff = 0.5;
    const double h = 1e-4;
    const auto d1 = assemble_dz_kernels(bz, g, z, 1);
    const Eigen::MatrixXd fd =
        (assemble_kernel(bz, g, z + h).sigma - assemble_kernel(bz, g, z - h).sigma) / (2.0 * h);
    CHECK((fd - d1[0].sigma).cwiseAbs().maxCoeff() <= 1e-6);
  }

  TEST_CASE("momentum constant") {
    const auto g = make_grid(1, 64, 0.0, GridKind::GaussHermite);
    CHECK(constant_CL(assemble_kernel(CrossSectionSpec{}, g, 0.0)) == doctest::Approx(2.0).epsilon(1e-10));
    CrossSectionSpec three;
    three.base = 3.0;
    CHECK(constant_CL(assemble_kernel(three, g, 0.0)) == doctest::Approx(6.0).epsilon(1e-10));
  }

  TEST_CASE("floor above the cross-section is an assumption violation") {
    CrossSectionSpec s;
    s.lambda = 2.0;
    CHECK_THROWS_AS(assemble_kernel(s, grid1(), 0.0), AssumptionViolation);
  }
}
