#include "hypo/error.hpp"
#include "hypo/poisson_field.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace hypo;

namespace {

std::vector<double> cos_rho(const SlabMesh& mesh) {
  std::vector<double> rho(mesh.nx);
  for (int i = 0; i < mesh.nx; ++i) rho[i] = std::cos(M_PI * mesh.x(i) / mesh.Lx);
  return rho;
}

} // namespace

TEST_SUITE("poisson_field") {
  TEST_CASE("cosine density") {
    const auto mesh = make_mesh(64, 1.0);
    const auto phi = solve_poisson_neumann(cos_rho(mesh), mesh);
    double err = 0.0;
    for (int i = 0; i < mesh.nx; ++i) err = std::max(err, std::abs(phi.phi[i] - std::cos(M_PI * mesh.x(i)) / (M_PI * M_PI)));
    CHECK(err <= 1e-4);
    CHECK(phi.residual <= 1e-13);
    CHECK(phi.dphi.front() == 0.0);
    CHECK(phi.dphi.back() == 0.0);
  }

  TEST_CASE("zero density gives zero potential") {
    const auto mesh = make_mesh(16, 1.0);
    for (double p : solve_poisson_neumann(std::vector<double>(16, 0.0), mesh).phi) CHECK(p == 0.0);
  }

  TEST_CASE("error falls by four per refinement") {
    double prev = 0.0;
    for (int nx : {16, 32, 64, 128}) {
      const auto mesh = make_mesh(nx, 1.0);
      const auto phi = solve_poisson_neumann(cos_rho(mesh), mesh);
      double err = 0.0;
      for (int i = 0; i < nx; ++i) err = std::max(err, std::abs(phi.phi[i] - std::cos(M_PI * mesh.x(i)) / (M_PI * M_PI)));
      if (prev > 0.0) {
        CHECK(prev / err >= 3.6);
        CHECK(prev / err <= 4.4);
      }
      prev = err;
    }
  }

  TEST_CASE("Poincare constant") {
    const double c1 = poincare_constant(make_mesh(256, 1.0));
    CHECK(std::abs(c1 - 1.0 / M_PI) <= 1e-4);
    CHECK(poincare_constant(make_mesh(256, 2.0)) == doctest::Approx(2.0 * c1).epsilon(1e-12));

    const auto mesh = make_mesh(64, 1.0);
    const auto phi = solve_poisson_neumann(cos_rho(mesh), mesh);
    // the cosine mode is the first eigenfunction, so the inequality is saturated
    const double lhs = std::sqrt(cell_norm2(phi.phi, mesh));
    const double rhs = poincare_constant(mesh) * std::sqrt(face_norm2(phi.dphi, mesh));
    CHECK(lhs <= rhs * (1.0 + 1e-12));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  }

  TEST_CASE("nonzero mean is incompatible") {
    const auto mesh = make_mesh(16, 1.0);
    CHECK_THROWS_AS(solve_poisson_neumann(std::vector<double>(16, 0.5), mesh), CompatibilityError);
  }

  TEST_CASE("potential normalization") {
    const auto flat = make_potential(PotentialFamily::Zero, 0.0, make_mesh(16, 1.0));
    CHECK(flat.shift == 0.0);
    CHECK(flat.c_V == 1.0);
    CHECK(flat.C_V == 1.0);
    CHECK(flat.D_V == 0.0);

    const auto wide = make_potential(PotentialFamily::Zero, 0.0, make_mesh(16, 2.0));
    CHECK(wide.shift == doctest::Approx(-std::log(2.0)).epsilon(1e-14));

    const auto mesh = make_mesh(32, 1.0);
    const auto well = make_potential(PotentialFamily::Cosine, 0.5, mesh);
    double s = 0.0;
    for (int k = 0; k < mesh.nx; ++k) s += std::exp(well.V[k]) * mesh.dx;
    CHECK(std::abs(s - 1.0) <= 1e-12);
    CHECK(well.c_V <= well.C_V);
  }

  TEST_CASE("field estimates") {
    const auto mesh = make_mesh(256, 1.0);
    const auto rho = cos_rho(mesh);
    const auto phi = solve_poisson_neumann(rho, mesh);
    const double ratio = std::sqrt(face_norm2(phi.dphi, mesh) / cell_norm2(rho, mesh));
    CHECK(ratio == doctest::Approx(1.0 / M_PI).epsilon(1e-4));

    // steady state: no change in the field
    const std::vector<double> j(mesh.nx, 0.0);
    const auto r = estimates_for_phi_check(phi, phi, rho, j, 0.01, mesh, 1e-12);
    CHECK(r.dt_grad_phi == 0.0);
    CHECK(r.poincare_ok);
    CHECK(r.flux_ok);
  }
}
