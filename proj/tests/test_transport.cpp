#include "hypo/config.hpp"
#include "hypo/error.hpp"
#include "hypo/runner.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace hypo;

namespace {

// Four velocities {-1.5, -0.5, 0.5, 1.5} on six unit cells.
Model pulse_model(double c) {
  auto cfg = testing::small(6, 4, c);
  cfg.velocity_vmax = 2.0;
  cfg.mesh_Lx = 6.0;
  return model_from(cfg, false);
}

double node_mass(const Model& m, const std::vector<double>& f, std::size_t i) {
  double s = 0.0;
  for (int k = 0; k < m.mesh.nx; ++k) s += m.mesh.dx * m.grid->weights[i] * f[k * m.nv() + i];
  return s;
}

} // namespace

TEST_SUITE("transport_solver") {
  TEST_CASE("uniform Maxwellian is a fixed point of transport") {
    const Model m = model_from(testing::small(), false);
    Solver s(m, SolverConfig{});
    auto f = equilibrium(m, 1.0);
    const auto f0 = f;
    s.transport_step(f, s.dt());
    CHECK(testing::max_abs_diff(f, f0) <= 1e-15);
  }

  TEST_CASE("single-cell pulse advects by the Courant number") {
    const Model m = pulse_model(0.5);
    Solver s(m, SolverConfig{});
    REQUIRE(m.grid->v1(2) == 0.5);
    std::vector<double> f(m.size(), 0.0);
    f[2 * 4 + 2] = 1.0;
    const double h = 0.8, nu = 0.5 * h;
    s.transport_step(f, h);
    // two forward-Euler upwind stages averaged with the start
    CHECK(f[2 * 4 + 2] == doctest::Approx(0.5 + 0.5 * (1 - nu) * (1 - nu)).epsilon(1e-14));
    CHECK(f[3 * 4 + 2] == doctest::Approx(nu * (1 - nu)).epsilon(1e-14));
    CHECK(f[4 * 4 + 2] == doctest::Approx(0.5 * nu * nu).epsilon(1e-14));
    double centre = 0.0, mass = 0.0;
    for (int k = 0; k < 6; ++k) {
      centre += k * f[k * 4 + 2];
      mass += f[k * 4 + 2];
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(centre == doctest::Approx(2.0 + nu).epsilon(1e-14));
  }

  TEST_CASE("specular wall reverses a pulse") {
    const Model m = pulse_model(1.0);
    Solver s(m, SolverConfig{});
    std::vector<double> f(m.size(), 0.0);
    f[0 * 4 + 1] = 1.0; // v = -0.5 next to the left wall
    const double m0 = total_mass(m, f);
    double prev = 0.0;
    for (int n = 0; n < 12; ++n) {
      s.transport_step(f, 0.5);
      CHECK(total_mass(m, f) == doctest::Approx(m0).epsilon(1e-14));
      CHECK(node_mass(m, f, 1) + node_mass(m, f, 2) == doctest::Approx(m0).epsilon(1e-14));
      // the pulse has not yet crossed to the right wall, so mass only moves from -0.5 to +0.5
      CHECK(node_mass(m, f, 2) > prev);
      prev = node_mass(m, f, 2);
    }
    CHECK(node_mass(m, f, 0) == 0.0);
    CHECK(node_mass(m, f, 3) == 0.0);
    CHECK(prev > 0.9 * m0);
  }

  TEST_CASE("collision sub-step") {
    const Model m = model_from(testing::small(8, 16), false);
    Solver s(m, SolverConfig{});
    const auto M = m.grid->M();
    std::vector<double> f(m.size());
    for (int k = 0; k < m.mesh.nx; ++k)
      for (std::size_t i = 0; i < m.nv(); ++i) f[k * m.nv() + i] = (1.0 + 0.3 * k) * M[i];
    auto g = f;
    s.collision_step(g, 0.1);
    CHECK(testing::max_abs_diff(f, g) <= 1e-15);

    // unit cross-section: the non-equilibrium part decays by exactly e^{-h}
    const auto r = testing::randn(m.size(), 31);
    auto e = r;
    s.collision_step(e, 0.3);
    for (int k = 0; k < m.mesh.nx; ++k) {
      const std::span<const double> cell(r.data() + k * m.nv(), m.nv());
      const auto p = project_pi(cell, *m.grid);
      for (std::size_t i = 0; i < m.nv(); ++i)
        CHECK(std::abs(e[k * m.nv() + i] - (p.rho * M[i] + std::exp(-0.3) * p.perp[i])) <= 1e-12);
    }
  }

  TEST_CASE("generator matches the step as dt shrinks") {
    const Model m = model_from(testing::small(8, 8), false);
    const auto f = testing::randn(m.size(), 32);
    Solver base(m, SolverConfig{});
    const Eigen::MatrixXd A = base.dense_generator();
    const Eigen::Map<const Eigen::VectorXd> fv(f.data(), f.size());
    const Eigen::VectorXd Af = A * fv;
    std::vector<double> err;
    for (double dt : {2e-3, 1e-3}) {
      SolverConfig sc;
      sc.dt = dt;
      Solver s(m, sc);
      auto g = f;
      s.advance(g);
      double e = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) e = std::max(e, std::abs((g[i] - f[i]) / dt - Af(i)));
      err.push_back(e);
    }
    CHECK(err[0] / err[1] == doctest::Approx(2.0).epsilon(0.1));
  }

  TEST_CASE("base generator rate is positive") {
    const Model m = model_from(testing::small(), false);
    const auto o = generator_oracle(m, SolverConfig{});
    CHECK(o.tau_h > 0.0);
    // diffuse walls add dissipation, so tau_h may exceed the collisional gap
    MESSAGE("tau_h = " << o.tau_h << ", lambda_h = " << spectral_gap(m.kernel));
  }

  TEST_CASE("step beyond the CFL limit is rejected") {
    const Model m = model_from(testing::small(), false);
    SolverConfig sc;
    sc.dt = 2.0 * Solver::cfl_limit(m);
    CHECK_THROWS_AS(Solver(m, sc), InvalidConfig);
  }

  TEST_CASE("potential equilibrium residual shrinks under refinement") {
    std::vector<double> res;
    for (int r : {1, 2, 4}) {
      auto cfg = testing::small(16 * r, 16 * r);
      cfg.potential_family = "cosine";
      cfg.potential_amplitude = 0.5;
      const Model m = model_from(cfg, true);
      Solver s(m, SolverConfig{});
      auto f = equilibrium(m, 1.0);
      const auto f0 = f;
      s.advance(f);
      std::vector<double> d(f.size());
      for (std::size_t i = 0; i < d.size(); ++i) d[i] = (f[i] - f0[i]) / s.dt();
      res.push_back(std::sqrt(state_norm2(m, d) / state_norm2(m, f0)));
    }
    CHECK(std::log2(res[0] / res[1]) >= 0.8);
    CHECK(std::log2(res[1] / res[2]) >= 0.8);
  }
}
