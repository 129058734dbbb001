#include "hypo/config.hpp"
#include "hypo/hypo_diagnostics.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace hypo;

TEST_SUITE("hypo_diagnostics") {
  TEST_CASE("entropy of states without density") {
    const Model m = model_from(testing::small(), false);
    CHECK(entropy_H(m, std::vector<double>(m.size(), 0.0), 0.2) == 0.0);
    const auto M = m.grid->M();
    std::vector<double> f(m.size());
    for (int k = 0; k < m.mesh.nx; ++k)
      for (std::size_t i = 0; i < m.nv(); ++i) f[k * m.nv() + i] = std::sin(1.0 + k) * m.grid->v1(i) * M[i];
    CHECK(entropy_H(m, f, 0.2) == doctest::Approx(0.5 * state_norm2(m, f)).epsilon(1e-15));
  }

  TEST_CASE("norm equivalence for random states") {
    const Model m = model_from(testing::small(), false);
    auto L = populate_ledger(m);
    choose_eta(L, m.bc.c);
    for (int s = 0; s < 50; ++s) {
      auto g = testing::randn(m.size(), 40 + s);
      // random states carry mass; remove it along the equilibrium
      const double mu = total_mass(m, g);
      const auto eq = equilibrium(m, mu);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= eq[i];
      const double n2 = state_norm2(m, g), H = entropy_H(m, g, L.eta);
      CHECK(H >= L.c_eta * n2);
      CHECK(H <= L.C_eta * n2);
    }
  }

  TEST_CASE("eta selection") {
    const Model m = model_from(testing::small(), false);
    auto L = populate_ledger(m);
    REQUIRE(L.C_gamma == 0.0);
    choose_eta(L, 0.5);
    CHECK(L.eta_bound[1] == std::numeric_limits<double>::infinity());
    CHECK(L.eta == doctest::Approx(0.5 * std::min(L.eta_bound[0], L.eta_bound[2])).epsilon(1e-15));
    CHECK(L.alpha < 0.0);
    CHECK(L.beta < 0.0);
    CHECK(L.delta <= 0.0);
    CHECK(L.c_eta > 0.0);

    auto cfg = testing::small(16, 8, 1.0);
    cfg.velocity_dim = 2;
    auto L2 = populate_ledger(model_from(cfg, false));
    REQUIRE(L2.C_gamma > 0.0);
    choose_eta(L2, 1.0);
    CHECK(L2.eta_bound[1] == std::numeric_limits<double>::infinity());
    choose_eta(L2, 0.5);
    CHECK(std::isfinite(L2.eta_bound[1]));
  }

  TEST_CASE("non-finite ledger entries are rejected") {
    const Model m = model_from(testing::small(), false);
    auto L = populate_ledger(m);
    L.D = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS(choose_eta(L, 0.5));
  }

  TEST_CASE("T-terms vanish at equilibrium and on density-free states") {
    const Model m = model_from(testing::small(), false);
    auto L = populate_ledger(m);
    choose_eta(L, m.bc.c);
    const std::vector<double> zero(m.size(), 0.0);
    const auto s0 = take_snapshot(m, zero, 0.0, L.eta);
    const auto s1 = take_snapshot(m, zero, 0.1, L.eta);
    const auto r = dissipation_breakdown(m, s0, s1, L);
    for (double t : {r.T1, r.T2, r.T3, r.T4, r.T5, r.T6}) CHECK(std::abs(t) <= 1e-10);

    const auto M = m.grid->M();
    std::vector<double> f(m.size());
    for (int k = 0; k < m.mesh.nx; ++k)
      for (std::size_t i = 0; i < m.nv(); ++i) f[k * m.nv() + i] = std::cos(0.3 * k) * m.grid->v1(i) * M[i];
    const auto rf = static_report(m, take_snapshot(m, f, 0.0, L.eta), L);
    // the density is zero up to rounding in the velocity sum
    const double scale = state_norm2(m, f);
    CHECK(std::abs(rf.T3) <= 1e-15 * scale);
    CHECK(std::abs(rf.T4) <= 1e-15 * scale);
    CHECK(std::abs(rf.T6) <= 1e-15 * scale);
  }

  TEST_CASE("decay fits") {
    std::vector<double> t, y;
    for (int i = 0; i <= 80; ++i) {
      t.push_back(0.1 * i);
      y.push_back(3.0 * std::exp(-1.3 * t.back()));
    }
    const auto f = fit_decay(t, y, 0.0, 8.0, 0.0);
    CHECK(std::abs(f.tau - 1.3) <= 1e-10);
    CHECK(std::abs(f.a - 3.0) <= 1e-10);

    // pure collision with the unit cross-section relaxes at rate one
    const Model m = model_from(testing::small(8, 16), false);
    SolverConfig sc;
    sc.transport = false;
    Solver s(m, sc);
    const auto M = m.grid->M();
    auto fs = equilibrium(m, 1.0);
    const auto eq = fs;
    for (int k = 0; k < m.mesh.nx; ++k)
      for (std::size_t i = 0; i < m.nv(); ++i) fs[k * m.nv() + i] += 0.1 * m.grid->v1(i) * M[i] * std::cos(k);
    std::vector<double> ts, ds;
    KineticState st{fs, 0.0};
    while (st.t < 8.0) {
      s.step(st);
      std::vector<double> d(st.f.size());
      for (std::size_t i = 0; i < d.size(); ++i) d[i] = st.f[i] - eq[i];
      ts.push_back(st.t);
      ds.push_back(std::sqrt(state_norm2(m, d)));
    }
    CHECK(std::abs(fit_decay(ts, ds, 1.0, 8.0).tau - 1.0) <= 1e-3);
  }

  TEST_CASE("ledger for the unit cross-section") {
    auto cfg = testing::small(64, 64);
    cfg.velocity_kind = "gauss-hermite";
    const auto L = populate_ledger(model_from(cfg, false));
    CHECK(L.lambda_h == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(L.C_L == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(L.C_p == doctest::Approx(1.0 / M_PI).epsilon(1e-3));
    CHECK(L.D == doctest::Approx(std::sqrt(2.0)).epsilon(1e-8));
    CHECK(L.c_V == 1.0);
    CHECK(L.C_V == 1.0);
    CHECK(L.D_V == 0.0);
  }
}
