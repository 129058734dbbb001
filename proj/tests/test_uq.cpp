#include "hypo/config.hpp"
#include "hypo/error.hpp"
#include "hypo/uq_hierarchy.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace hypo;

namespace {

RunConfig affine_cfg() {
  auto cfg = testing::small();
  cfg.sigma_z_coupling = "affine";
  cfg.sigma_z_coeff = 0.3;
  cfg.init_z_slope = 1.0;
  return cfg;
}

double rel_gap(const Model& m, const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = a[i] - b[i];
  return std::sqrt(state_norm2(m, d) / state_norm2(m, b));
}

} // namespace

TEST_SUITE("uq_hierarchy") {
  TEST_CASE("binomials") {
    CHECK(binomial(4, 2) == 6.0);
    CHECK(binomial(3, 0) == 1.0);
    CHECK(binomial(5, 5) == 1.0);
  }

  TEST_CASE("sources under affine coupling") {
    const auto cfg = affine_cfg();
    const Model m = model_from(cfg, false);
    const auto dz = assemble_dz_kernels(sigma_from(cfg), m.grid, 0.0, 2);
    const std::vector<std::vector<double>> levels = {testing::randn(m.size(), 50), testing::randn(m.size(), 51)};
    for (double s : build_source(0, dz, levels, m)) CHECK(s == 0.0);

    const auto M = m.grid->M();
    auto closed = [&](const std::vector<double>& g, double scale) {
      std::vector<double> out(g.size());
      for (int k = 0; k < m.mesh.nx; ++k) {
        double rho = 0.0;
        for (std::size_t i = 0; i < m.nv(); ++i) rho += m.grid->weights[i] * g[k * m.nv() + i];
        for (std::size_t i = 0; i < m.nv(); ++i) out[k * m.nv() + i] = scale * 0.3 * (rho * M[i] - g[k * m.nv() + i]);
      }
      return out;
    };
    CHECK(testing::max_abs_diff(build_source(1, dz, levels, m), closed(levels[0], 1.0)) <= 1e-14);
    CHECK(testing::max_abs_diff(build_source(2, dz, levels, m), closed(levels[1], 2.0)) <= 1e-14);
  }

  TEST_CASE("finite-difference oracle") {
    auto cfg = affine_cfg();
    cfg.solver_t_end = 1.0;
    const Model m = model_from(cfg, false);
    auto h = hierarchy_from(cfg);

    // zero-width stencil is the plain solve
    const auto f0 = fd_oracle(m, sigma_from(cfg), h, 1e-2, 0);
    SolverConfig sc = h.solver;
    sc.mode = CollisionMode::Exponential;
    Solver s(m, sc);
    KineticState st{initial_levels(m, h.init, 0.0, 0)[0], 0.0};
    const long n = static_cast<long>(std::ceil(cfg.solver_t_end / s.dt() - 1e-9));
    for (long i = 0; i < n; ++i) s.step(st);
    CHECK(f0.final_state == st.f);

    const auto r = run_hierarchy(m, sigma_from(cfg), h);
    CHECK(rel_gap(m, r.levels[1], fd_oracle(m, sigma_from(cfg), h, 1e-2, 1).final_state) <= 1e-3);

    auto flat = cfg;
    flat.sigma_z_coupling = "none";
    flat.init_z_slope = 0.0;
    const Model mf = model_from(flat, false);
    const double delta = 1e-2;
    for (double v : fd_oracle(mf, sigma_from(flat), hierarchy_from(flat), delta, 1).final_state)
      CHECK(std::abs(v) <= 1e-9 / delta);

    CHECK_THROWS_AS(fd_oracle(m, sigma_from(cfg), h, 0.5, 1), InvalidConfig);
  }

  TEST_CASE("level one grows from zero then decays") {
    auto cfg = affine_cfg();
    cfg.init_z_slope = 0.0;
    cfg.uq_lmax = 1;
    const Model m = model_from(cfg, false);
    const auto r = run_hierarchy(m, sigma_from(cfg), hierarchy_from(cfg));
    const auto& n1 = r.norms[1];
    CHECK(n1.front() == 0.0);
    std::size_t peak = 0;
    for (std::size_t i = 0; i < n1.size(); ++i)
      if (n1[i] > n1[peak]) peak = i;
    CHECK(peak > 0);
    CHECK(n1.back() < 0.1 * n1[peak]);
  }

  TEST_CASE("potentials are not supported by the hierarchy") {
    auto cfg = affine_cfg();
    cfg.potential_family = "cosine";
    cfg.potential_amplitude = 0.5;
    CHECK_THROWS(run_hierarchy(model_from(cfg, true), sigma_from(cfg), hierarchy_from(cfg)));
  }

  TEST_CASE("recursion bound polynomials") {
    const auto g1 = recursion_G(1.0, {{0.0, 0.0}, {1.0, 0.0}}, {1.0, 0.0});
    for (double t : {0.0, 0.5, 2.0}) CHECK(g1.G(1, t) == doctest::Approx(t).epsilon(1e-14));

    const auto g0 = recursion_G(1.0, {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}}, {0.0, 0.0, 0.0});
    for (int l = 0; l <= 2; ++l) CHECK(g0.G(l, 3.0) == 0.0);

    // chain coupling through level one only
    const std::vector<std::vector<double>> chain = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    const auto g2 = recursion_G(1.0, chain, {1.0, 0.0, 0.0});
    for (double t : {0.5, 1.0, 3.0}) CHECK(g2.G(2, t) == doctest::Approx(0.5 * t * t).epsilon(1e-14));
    CHECK(verify_recursion_lemma(1.0, chain, {1.0, 0.0, 0.0}, 5.0, true).max_equality_gap <= 1e-8);

    // direct coupling from level zero adds the linear term
    const std::vector<std::vector<double>> both = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}};
    const auto gb = recursion_G(1.0, both, {1.0, 0.0, 0.0});
    for (double t : {0.5, 1.0, 3.0}) CHECK(gb.G(2, t) == doctest::Approx(t + 0.5 * t * t).epsilon(1e-14));
    CHECK(verify_recursion_lemma(1.0, both, {1.0, 0.0, 0.0}, 5.0, true).max_equality_gap <= 1e-8);
  }

  TEST_CASE("recursion lemma") {
    const std::vector<std::vector<double>> b = {{0, 0, 0}, {0.7, 0, 0}, {0.4, 1.1, 0}};
    const std::vector<double> h0 = {1.0, 0.3, 0.2};
    const auto eq = verify_recursion_lemma(0.8, b, h0, 8.0, true);
    CHECK(eq.ok);
    CHECK(eq.max_equality_gap <= 1e-8);
    const auto damped = verify_recursion_lemma(0.8, b, h0, 8.0, false, 3);
    CHECK(damped.ok);
    CHECK(damped.max_ratio < 1.0);

    const auto g = recursion_G(0.8, {{0.0}}, {2.0});
    CHECK(g.G(0, 4.0) == 2.0);
    CHECK_THROWS(recursion_G(-1.0, {{0.0}}, {1.0}));
  }

  TEST_CASE("source bound is attained on aligned data") {
    const auto cfg = affine_cfg();
    const Model m = model_from(cfg, false);
    const auto dz = assemble_dz_kernels(sigma_from(cfg), m.grid, 0.0, 1);
    const double Ct = operator_norm(dz[0]);
    // -0.3 (I - pi) is maximal on anything orthogonal to M
    const auto M = m.grid->M();
    std::vector<double> g(m.size());
    for (int k = 0; k < m.mesh.nx; ++k)
      for (std::size_t i = 0; i < m.nv(); ++i) g[k * m.nv() + i] = m.grid->v1(i) * M[i] * (1.0 + k);
    const auto S = build_source(1, dz, {g}, m);
    const double ratio = std::sqrt(state_norm2(m, S) / state_norm2(m, g)) / Ct;
    CHECK(ratio <= 1.0 + 1e-12);
    CHECK(ratio >= 0.5);
  }
}
