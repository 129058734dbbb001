#include "hypo/verify.hpp"

#include "hypo/config.hpp"
#include "hypo/error.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

namespace hypo {

namespace {

struct Check {
  bool ok = false;
  std::string detail;
};

std::string num(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

class Suite {
 public:
  Suite(std::string name, std::vector<PropertyResult>& out) : name_(std::move(name)), out_(out) {}
  void prop(const std::string& name, const std::function<Check()>& body) {
    PropertyResult r;
    r.suite = name_;
    r.name = name;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const Check c = body();
      r.ok = c.ok;
      r.detail = c.detail;
    } catch (const std::exception& e) {
      r.ok = false;
      r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out_.push_back(std::move(r));
  }

 private:
  std::string name_;
  std::vector<PropertyResult>& out_;
};

RunConfig pinned(int nx, int n, double c) {
  RunConfig cfg;
  cfg.mesh_nx = nx;
  cfg.velocity_n = n;
  cfg.bc_c = c;
  return cfg;
}

Model pinned_model(const RunConfig& cfg, const VerifyOptions& opt, bool potential = false) {
  Model m = model_from(cfg, potential);
  if (opt.flip_collision_sign) m.kernel.sign = -1.0;
  return m;
}

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = nd(rng);
  return v;
}

std::vector<CollisionKernel> sample_kernels(const VerifyOptions& opt) {
  std::vector<CollisionKernel> ks;
  CrossSectionSpec unit;
  CrossSectionSpec bump;
  bump.family = SigmaFamily::GaussianBump;
  bump.bump_amp = 0.7;
  bump.bump_width = 1.3;
  for (auto grid : {make_grid(1, 16, 6.0, GridKind::UniformMidpoint), make_grid(2, 8, 0.0, GridKind::GaussHermite)}) {
    ks.push_back(assemble_kernel(unit, grid, 0.0));
    ks.push_back(assemble_kernel(bump, grid, 0.0));
  }
  if (opt.flip_collision_sign)
    for (auto& k : ks) k.sign = -1.0;
  return ks;
}

// ---------------------------------------------------------------- collision

void suite_collision(std::vector<PropertyResult>& out, const VerifyOptions& opt) {
  Suite s("collision", out);
  const auto ks = sample_kernels(opt);
  s.prop("maxwellian is in the kernel of L", [&] {
    double worst = 0.0;
    for (const auto& k : ks) {
      const auto M = k.grid->M();
      const auto LM = apply_L(k, M);
      for (double v : LM) worst = std::max(worst, std::abs(v));
    }
    return Check{worst <= 1e-13, "max |L M| = " + num(worst)};
  });
  s.prop("L is dnu self-adjoint", [&] {
    std::mt19937_64 rng(opt.seed);
    double worst = 0.0;
    for (const auto& k : ks) {
      const auto f = random_vec(k.grid->size(), rng), g = random_vec(k.grid->size(), rng);
      const double a = inner_dnu(apply_L(k, f), g, *k.grid), b = inner_dnu(f, apply_L(k, g), *k.grid);
      const double scale = std::sqrt(norm2_dnu(f, *k.grid) * norm2_dnu(g, *k.grid)) * (1.0 + operator_norm(k));
      worst = std::max(worst, std::abs(a - b) / scale);
    }
    return Check{worst <= 1e-12, "max relative asymmetry " + num(worst)};
  });
  s.prop("quadratic form matches the H-theorem expression", [&] {
    std::mt19937_64 rng(opt.seed + 1);
    int bad = 0;
    for (const auto& k : ks)
      for (int r = 0; r < 20; ++r)
        if (!coercivity_check(k, random_vec(k.grid->size(), rng)).h_identity_ok) ++bad;
    return Check{bad == 0, std::to_string(bad) + " of 80 samples off by more than 1e-10 relative"};
  });
  s.prop("coercivity with the dense spectral gap", [&] {
    std::mt19937_64 rng(opt.seed + 2);
    int bad = 0;
    for (const auto& k : ks) {
      const double gap = spectral_gap(k);
      for (int r = 0; r < 100; ++r)
        if (!coercivity_check(k, random_vec(k.grid->size(), rng), gap).ok) ++bad;
      if (!(gap > 0.0)) ++bad;
    }
    return Check{bad == 0, std::to_string(bad) + " of 400 samples violate <Lf,f> <= -lambda_h |f_perp|^2"};
  });
  s.prop("unit cross-section has gap one", [&] {
    double worst = 0.0;
    for (std::size_t i = 0; i < ks.size(); i += 2) worst = std::max(worst, std::abs(spectral_gap(ks[i]) - 1.0));
    return Check{worst <= 1e-10, "max |lambda_h - 1| = " + num(worst)};
  });
  s.prop("collisions conserve local mass", [&] {
    std::mt19937_64 rng(opt.seed + 3);
    double worst = 0.0;
    for (const auto& k : ks) {
      const auto f = random_vec(k.grid->size(), rng);
      const auto Lf = apply_L(k, f);
      double m = 0.0, scale = 0.0;
      for (std::size_t i = 0; i < f.size(); ++i) {
        m += k.grid->weights[i] * Lf[i];
        scale += k.grid->weights[i] * std::abs(Lf[i]);
      }
      worst = std::max(worst, std::abs(m) / std::max(scale, 1e-300));
    }
    return Check{worst <= 1e-13, "max relative mass production " + num(worst)};
  });
  s.prop("z-derivative kernels annihilate mass", [&] {
    CrossSectionSpec spec;
    spec.z_coupling = ZCoupling::Exponential;
    spec.z_coeff = 0.4;
    const auto grid = make_grid(1, 16, 6.0, GridKind::UniformMidpoint);
    const auto dz = assemble_dz_kernels(spec, grid, 0.2, 3);
    std::mt19937_64 rng(opt.seed + 4);
    double worst = 0.0;
    for (const auto& k : dz) {
      const auto Lf = apply_L(k, random_vec(grid->size(), rng));
      double m = 0.0;
      for (std::size_t i = 0; i < Lf.size(); ++i) m += grid->weights[i] * Lf[i];
      worst = std::max(worst, std::abs(m));
    }
    return Check{worst <= 1e-13, "max |sum w L_z^k f| = " + num(worst)};
  });
}

// ---------------------------------------------------------------- bc

void suite_bc(std::vector<PropertyResult>& out, const VerifyOptions& opt) {
  Suite s("bc", out);
  const std::vector<GridPtr> grids = {make_grid(1, 16, 6.0, GridKind::UniformMidpoint),
                                      make_grid(1, 20, 0.0, GridKind::GaussHermite),
                                      make_grid(2, 8, 5.0, GridKind::UniformMidpoint)};
  s.prop("null flux at both walls", [&] {
    std::mt19937_64 rng(opt.seed);
    double worst = 0.0;
    for (const auto& g : grids)
      for (double c : {0.0, 0.5, 1.0}) {
        const auto bc = make_bc(c, *g);
        for (Wall w : {Wall::Left, Wall::Right}) {
          auto tr = random_vec(g->size(), rng);
          for (double& v : tr) v = std::abs(v);
          const auto wv = apply_maxwell_bc(bc, w, *g, tr);
          double scale = 0.0;
          for (std::size_t i = 0; i < g->size(); ++i) scale += g->weights[i] * std::abs(wv[i] * g->v1(i));
          worst = std::max(worst, std::abs(boundary_flux(*g, w, wv)) / scale);
        }
      }
    return Check{worst <= 1e-13, "max relative wall flux " + num(worst)};
  });
  s.prop("specular walls mirror the trace", [&] {
    std::mt19937_64 rng(opt.seed + 1);
    double worst = 0.0;
    for (const auto& g : grids) {
      const auto bc = make_bc(1.0, *g);
      const auto tr = random_vec(g->size(), rng);
      for (Wall w : {Wall::Left, Wall::Right}) {
        const auto wv = apply_maxwell_bc(bc, w, *g, tr);
        for (std::size_t i = 0; i < g->size(); ++i)
          if (!is_outgoing(*g, i, w)) worst = std::max(worst, std::abs(wv[i] - tr[g->mirror[i]]));
      }
    }
    return Check{worst == 0.0, "max |f_in - f(mirror)| = " + num(worst)};
  });
  s.prop("diffuse re-emission has unit half-flux", [&] {
    double worst = 0.0;
    for (const auto& g : grids)
      for (Wall w : {Wall::Left, Wall::Right}) {
        const auto M = g->M();
        double s = 0.0;
        for (std::size_t i = 0; i < g->size(); ++i)
          if (!is_outgoing(*g, i, w)) s += M[i] * std::abs(g->v1(i)) * g->weights[i];
        worst = std::max(worst, std::abs(discrete_CM(*g, w) * s - 1.0));
      }
    return Check{worst <= 1e-14, "max |CM sum M|v1| w - 1| = " + num(worst)};
  });
  s.prop("boundary dissipation vanishes on Maxwellians and is nonnegative", [&] {
    std::mt19937_64 rng(opt.seed + 2);
    double at_M = 0.0, most_negative = 0.0;
    for (const auto& g : grids) {
      const auto bc = make_bc(0.3, *g);
      const auto M = g->M();
      for (Wall w : {Wall::Left, Wall::Right}) {
        at_M = std::max(at_M, std::abs(boundary_dissipation(bc, w, *g, M)));
        most_negative = std::min(most_negative, boundary_dissipation(bc, w, *g, random_vec(g->size(), rng)));
      }
    }
    return Check{at_M <= 1e-14 && most_negative >= 0.0,
                 "max at M " + num(at_M) + ", most negative " + num(most_negative)};
  });
  s.prop("wall projection is idempotent", [&] {
    std::mt19937_64 rng(opt.seed + 3);
    double worst = 0.0;
    for (const auto& g : grids)
      for (Wall w : {Wall::Left, Wall::Right}) {
        const double CM = discrete_CM(*g, w);
        const auto h = random_vec(g->size(), rng);
        const auto p1 = P_gamma(*g, CM, w, h);
        const auto p2 = P_gamma(*g, CM, w, p1);
        for (std::size_t i = 0; i < h.size(); ++i) worst = std::max(worst, std::abs(p1[i] - p2[i]));
      }
    return Check{worst <= 1e-13, "max |P P h - P h| = " + num(worst)};
  });
}

// ---------------------------------------------------------------- poisson

void suite_poisson(std::vector<PropertyResult>& out, const VerifyOptions& opt) {
  Suite s("poisson", out);
  s.prop("Neumann solve residual", [&] {
    std::mt19937_64 rng(opt.seed);
    const auto mesh = make_mesh(256, 1.0);
    auto rho = random_vec(256, rng);
    double mean = 0.0;
    for (double r : rho) mean += r / 256.0;
    for (double& r : rho) r -= mean;
    const auto phi = solve_poisson_neumann(rho, mesh);
    double rn = 0.0;
    for (double r : rho) rn = std::max(rn, std::abs(r));
    return Check{phi.residual <= 1e-12 * rn, "residual " + num(phi.residual) + " for max|rho| " + num(rn)};
  });
  s.prop("manufactured solution converges at second order", [&] {
    std::vector<double> err;
    for (int nx : {32, 64, 128, 256}) {
      const auto mesh = make_mesh(nx, 2.0);
      std::vector<double> rho(nx);
      const double k = M_PI / mesh.Lx;
      for (int i = 0; i < nx; ++i) rho[i] = k * k * std::cos(k * mesh.x(i));
      const auto phi = solve_poisson_neumann(rho, mesh);
      double e = 0.0;
      for (int i = 0; i < nx; ++i) e = std::max(e, std::abs(phi.phi[i] - std::cos(k * mesh.x(i))));
      err.push_back(e);
    }
    bool ok = true;
    std::string d = "ratios";
    for (std::size_t i = 1; i < err.size(); ++i) {
      const double r = err[i - 1] / err[i];
      ok = ok && r >= 3.6 && r <= 4.4;
      d += " " + num(r);
    }
    return Check{ok, d};
  });
  s.prop("discrete Poincare constant approaches Lx/pi", [&] {
    const double Lx = 1.7;
    const double cp = poincare_constant(make_mesh(256, Lx));
    return Check{std::abs(cp - Lx / M_PI) <= 1e-4, "C_p = " + num(cp) + " vs " + num(Lx / M_PI)};
  });
  s.prop("eigensolve matches the closed-form first eigenvalue", [&] {
    const auto mesh = make_mesh(64, 1.0);
    const double cp = poincare_constant(mesh);
    const double mu = neumann_mu1_closed_form(mesh);
    const double rel = std::abs(1.0 / (cp * cp) - mu) / mu;
    return Check{rel <= 1e-10, "relative difference " + num(rel)};
  });
  s.prop("incompatible data is rejected", [&] {
    const auto mesh = make_mesh(16, 1.0);
    std::vector<double> rho(16, 1.0);
    try {
      solve_poisson_neumann(rho, mesh);
    } catch (const CompatibilityError&) {
      return Check{true, "CompatibilityError raised"};
    }
    return Check{false, "no error for mean-one data"};
  });
  s.prop("density-weighted pairing identity with a potential", [&] {
    auto cfg = pinned(32, 16, 0.5);
    cfg.potential_family = "cosine";
    cfg.potential_amplitude = 0.5;
    const Model m = pinned_model(cfg, opt, true);
    std::mt19937_64 rng(opt.seed + 5);
    auto g = random_vec(m.size(), rng);
    const auto L = populate_ledger(m, opt.seed);
    const auto snap = take_snapshot(m, g, 0.0, 0.0);
    const auto r = static_report(m, snap, L);
    const double defect = std::abs(r.T3 + r.T6 + r.rho2);
    return Check{r.t3_ok, "|T3 + T6 + |rho|^2| = " + num(defect)};
  });
}

// ---------------------------------------------------------------- solver

void suite_solver(std::vector<PropertyResult>& out, const VerifyOptions& opt) {
  Suite s("solver", out);
  s.prop("mass and wall flux over 2000 steps", [&] {
    double drift = 0.0, flux = 0.0;
    for (double c : {0.0, 0.5, 1.0}) {
      auto cfg = pinned(16, 16, c);
      const Model m = pinned_model(cfg, opt);
      Solver sv(m, solver_from(cfg));
      KineticState st{initial_state(m, init_from(cfg)), 0.0};
      const double m0 = total_mass(m, st.f);
      for (int n = 0; n < 2000; ++n) {
        sv.step(st);
        const double fn = std::sqrt(state_norm2(m, st.f));
        flux = std::max({flux, std::abs(sv.wall_flux(st.f, Wall::Left)) / fn,
                         std::abs(sv.wall_flux(st.f, Wall::Right)) / fn});
      }
      drift = std::max(drift, std::abs(total_mass(m, st.f) - m0) / m0);
    }
    return Check{drift <= 1e-10 && flux <= 1e-12, "mass drift " + num(drift) + ", wall flux " + num(flux)};
  });
  s.prop("uniform Maxwellian is a fixed point of the step", [&] {
    auto cfg = pinned(16, 16, 0.5);
    const Model m = pinned_model(cfg, opt);
    Solver sv(m, solver_from(cfg));
    auto f = equilibrium(m, 1.0);
    const auto f0 = f;
    sv.advance(f);
    double worst = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) worst = std::max(worst, std::abs(f[i] - f0[i]));
    return Check{worst <= 1e-14, "max change " + num(worst)};
  });
  s.prop("generator conserves mass and annihilates the equilibrium", [&] {
    auto cfg = pinned(8, 8, 0.5);
    const Model m = pinned_model(cfg, opt);
    Solver sv(m, solver_from(cfg));
    const Eigen::MatrixXd A = sv.dense_generator();
    const auto d = global_mass_deflation(m);
    const double col = (d.left.transpose() * A).cwiseAbs().maxCoeff();
    const double null = (A * d.right).cwiseAbs().maxCoeff();
    return Check{col <= 1e-12 && null <= 1e-12, "max weighted column sum " + num(col) + ", |A eq| " + num(null)};
  });
  s.prop("pure collision oracle rate is the gap", [&] {
    auto cfg = pinned(8, 16, 0.5);
    const Model m = pinned_model(cfg, opt);
    SolverConfig sc = solver_from(cfg);
    sc.transport = false;
    Solver sv(m, sc);
    const auto r = decay_rate_oracle(sv.dense_generator(), cell_mass_deflation(m));
    return Check{std::abs(r.tau_h - 1.0) <= 1e-8, "tau_h = " + num(r.tau_h)};
  });
  s.prop("specular transport alone does not decay", [&] {
    auto cfg = pinned(8, 8, 1.0);
    const Model m = pinned_model(cfg, opt);
    SolverConfig sc = solver_from(cfg);
    sc.collision = false;
    Solver sv(m, sc);
    const auto r = decay_rate_oracle(sv.dense_generator(), global_mass_deflation(m));
    return Check{r.tau_h <= 1e-10, "tau_h = " + num(r.tau_h)};
  });
  s.prop("explicit and exponential collision agree to second order", [&] {
    auto cfg = pinned(4, 16, 0.5);
    cfg.sigma_family = "gaussian-bump";
    cfg.sigma_bump_amp = 0.5;
    Model m = pinned_model(cfg, opt);
    std::mt19937_64 rng(opt.seed);
    const auto f0 = random_vec(m.size(), rng);
    std::vector<double> errs;
    for (double h : {0.02, 0.01, 0.005}) {
      SolverConfig a = solver_from(cfg), b = a;
      a.mode = CollisionMode::Explicit;
      Solver sa(m, a), sb(m, b);
      auto fa = f0, fb = f0;
      sa.collision_step(fa, h);
      sb.collision_step(fb, h);
      double e = 0.0;
      for (std::size_t i = 0; i < fa.size(); ++i) e = std::max(e, std::abs(fa[i] - fb[i]));
      errs.push_back(e);
    }
    const double r1 = errs[0] / errs[1], r2 = errs[1] / errs[2];
    return Check{r1 > 3.5 && r1 < 4.5 && r2 > 3.5 && r2 < 4.5, "halving ratios " + num(r1) + ", " + num(r2)};
  });
  s.prop("Strang step is second order in time", [&] {
    auto cfg = pinned(16, 16, 0.5);
    const Model m = pinned_model(cfg, opt);
    const double base = 0.5 * Solver::cfl_limit(m);
    std::vector<std::vector<double>> sol;
    for (int r : {1, 2, 4}) {
      SolverConfig sc = solver_from(cfg);
      const double T = 0.5;
      const long n = static_cast<long>(std::ceil(T / base)) * r;
      sc.dt = T / n;
      Solver sv(m, sc);
      KineticState st{initial_state(m, init_from(cfg)), 0.0};
      for (long k = 0; k < n; ++k) sv.step(st);
      sol.push_back(st.f);
    }
    std::vector<double> d1(m.size()), d2(m.size());
    for (std::size_t i = 0; i < d1.size(); ++i) {
      d1[i] = sol[0][i] - sol[1][i];
      d2[i] = sol[1][i] - sol[2][i];
    }
    const double order = std::log2(std::sqrt(state_norm2(m, d1) / state_norm2(m, d2)));
    return Check{order >= 1.8, "observed order " + num(order)};
  });
  s.prop("explicit collision keeps nonnegative data nonnegative", [&] {
    auto cfg = pinned(16, 16, 0.5);
    cfg.solver_collision = "explicit";
    const Model m = pinned_model(cfg, opt);
    Solver sv(m, solver_from(cfg));
    std::mt19937_64 rng(opt.seed + 9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    KineticState st{std::vector<double>(m.size()), 0.0};
    for (double& v : st.f) v = u(rng);
    double most_negative = 0.0;
    for (int n = 0; n < 200; ++n) {
      sv.step(st);
      for (double v : st.f) most_negative = std::min(most_negative, v);
    }
    return Check{most_negative >= 0.0, "most negative entry " + num(most_negative)};
  });
  s.prop("distance to equilibrium decreases every step", [&] {
    auto cfg = pinned(16, 16, 0.5);
    cfg.solver_t_end = 4.0;
    const Model m = pinned_model(cfg, opt);
    auto o = run_options_from(cfg);
    o.oracle = false;
    const auto r = run_scenario(m, o, init_from(cfg));
    return Check{r.monotone_violations == 0, "max relative increase " + num(r.max_monotone_excess)};
  });
}

// ---------------------------------------------------------------- diagnostics

void suite_diagnostics(std::vector<PropertyResult>& out, const VerifyOptions& opt) {
  Suite s("diagnostics", out);
  s.prop("base run: every entropy inequality at every record", [&] {
    auto cfg = pinned(16, 16, 0.5);
    const Model m = pinned_model(cfg, opt);
    auto o = run_options_from(cfg);
    o.oracle = false;
    const auto r = run_scenario(m, o, init_from(cfg));
    std::string d;
    long total = 0;
    for (std::size_t i = 0; i < kFlagNames.size(); ++i) {
      total += r.flag_failures[i];
      if (r.flag_failures[i]) d += std::string(kFlagNames[i]) + ":" + std::to_string(r.flag_failures[i]) + " ";
    }
    return Check{total == 0, total ? "failures " + d : std::to_string(r.records.size()) + " records clean"};
  });
  s.prop("base run: fitted rate matches the generator oracle", [&] {
    auto cfg = pinned(16, 16, 0.5);
    const Model m = pinned_model(cfg, opt);
    const auto r = run_scenario(m, run_options_from(cfg), init_from(cfg));
    const double rel = std::abs(r.fit_norm->tau - r.oracle->tau_h) / r.oracle->tau_h;
    const double hrel = std::abs(r.fit_H->tau - r.fit_norm->tau) / r.fit_norm->tau;
    return Check{rel <= 0.05 && hrel <= 0.02, "tau_fit " + num(r.fit_norm->tau) + ", tau_h " + num(r.oracle->tau_h) +
                                                  ", H-rate gap " + num(hrel)};
  });
  s.prop("dim 2 run including the tangential boundary term", [&] {
    auto cfg = pinned(12, 8, 0.3);
    cfg.velocity_dim = 2;
    cfg.velocity_kind = "gauss-hermite";
    cfg.solver_t_end = 2.0;
    cfg.diagnostics_fit_t0 = 0.2;
    cfg.diagnostics_fit_t1 = 2.0;
    const Model m = pinned_model(cfg, opt);
    auto o = run_options_from(cfg);
    o.oracle = false;
    const auto r = run_scenario(m, o, init_from(cfg));
    long total = 0;
    for (long f : r.flag_failures) total += f;
    return Check{total == 0 && r.ledger.C_gamma > 0.0,
                 "C_gamma " + num(r.ledger.C_gamma) + ", flag failures " + std::to_string(total)};
  });
  s.prop("ledger constants for the unit cross-section", [&] {
    auto cfg = pinned(64, 64, 0.5);
    cfg.velocity_kind = "gauss-hermite";
    cfg.mesh_Lx = 2.0;
    const Model m = pinned_model(cfg, opt);
    const auto L = populate_ledger(m, opt.seed);
    const bool ok = std::abs(L.lambda_h - 1.0) <= 1e-8 && std::abs(L.C_L - 2.0) <= 1e-2 &&
                    std::abs(L.C_p - 2.0 / M_PI) <= 1e-3 && std::abs(L.D - std::sqrt(2.0)) <= 1e-2;
    return Check{ok, "lambda_h " + num(L.lambda_h) + ", C_L " + num(L.C_L) + ", C_p " + num(L.C_p) + ", D " + num(L.D)};
  });
  s.prop("tangential boundary constant in dim 2", [&] {
    double cg[2];
    for (int r = 0; r < 2; ++r) {
      auto cfg = pinned(8, 16 << r, 0.5);
      cfg.velocity_dim = 2;
      cfg.velocity_vmax = 8.0;
      cg[r] = populate_ledger(pinned_model(cfg, opt), opt.seed).C_gamma;
    }
    // midpoint error is O(dv^2), so one Richardson step removes it
    const double extrap = (4.0 * cg[1] - cg[0]) / 3.0;
    const double want = std::sqrt(1.0 / std::sqrt(2.0 * M_PI));
    return Check{std::abs(extrap - want) <= 1e-3,
                 "C_gamma " + num(cg[0]) + ", " + num(cg[1]) + ", extrapolated " + num(extrap) + " vs " + num(want)};
  });
  s.prop("chosen eta gives the coefficient signs", [&] {
    std::string d;
    bool ok = true;
    for (int dim : {1, 2})
      for (double c : {0.0, 0.5, 1.0}) {
        auto cfg = pinned(16, dim == 1 ? 16 : 8, c);
        cfg.velocity_dim = dim;
        const Model m = pinned_model(cfg, opt);
        auto L = populate_ledger(m, opt.seed);
        choose_eta(L, c);
        const bool here = L.c_eta > 0.0 && L.alpha < 0.0 && L.beta < 0.0 && L.delta <= 0.0 && L.omega > 0.0;
        if (!here) d += "dim " + std::to_string(dim) + " c " + num(c) + " fails; ";
        ok = ok && here;
      }
    return Check{ok, ok ? "alpha, beta < 0, delta <= 0, c_eta > 0 in all six cases" : d};
  });
  s.prop("entropy of trivial states", [&] {
    auto cfg = pinned(16, 16, 0.5);
    const Model m = pinned_model(cfg, opt);
    std::vector<double> zero(m.size(), 0.0);
    const double h0 = entropy_H(m, zero, 0.1);
    // v1 M in every cell carries no density
    std::vector<double> f(m.size());
    const auto M = m.grid->M();
    for (int k = 0; k < m.mesh.nx; ++k)
      for (std::size_t i = 0; i < m.nv(); ++i) f[k * m.nv() + i] = m.grid->v1(i) * M[i] * std::cos(k);
    const double h1 = entropy_H(m, f, 0.1);
    const double want = 0.5 * state_norm2(m, f);
    return Check{h0 == 0.0 && std::abs(h1 - want) <= 1e-15 * want, "H(0) = " + num(h0) + ", H - |f|^2/2 = " + num(h1 - want)};
  });
  s.prop("decay fit recovers a synthetic exponential", [&] {
    std::vector<double> t, y;
    for (int i = 0; i <= 100; ++i) {
      t.push_back(0.1 * i);
      y.push_back(2.5 * std::exp(-0.7 * t.back()));
    }
    const auto f = fit_decay(t, y, 0.0, 10.0);
    return Check{std::abs(f.tau - 0.7) <= 1e-10 && std::abs(f.a - 2.5) <= 1e-10,
                 "tau " + num(f.tau) + ", a " + num(f.a)};
  });
}

// ---------------------------------------------------------------- uq

RunConfig uq_config() {
  auto cfg = pinned(16, 16, 0.5);
  cfg.sigma_z_coupling = "affine";
  cfg.sigma_z_coeff = 0.3;
  cfg.init_z_slope = 1.0;
  cfg.uq_lmax = 2;
  return cfg;
}

void suite_uq(std::vector<PropertyResult>& out, const VerifyOptions& opt) {
  Suite s("uq", out);
  s.prop("level one matches central differences in z", [&] {
    auto cfg = uq_config();
    cfg.solver_t_end = 1.0;
    cfg.uq_lmax = 1;
    const Model m = pinned_model(cfg, opt);
    const auto h = hierarchy_from(cfg);
    const auto r = run_hierarchy(m, sigma_from(cfg), h);
    const auto fd = fd_oracle(m, sigma_from(cfg), h, cfg.uq_fd_delta, 1);
    std::vector<double> d(m.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = r.levels[1][i] - fd.final_state[i];
    const double gap = std::sqrt(state_norm2(m, d) / state_norm2(m, fd.final_state));
    return Check{gap <= 1e-3, "relative gap " + num(gap)};
  });
  s.prop("zero levels stay zero without z-dependence", [&] {
    auto cfg = uq_config();
    cfg.sigma_z_coupling = "none";
    cfg.init_z_slope = 0.0;
    cfg.solver_t_end = 2.0;
    const Model m = pinned_model(cfg, opt);
    const auto r = run_hierarchy(m, sigma_from(cfg), hierarchy_from(cfg));
    double worst = 0.0;
    for (std::size_t l = 1; l < r.norms.size(); ++l)
      for (double v : r.norms[l]) worst = std::max(worst, v);
    return Check{worst <= 1e-13, "max level norm " + num(worst)};
  });
  s.prop("hierarchy levels: mass, source bounds and entropy with source", [&] {
    auto cfg = uq_config();
    const Model m = pinned_model(cfg, opt);
    const auto r = run_hierarchy(m, sigma_from(cfg), hierarchy_from(cfg));
    bool ok = true;
    std::string d;
    for (std::size_t l = 0; l < r.checks.size(); ++l) {
      const auto& c = r.checks[l];
      const bool here = c.max_mass_drift <= 1e-10 && c.t1_fail == 0 && c.source_fail == 0 && c.jsource_fail == 0;
      ok = ok && here;
      d += "l" + std::to_string(l) + ": drift " + num(c.max_mass_drift) + " fails " + std::to_string(c.t1_fail) + "/" +
           std::to_string(c.source_fail) + "/" + std::to_string(c.jsource_fail) + "; ";
    }
    return Check{ok, d};
  });
  s.prop("fitted level envelopes decay", [&] {
    auto cfg = uq_config();
    const Model m = pinned_model(cfg, opt);
    const auto r = run_hierarchy(m, sigma_from(cfg), hierarchy_from(cfg));
    bool ok = true;
    std::string d = "a_fit";
    for (const auto& e : r.envelopes) {
      ok = ok && e.ok;
      d += " " + num(e.a_fit);
    }
    return Check{ok, d};
  });
  s.prop("sources carry no mass", [&] {
    auto cfg = uq_config();
    const Model m = pinned_model(cfg, opt);
    const auto dz = assemble_dz_kernels(sigma_from(cfg), m.grid, 0.0, 2);
    std::mt19937_64 rng(opt.seed);
    std::vector<std::vector<double>> levels = {random_vec(m.size(), rng), random_vec(m.size(), rng)};
    double worst = 0.0;
    for (int l : {1, 2}) {
      const auto S = build_source(l, dz, levels, m);
      for (int k = 0; k < m.mesh.nx; ++k) {
        double c = 0.0;
        for (std::size_t i = 0; i < m.nv(); ++i) c += m.grid->weights[i] * S[k * m.nv() + i];
        worst = std::max(worst, std::abs(c));
      }
    }
    return Check{worst <= 1e-13, "max cell source mass " + num(worst)};
  });
  s.prop("recursion lemma on random instances", [&] {
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int bad = 0;
    double tight = 0.0;
    for (int inst = 0; inst < 100; ++inst) {
      const int L = 1 + inst % 4;
      const double a = 0.2 + 2.0 * u(rng);
      std::vector<std::vector<double>> b(L + 1, std::vector<double>(L + 1, 0.0));
      std::vector<double> h0(L + 1);
      for (int l = 0; l <= L; ++l) {
        h0[l] = u(rng);
        for (int k = 0; k < l; ++k) b[l][k] = 2.0 * u(rng);
      }
      const auto eq = verify_recursion_lemma(a, b, h0, 6.0, true);
      const auto sub = verify_recursion_lemma(a, b, h0, 6.0, false, opt.seed + inst);
      tight = std::max(tight, eq.max_equality_gap);
      if (!eq.ok || !sub.ok || eq.max_equality_gap > 1e-8) ++bad;
    }
    return Check{bad == 0, std::to_string(bad) + " of 100 failed; equality-case gap " + num(tight)};
  });
}

// ---------------------------------------------------------------- kl

void suite_kl(std::vector<PropertyResult>& out, const VerifyOptions& opt) {
  Suite s("kl", out);
  CovarianceKernel bm;
  const KLBasis full = nystrom_eig(bm, 512);
  const KLBasis b5 = truncate(full, 0.95);
  s.prop("brownian eigenvalues", [&] {
    double worst = 0.0;
    for (int k = 1; k <= 5; ++k) {
      const double want = 1.0 / ((k - 0.5) * (k - 0.5) * M_PI * M_PI);
      worst = std::max(worst, std::abs(full.lambda(k - 1) - want) / want);
    }
    return Check{worst <= 0.01, "max relative error " + num(worst)};
  });
  s.prop("brownian first eigenfunction", [&] {
    double worst = 0.0;
    for (Eigen::Index a = 0; a < full.t.size(); ++a)
      worst = std::max(worst, std::abs(full.psi(a, 0) - std::sqrt(2.0) * std::sin(M_PI * full.t(a) / 2.0)));
    return Check{worst <= 1e-2, "sup error " + num(worst)};
  });
  s.prop("eigenfunctions are weight-orthonormal", [&] {
    const Eigen::MatrixXd G = full.psi.leftCols(32).transpose() * full.w.asDiagonal() * full.psi.leftCols(32);
    const double e = (G - Eigen::MatrixXd::Identity(32, 32)).cwiseAbs().maxCoeff();
    return Check{e <= 1e-10, "max |G - I| = " + num(e)};
  });
  s.prop("energy truncation", [&] {
    return Check{b5.d == 5, "d = " + std::to_string(b5.d) + " at captured fraction " + num(b5.energy_fraction)};
  });
  s.prop("coefficient round trip", [&] {
    const auto ps = sample_paths(b5, 50, opt.seed);
    double worst = 0.0;
    for (int r = 0; r < 50; ++r) {
      const Eigen::VectorXd y = project_coeffs(ps.paths.row(r).transpose(), b5);
      worst = std::max(worst, (y - ps.coeffs.row(r).transpose()).cwiseAbs().maxCoeff());
    }
    return Check{worst <= 1e-10, "max coefficient error " + num(worst)};
  });
  s.prop("sampled coefficients are orthogonal", [&] {
    const auto r = verify_orthogonality(b5, 100000, opt.seed);
    return Check{r.ok() && r.max_offdiag <= 0.05, "max normalized off-diagonal " + num(r.max_offdiag) +
                                                       ", max diagonal z " + num(r.max_diag_z)};
  });
  s.prop("correlated coefficients are flagged", [&] {
    const auto ps = sample_paths(b5, 20000, opt.seed);
    Eigen::MatrixXd c = ps.coeffs;
    c.col(1) = 0.5 * c.col(1) + 0.5 * std::sqrt(b5.lambda(1) / b5.lambda(0)) * c.col(0);
    const auto r = gram_report(c, b5.lambda.head(5));
    return Check{!r.offdiag_ok, "max normalized off-diagonal " + num(r.max_offdiag)};
  });
  s.prop("Mercer partial sums converge monotonically", [&] {
    const auto r = mercer_check(bm, full, opt.seed);
    return Check{r.diag_monotone && r.errors.back() <= 1e-10 && r.diag_errors.back() <= 1e-10,
                 std::string("diagonal errors decreasing, off-diagonal ") +
                     (r.monotone ? "decreasing" : "not monotone at high order") + ", final error " +
                     num(r.errors.back())};
  });
  s.prop("exponential kernel spectrum", [&] {
    CovarianceKernel ek;
    ek.family = KernelFamily::Exponential;
    ek.length = 0.3;
    const auto b = nystrom_eig(ek, 128);
    bool ok = true;
    for (int i = 0; i < 20; ++i) ok = ok && b.lambda(i) > 0.0 && (i == 0 || b.lambda(i) <= b.lambda(i - 1));
    return Check{ok, "lambda_1 " + num(b.lambda(0)) + ", lambda_20 " + num(b.lambda(19))};
  });
}

using SuiteFn = void (*)(std::vector<PropertyResult>&, const VerifyOptions&);

const std::vector<std::pair<std::string, SuiteFn>>& table() {
  static const std::vector<std::pair<std::string, SuiteFn>> t = {
      {"collision", suite_collision}, {"bc", suite_bc},   {"poisson", suite_poisson}, {"solver", suite_solver},
      {"diagnostics", suite_diagnostics}, {"uq", suite_uq}, {"kl", suite_kl}};
  return t;
}

} // namespace

const std::vector<std::string>& verify_suites() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [name, fn] : table()) n.push_back(name);
    return n;
  }();
  return names;
}

std::vector<PropertyResult> run_verify(const std::string& selector, const VerifyOptions& opt) {
  std::vector<PropertyResult> out;
  bool found = false;
  for (const auto& [name, fn] : table())
    if (selector == "all" || selector == name) {
      fn(out, opt);
      found = true;
    }
  if (!found) throw InvalidConfig("unknown verify suite '" + selector + "'");
  return out;
}

nlohmann::json verify_report_json(const std::vector<PropertyResult>& results) {
  nlohmann::json j;
  nlohmann::json arr = nlohmann::json::array();
  int failed = 0;
  for (const auto& r : results) {
    arr.push_back({{"suite", r.suite}, {"name", r.name}, {"ok", r.ok}, {"detail", r.detail}, {"seconds", r.seconds}});
    if (!r.ok) ++failed;
  }
  j["properties"] = arr;
  j["total"] = results.size();
  j["failed"] = failed;
  j["ok"] = failed == 0;
  return j;
}

} // namespace hypo
