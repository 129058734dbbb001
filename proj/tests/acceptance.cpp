// Acceptance criteria 1-9. One PASS/FAIL line each; exit status counts failures.

#include "hypo/config.hpp"
#include "hypo/io.hpp"
#include "hypo/parallel.hpp"
#include "hypo/verify.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include <unistd.h>

using namespace hypo;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok = false;
  std::string detail;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

RunConfig base(int nx, int n, double c) {
  RunConfig cfg;
  cfg.mesh_nx = nx;
  cfg.velocity_n = n;
  cfg.bc_c = c;
  return cfg;
}

long total_failures(const RunResult& r, bool skip_t1 = false) {
  long s = 0;
  for (std::size_t i = 0; i < kFlagNames.size(); ++i)
    if (!(skip_t1 && std::string(kFlagNames[i]) == "t1")) s += r.flag_failures[i];
  return s;
}

std::string flag_summary(const RunResult& r) {
  std::string s;
  for (std::size_t i = 0; i < kFlagNames.size(); ++i)
    if (r.flag_failures[i]) s += std::string(kFlagNames[i]) + "=" + std::to_string(r.flag_failures[i]) + " ";
  return s.empty() ? "none" : s;
}

Outcome criterion1() {
  double drift = 0.0, flux = 0.0;
  for (double c : {0.0, 0.5, 1.0}) {
    const auto cfg = base(32, 32, c);
    const Model m = model_from(cfg, false);
    Solver s(m, solver_from(cfg));
    KineticState st{initial_state(m, init_from(cfg)), 0.0};
    const double m0 = total_mass(m, st.f);
    for (int n = 0; n < 10000; ++n) {
      s.step(st);
      const double fn = std::sqrt(state_norm2(m, st.f));
      flux = std::max({flux, std::abs(s.wall_flux(st.f, Wall::Left)) / fn, std::abs(s.wall_flux(st.f, Wall::Right)) / fn});
      drift = std::max(drift, std::abs(total_mass(m, st.f) - m0) / m0);
    }
  }
  return {drift <= 1e-10 && flux <= 1e-12,
          "max relative mass drift " + num(drift) + ", max wall flux / ||f|| " + num(flux) + " over 3 x 10^4 steps"};
}

Outcome criterion2() {
  const auto res = run_verify("collision", VerifyOptions{});
  bool ok = true;
  std::string bad;
  for (const auto& r : res)
    if (!r.ok) {
      ok = false;
      bad += r.name + "; ";
    }
  return {ok, ok ? std::to_string(res.size()) + " collision properties hold" : "failed: " + bad};
}

const RunResult& base_run() {
  static const RunResult r = [] {
    const auto cfg = base(16, 16, 0.5);
    return run_scenario(model_from(cfg, false), run_options_from(cfg), init_from(cfg));
  }();
  return r;
}

Outcome criterion3() {
  const auto& r = base_run();
  if (!r.fit_norm || !r.fit_H || !r.oracle) return {false, "fit or oracle missing: " + r.fit_notice};
  const double rel = std::abs(r.fit_norm->tau - r.oracle->tau_h) / r.oracle->tau_h;
  const double hrel = std::abs(r.fit_H->tau - r.fit_norm->tau) / r.fit_norm->tau;
  const bool ok = rel <= 0.05 && hrel <= 0.02 && r.monotone_violations == 0;
  return {ok, "tau_fit " + num(r.fit_norm->tau) + " vs tau_h " + num(r.oracle->tau_h) + " (" + num(100 * rel) +
                  "%), H-rate gap " + num(100 * hrel) + "%, monotonicity violations " +
                  std::to_string(r.monotone_violations)};
}

Outcome criterion4() {
  const auto& r = base_run();
  auto cfg = base(12, 8, 0.3);
  cfg.velocity_dim = 2;
  cfg.solver_t_end = 4.0;
  cfg.diagnostics_fit_t0 = 0.5;
  cfg.diagnostics_fit_t1 = 4.0;
  auto opt = run_options_from(cfg);
  opt.oracle = false;
  const auto r2 = run_scenario(model_from(cfg, false), opt, init_from(cfg));
  const bool ok = total_failures(r) == 0 && total_failures(r2) == 0 && r.records.size() > 10;
  return {ok, "dim 1: " + std::to_string(r.records.size()) + " records, failures " + flag_summary(r) + "; dim 2: " +
                  std::to_string(r2.records.size()) + " records, failures " + flag_summary(r2) + ", eta " +
                  num(r.ledger.eta) + ", omega " + num(r.ledger.omega)};
}

Outcome criterion5() {
  auto pot = [](int nx, int n) {
    auto cfg = base(nx, n, 0.5);
    cfg.potential_family = "cosine";
    cfg.potential_amplitude = 0.5;
    return cfg;
  };
  std::vector<double> res;
  for (int r : {1, 2, 4}) {
    const auto cfg = pot(16 * r, 16 * r);
    const Model m = model_from(cfg, true);
    Solver s(m, solver_from(cfg));
    auto f = equilibrium(m, 1.0);
    const auto f0 = f;
    s.advance(f);
    std::vector<double> d(f.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = (f[i] - f0[i]) / s.dt();
    res.push_back(std::sqrt(state_norm2(m, d) / state_norm2(m, f0)));
  }
  const double o1 = std::log2(res[0] / res[1]), o2 = std::log2(res[1] / res[2]);

  const auto cfg = pot(16, 16);
  const auto r = run_scenario(model_from(cfg, true), run_options_from(cfg), init_from(cfg));
  const long t3 = r.flag_failures[1];
  double rel = 1.0;
  if (r.fit_norm && r.oracle) rel = std::abs(r.fit_norm->tau - r.oracle->tau_h) / r.oracle->tau_h;
  const bool ok = o1 >= 0.8 && o2 >= 0.8 && t3 == 0 && r.fit_norm && r.fit_norm->tau > 0.0 && rel <= 0.10;
  return {ok, "residual orders " + num(o1) + ", " + num(o2) + "; T3+T6 failures " + std::to_string(t3) + "; tau_fit " +
                  (r.fit_norm ? num(r.fit_norm->tau) : "n/a") + " vs tau_h " + (r.oracle ? num(r.oracle->tau_h) : "n/a") +
                  " (" + num(100 * rel) + "%); T1 records above bound (reported only): " +
                  std::to_string(r.flag_failures[2])};
}

Outcome criterion6() {
  auto cfg = base(16, 16, 0.5);
  cfg.sigma_z_coupling = "affine";
  cfg.sigma_z_coeff = 0.3;
  cfg.init_z_slope = 1.0;
  cfg.uq_lmax = 1;
  cfg.solver_t_end = 1.0;
  const Model m = model_from(cfg, false);
  const auto h = hierarchy_from(cfg);
  const auto hr = run_hierarchy(m, sigma_from(cfg), h);
  const auto fd = fd_oracle(m, sigma_from(cfg), h, 1e-2, 1);
  std::vector<double> d(m.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = hr.levels[1][i] - fd.final_state[i];
  const double gap = std::sqrt(state_norm2(m, d) / state_norm2(m, fd.final_state));

  auto flat = base(16, 16, 0.5);
  flat.uq_lmax = 2;
  const auto hz = run_hierarchy(model_from(flat, false), sigma_from(flat), hierarchy_from(flat));
  double zero = 0.0;
  for (std::size_t l = 1; l < hz.norms.size(); ++l)
    for (double v : hz.norms[l]) zero = std::max(zero, v);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int lemma_bad = 0;
  for (int inst = 0; inst < 100; ++inst) {
    const int L = 1 + inst % 4;
    const double a = 0.1 + 2.0 * u(rng);
    std::vector<std::vector<double>> b(L + 1, std::vector<double>(L + 1, 0.0));
    std::vector<double> h0(L + 1);
    for (int l = 0; l <= L; ++l) {
      h0[l] = u(rng);
      for (int k = 0; k < l; ++k) b[l][k] = 2.0 * u(rng);
    }
    const auto eq = verify_recursion_lemma(a, b, h0, 6.0, true);
    const auto damped = verify_recursion_lemma(a, b, h0, 6.0, false, 1000 + inst);
    if (!eq.ok || !damped.ok || eq.max_equality_gap > 1e-8) ++lemma_bad;
  }

  auto env = cfg;
  env.uq_lmax = 2;
  env.solver_t_end = 8.0;
  const auto he = run_hierarchy(model_from(env, false), sigma_from(env), hierarchy_from(env));
  bool env_ok = true;
  std::string rates;
  for (const auto& e : he.envelopes) {
    env_ok = env_ok && e.ok && e.a_fit > 0.0;
    rates += num(e.a_fit) + " ";
  }
  const bool ok = gap <= 1e-3 && zero <= 1e-13 && lemma_bad == 0 && env_ok;
  return {ok, "level-1 FD gap " + num(gap) + ", zero levels max " + num(zero) + ", recursion failures " +
                  std::to_string(lemma_bad) + "/100, envelope rates " + rates};
}

Outcome criterion7() {
  const auto full = nystrom_eig(CovarianceKernel{}, 512);
  double ev = 0.0;
  for (int k = 1; k <= 5; ++k) {
    const double want = 1.0 / ((k - 0.5) * (k - 0.5) * M_PI * M_PI);
    ev = std::max(ev, std::abs(full.lambda(k - 1) - want) / want);
  }
  double psi = 0.0;
  for (Eigen::Index a = 0; a < full.t.size(); ++a)
    psi = std::max(psi, std::abs(full.psi(a, 0) - std::sqrt(2.0) * std::sin(M_PI * full.t(a) / 2.0)));
  const auto b = truncate(full, 0.95);
  const auto gram = verify_orthogonality(b, 100000, 7);
  const auto ps = sample_paths(b, 200, 7);
  double rt = 0.0;
  for (int r = 0; r < 200; ++r)
    rt = std::max(rt, (project_coeffs(ps.paths.row(r).transpose(), b) - ps.coeffs.row(r).transpose()).cwiseAbs().maxCoeff());
  const bool ok = ev <= 0.01 && psi <= 1e-2 && gram.max_offdiag <= 0.05 && rt <= 1e-10;
  return {ok, "eigenvalue error " + num(ev) + ", psi_1 sup error " + num(psi) + ", d = " + std::to_string(b.d) +
                  ", Gram off-diagonal " + num(gram.max_offdiag) + ", round trip " + num(rt)};
}

Outcome criterion8() {
  std::vector<double> err;
  for (int nx : {32, 64, 128, 256}) {
    const auto mesh = make_mesh(nx, 1.0);
    std::vector<double> rho(nx);
    for (int i = 0; i < nx; ++i) rho[i] = std::cos(M_PI * mesh.x(i));
    const auto phi = solve_poisson_neumann(rho, mesh);
    double e = 0.0;
    for (int i = 0; i < nx; ++i) e = std::max(e, std::abs(phi.phi[i] - std::cos(M_PI * mesh.x(i)) / (M_PI * M_PI)));
    err.push_back(e);
  }
  bool ok = true;
  std::string ratios;
  for (std::size_t i = 1; i < err.size(); ++i) {
    const double r = err[i - 1] / err[i];
    ok = ok && r >= 3.6 && r <= 4.4;
    ratios += num(r) + " ";
  }
  const double cp = poincare_constant(make_mesh(256, 1.0));
  ok = ok && std::abs(cp - 1.0 / M_PI) <= 1e-4;
  return {ok, "error ratios " + ratios + "; C_p(256) - 1/pi = " + num(cp - 1.0 / M_PI)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome criterion9() {
  const auto root = fs::temp_directory_path() / ("hypo_accept_" + std::to_string(::getpid()));
  fs::remove_all(root);
  auto cfg = base(16, 16, 0.5);
  cfg.init_family = "random";
  cfg.sigma_z_coupling = "affine";
  cfg.sigma_z_coeff = 0.3;
  cfg.init_z_slope = 1.0;
  cfg.kl_n = 128;
  cfg.kl_samples = 20000;
  auto produce = [&](const std::string& tag, int workers) {
    set_worker_count(workers);
    const auto dir = root / tag;
    preflight_dir(dir.string());
    const auto r = run_scenario(model_from(cfg, false), run_options_from(cfg), init_from(cfg));
    emit_run_outputs((dir / "run").string(), cfg, r, "base");
    const auto h = run_hierarchy(model_from(cfg, false), sigma_from(cfg), hierarchy_from(cfg));
    emit_uq_outputs((dir / "uq").string(), cfg, h, std::nullopt);
    const auto b = truncate(nystrom_eig(kl_kernel_from(cfg), cfg.kl_n), cfg.kl_energy);
    emit_kl_outputs((dir / "kl").string(), cfg, b, verify_orthogonality(b, cfg.kl_samples, cfg.seed));
    return dir;
  };
  const auto a = produce("a", 1), b = produce("b", 1), c = produce("c", 4);
  set_worker_count(1);
  int compared = 0, differ = 0;
  for (const char* f : {"run/steps.csv", "run/plot.dat", "uq/levels.csv", "kl/eigenvalues.csv", "kl/eigenfunctions.csv"}) {
    const auto x = slurp(a / f);
    if (x.empty()) ++differ;
    if (x != slurp(b / f)) ++differ;
    if (x != slurp(c / f)) ++differ;
    compared += 2;
  }
  fs::remove_all(root);
  return {differ == 0, std::to_string(compared) + " file comparisons (repeat run, 1 vs 4 workers), " +
                           std::to_string(differ) + " differ"};
}

} // namespace

int main() {
  const std::vector<std::pair<double, std::function<Outcome()>>> criteria = {
      {120.0, criterion1}, {60.0, criterion2},  {180.0, criterion3}, {180.0, criterion4}, {240.0, criterion5},
      {300.0, criterion6}, {60.0, criterion7},  {60.0, criterion8},  {300.0, criterion9}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (sec > criteria[i].first) {
      o.ok = false;
      o.detail += "; runtime over budget";
    }
    std::printf("criterion %zu: %s  %s [%.1f s]\n", i + 1, o.ok ? "PASS" : "FAIL", o.detail.c_str(), sec);
    std::fflush(stdout);
    if (!o.ok) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
