#include "hypo/config.hpp"
#include "hypo/error.hpp"
#include "hypo/io.hpp"
#include "hypo/verify.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>

using namespace hypo;

namespace {

enum Exit { kOk = 0, kChecksFailed = 1, kBadInput = 2, kIo = 3, kNumerical = 4 };

RunConfig resolve(const std::string& path, const std::vector<std::string>& overrides) {
  RunConfig cfg = path.empty() ? RunConfig{} : load_config(path);
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw InvalidConfig("--set expects key=value, got '" + kv + "'");
    set_key(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  const auto errs = validate(cfg);
  if (!errs.empty()) {
    std::string msg;
    for (const auto& e : errs) msg += (msg.empty() ? "" : "\n") + e;
    throw InvalidConfig(msg);
  }
  return cfg;
}

int cmd_run(const RunConfig& cfg, const std::string& scenario, const std::string& out) {
  preflight_dir(out);
  if (scenario == "uq") {
    const Model m = model_from(cfg, false, cfg.uq_z);
    const auto h = run_hierarchy(m, sigma_from(cfg), hierarchy_from(cfg));
    emit_uq_outputs(out, cfg, h, std::nullopt);
    std::printf("uq: %zu levels, dt %.6g, outputs in %s\n", h.levels.size(), h.dt, out.c_str());
    return kOk;
  }
  const bool pot = scenario == "potential";
  if (pot && (cfg.potential_family == "zero" || cfg.potential_amplitude == 0.0))
    throw InvalidConfig("scenario potential needs potential.family and a nonzero potential.amplitude");
  const Model m = model_from(cfg, pot);
  const auto r = run_scenario(m, run_options_from(cfg), init_from(cfg));
  emit_run_outputs(out, cfg, r, scenario);
  long fails = 0;
  for (long f : r.flag_failures) fails += f;
  std::printf("%s: %ld steps, dt %.6g, mass drift %.3g, tau_fit %s, tau_h %s, flag failures %ld\n", scenario.c_str(),
              r.steps, r.dt, r.max_mass_drift, r.fit_norm ? fmt(r.fit_norm->tau).c_str() : "n/a",
              r.oracle ? fmt(r.oracle->tau_h).c_str() : "n/a", fails);
  return kOk;
}

int cmd_uq(RunConfig cfg, const std::string& out, double fd_delta) {
  preflight_dir(out);
  const Model m = model_from(cfg, false, cfg.uq_z);
  const auto opt = hierarchy_from(cfg);
  const auto h = run_hierarchy(m, sigma_from(cfg), opt);
  std::optional<FdComparison> fd;
  if (fd_delta > 0.0 && cfg.uq_lmax >= 1) {
    FdComparison c;
    c.delta = fd_delta;
    c.level = std::min(cfg.uq_lmax, 2);
    const auto o = fd_oracle(m, sigma_from(cfg), opt, fd_delta, c.level);
    std::vector<double> d(m.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = h.levels[c.level][i] - o.final_state[i];
    c.rel_gap = std::sqrt(state_norm2(m, d) / state_norm2(m, o.final_state));
    fd = c;
    std::printf("level %d vs finite differences (delta %g): relative gap %.3e\n", c.level, fd_delta, c.rel_gap);
  }
  emit_uq_outputs(out, cfg, h, fd);
  for (const auto& e : h.envelopes) std::printf("level %d: a_fit %.4f, r2 %.4f\n", e.level, e.a_fit, e.r2);
  return kOk;
}

int cmd_kl(const RunConfig& cfg, const std::string& out) {
  preflight_dir(out);
  const auto full = nystrom_eig(kl_kernel_from(cfg), cfg.kl_n);
  const auto basis = truncate(full, cfg.kl_energy);
  const auto gram = verify_orthogonality(basis, cfg.kl_samples, cfg.seed);
  emit_kl_outputs(out, cfg, basis, gram);
  std::printf("kl: d = %d (energy %.4f), max normalized off-diagonal %.4f\n", basis.d, basis.energy_fraction,
              gram.max_offdiag);
  return gram.ok() ? kOk : kChecksFailed;
}

int cmd_gap(const RunConfig& cfg, bool potential) {
  const Model m = model_from(cfg, potential);
  const double lam = spectral_gap(m.kernel);
  const auto o = generator_oracle(m, solver_from(cfg));
  nlohmann::json j = {{"lambda_h", lam},
                      {"tau_h", o.tau_h},
                      {"slowest", {o.slowest.real(), o.slowest.imag()}},
                      {"unknowns", m.size()}};
  std::cout << j.dump(2) << "\n";
  return kOk;
}

int cmd_poisson(double Lx) {
  nlohmann::json j;
  std::vector<double> err;
  for (int nx : {32, 64, 128, 256}) {
    const auto mesh = make_mesh(nx, Lx);
    const double k = M_PI / Lx;
    std::vector<double> rho(nx);
    for (int i = 0; i < nx; ++i) rho[i] = k * k * std::cos(k * mesh.x(i));
    const auto phi = solve_poisson_neumann(rho, mesh);
    double e = 0.0;
    for (int i = 0; i < nx; ++i) e = std::max(e, std::abs(phi.phi[i] - std::cos(k * mesh.x(i))));
    err.push_back(e);
    j["levels"].push_back({{"nx", nx}, {"max_error", e}, {"residual", phi.residual}});
  }
  bool ok = true;
  for (std::size_t i = 1; i < err.size(); ++i) {
    const double r = err[i - 1] / err[i];
    j["ratios"].push_back(r);
    ok = ok && r >= 3.6 && r <= 4.4;
  }
  const double cp = poincare_constant(make_mesh(256, Lx));
  j["C_p_256"] = cp;
  j["Lx_over_pi"] = Lx / M_PI;
  ok = ok && std::abs(cp - Lx / M_PI) <= 1e-4;
  j["ok"] = ok;
  std::cout << j.dump(2) << "\n";
  return ok ? kOk : kChecksFailed;
}

int cmd_verify(const std::string& suite, const VerifyOptions& opt, const std::string& report) {
  const auto res = run_verify(suite, opt);
  int failed = 0;
  for (const auto& r : res) {
    std::printf("%-4s %-11s %-58s %s\n", r.ok ? "ok" : "FAIL", r.suite.c_str(), r.name.c_str(), r.detail.c_str());
    if (!r.ok) ++failed;
  }
  std::printf("%zu properties, %d failed\n", res.size(), failed);
  const auto j = verify_report_json(res);
  if (!report.empty()) write_atomic(report, j.dump(2) + "\n");
  return failed ? kChecksFailed : kOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linear kinetic relaxation solver with entropy diagnostics"};
  app.require_subcommand(1);

  std::string config, out, scenario = "base";
  std::vector<std::string> overrides;
  auto add_config = [&](CLI::App* sc) {
    sc->add_option("--config", config, "configuration file")->check(CLI::ExistingFile);
    sc->add_option("--set", overrides, "override one key, key=value");
  };

  auto* run = app.add_subcommand("run", "evolve a scenario and write steps.csv and summaries");
  add_config(run);
  run->add_option("--scenario", scenario)->check(CLI::IsMember({"base", "potential", "uq"}));
  run->add_option("--out", out, "output directory (default: output_dir from the config)");

  int lmax = -1;
  double z = std::nan(""), fd_delta = 0.0;
  auto* uq = app.add_subcommand("uq", "z-derivative hierarchy");
  add_config(uq);
  uq->add_option("--lmax", lmax)->check(CLI::Range(0, 4));
  uq->add_option("--z", z);
  uq->add_option("--fd-check", fd_delta, "compare with central differences of this step");
  uq->add_option("--out", out);

  std::string kernel;
  int kl_n = 0, samples = 0;
  double energy = 0.0;
  long long seed = -1;
  auto* kl = app.add_subcommand("kl", "Karhunen-Loeve basis and sampling check");
  add_config(kl);
  kl->add_option("--kernel", kernel)->check(CLI::IsMember({"brownian", "exponential"}));
  kl->add_option("--n", kl_n);
  kl->add_option("--energy", energy);
  kl->add_option("--samples", samples);
  kl->add_option("--seed", seed);
  kl->add_option("--out", out);

  bool gap_potential = false;
  auto* gap = app.add_subcommand("gap", "collisional gap and dense generator rate only");
  add_config(gap);
  gap->add_flag("--potential", gap_potential, "include the configured potential");

  double Lx = 1.0;
  auto* pc = app.add_subcommand("poisson-check", "manufactured-solution convergence and Poincare constant");
  pc->add_option("--Lx", Lx)->check(CLI::PositiveNumber);

  std::string suite = "all", report;
  VerifyOptions vopt;
  auto* ver = app.add_subcommand("verify", "property suites: all, " + [] {
    std::string s;
    for (const auto& n : verify_suites()) s += (s.empty() ? "" : ", ") + n;
    return s;
  }());
  ver->add_option("suite", suite);
  ver->add_flag("--flip-sign", vopt.flip_collision_sign, "negative control: replace L by -L");
  ver->add_option("--seed", vopt.seed);
  ver->add_option("--report", report, "write the JSON report here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto cfg = resolve(config, overrides);
      return cmd_run(cfg, scenario, out.empty() ? cfg.output_dir : out);
    }
    if (*uq) {
      if (lmax >= 0) overrides.push_back("uq.lmax=" + std::to_string(lmax));
      if (!std::isnan(z)) overrides.push_back("uq.z=" + fmt(z));
      if (fd_delta > 0.0) overrides.push_back("uq.fd_delta=" + fmt(fd_delta));
      const auto cfg = resolve(config, overrides);
      return cmd_uq(cfg, out.empty() ? cfg.output_dir : out, fd_delta);
    }
    if (*kl) {
      if (!kernel.empty()) overrides.push_back("kl.kernel=" + kernel);
      if (kl_n > 0) overrides.push_back("kl.n=" + std::to_string(kl_n));
      if (energy > 0.0) overrides.push_back("kl.energy=" + fmt(energy));
      if (samples > 0) overrides.push_back("kl.samples=" + std::to_string(samples));
      if (seed >= 0) overrides.push_back("seed=" + std::to_string(seed));
      const auto cfg = resolve(config, overrides);
      return cmd_kl(cfg, out.empty() ? cfg.output_dir : out);
    }
    if (*gap) return cmd_gap(resolve(config, overrides), gap_potential);
    if (*pc) return cmd_poisson(Lx);
    if (*ver) return cmd_verify(suite, vopt, report);
  } catch (const InvalidConfig& e) {
    const std::string what = e.what();
    std::cerr << (what.rfind("invalid configuration", 0) == 0 ? "" : "invalid configuration: ") << what << "\n";
    return kBadInput;
  } catch (const AssumptionViolation& e) {
    std::cerr << "assumption violated: " << e.what() << "\n";
    return kBadInput;
  } catch (const CompatibilityError& e) {
    std::cerr << "incompatible data: " << e.what() << "\n";
    return kBadInput;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  }
  return kOk;
}
