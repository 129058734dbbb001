#include "hypo/runner.hpp"

#include "hypo/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace hypo {

InitFamily parse_init_family(const std::string& s) {
  if (s == "cosine") return InitFamily::Cosine;
  if (s == "equilibrium") return InitFamily::Equilibrium;
  if (s == "random") return InitFamily::Random;
  throw InvalidConfig("init.family must be cosine, equilibrium or random, got '" + s + "'");
}

std::string to_string(InitFamily f) {
  switch (f) {
    case InitFamily::Cosine: return "cosine";
    case InitFamily::Equilibrium: return "equilibrium";
    case InitFamily::Random: return "random";
  }
  return "?";
}

std::vector<double> perturbation(const Model& m, InitFamily family, std::uint64_t seed) {
  const auto& g = *m.grid;
  const auto M = g.M();
  const std::size_t nv = g.size();
  const int nx = m.mesh.nx;
  std::vector<double> p(m.size(), 0.0);
  if (family == InitFamily::Equilibrium) return p;
  if (family == InitFamily::Cosine) {
    for (int k = 0; k < nx; ++k) {
      const double a = M_PI * m.mesh.x(k) / m.mesh.Lx;
      for (std::size_t i = 0; i < nv; ++i)
        p[k * nv + i] = std::cos(a) * M[i] + 0.5 * g.v1(i) * M[i] * std::sin(a);
    }
  } else {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    // velocity shapes: M, v1 M, (v1^2 - 1) M, v2 M
    double coef[4][4];
    for (auto& row : coef)
      for (double& c : row) c = nd(rng);
    for (int k = 0; k < nx; ++k) {
      double amp[4] = {0, 0, 0, 0};
      for (int mode = 0; mode < 4; ++mode)
        for (int s = 0; s < 4; ++s)
          amp[s] += coef[mode][s] * std::cos((mode + 1) * M_PI * m.mesh.x(k) / m.mesh.Lx) / (mode + 1);
      for (std::size_t i = 0; i < nv; ++i) {
        const double v1 = g.v1(i), v2 = g.nodes[i][1];
        p[k * nv + i] = M[i] * (amp[0] + amp[1] * v1 + amp[2] * (v1 * v1 - 1.0) + (g.dim == 2 ? amp[3] * v2 : 0.0));
      }
    }
  }
  // remove the total mass so the equilibrium keeps unit mass
  double mass = total_mass(m, p);
  double base = 0.0;
  for (int k = 0; k < nx; ++k) base += m.eq_profile(k) * m.mesh.dx;
  for (int k = 0; k < nx; ++k)
    for (std::size_t i = 0; i < nv; ++i) p[k * nv + i] -= mass / base * m.eq_profile(k) * M[i];
  return p;
}

std::vector<double> initial_state(const Model& m, const InitSpec& init) {
  auto f = equilibrium(m, 1.0);
  const auto p = perturbation(m, init.family, init.seed);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] += init.amplitude * p[i];
  return f;
}

OracleResult generator_oracle(const Model& m, const SolverConfig& cfg) {
  Solver s(m, cfg);
  return decay_rate_oracle(s.dense_generator(), global_mass_deflation(m));
}

namespace {

void count_flags(const EntropyReport& r, std::array<long, 8>& fails) {
  const bool ok[8] = {r.equiv_ok, r.t3_ok, r.t1_ok, r.t2n_ok, r.t2b_ok, r.t4_ok, r.t5_ok, r.gronwall_ok};
  for (int i = 0; i < 8; ++i)
    if (!ok[i]) ++fails[i];
}

double dist2_to(const Model& m, const std::vector<double>& f, const std::vector<double>& eq, std::vector<double>& g) {
  for (std::size_t i = 0; i < f.size(); ++i) g[i] = f[i] - eq[i];
  return state_norm2(m, g);
}

} // namespace

RunResult run_scenario(const Model& m, const RunOptions& opt, const InitSpec& init) {
  if (opt.every < 1) throw InvalidConfig("diagnostics.every must be at least 1");
  if (!(opt.solver.t_end > 0.0)) throw InvalidConfig("solver.t_end must be positive");
  Solver solver(m, opt.solver);
  RunResult out;
  out.dt = solver.dt();
  out.ledger = populate_ledger(m, opt.seed);
  choose_eta(out.ledger, m.bc.c);

  KineticState st{initial_state(m, init), 0.0};
  out.mass0 = total_mass(m, st.f);
  if (m.potential && m.size() <= opt.oracle_max) {
    out.equilibrium = discrete_equilibrium(solver, out.mass0);
    out.discrete_equilibrium = true;
  } else {
    out.equilibrium = equilibrium(m, out.mass0);
    out.discrete_equilibrium = !m.potential.has_value();
  }
  if (opt.oracle && m.size() <= opt.oracle_max) out.oracle = generator_oracle(m, opt.solver);

  const long n_steps = static_cast<long>(std::ceil(opt.solver.t_end / out.dt - 1e-9));
  out.steps = n_steps;
  std::vector<double> g(m.size());
  double d2_prev = dist2_to(m, st.f, out.equilibrium, g);
  Snapshot prev = take_snapshot(m, g, 0.0, out.ledger.eta);
  {
    Record rec;
    rec.r = static_report(m, prev, out.ledger);
    rec.r.mass = out.mass0;
    rec.dist = std::sqrt(prev.norm2);
    count_flags(rec.r, out.flag_failures);
    out.records.push_back(rec);
  }

  for (long n = 1; n <= n_steps; ++n) {
    solver.step(st);
    const double mass = total_mass(m, st.f);
    out.max_mass_drift = std::max(out.max_mass_drift, std::abs(mass - out.mass0) / std::abs(out.mass0));
    const double fn = std::sqrt(state_norm2(m, st.f));
    const double flux =
        std::max(std::abs(solver.wall_flux(st.f, Wall::Left)), std::abs(solver.wall_flux(st.f, Wall::Right)));
    out.max_wall_flux = std::max(out.max_wall_flux, flux / std::max(fn, 1e-300));
    const double d2 = dist2_to(m, st.f, out.equilibrium, g);
    if (d2_prev > 0.0) {
      const double excess = (d2 - d2_prev) / d2_prev;
      out.max_monotone_excess = std::max(out.max_monotone_excess, excess);
      if (excess > 1e-8) ++out.monotone_violations;
    }
    d2_prev = d2;
    if (n % opt.every != 0 && n != n_steps) continue;
    Snapshot cur = take_snapshot(m, g, st.t, out.ledger.eta);
    Record rec;
    rec.step = n;
    rec.r = dissipation_breakdown(m, prev, cur, out.ledger);
    rec.r.mass = mass;
    rec.dist = std::sqrt(cur.norm2);
    count_flags(rec.r, out.flag_failures);
    out.records.push_back(rec);
    prev = std::move(cur);
  }

  std::vector<double> t, y, h;
  for (const auto& rec : out.records) {
    t.push_back(rec.r.t);
    y.push_back(rec.dist);
    h.push_back(std::sqrt(std::max(rec.r.H, 0.0)));
  }
  try {
    out.fit_norm = fit_decay(t, y, opt.fit_t0, opt.fit_t1, opt.transient);
    out.fit_H = fit_decay(t, h, opt.fit_t0, opt.fit_t1, opt.transient);
    if (out.fit_norm->truncated) out.fit_notice = "fit window truncated where the norm fell below 1e-14";
  } catch (const InvalidConfig& e) {
    out.fit_notice = e.what();
  }
  if (opt.keep_final_state) out.final_state = st.f;
  return out;
}

} // namespace hypo
