#include "hypo/uq_hierarchy.hpp"

#include "hypo/error.hpp"
#include "hypo/parallel.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace hypo {

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

std::vector<double> build_source(int l, const std::vector<CollisionKernel>& dz,
                                 const std::vector<std::vector<double>>& levels, const Model& m) {
  std::vector<double> S(m.size(), 0.0);
  if (l == 0) return S;
  if (static_cast<int>(dz.size()) < l) throw InvalidConfig("build_source needs z-derivative kernels up to order l");
  if (static_cast<int>(levels.size()) < l) throw InvalidConfig("build_source needs levels 0..l-1");
  const std::size_t nv = m.nv();
  std::vector<double> tmp(nv);
  for (int k = 0; k < l; ++k) {
    const double c = binomial(l, k);
    const CollisionKernel& Lz = dz[l - k - 1];
    for (int cell = 0; cell < m.mesh.nx; ++cell) {
      const std::span<const double> gk(levels[k].data() + cell * nv, nv);
      apply_L(Lz, gk, tmp);
      for (std::size_t i = 0; i < nv; ++i) S[cell * nv + i] += c * tmp[i];
    }
  }
  return S;
}

std::vector<std::vector<double>> initial_levels(const Model& m, const InitSpec& init, double z, int lmax) {
  const auto eq = equilibrium(m, 1.0);
  const auto p = perturbation(m, init.family, init.seed);
  std::vector<std::vector<double>> levels(lmax + 1, std::vector<double>(m.size(), 0.0));
  const double amp0 = init.amplitude * (1.0 + init.z_slope * z);
  for (std::size_t i = 0; i < eq.size(); ++i) levels[0][i] = eq[i] + amp0 * p[i];
  if (lmax >= 1)
    for (std::size_t i = 0; i < eq.size(); ++i) levels[1][i] = init.amplitude * init.z_slope * p[i];
  return levels;
}

namespace {

double norm_dnu_dx(const Model& m, std::span<const double> f) {
  const auto& g = *m.grid;
  const auto M = g.M();
  const std::size_t nv = g.size();
  double s = 0.0;
  for (int k = 0; k < m.mesh.nx; ++k)
    for (std::size_t i = 0; i < nv; ++i) s += g.weights[i] * f[k * nv + i] * f[k * nv + i] / M[i];
  return std::sqrt(s * m.mesh.dx);
}

double j_norm_dx(const Model& m, std::span<const double> f) {
  const auto& g = *m.grid;
  const std::size_t nv = g.size();
  double s = 0.0;
  for (int k = 0; k < m.mesh.nx; ++k) {
    double j = 0.0;
    for (std::size_t i = 0; i < nv; ++i) j += g.weights[i] * g.v1(i) * f[k * nv + i];
    s += j * j;
  }
  return std::sqrt(s * m.mesh.dx);
}

Eigen::MatrixXd block_generator(const CollisionKernel& L, const std::vector<CollisionKernel>& dz, int lmax) {
  const Eigen::Index nv = L.sigma.rows();
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero((lmax + 1) * nv, (lmax + 1) * nv);
  const Eigen::MatrixXd A = collision_matrix(L);
  for (int l = 0; l <= lmax; ++l) {
    G.block(l * nv, l * nv, nv, nv) = A;
    for (int k = 0; k < l; ++k) G.block(l * nv, k * nv, nv, nv) = binomial(l, k) * collision_matrix(dz[l - k - 1]);
  }
  return G;
}

void block_collision(const Model& m, const Eigen::MatrixXd& E, std::vector<std::vector<double>>& levels) {
  const auto& g = *m.grid;
  const auto M = g.M();
  const std::size_t nv = g.size();
  const std::size_t nl = levels.size();
  parallel_for(m.mesh.nx, [&](std::size_t k) {
    Eigen::VectorXd x(nl * nv);
    std::vector<double> before(nl, 0.0);
    for (std::size_t l = 0; l < nl; ++l)
      for (std::size_t i = 0; i < nv; ++i) {
        x(l * nv + i) = levels[l][k * nv + i];
        before[l] += g.weights[i] * levels[l][k * nv + i];
      }
    const Eigen::VectorXd y = E * x;
    for (std::size_t l = 0; l < nl; ++l) {
      double after = 0.0;
      for (std::size_t i = 0; i < nv; ++i) after += g.weights[i] * y(l * nv + i);
      const double fix = before[l] - after;
      for (std::size_t i = 0; i < nv; ++i) levels[l][k * nv + i] = y(l * nv + i) + fix * M[i];
    }
  });
}

Envelope fit_envelope(int level, const std::vector<double>& t, const std::vector<double>& y, double t0,
                      double transient) {
  Envelope e;
  e.level = level;
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] >= t0 && y[i] > 1e-14) idx.push_back(i);
  idx.erase(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(std::floor(transient * idx.size())));
  if (idx.size() < 3) return e;
  double st = 0, sy = 0;
  for (auto i : idx) {
    st += t[i];
    sy += std::log(y[i]) - level * std::log1p(t[i]);
  }
  const double n = static_cast<double>(idx.size());
  const double mt = st / n, my = sy / n;
  double stt = 0, sty = 0, syy = 0;
  for (auto i : idx) {
    const double a = t[i] - mt, b = std::log(y[i]) - level * std::log1p(t[i]) - my;
    stt += a * a;
    sty += a * b;
    syy += b * b;
  }
  e.a_fit = -sty / stt;
  e.c0 = my + e.a_fit * mt;
  e.r2 = syy > 0 ? sty * sty / (stt * syy) : 1.0;
  e.ok = e.a_fit > 0.0;
  return e;
}

} // namespace

HierarchyResult run_hierarchy(const Model& m, const CrossSectionSpec& spec, const HierarchyOptions& opt) {
  if (m.potential) throw InvalidConfig("the hierarchy runs without an external potential");
  if (opt.lmax < 0 || opt.lmax > 4) throw InvalidConfig("uq.lmax must be in [0, 4]");
  if (opt.every < 1) throw InvalidConfig("diagnostics.every must be at least 1");
  const int lmax = opt.lmax;
  const double z = m.kernel.z;
  Solver solver(m, opt.solver);
  const double dt = solver.dt();
  auto dz = lmax >= 1 ? assemble_dz_kernels(spec, m.grid, z, lmax) : std::vector<CollisionKernel>{};
  for (auto& k : dz) k.sign = m.kernel.sign;

  HierarchyResult out;
  out.z = z;
  out.dt = dt;
  out.ledger = populate_ledger(m, opt.seed);
  choose_eta(out.ledger, m.bc.c);
  for (const auto& k : dz) {
    out.dz_op_norm.push_back(k.op_norm);
    out.dz_CL.push_back(constant_CL(k));
  }
  double Ct = spec.c_tilde > 0.0 ? spec.c_tilde : 0.0;
  double CLz = out.ledger.C_L;
  for (std::size_t i = 0; i < dz.size(); ++i) {
    if (spec.c_tilde <= 0.0) Ct = std::max(Ct, out.dz_op_norm[i]);
    CLz = std::max(CLz, out.dz_CL[i]);
  }
  out.a_paper = out.ledger.omega / (2.0 * out.ledger.C_eta);
  out.b_paper.assign(lmax + 1, std::vector<double>(lmax + 1, 0.0));
  for (int l = 0; l <= lmax; ++l)
    for (int k = 0; k < l; ++k)
      out.b_paper[l][k] = binomial(l, k) * (Ct + out.ledger.C_p * CLz) / (2.0 * out.ledger.c_eta);

  Eigen::MatrixXd E;
  if (opt.solver.collision) E = (0.5 * dt * block_generator(m.kernel, dz, lmax)).exp();

  auto levels = initial_levels(m, opt.init, z, lmax);
  const double mass_eq = total_mass(m, levels[0]);
  const auto eq = equilibrium(m, mass_eq);
  std::vector<double> mass0(lmax + 1);
  for (int l = 0; l <= lmax; ++l) mass0[l] = total_mass(m, levels[l]);

  out.norms.assign(lmax + 1, {});
  out.masses.assign(lmax + 1, {});
  out.checks.assign(lmax + 1, {});
  std::vector<double> max_norm(lmax + 1, 0.0);
  std::vector<Snapshot> prev(lmax + 1);
  std::vector<double> prev_bound(lmax + 1, 0.0);
  std::vector<double> g(m.size());

  auto record = [&](double t, bool first) {
    out.t.push_back(t);
    std::vector<double> knorm(lmax + 1);
    for (int l = 0; l <= lmax; ++l) {
      if (l == 0)
        for (std::size_t i = 0; i < g.size(); ++i) g[i] = levels[0][i] - eq[i];
      else
        g = levels[l];
      knorm[l] = norm_dnu_dx(m, g);
      max_norm[l] = std::max(max_norm[l], knorm[l]);
      out.norms[l].push_back(knorm[l]);
      const double mass = total_mass(m, levels[l]);
      out.masses[l].push_back(mass);
      auto& ck = out.checks[l];
      ck.max_mass_drift = std::max(ck.max_mass_drift, std::abs(mass - mass0[l]));

      const auto S = build_source(l, dz, levels, m);
      const double Sn = norm_dnu_dx(m, S);
      double s_bound = 0.0, j_bound = 0.0;
      for (int k = 0; k < l; ++k) {
        const double gk = k == 0 ? norm_dnu_dx(m, levels[0]) : knorm[k];
        s_bound += binomial(l, k) * out.dz_op_norm[l - k - 1] * gk;
        j_bound += binomial(l, k) * out.dz_CL[l - k - 1] * gk;
      }
      ++ck.records;
      if (Sn > s_bound * (1.0 + 1e-12) + 1e-300) ++ck.source_fail;
      if (j_norm_dx(m, S) > j_bound * (1.0 + 1e-12) + 1e-300) ++ck.jsource_fail;

      Snapshot cur = take_snapshot(m, g, t, out.ledger.eta);
      const double src = Sn * knorm[l];
      if (!first) {
        const auto r = dissipation_breakdown(m, prev[l], cur, out.ledger, 0.5 * (src + prev_bound[l]));
        if (!r.t1_ok) ++ck.t1_fail;
      }
      prev[l] = std::move(cur);
      prev_bound[l] = src;
    }
  };

  record(0.0, true);
  const long n_steps = static_cast<long>(std::ceil(opt.solver.t_end / dt - 1e-9));
  double t = 0.0;
  for (long n = 1; n <= n_steps; ++n) {
    if (opt.solver.collision) block_collision(m, E, levels);
    if (opt.solver.transport)
      for (auto& lv : levels) solver.transport_step(lv, dt);
    if (opt.solver.collision) block_collision(m, E, levels);
    t = n * dt;
    for (const auto& lv : levels)
      if (!std::all_of(lv.begin(), lv.end(), [](double v) { return std::isfinite(v); }))
        throw NumericalFailure("non-finite hierarchy level");
    if (n % opt.every == 0 || n == n_steps) record(t, false);
  }
  for (int l = 0; l <= lmax; ++l) {
    const double scale = std::max({std::abs(mass0[l]), max_norm[l], 1e-300});
    out.checks[l].max_mass_drift /= scale;
    out.envelopes.push_back(fit_envelope(l, out.t, out.norms[l], opt.fit_t0, opt.transient));
  }
  out.levels = std::move(levels);
  return out;
}

FdResult fd_oracle(const Model& m, const CrossSectionSpec& spec, const HierarchyOptions& opt, double delta, int l) {
  if (l < 0 || l > 2) throw InvalidConfig("fd_oracle supports l in [0, 2]");
  if (l > 0 && !(delta >= 1e-3 && delta <= 1e-1)) throw InvalidConfig("uq.fd_delta must be in [1e-3, 1e-1]");
  static const std::vector<std::vector<double>> stencil = {{1.0}, {-0.5, 0.0, 0.5}, {1.0, -2.0, 1.0}};
  const double z = m.kernel.z;
  const double scale = std::pow(delta, -l);
  std::vector<Solver> solvers;
  std::vector<KineticState> states;
  SolverConfig cfg = opt.solver;
  cfg.mode = CollisionMode::Exponential;
  for (int j = -l; j <= l; ++j) {
    const double zj = z + j * delta;
    Model mj = m;
    if (j != 0) {
      mj.kernel = assemble_kernel(spec, m.grid, zj);
      mj.kernel.sign = m.kernel.sign;
    }
    solvers.emplace_back(mj, cfg);
    states.push_back({initial_levels(mj, opt.init, zj, 0)[0], 0.0});
  }
  const std::vector<double> eq = l == 0 ? equilibrium(m, total_mass(m, states[0].f)) : std::vector<double>(m.size(), 0.0);
  FdResult out;
  std::vector<double> comb(m.size());
  auto combine = [&]() {
    std::fill(comb.begin(), comb.end(), 0.0);
    for (std::size_t s = 0; s < states.size(); ++s) {
      const double c = stencil[l][s] * scale;
      if (c == 0.0) continue;
      for (std::size_t i = 0; i < comb.size(); ++i) comb[i] += c * states[s].f[i];
    }
  };
  auto record = [&](double t) {
    combine();
    std::vector<double> g(comb.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = comb[i] - eq[i];
    out.t.push_back(t);
    out.norms.push_back(norm_dnu_dx(m, g));
  };
  record(0.0);
  const double dt = solvers[0].dt();
  const long n_steps = static_cast<long>(std::ceil(opt.solver.t_end / dt - 1e-9));
  for (long n = 1; n <= n_steps; ++n) {
    for (std::size_t s = 0; s < states.size(); ++s) solvers[s].step(states[s]);
    if (n % opt.every == 0 || n == n_steps) record(n * dt);
  }
  combine();
  out.final_state = l == 0 ? states[0].f : comb;
  return out;
}

double RecursionBound::G(int l, double t) const {
  double s = 0.0;
  const auto& c = coeffs[l];
  for (std::size_t p = c.size(); p-- > 0;) s = s * t + c[p];
  return s;
}

RecursionBound recursion_G(double a, const std::vector<std::vector<double>>& b, const std::vector<double>& h0) {
  if (!(a > 0.0)) throw std::domain_error("recursion bound needs a > 0");
  for (double h : h0)
    if (h < 0.0) throw std::domain_error("recursion bound needs nonnegative initial values");
  const std::size_t L = h0.size();
  for (std::size_t l = 0; l < L; ++l)
    for (std::size_t k = 0; k < l; ++k)
      if (l >= b.size() || k >= b[l].size() || b[l][k] < 0.0)
        throw std::domain_error("recursion bound needs b[l][k] >= 0 for all k < l");
  RecursionBound r;
  r.a = a;
  r.b = b;
  r.h0 = h0;
  r.coeffs.resize(L);
  for (std::size_t l = 0; l < L; ++l) {
    std::vector<double> c(l + 1, 0.0);
    c[0] = h0[l];
    for (std::size_t k = 0; k < l; ++k)
      for (std::size_t p = 0; p < r.coeffs[k].size(); ++p) c[p + 1] += b[l][k] * r.coeffs[k][p] / (p + 1);
    r.coeffs[l] = std::move(c);
  }
  return r;
}

RecursionCheck verify_recursion_lemma(double a, const std::vector<std::vector<double>>& b,
                                      const std::vector<double>& h0, double t_end, bool equality,
                                      std::uint64_t seed) {
  const RecursionBound G = recursion_G(a, b, h0);
  const std::size_t L = h0.size();
  std::vector<double> damp(L, 0.0), theta(L, 1.0);
  if (!equality) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t l = 0; l < L; ++l) {
      damp[l] = a * u(rng);
      theta[l] = u(rng);
    }
  }
  auto rhs = [&](const std::vector<double>& h, std::vector<double>& d) {
    for (std::size_t l = 0; l < L; ++l) {
      double s = 0.0;
      for (std::size_t k = 0; k < l; ++k) s += b[l][k] * h[k];
      d[l] = -(a + damp[l]) * h[l] + theta[l] * s;
    }
  };
  const int checkpoints = 1000, sub = 20;
  const double dt = t_end / (checkpoints * sub);
  std::vector<double> h = h0, k1(L), k2(L), k3(L), k4(L), tmp(L);
  RecursionCheck rc;
  rc.ok = true;
  double t = 0.0;
  for (int c = 1; c <= checkpoints; ++c) {
    for (int s = 0; s < sub; ++s) {
      rhs(h, k1);
      for (std::size_t l = 0; l < L; ++l) tmp[l] = h[l] + 0.5 * dt * k1[l];
      rhs(tmp, k2);
      for (std::size_t l = 0; l < L; ++l) tmp[l] = h[l] + 0.5 * dt * k2[l];
      rhs(tmp, k3);
      for (std::size_t l = 0; l < L; ++l) tmp[l] = h[l] + dt * k3[l];
      rhs(tmp, k4);
      for (std::size_t l = 0; l < L; ++l) h[l] += dt / 6.0 * (k1[l] + 2 * k2[l] + 2 * k3[l] + k4[l]);
      t += dt;
    }
    for (std::size_t l = 0; l < L; ++l) {
      if (!std::isfinite(h[l])) throw NumericalFailure("recursion ODE integration diverged");
      const double bound = std::exp(-a * t) * G.G(static_cast<int>(l), t);
      if (bound > 0.0) {
        rc.max_ratio = std::max(rc.max_ratio, h[l] / bound);
        rc.max_equality_gap = std::max(rc.max_equality_gap, std::abs(h[l] - bound) / bound);
      }
      if (h[l] > bound * (1.0 + 1e-8) + 1e-300) rc.ok = false;
    }
  }
  return rc;
}

} // namespace hypo
