#include "hypo/hypo_diagnostics.hpp"

#include "hypo/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace hypo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct ProbeRatios {
  double K = 0.0;
  double D_gamma = 0.0;
};

// Random smooth zero-mean densities; ratios of discrete H^2 and trace norms.
ProbeRatios probe_constants(const SlabMesh& mesh, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  const int nx = mesh.nx;
  ProbeRatios out;
  std::vector<double> rho(nx);
  for (int p = 0; p < 64; ++p) {
    std::fill(rho.begin(), rho.end(), 0.0);
    for (int mode = 1; mode < nx; ++mode) {
      const double a = nd(rng) / (mode * mode);
      for (int k = 0; k < nx; ++k) rho[k] += a * std::cos(mode * M_PI * mesh.x(k) / mesh.Lx);
    }
    double mean = 0.0;
    for (double r : rho) mean += r;
    mean /= nx;
    for (double& r : rho) r -= mean;
    const double rn = std::sqrt(cell_norm2(rho, mesh));
    if (rn == 0.0) continue;
    const PhiField phi = solve_poisson_neumann(rho, mesh);
    std::vector<double> d2(nx);
    for (int k = 0; k < nx; ++k) d2[k] = (phi.dphi[k + 1] - phi.dphi[k]) / mesh.dx;
    const double p0 = cell_norm2(phi.phi, mesh);
    const double p1 = face_norm2(phi.dphi, mesh);
    const double p2 = cell_norm2(d2, mesh);
    out.K = std::max(out.K, std::sqrt(p0 + p1 + p2) / rn);
    const auto gc = cell_average(phi.dphi);
    const double trace = std::sqrt(gc.front() * gc.front() + gc.back() * gc.back());
    out.D_gamma = std::max(out.D_gamma, trace / std::sqrt(p1 + p2));
  }
  return out;
}

std::vector<double> face_weights(const Model& m) {
  std::vector<double> w(m.mesh.nx + 1, 1.0);
  if (m.potential)
    for (int f = 0; f <= m.mesh.nx; ++f) w[f] = std::exp(-m.potential->V_face[f]);
  return w;
}

bool le(double a, double b, double slack) { return a <= b + slack; }

} // namespace

ConstantsLedger populate_ledger(const Model& m, std::uint64_t seed) {
  const auto& g = *m.grid;
  ConstantsLedger L;
  L.lambda = m.kernel.lambda_floor;
  L.lambda_h = spectral_gap(m.kernel);
  L.C_L = constant_CL(m.kernel);
  L.C_p = poincare_constant(m.mesh);
  L.D = moment_constant_D(g);
  L.kappa = moment_constant_kappa(g);
  L.C_j = std::sqrt(static_cast<double>(g.dim)) * L.kappa;
  L.moment_defect = std::abs(g.maxwellian.second_moment_defect[0][0]);
  const auto pr = probe_constants(m.mesh, seed);
  L.K = pr.K;
  L.D_gamma = pr.D_gamma;
  if (g.dim == 2) {
    const auto M = g.M();
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
      if (g.v1(i) > 0.0) s += g.weights[i] * g.nodes[i][1] * g.nodes[i][1] * g.v1(i) * M[i];
    L.C_gamma = std::sqrt(s);
  }
  if (m.potential) {
    L.potential = true;
    L.c_V = m.potential->c_V;
    L.C_V = m.potential->C_V;
    L.D_V = m.potential->D_V;
    L.C_tilde_V = L.C_V / L.c_V;
  }
  L.c = m.bc.c;
  return L;
}

void choose_eta(ConstantsLedger& L, double c) {
  const double vals[] = {L.lambda, L.C_L, L.C_p, L.D, L.K, L.D_gamma, L.C_gamma, L.C_j, L.C_tilde_V, L.D_V};
  for (double v : vals)
    if (!std::isfinite(v)) throw InvalidConfig("ledger has non-finite entries; cannot choose eta");
  if (!(L.lambda > 0.0)) throw InvalidConfig("ledger lambda must be positive to choose eta");
  L.c = c;
  const double Ct = L.C_tilde_V;
  const double t2 = L.potential ? 2.0 : 1.0;
  const double bnd = (1.0 - c) * L.C_gamma * L.D_gamma * L.K * Ct;
  const double rho_coef = L.K * L.K * (1.0 + L.D_V) * Ct + 2.0 * bnd + L.C_L * L.C_p * Ct;
  L.eta_tilde = 0.5 / rho_coef;
  const double et = L.eta_tilde;

  L.eta_bound[0] = L.lambda / (t2 * L.D * L.D * Ct / (4.0 * et) + L.C_L * L.C_p * Ct / (4.0 * et) + L.C_j * L.C_j * Ct);
  const double tang = L.C_gamma * L.D_gamma * L.K * Ct;
  L.eta_bound[1] = tang > 0.0 && c < 1.0 ? et * (1.0 + c) / tang : kInf;
  const double sq3 = std::max(std::sqrt(3.0), L.C_j);
  L.eta_bound[2] = 1.0 / (2.0 * sq3 * L.C_p * Ct);
  L.eta_binding = static_cast<int>(std::min_element(L.eta_bound, L.eta_bound + 3) - L.eta_bound);
  L.eta = 0.5 * L.eta_bound[L.eta_binding];

  const double eta = L.eta;
  L.c_eta = 0.5 - sq3 * eta * L.C_p * Ct;
  L.C_eta = 0.5 + sq3 * eta * L.C_p * Ct;
  L.alpha = -L.lambda + eta * (t2 * L.D * L.D * Ct / (4.0 * et) + L.C_L * L.C_p * Ct / (4.0 * et) + L.C_j * L.C_j * Ct);
  L.beta = eta * (et * rho_coef - 1.0);
  L.delta = -0.5 * (1.0 - c * c) + eta * bnd / (2.0 * et);
  L.omega = -std::max(L.alpha, L.beta);
}

Snapshot take_snapshot(const Model& m, std::span<const double> gs, double t, double eta) {
  const auto& g = *m.grid;
  const auto M = g.M();
  const std::size_t nv = g.size();
  const int nx = m.mesh.nx;
  const double dx = m.mesh.dx;
  Snapshot s;
  s.t = t;
  s.rho.resize(nx);
  s.j1.resize(nx);
  s.S11.resize(nx);
  s.jL1.resize(nx);
  double mean = 0.0;
  for (int k = 0; k < nx; ++k) {
    const auto fk = gs.subspan(k * nv, nv);
    double r = 0.0, j = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < nv; ++i) {
      const double wf = g.weights[i] * fk[i];
      r += wf;
      j += wf * g.v1(i);
      s2 += wf * g.v1(i) * g.v1(i);
    }
    s.rho[k] = r;
    s.j1[k] = j;
    s.S11[k] = s2 - r;
    s.jL1[k] = j_L(m.kernel, fk)[0];
    double perp = 0.0;
    for (std::size_t i = 0; i < nv; ++i) {
      const double d = fk[i] - r * M[i];
      perp += g.weights[i] * d * d / M[i];
    }
    s.perp2 += m.cell_weight(k) * perp * dx;
    s.perp2_dx += perp * dx;
    mean += r;
  }
  mean /= nx;
  for (double& r : s.rho) r -= mean;
  for (int k = 0; k < nx; ++k) {
    s.rho2 += m.cell_weight(k) * s.rho[k] * s.rho[k] * dx;
    s.rho2_dx += s.rho[k] * s.rho[k] * dx;
    s.j2_dx += s.j1[k] * s.j1[k] * dx;
  }
  s.norm2 = state_norm2(m, gs);
  s.phi = solve_poisson_neumann(s.rho, m.mesh);
  s.dphi_cell = cell_average(s.phi.dphi);
  double pair = 0.0;
  for (int k = 0; k < nx; ++k) pair += m.cell_weight(k) * s.j1[k] * s.dphi_cell[k] * dx;
  s.H = 0.5 * s.norm2 + eta * pair;

  const auto fw = face_weights(m);
  const auto left = gs.subspan(0, nv);
  const auto right = gs.subspan(static_cast<std::size_t>(nx - 1) * nv, nv);
  s.bd_left = boundary_dissipation(m.bc, Wall::Left, g, left, fw.front());
  s.bd_right = boundary_dissipation(m.bc, Wall::Right, g, right, fw.back());
  s.flux_left = boundary_flux(g, Wall::Left, apply_maxwell_bc(m.bc, Wall::Left, g, left));
  s.flux_right = boundary_flux(g, Wall::Right, apply_maxwell_bc(m.bc, Wall::Right, g, right));
  return s;
}

double entropy_H(const Model& m, std::span<const double> g, double eta) { return take_snapshot(m, g, 0.0, eta).H; }

namespace {

struct Instant {
  double T2 = 0.0, T3 = 0.0, T4 = 0.0, T6 = 0.0;
  double S_norm = 0.0;     // ||S11||_dx
  double DwDphi_norm = 0.0; // ||D(w D phi)||_dx
  double D2phi_norm = 0.0;
  double jL_norm = 0.0;
  double dphi_cell_norm = 0.0;
};

Instant instant_terms(const Model& m, const Snapshot& s) {
  const int nx = m.mesh.nx;
  const double dx = m.mesh.dx;
  const auto fw = face_weights(m);
  const auto& dphi = s.phi.dphi;
  Instant r;
  for (int f = 1; f < nx; ++f) {
    const double drho = (s.rho[f] - s.rho[f - 1]) / dx;
    const double dS = (s.S11[f] - s.S11[f - 1]) / dx;
    r.T3 -= drho * dphi[f] * fw[f] * dx;
    r.T2 -= dS * dphi[f] * fw[f] * dx;
  }
  for (int k = 0; k < nx; ++k) {
    const double wk = m.cell_weight(k);
    r.T4 += wk * s.jL1[k] * s.dphi_cell[k] * dx;
    const double d2 = (dphi[k + 1] - dphi[k]) / dx;
    const double dwd = (fw[k + 1] * dphi[k + 1] - fw[k] * dphi[k]) / dx;
    if (m.potential) r.T6 += s.rho[k] * (wk * d2 - dwd) * dx;
    r.S_norm += s.S11[k] * s.S11[k] * dx;
    r.DwDphi_norm += dwd * dwd * dx;
    r.D2phi_norm += d2 * d2 * dx;
    r.jL_norm += s.jL1[k] * s.jL1[k] * dx;
    r.dphi_cell_norm += s.dphi_cell[k] * s.dphi_cell[k] * dx;
  }
  r.S_norm = std::sqrt(r.S_norm);
  r.DwDphi_norm = std::sqrt(r.DwDphi_norm);
  r.D2phi_norm = std::sqrt(r.D2phi_norm);
  r.jL_norm = std::sqrt(r.jL_norm);
  r.dphi_cell_norm = std::sqrt(r.dphi_cell_norm);
  return r;
}

void fill_instant(const Model& m, const Snapshot& s, const ConstantsLedger& L, EntropyReport& r) {
  const Instant in = instant_terms(m, s);
  r.t = s.t;
  r.dist2 = s.norm2;
  r.perp2 = s.perp2;
  r.rho2 = s.rho2;
  r.H = s.H;
  r.T2 = in.T2;
  r.T3 = in.T3;
  r.T4 = in.T4;
  r.T6 = in.T6;
  r.bd_left = s.bd_left;
  r.bd_right = s.bd_right;
  r.flux_left = s.flux_left;
  r.flux_right = s.flux_right;

  const double tol = 1e-13 * s.norm2 + 1e-300;
  r.equiv_ok = L.c_eta * s.norm2 <= s.H + tol && s.H <= L.C_eta * s.norm2 + tol;
  if (m.potential)
    r.t3_ok = std::abs(in.T3 + in.T6 + s.rho2) <= 1e-9 * (1.0 + s.rho2);
  else
    r.t3_ok = std::abs(in.T3 + s.rho2) <= 1e-10 * (1.0 + s.rho2);

  const double perp = std::sqrt(s.perp2_dx);
  const double rho = std::sqrt(s.rho2_dx);
  // T2: each link of the Cauchy-Schwarz chain, then the regularity bound
  // (base case: ||D^2 phi|| <= K ||rho||).
  const double rel = 1e-12;
  bool ok = std::abs(in.T2) <= L.C_V * in.S_norm * in.DwDphi_norm * (1.0 + rel) + 1e-300 ||
            std::abs(in.T2) <= in.S_norm * in.DwDphi_norm * (1.0 + rel) + 1e-300;
  ok = ok && in.S_norm <= (L.D * perp + L.moment_defect * std::sqrt(s.perp2_dx + s.rho2_dx)) * (1.0 + rel) + 1e-15;
  if (!m.potential) ok = ok && in.D2phi_norm <= L.K * rho * (1.0 + rel) + 1e-300;
  r.t2n_ok = ok;
  // The slab boundary term pairs phi_x at the wall, which is zero by the Neumann condition.
  r.T2_boundary = 0.0;
  const double bd = s.bd_left + s.bd_right;
  r.t2b_ok = r.T2_boundary <= 2.0 * (1.0 - L.c) * L.C_gamma * L.D_gamma * L.K * L.C_tilde_V * rho *
                                  std::sqrt(2.0 * bd / std::max(1.0 - L.c * L.c, 1e-300)) +
                              1e-300;
  r.t4_ok = std::abs(in.T4) <= L.C_V * in.jL_norm * in.dphi_cell_norm * (1.0 + rel) + 1e-300 &&
            in.jL_norm <= L.C_L * perp * (1.0 + rel) + 1e-15 &&
            in.dphi_cell_norm <= L.C_p * rho * (1.0 + rel) + 1e-300;
}

} // namespace

EntropyReport static_report(const Model& m, const Snapshot& s, const ConstantsLedger& L) {
  EntropyReport r;
  fill_instant(m, s, L, r);
  return r;
}

EntropyReport dissipation_breakdown(const Model& m, const Snapshot& prev, const Snapshot& cur,
                                    const ConstantsLedger& L, double source_bound) {
  EntropyReport r;
  fill_instant(m, cur, L, r);
  const double dt = cur.t - prev.t;
  if (!(dt > 0.0)) return r;
  r.has_rates = true;
  const int nx = m.mesh.nx;
  const double dx = m.mesh.dx;
  r.T1 = 0.5 * (cur.norm2 - prev.norm2) / dt;
  r.dHdt = (cur.H - prev.H) / dt;
  double dtd2 = 0.0;
  for (int k = 0; k < nx; ++k) {
    const double d = (cur.dphi_cell[k] - prev.dphi_cell[k]) / dt;
    r.T5 += m.cell_weight(k) * cur.j1[k] * d * dx;
    dtd2 += d * d * dx;
  }
  const double jn = std::sqrt(cur.j2_dx);
  const double dtd = std::sqrt(dtd2);
  r.phi_flux_defect = jn * std::max(0.0, dtd - jn);

  const double bd = 0.5 * (prev.bd_left + prev.bd_right + cur.bd_left + cur.bd_right);
  const double perp = 0.5 * (prev.perp2 + cur.perp2);
  const double rhs1 = -bd - L.lambda_h * perp + source_bound;
  r.t1_ok = le(r.T1, rhs1, 1e-8 * (1.0 + std::abs(r.T1) + std::abs(rhs1)));

  const double t5_bound = L.C_V * (L.C_j * L.C_j * cur.perp2_dx + r.phi_flux_defect);
  r.t5_ok = le(std::abs(r.T5), t5_bound * (1.0 + 1e-12), 1e-14);

  const double Havg = 0.5 * (prev.H + cur.H);
  r.gronwall_ok = le(r.dHdt, -(L.omega / L.C_eta) * Havg, 1e-8);
  return r;
}

FitResult fit_decay(std::span<const double> t, std::span<const double> y, double t0, double t1, double transient) {
  std::vector<std::size_t> idx;
  FitResult r;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t0 || t[i] > t1) continue;
    if (!(y[i] > 1e-14)) {
      r.truncated = true;
      break;
    }
    idx.push_back(i);
  }
  const std::size_t drop = static_cast<std::size_t>(std::floor(transient * idx.size()));
  idx.erase(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(drop));
  if (idx.size() < 10) throw InvalidConfig("fit_decay needs at least 10 records in the window");
  double st = 0.0, sy = 0.0;
  for (auto i : idx) {
    st += t[i];
    sy += std::log(y[i]);
  }
  const double n = static_cast<double>(idx.size());
  const double mt = st / n, my = sy / n;
  double stt = 0.0, sty = 0.0, syy = 0.0;
  for (auto i : idx) {
    const double dt = t[i] - mt, dy = std::log(y[i]) - my;
    stt += dt * dt;
    sty += dt * dy;
    syy += dy * dy;
  }
  const double slope = sty / stt;
  const double icpt = my - slope * mt;
  r.tau = -slope;
  r.a = std::exp(icpt);
  r.C = y.empty() ? 0.0 : r.a / y[0];
  r.r2 = syy > 0.0 ? (sty * sty) / (stt * syy) : 1.0;
  r.used = idx.size();
  return r;
}

} // namespace hypo
