#include "hypo/transport_solver.hpp"

#include "hypo/error.hpp"
#include "hypo/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hypo {

CollisionMode parse_collision_mode(const std::string& s) {
  if (s == "explicit") return CollisionMode::Explicit;
  if (s == "exponential") return CollisionMode::Exponential;
  throw InvalidConfig("solver.collision must be explicit or exponential, got '" + s + "'");
}

std::string to_string(CollisionMode m) { return m == CollisionMode::Explicit ? "explicit" : "exponential"; }

double total_mass(const Model& m, std::span<const double> f) {
  const auto& g = *m.grid;
  const std::size_t nv = g.size();
  double s = 0.0;
  for (int k = 0; k < m.mesh.nx; ++k) {
    double c = 0.0;
    for (std::size_t i = 0; i < nv; ++i) c += g.weights[i] * f[k * nv + i];
    s += c;
  }
  return s * m.mesh.dx;
}

double state_norm2(const Model& m, std::span<const double> f) {
  const auto& g = *m.grid;
  const auto M = g.M();
  const std::size_t nv = g.size();
  double s = 0.0;
  for (int k = 0; k < m.mesh.nx; ++k) {
    double c = 0.0;
    for (std::size_t i = 0; i < nv; ++i) {
      const double v = f[k * nv + i];
      c += g.weights[i] * v * v / M[i];
    }
    s += m.cell_weight(k) * c;
  }
  return s * m.mesh.dx;
}

std::vector<double> equilibrium(const Model& m, double mu) {
  const auto M = m.grid->M();
  const std::size_t nv = m.nv();
  std::vector<double> eq(m.size());
  for (int k = 0; k < m.mesh.nx; ++k) {
    const double p = mu * m.eq_profile(k);
    for (std::size_t i = 0; i < nv; ++i) eq[k * nv + i] = p * M[i];
  }
  return eq;
}

double Solver::cfl_limit(const Model& m) {
  const auto& g = *m.grid;
  double vmax = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) vmax = std::max(vmax, std::abs(g.v1(i)));
  double lim = m.mesh.dx / vmax;
  if (m.potential && m.potential->max_abs_dV > 0.0) lim = std::min(lim, g.spacing() / m.potential->max_abs_dV);
  return lim;
}

Solver::Solver(Model model, SolverConfig cfg) : model_(std::move(model)), cfg_(cfg) {
  if (!(cfg_.cfl > 0.0 && cfg_.cfl <= 0.9)) throw InvalidConfig("solver.cfl must be in (0, 0.9]");
  if (model_.potential && model_.grid->kind != GridKind::UniformMidpoint)
    throw InvalidConfig("the force term needs a uniform-midpoint velocity grid");
  if (model_.potential && static_cast<int>(model_.potential->V.size()) != model_.mesh.nx)
    throw InvalidConfig("potential does not match the mesh");
  const double lim = cfl_limit(model_);
  if (cfg_.dt <= 0.0) {
    dt_ = cfg_.cfl * lim;
  } else {
    dt_ = cfg_.dt;
    if (cfg_.transport && dt_ > cfg_.cfl * lim * (1.0 + 1e-12)) {
      std::ostringstream os;
      os << "solver.dt = " << dt_ << " violates the CFL limit " << cfg_.cfl * lim << " (cfl = " << cfg_.cfl << ")";
      throw InvalidConfig(os.str());
    }
  }
  if (cfg_.collision) {
    L_norm_ = operator_norm(model_.kernel);
    if (cfg_.mode == CollisionMode::Explicit && 0.5 * dt_ * L_norm_ >= 2.0) {
      std::ostringstream os;
      os << "explicit collision step unstable: (dt/2) ||L|| = " << 0.5 * dt_ * L_norm_ << " >= 2";
      throw InvalidConfig(os.str());
    }
  }
}

std::vector<double> Solver::wall_values(std::span<const double> f, Wall w) const {
  const std::size_t nv = model_.nv();
  const std::size_t cell = w == Wall::Left ? 0 : static_cast<std::size_t>(model_.mesh.nx - 1);
  return apply_maxwell_bc(model_.bc, w, *model_.grid, f.subspan(cell * nv, nv));
}

double Solver::wall_flux(std::span<const double> f, Wall w) const {
  return boundary_flux(*model_.grid, w, wall_values(f, w));
}

void Solver::transport_rhs(std::span<const double> f, std::span<double> out) const {
  const auto& g = *model_.grid;
  const std::size_t nv = g.size();
  const int nx = model_.mesh.nx;
  const double inv_dx = 1.0 / model_.mesh.dx;
  const auto left = wall_values(f, Wall::Left);
  const auto right = wall_values(f, Wall::Right);
  parallel_for(nv, [&](std::size_t i) {
    const double v = g.v1(i);
    if (v > 0.0) {
      double upstream = left[i];
      for (int k = 0; k < nx; ++k) {
        const double fk = f[k * nv + i];
        out[k * nv + i] = -v * (fk - upstream) * inv_dx;
        upstream = fk;
      }
    } else {
      double upstream = right[i];
      for (int k = nx - 1; k >= 0; --k) {
        const double fk = f[k * nv + i];
        out[k * nv + i] = -v * (upstream - fk) * inv_dx;
        upstream = fk;
      }
    }
  });
}

void Solver::force_rhs(std::span<const double> f, std::span<double> out) const {
  const std::size_t total = size();
  if (!model_.potential) {
    std::fill(out.begin(), out.begin() + total, 0.0);
    return;
  }
  const auto& g = *model_.grid;
  const std::size_t nv = g.size();
  const std::size_t n = g.n_per_axis;
  const std::size_t lines = g.dim == 1 ? 1 : n;
  const std::size_t stride = g.dim == 1 ? 1 : n;
  const double inv_h = 1.0 / g.spacing();
  parallel_for(model_.mesh.nx, [&](std::size_t k) {
    const double a = model_.potential->dV[k];
    const double* fk = f.data() + k * nv;
    double* ok = out.data() + k * nv;
    for (std::size_t b = 0; b < lines; ++b) {
      // Flux a * f_upwind through the faces between consecutive v1 nodes; zero at +-vmax.
      double flux_lo = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        const std::size_t idx = r * stride + b;
        double flux_hi = 0.0;
        if (r + 1 < n) flux_hi = a * (a > 0.0 ? fk[idx] : fk[idx + stride]);
        ok[idx] = -(flux_hi - flux_lo) * inv_h;
        flux_lo = flux_hi;
      }
    }
  });
}

void Solver::collision_rhs(std::span<const double> f, std::span<double> out) const {
  const std::size_t nv = model_.nv();
  parallel_for(model_.mesh.nx, [&](std::size_t k) {
    apply_L(model_.kernel, f.subspan(k * nv, nv), out.subspan(k * nv, nv));
  });
}

void Solver::rhs(std::span<const double> f, std::span<double> out) const {
  const std::size_t total = size();
  std::fill(out.begin(), out.begin() + total, 0.0);
  std::vector<double> tmp(total);
  if (cfg_.transport) {
    transport_rhs(f, tmp);
    for (std::size_t i = 0; i < total; ++i) out[i] += tmp[i];
  }
  if (model_.potential) {
    force_rhs(f, tmp);
    for (std::size_t i = 0; i < total; ++i) out[i] += tmp[i];
  }
  if (cfg_.collision) {
    collision_rhs(f, tmp);
    for (std::size_t i = 0; i < total; ++i) out[i] += tmp[i];
  }
}

void Solver::ssp_rk2(std::vector<double>& f, double h,
                     void (Solver::*op)(std::span<const double>, std::span<double>) const) const {
  const std::size_t total = f.size();
  std::vector<double> k(total), stage(total);
  (this->*op)(f, k);
  for (std::size_t i = 0; i < total; ++i) stage[i] = f[i] + h * k[i];
  (this->*op)(stage, k);
  for (std::size_t i = 0; i < total; ++i) f[i] = 0.5 * f[i] + 0.5 * (stage[i] + h * k[i]);
}

void Solver::transport_step(std::vector<double>& f, double h) const { ssp_rk2(f, h, &Solver::transport_rhs); }

void Solver::force_step(std::vector<double>& f, double h) const {
  if (!model_.potential) return;
  ssp_rk2(f, h, &Solver::force_rhs);
}

const Eigen::MatrixXd& Solver::propagator(double h) {
  if (h == cached_h_) return exp_hL_;
  const auto& g = *model_.grid;
  const auto M = g.M();
  const std::size_t nv = g.size();
  if (sym_evecs_.size() == 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized_matrix(model_.kernel));
    if (es.info() != Eigen::Success) throw NumericalFailure("collision eigendecomposition failed");
    sym_evals_ = es.eigenvalues();
    sym_evecs_ = es.eigenvectors();
  }
  const Eigen::VectorXd e = (h * sym_evals_).array().exp();
  Eigen::MatrixXd E = sym_evecs_ * e.asDiagonal() * sym_evecs_.transpose();
  // exp(hL) = D^{-1} exp(hB) D with D = diag(sqrt(w/M))
  for (std::size_t i = 0; i < nv; ++i)
    for (std::size_t j = 0; j < nv; ++j) E(i, j) *= std::sqrt(M[i] / g.weights[i]) * std::sqrt(g.weights[j] / M[j]);
  exp_hL_ = std::move(E);
  cached_h_ = h;
  return exp_hL_;
}

void Solver::collision_step(std::vector<double>& f, double h) {
  const auto& g = *model_.grid;
  const auto M = g.M();
  const std::size_t nv = g.size();
  if (cfg_.mode == CollisionMode::Explicit) {
    std::vector<double> Lf(f.size());
    collision_rhs(f, Lf);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] += h * Lf[i];
    return;
  }
  const Eigen::MatrixXd& E = propagator(h);
  parallel_for(model_.mesh.nx, [&](std::size_t k) {
    Eigen::Map<Eigen::VectorXd> fk(f.data() + k * nv, nv);
    double before = 0.0;
    for (std::size_t i = 0; i < nv; ++i) before += g.weights[i] * fk(i);
    Eigen::VectorXd out = E * fk;
    double after = 0.0;
    for (std::size_t i = 0; i < nv; ++i) after += g.weights[i] * out(i);
    // restore the cell mass lost to rounding in the dense product
    const double fix = before - after;
    for (std::size_t i = 0; i < nv; ++i) fk(i) = out(i) + fix * M[i];
  });
}

void Solver::advance(std::vector<double>& f) {
  const double h = 0.5 * dt_;
  if (cfg_.collision) collision_step(f, h);
  if (model_.potential) force_step(f, h);
  if (cfg_.transport) transport_step(f, dt_);
  if (model_.potential) force_step(f, h);
  if (cfg_.collision) collision_step(f, h);
}

void Solver::step(KineticState& s) {
  if (std::isnan(mass0_) || s.t == 0.0) mass0_ = total_mass(model_, s.f);
  advance(s.f);
  s.t += dt_;
  check_.finite = std::all_of(s.f.begin(), s.f.end(), [](double v) { return std::isfinite(v); });
  if (!check_.finite) {
    std::ostringstream os;
    os << "non-finite state at t = " << s.t;
    throw NumericalFailure(os.str());
  }
  if (cfg_.debug_checks) {
    const double m = total_mass(model_, s.f);
    check_.mass_drift = std::abs(m - mass0_) / std::max(std::abs(mass0_), 1e-300);
    const double nrm = std::sqrt(state_norm2(model_, s.f));
    check_.max_wall_flux = std::max(std::abs(wall_flux(s.f, Wall::Left)), std::abs(wall_flux(s.f, Wall::Right))) /
                           std::max(nrm, 1e-300);
  }
}

Eigen::MatrixXd Solver::dense_generator() const {
  const std::size_t N = size();
  if (N > 8192) {
    std::ostringstream os;
    os << "dense generator needs nx*nv <= 8192, got " << N << "; reduce mesh.nx or velocity.n";
    throw InvalidConfig(os.str());
  }
  Eigen::MatrixXd A(N, N);
  std::vector<double> e(N, 0.0), col(N);
  for (std::size_t j = 0; j < N; ++j) {
    e[j] = 1.0;
    rhs(e, col);
    e[j] = 0.0;
    for (std::size_t i = 0; i < N; ++i) A(i, j) = col[i];
  }
  return A;
}

Eigen::MatrixXd Solver::step_matrix() {
  const std::size_t N = size();
  if (N > 8192) throw InvalidConfig("step matrix needs nx*nv <= 8192");
  Eigen::MatrixXd S(N, N);
  std::vector<double> e(N);
  for (std::size_t j = 0; j < N; ++j) {
    std::fill(e.begin(), e.end(), 0.0);
    e[j] = 1.0;
    advance(e);
    for (std::size_t i = 0; i < N; ++i) S(i, j) = e[i];
  }
  return S;
}

Deflation global_mass_deflation(const Model& m) {
  const std::size_t N = m.size();
  const std::size_t nv = m.nv();
  Deflation d;
  d.right.resize(N, 1);
  d.left.resize(N, 1);
  const auto eq = equilibrium(m, 1.0);
  for (int k = 0; k < m.mesh.nx; ++k)
    for (std::size_t i = 0; i < nv; ++i) {
      d.right(k * nv + i, 0) = eq[k * nv + i];
      d.left(k * nv + i, 0) = m.mesh.dx * m.grid->weights[i];
    }
  return d;
}

Deflation cell_mass_deflation(const Model& m) {
  const std::size_t N = m.size();
  const std::size_t nv = m.nv();
  const auto M = m.grid->M();
  Deflation d;
  d.right = Eigen::MatrixXd::Zero(N, m.mesh.nx);
  d.left = Eigen::MatrixXd::Zero(N, m.mesh.nx);
  for (int k = 0; k < m.mesh.nx; ++k)
    for (std::size_t i = 0; i < nv; ++i) {
      d.right(k * nv + i, k) = M[i];
      d.left(k * nv + i, k) = m.grid->weights[i];
    }
  return d;
}

OracleResult decay_rate_oracle(const Eigen::MatrixXd& A, const Deflation& d) {
  const double scale = 1.0 + A.cwiseAbs().rowwise().sum().maxCoeff();
  const double alpha = 10.0 * scale;
  const Eigen::MatrixXd G = d.left.transpose() * d.right;
  const Eigen::MatrixXd P = d.right * G.partialPivLu().solve(d.left.transpose());
  Eigen::EigenSolver<Eigen::MatrixXd> es(A - alpha * P, false);
  if (es.info() != Eigen::Success) throw NumericalFailure("generator eigensolve did not converge");
  OracleResult r;
  const auto& ev = es.eigenvalues();
  r.spectrum.assign(ev.data(), ev.data() + ev.size());
  std::sort(r.spectrum.begin(), r.spectrum.end(),
            [](const auto& a, const auto& b) { return a.real() > b.real(); });
  r.slowest = r.spectrum.front();
  r.tau_h = -r.slowest.real();
  return r;
}

std::vector<double> discrete_equilibrium(Solver& s, double mu) {
  const Model& m = s.model();
  const std::size_t N = m.size();
  const std::size_t nv = m.nv();
  Eigen::MatrixXd S = s.step_matrix() - Eigen::MatrixXd::Identity(N, N);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(N);
  // Mass conservation makes any row redundant; trade row 0 for the mass constraint.
  for (int k = 0; k < m.mesh.nx; ++k)
    for (std::size_t i = 0; i < nv; ++i) S(0, k * nv + i) = m.mesh.dx * m.grid->weights[i];
  b(0) = mu;
  const Eigen::VectorXd x = S.fullPivLu().solve(b);
  return {x.data(), x.data() + N};
}

} // namespace hypo
