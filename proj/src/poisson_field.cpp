#include "hypo/poisson_field.hpp"

#include "hypo/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace hypo {

std::vector<double> face_gradient(std::span<const double> u, const SlabMesh& mesh) {
  std::vector<double> g(mesh.nx + 1, 0.0);
  for (int k = 0; k + 1 < mesh.nx; ++k) g[k + 1] = (u[k + 1] - u[k]) / mesh.dx;
  return g;
}

std::vector<double> cell_average(std::span<const double> faces) {
  std::vector<double> c(faces.size() - 1);
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = 0.5 * (faces[k] + faces[k + 1]);
  return c;
}

double cell_norm2(std::span<const double> u, const SlabMesh& mesh) {
  double s = 0.0;
  for (int k = 0; k < mesh.nx; ++k) s += u[k] * u[k];
  return s * mesh.dx;
}

double face_norm2(std::span<const double> u, const SlabMesh& mesh) {
  double s = 0.0;
  for (int k = 0; k <= mesh.nx; ++k) s += u[k] * u[k];
  return s * mesh.dx;
}

PhiField solve_poisson_neumann(std::span<const double> rho, const SlabMesh& mesh) {
  const int nx = mesh.nx;
  const double dx = mesh.dx;
  double total = 0.0;
  for (int k = 0; k < nx; ++k) total += rho[k];
  total *= dx;
  const double rho_norm = std::sqrt(cell_norm2(rho, mesh));
  if (std::abs(total) > 1e-10 * rho_norm + 1e-300) {
    std::ostringstream os;
    os << "Neumann problem needs zero-mass rho; got sum rho dx = " << total << " with ||rho|| = " << rho_norm;
    throw CompatibilityError(os.str());
  }
  const double mean = total / mesh.Lx;

  PhiField out;
  out.removed_mean = mean;
  out.dphi.assign(nx + 1, 0.0);
  // Integrate the face flux from the left wall, then the potential.
  double acc = 0.0;
  for (int k = 0; k + 1 < nx; ++k) {
    acc += rho[k] - mean;
    out.dphi[k + 1] = -dx * acc;
  }
  out.phi.assign(nx, 0.0);
  for (int k = 0; k + 1 < nx; ++k) out.phi[k + 1] = out.phi[k] + dx * out.dphi[k + 1];
  double pm = 0.0;
  for (int k = 0; k < nx; ++k) pm += out.phi[k];
  pm /= nx;
  for (int k = 0; k < nx; ++k) out.phi[k] -= pm;

  double res = 0.0;
  for (int k = 0; k < nx; ++k) {
    const double lap = (out.dphi[k + 1] - out.dphi[k]) / dx;
    res = std::max(res, std::abs(-lap - (rho[k] - mean)));
  }
  out.residual = res;
  return out;
}

double neumann_mu1_closed_form(const SlabMesh& mesh) {
  const double s = std::sin(std::numbers::pi / (2.0 * mesh.nx));
  return 4.0 / (mesh.dx * mesh.dx) * s * s;
}

double poincare_constant(const SlabMesh& mesh) {
  const int nx = mesh.nx;
  const double inv = 1.0 / (mesh.dx * mesh.dx);
  Eigen::VectorXd diag(nx);
  Eigen::VectorXd sub(nx - 1);
  for (int k = 0; k < nx; ++k) diag(k) = (k == 0 || k == nx - 1 ? 1.0 : 2.0) * inv;
  for (int k = 0; k + 1 < nx; ++k) sub(k) = -inv;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalFailure("Neumann Laplacian eigensolve failed");
  // eigenvalues ascend; index 0 is the constant mode
  return 1.0 / std::sqrt(es.eigenvalues()(1));
}

PotentialFamily parse_potential_family(const std::string& s) {
  if (s == "zero" || s == "none") return PotentialFamily::Zero;
  if (s == "cosine" || s == "cosine-well") return PotentialFamily::Cosine;
  if (s == "quadratic" || s == "quadratic-well") return PotentialFamily::Quadratic;
  throw InvalidConfig("potential.family must be zero, cosine or quadratic, got '" + s + "'");
}

std::string to_string(PotentialFamily f) {
  switch (f) {
    case PotentialFamily::Zero: return "zero";
    case PotentialFamily::Cosine: return "cosine";
    case PotentialFamily::Quadratic: return "quadratic";
  }
  return "?";
}

double potential_raw(PotentialFamily f, double a, double Lx, double x) {
  switch (f) {
    case PotentialFamily::Zero: return 0.0;
    case PotentialFamily::Cosine: return a * std::cos(2.0 * std::numbers::pi * x / Lx);
    case PotentialFamily::Quadratic: return a * (x - 0.5 * Lx) * (x - 0.5 * Lx);
  }
  return 0.0;
}

double potential_raw_dx(PotentialFamily f, double a, double Lx, double x) {
  switch (f) {
    case PotentialFamily::Zero: return 0.0;
    case PotentialFamily::Cosine: {
      const double k = 2.0 * std::numbers::pi / Lx;
      return -a * k * std::sin(k * x);
    }
    case PotentialFamily::Quadratic: return 2.0 * a * (x - 0.5 * Lx);
  }
  return 0.0;
}

namespace {

void finish_potential(PotentialV& p, const SlabMesh& mesh) {
  double s = 0.0;
  for (int k = 0; k < mesh.nx; ++k) s += std::exp(p.V[k]);
  s *= mesh.dx;
  p.shift = -std::log(s);
  for (auto& v : p.V) v += p.shift;
  for (auto& v : p.V_face) v += p.shift;
  p.c_V = std::numeric_limits<double>::infinity();
  p.C_V = 0.0;
  for (double v : p.V) {
    p.c_V = std::min(p.c_V, std::exp(-v));
    p.C_V = std::max(p.C_V, std::exp(-v));
  }
  p.max_abs_dV = 0.0;
  for (double d : p.dV) p.max_abs_dV = std::max(p.max_abs_dV, std::abs(d));
}

} // namespace

PotentialV make_potential(PotentialFamily f, double amplitude, const SlabMesh& mesh) {
  PotentialV p;
  p.family = f;
  p.amplitude = amplitude;
  p.V.resize(mesh.nx);
  p.dV.resize(mesh.nx);
  p.V_face.resize(mesh.nx + 1);
  for (int k = 0; k < mesh.nx; ++k) {
    p.V[k] = potential_raw(f, amplitude, mesh.Lx, mesh.x(k));
    p.dV[k] = potential_raw_dx(f, amplitude, mesh.Lx, mesh.x(k));
  }
  for (int k = 0; k <= mesh.nx; ++k) p.V_face[k] = potential_raw(f, amplitude, mesh.Lx, k * mesh.dx);
  const double a = std::abs(amplitude);
  switch (f) {
    case PotentialFamily::Zero: p.D_V = 0.0; break;
    case PotentialFamily::Cosine: {
      const double k = 2.0 * std::numbers::pi / mesh.Lx;
      p.D_V = a * std::max({1.0, k, k * k});
      break;
    }
    case PotentialFamily::Quadratic: {
      const double h = 0.5 * mesh.Lx;
      p.D_V = a * std::max({h * h, 2.0 * h, 2.0});
      break;
    }
  }
  finish_potential(p, mesh);
  return p;
}

PotentialV normalize_potential(std::span<const double> V_raw, const SlabMesh& mesh) {
  PotentialV p;
  p.V.assign(V_raw.begin(), V_raw.end());
  p.dV.assign(mesh.nx, 0.0);
  p.V_face.resize(mesh.nx + 1);
  p.V_face[0] = p.V[0];
  p.V_face[mesh.nx] = p.V[mesh.nx - 1];
  for (int k = 1; k < mesh.nx; ++k) p.V_face[k] = 0.5 * (p.V[k - 1] + p.V[k]);
  finish_potential(p, mesh);
  return p;
}

PhiEstimateReport estimates_for_phi_check(const PhiField& prev, const PhiField& cur, std::span<const double> rho,
                                          std::span<const double> j, double dt, const SlabMesh& mesh,
                                          double slack) {
  PhiEstimateReport r;
  r.grad_phi = std::sqrt(face_norm2(cur.dphi, mesh));
  r.cp_rho = poincare_constant(mesh) * std::sqrt(cell_norm2(rho, mesh));
  std::vector<double> d(cur.dphi.size());
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = (cur.dphi[k] - prev.dphi[k]) / dt;
  r.dt_grad_phi = std::sqrt(face_norm2(d, mesh));
  r.j_norm = std::sqrt(cell_norm2(j, mesh));
  r.poincare_ok = r.grad_phi <= r.cp_rho * (1.0 + 1e-12) + 1e-300;
  r.flux_ok = r.dt_grad_phi <= r.j_norm + slack;
  return r;
}

} // namespace hypo
