#include "hypo/geometry_bc.hpp"

#include "hypo/error.hpp"

#include <cmath>

namespace hypo {

SlabMesh make_mesh(int nx, double Lx) {
  if (nx < 4) throw InvalidConfig("mesh.nx must be at least 4");
  if (!(Lx > 0.0)) throw InvalidConfig("mesh.Lx must be positive");
  SlabMesh m;
  m.nx = nx;
  m.Lx = Lx;
  m.dx = Lx / nx;
  return m;
}

const char* to_string(Wall w) { return w == Wall::Left ? "left" : "right"; }

double discrete_CM(const VelocityGrid& g, Wall w) {
  const auto M = g.M();
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (normal_sign(w) * g.v1(i) < 0.0) s += M[i] * std::abs(g.v1(i)) * g.weights[i];
  if (!(s > 0.0)) throw InvalidConfig("velocity grid has no incoming nodes at the wall");
  return 1.0 / s;
}

MaxwellBC make_bc(double c, const VelocityGrid& g) {
  if (!(c >= 0.0 && c <= 1.0)) throw InvalidConfig("bc.c must be in [0,1]");
  MaxwellBC bc;
  bc.c = c;
  bc.CM_left = discrete_CM(g, Wall::Left);
  bc.CM_right = discrete_CM(g, Wall::Right);
  return bc;
}

void apply_maxwell_bc(const MaxwellBC& bc, Wall w, const VelocityGrid& g, std::span<const double> trace,
                      std::span<double> wall_values) {
  const auto M = g.M();
  const double sn = normal_sign(w);
  double out_flux = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (sn * g.v1(i) > 0.0) out_flux += trace[i] * sn * g.v1(i) * g.weights[i];
  const double diffuse = (1.0 - bc.c) * bc.CM(w) * out_flux;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (sn * g.v1(i) > 0.0)
      wall_values[i] = trace[i];
    else
      wall_values[i] = bc.c * trace[g.mirror[i]] + diffuse * M[i];
  }
}

std::vector<double> apply_maxwell_bc(const MaxwellBC& bc, Wall w, const VelocityGrid& g,
                                     std::span<const double> trace) {
  std::vector<double> out(g.size());
  apply_maxwell_bc(bc, w, g, trace, out);
  return out;
}

double boundary_flux(const VelocityGrid& g, Wall w, std::span<const double> wall_values) {
  const double sn = normal_sign(w);
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) s += g.weights[i] * wall_values[i] * sn * g.v1(i);
  return s;
}

std::vector<double> P_gamma(const VelocityGrid& g, double CM, Wall w, std::span<const double> h) {
  const auto M = g.M();
  const double sn = normal_sign(w);
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (sn * g.v1(i) > 0.0) s += h[i] * std::sqrt(M[i]) * sn * g.v1(i) * g.weights[i];
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = CM * std::sqrt(M[i]) * s;
  return out;
}

double gamma_plus_inner(const VelocityGrid& g, Wall w, std::span<const double> a, std::span<const double> b) {
  const double sn = normal_sign(w);
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (sn * g.v1(i) > 0.0) s += a[i] * b[i] * sn * g.v1(i) * g.weights[i];
  return s;
}

double boundary_dissipation(const MaxwellBC& bc, Wall w, const VelocityGrid& g, std::span<const double> trace,
                            double weight) {
  const auto M = g.M();
  std::vector<double> h(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) h[i] = trace[i] / std::sqrt(M[i]);
  const auto ph = P_gamma(g, bc.CM(w), w, h);
  for (std::size_t i = 0; i < g.size(); ++i) h[i] -= ph[i];
  return 0.5 * (1.0 - bc.c * bc.c) * weight * gamma_plus_inner(g, w, h, h);
}

} // namespace hypo
