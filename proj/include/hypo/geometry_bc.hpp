#pragma once

#include "hypo/velocity_space.hpp"

#include <span>
#include <vector>

namespace hypo {

/// Uniform cell-centred mesh on [0, Lx].
struct SlabMesh {
  int nx = 0;
  double Lx = 1.0;
  double dx = 0.0;
  double x(int k) const { return (k + 0.5) * dx; }
};

SlabMesh make_mesh(int nx, double Lx);

/// Left wall sits at x = 0 with outward normal -e1, right wall at x = Lx with +e1.
enum class Wall { Left, Right };

inline double normal_sign(Wall w) { return w == Wall::Left ? -1.0 : 1.0; }
const char* to_string(Wall w);

/// n . v_i > 0 on this wall.
inline bool is_outgoing(const VelocityGrid& g, std::size_t i, Wall w) { return normal_sign(w) * g.v1(i) > 0.0; }

struct MaxwellBC {
  double c = 0.0;
  double CM_left = 0.0;
  double CM_right = 0.0;
  double CM(Wall w) const { return w == Wall::Left ? CM_left : CM_right; }
};

/// 1 / sum_{n.v<0} M |n.v| w, which makes the diffuse half-flux exactly one.
double discrete_CM(const VelocityGrid& g, Wall w);

MaxwellBC make_bc(double c, const VelocityGrid& g);

/// Fills the incoming entries (n.v < 0) of `wall` from the outgoing entries of
/// `trace`; outgoing entries are copied through. Both arrays span the full grid.
void apply_maxwell_bc(const MaxwellBC& bc, Wall w, const VelocityGrid& g, std::span<const double> trace,
                      std::span<double> wall_values);
std::vector<double> apply_maxwell_bc(const MaxwellBC& bc, Wall w, const VelocityGrid& g,
                                     std::span<const double> trace);

/// sum_i w_i f_i (n . v_i) over the full grid of wall values.
double boundary_flux(const VelocityGrid& g, Wall w, std::span<const double> wall_values);

/// CM sqrt(M) sum_{n.u>0} h(u) sqrt(M(u)) (n.u) w_u, returned on the full grid.
std::vector<double> P_gamma(const VelocityGrid& g, double CM, Wall w, std::span<const double> h);

/// <a, b>_{gamma+} = sum_{n.v>0} a b (n.v) w.
double gamma_plus_inner(const VelocityGrid& g, Wall w, std::span<const double> a, std::span<const double> b);

/// (1 - c^2)/2 |(I - P_gamma) h|^2_{gamma+} with h = f / sqrt(M) taken from the
/// outgoing trace; `weight` multiplies the whole sum (e^{-V} at the wall).
double boundary_dissipation(const MaxwellBC& bc, Wall w, const VelocityGrid& g, std::span<const double> trace,
                            double weight = 1.0);

} // namespace hypo
