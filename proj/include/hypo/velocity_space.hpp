#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace hypo {

using Vec2 = std::array<double, 2>;
using Mat2 = std::array<std::array<double, 2>, 2>;

enum class GridKind { UniformMidpoint, GaussHermite };

GridKind parse_grid_kind(const std::string& s);
std::string to_string(GridKind k);

/// Discrete normalized Maxwellian on a velocity grid.
struct DiscreteMaxwellian {
  std::vector<double> values; // renormalized, sum_i w_i M_i = 1
  std::vector<double> raw;    // exp(-|v|^2/2) / (2 pi)^{d/2}
  double renormalization = 1.0; // values = raw / renormalization
  Mat2 second_moment_defect{};  // sum w (v x v) M - I
};

/// Tensor velocity quadrature with the discrete Maxwellian and the dnu measure.
///
/// Nodes are stored axis-major: node i = i0 * n + i1 for dim 2, where i0
/// indexes the first (wall-normal) component. Every node has its image under
/// v1 -> -v1 in the grid with equal weight.
struct VelocityGrid {
  int dim = 1;
  int n_per_axis = 0;
  double vmax = 0.0;
  GridKind kind = GridKind::UniformMidpoint;

  std::vector<Vec2> nodes;     // second component is 0 for dim 1
  std::vector<double> weights; // plain quadrature weights, > 0

  std::vector<double> axis_nodes; // 1D rule along each axis
  std::vector<double> axis_weights;

  std::vector<std::size_t> mirror;   // index of (-v1, v2)
  std::vector<std::size_t> axis0_of; // index along the normal axis
  std::vector<std::size_t> axis1_of; // index along the tangential axis (0 for dim 1)

  DiscreteMaxwellian maxwellian;

  std::size_t size() const { return nodes.size(); }
  double v1(std::size_t i) const { return nodes[i][0]; }
  /// Node spacing; only meaningful for uniform grids.
  double spacing() const;
  std::span<const double> M() const { return maxwellian.values; }
};

using GridPtr = std::shared_ptr<const VelocityGrid>;

VelocityGrid build_grid(int dim, int n_per_axis, double vmax, GridKind kind);
GridPtr make_grid(int dim, int n_per_axis, double vmax, GridKind kind);

/// Returns the grid's Maxwellian (computed at build time).
const DiscreteMaxwellian& maxwellian(const VelocityGrid& grid);

/// 1D Gauss-Hermite rule converted to plain quadrature weights
/// (sum w_i g(x_i) ~ int g dx), nodes ascending.
void gauss_hermite_plain(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// <f, g>_dnu = sum_i w_i f_i g_i / M_i.
double inner_dnu(std::span<const double> f, std::span<const double> g, const VelocityGrid& grid);
double norm2_dnu(std::span<const double> f, const VelocityGrid& grid);

struct Projection {
  double rho = 0.0;
  std::vector<double> perp;
};

/// pi_L f = rho M with rho = sum w f; returns rho and f - rho M.
Projection project_pi(std::span<const double> f, const VelocityGrid& grid);

struct Moments {
  double rho = 0.0;
  Vec2 j{};
  Mat2 S{};
  Mat2 S_tilde{};
};

Moments moments(std::span<const double> f, const VelocityGrid& grid);

/// ||(v x v - I) M||_dnu (Frobenius over the active components).
double moment_constant_D(const VelocityGrid& grid);

/// max_k ||v_k M||_dnu over the active axes.
double moment_constant_kappa(const VelocityGrid& grid);

} // namespace hypo
