#include "hypo/velocity_space.hpp"

#include "hypo/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hypo {

GridKind parse_grid_kind(const std::string& s) {
  if (s == "uniform-midpoint" || s == "uniform") return GridKind::UniformMidpoint;
  if (s == "gauss-hermite" || s == "gauss-hermite-tensor") return GridKind::GaussHermite;
  throw InvalidConfig("velocity.kind must be uniform-midpoint or gauss-hermite, got '" + s + "'");
}

std::string to_string(GridKind k) {
  return k == GridKind::UniformMidpoint ? "uniform-midpoint" : "gauss-hermite";
}

double VelocityGrid::spacing() const {
  return kind == GridKind::UniformMidpoint ? 2.0 * vmax / n_per_axis : 0.0;
}

namespace {

// Orthonormal (probabilists') Hermite functions psi_k = p_k exp(-x^2/4),
// evaluated by the stable three-term recurrence.
void hermite_functions(int n, double x, double& psi_n, double& psi_nm1, double& sum_sq) {
  double prev = 0.0;
  double cur = std::exp(-0.25 * x * x) / std::pow(2.0 * std::numbers::pi, 0.25);
  sum_sq = 0.0;
  for (int k = 0; k < n; ++k) {
    sum_sq += cur * cur;
    const double next = (x * cur - std::sqrt(static_cast<double>(k)) * prev) / std::sqrt(k + 1.0);
    prev = cur;
    cur = next;
  }
  psi_n = cur;
  psi_nm1 = prev;
}

} // namespace

void gauss_hermite_plain(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  // Golub-Welsch for the initial nodes, then Newton polish on p_n.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(n - 1);
  for (int k = 1; k < n; ++k) sub(k - 1) = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalFailure("Gauss-Hermite eigensolve failed");

  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double x = es.eigenvalues()(i);
    for (int it = 0; it < 8; ++it) {
      double pn, pnm1, s;
      hermite_functions(n, x, pn, pnm1, s);
      const double dx = pn / (std::sqrt(static_cast<double>(n)) * pnm1);
      x -= dx;
      if (std::abs(dx) < 1e-15 * (1.0 + std::abs(x))) break;
    }
    double pn, pnm1, s;
    hermite_functions(n, x, pn, pnm1, s);
    nodes[i] = x;
    weights[i] = 1.0 / s;
  }
  // Enforce exact mirror symmetry.
  for (int i = 0; i < n / 2; ++i) {
    const int j = n - 1 - i;
    const double x = 0.5 * (nodes[j] - nodes[i]);
    const double w = 0.5 * (weights[i] + weights[j]);
    nodes[i] = -x;
    nodes[j] = x;
    weights[i] = weights[j] = w;
  }
  if (n % 2 == 1) nodes[n / 2] = 0.0;
}

VelocityGrid build_grid(int dim, int n_per_axis, double vmax, GridKind kind) {
  if (dim != 1 && dim != 2) throw InvalidConfig("velocity.dim must be 1 or 2");
  if (n_per_axis < 4) throw InvalidConfig("velocity.n must be at least 4");
  if (n_per_axis % 2 != 0)
    throw InvalidConfig("velocity.n must be even: odd counts put a node at v1 = 0 and break the "
                        "v -> -v symmetry the boundary condition relies on");
  if (kind == GridKind::UniformMidpoint && !(vmax > 0.0))
    throw InvalidConfig("velocity.vmax must be positive");

  VelocityGrid g;
  g.dim = dim;
  g.n_per_axis = n_per_axis;
  g.kind = kind;

  const int n = n_per_axis;
  if (kind == GridKind::UniformMidpoint) {
    g.vmax = vmax;
    const double h = 2.0 * vmax / n;
    g.axis_nodes.resize(n);
    g.axis_weights.assign(n, h);
    for (int i = 0; i < n; ++i) g.axis_nodes[i] = h * (i + 0.5 - 0.5 * n);
  } else {
    gauss_hermite_plain(n, g.axis_nodes, g.axis_weights);
    g.vmax = g.axis_nodes.back();
  }

  const std::size_t total = dim == 1 ? n : static_cast<std::size_t>(n) * n;
  g.nodes.resize(total);
  g.weights.resize(total);
  g.mirror.resize(total);
  g.axis0_of.resize(total);
  g.axis1_of.resize(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    const std::size_t a = dim == 1 ? idx : idx / n;
    const std::size_t b = dim == 1 ? 0 : idx % n;
    g.axis0_of[idx] = a;
    g.axis1_of[idx] = b;
    g.nodes[idx] = {g.axis_nodes[a], dim == 1 ? 0.0 : g.axis_nodes[b]};
    g.weights[idx] = dim == 1 ? g.axis_weights[a] : g.axis_weights[a] * g.axis_weights[b];
    const std::size_t ma = n - 1 - a;
    g.mirror[idx] = dim == 1 ? ma : ma * n + b;
  }

  // Maxwellian, renormalized to unit discrete mass.
  auto& mw = g.maxwellian;
  mw.raw.resize(total);
  const double norm = std::pow(2.0 * std::numbers::pi, -0.5 * dim);
  for (std::size_t i = 0; i < total; ++i) {
    const auto& v = g.nodes[i];
    mw.raw[i] = norm * std::exp(-0.5 * (v[0] * v[0] + v[1] * v[1]));
  }
  double mass = 0.0;
  for (std::size_t i = 0; i < total; ++i) mass += g.weights[i] * mw.raw[i];
  mw.renormalization = mass;
  mw.values.resize(total);
  for (std::size_t i = 0; i < total; ++i) mw.values[i] = mw.raw[i] / mass;

  Mat2 second{};
  for (std::size_t i = 0; i < total; ++i) {
    const auto& v = g.nodes[i];
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b) second[a][b] += g.weights[i] * v[a] * v[b] * mw.values[i];
  }
  for (int a = 0; a < dim; ++a) second[a][a] -= 1.0;
  mw.second_moment_defect = second;
  return g;
}

GridPtr make_grid(int dim, int n_per_axis, double vmax, GridKind kind) {
  return std::make_shared<const VelocityGrid>(build_grid(dim, n_per_axis, vmax, kind));
}

const DiscreteMaxwellian& maxwellian(const VelocityGrid& grid) { return grid.maxwellian; }

double inner_dnu(std::span<const double> f, std::span<const double> g, const VelocityGrid& grid) {
  const auto M = grid.M();
  double s = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) s += grid.weights[i] * f[i] * g[i] / M[i];
  return s;
}

double norm2_dnu(std::span<const double> f, const VelocityGrid& grid) {
  return inner_dnu(f, f, grid);
}

Projection project_pi(std::span<const double> f, const VelocityGrid& grid) {
  Projection p;
  for (std::size_t i = 0; i < grid.size(); ++i) p.rho += grid.weights[i] * f[i];
  p.perp.resize(grid.size());
  const auto M = grid.M();
  for (std::size_t i = 0; i < grid.size(); ++i) p.perp[i] = f[i] - p.rho * M[i];
  return p;
}

Moments moments(std::span<const double> f, const VelocityGrid& grid) {
  Moments m;
  const int d = grid.dim;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double wf = grid.weights[i] * f[i];
    const auto& v = grid.nodes[i];
    m.rho += wf;
    for (int a = 0; a < d; ++a) {
      m.j[a] += wf * v[a];
      for (int b = 0; b < d; ++b) m.S_tilde[a][b] += wf * v[a] * v[b];
    }
  }
  m.S = m.S_tilde;
  for (int a = 0; a < d; ++a) m.S[a][a] -= m.rho;
  return m;
}

double moment_constant_D(const VelocityGrid& grid) {
  const auto M = grid.M();
  double s = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& v = grid.nodes[i];
    double fro = 0.0;
    for (int a = 0; a < grid.dim; ++a)
      for (int b = 0; b < grid.dim; ++b) {
        const double e = v[a] * v[b] - (a == b ? 1.0 : 0.0);
        fro += e * e;
      }
    s += grid.weights[i] * M[i] * fro;
  }
  return std::sqrt(s);
}

double moment_constant_kappa(const VelocityGrid& grid) {
  const auto M = grid.M();
  double best = 0.0;
  for (int a = 0; a < grid.dim; ++a) {
    double s = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) s += grid.weights[i] * grid.nodes[i][a] * grid.nodes[i][a] * M[i];
    best = std::max(best, std::sqrt(s));
  }
  return best;
}

} // namespace hypo
