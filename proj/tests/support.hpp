#pragma once

#include "hypo/config.hpp"

#include <random>
#include <vector>

namespace testing {

inline std::vector<double> randn(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = nd(rng);
  return v;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline hypo::RunConfig small(int nx = 16, int n = 16, double c = 0.5) {
  hypo::RunConfig cfg;
  cfg.mesh_nx = nx;
  cfg.velocity_n = n;
  cfg.bc_c = c;
  return cfg;
}

} // namespace testing
