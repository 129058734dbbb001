#pragma once

#include "hypo/hypo_diagnostics.hpp"
#include "hypo/transport_solver.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hypo {

enum class InitFamily { Cosine, Equilibrium, Random };
InitFamily parse_init_family(const std::string& s);
std::string to_string(InitFamily f);

struct InitSpec {
  InitFamily family = InitFamily::Cosine;
  double amplitude = 0.1;
  double z_slope = 0.0; // d/dz of the amplitude, seeds hierarchy level 1
  std::uint64_t seed = 7;
};

/// Mass-free perturbation shape for a family:
///   cosine: cos(pi x / Lx) M + v1 M sin(pi x / Lx) / 2
///   random: seeded mix of low x-modes times Hermite-like velocity shapes, cell mass removed
std::vector<double> perturbation(const Model& m, InitFamily family, std::uint64_t seed);

/// Unit-mass equilibrium plus amplitude times the perturbation.
std::vector<double> initial_state(const Model& m, const InitSpec& init);

struct RunOptions {
  SolverConfig solver;
  int every = 10;
  double fit_t0 = 1.0;
  double fit_t1 = 8.0;
  double transient = 0.2;
  bool oracle = true;               // skipped above oracle_max unknowns
  std::size_t oracle_max = 4096;
  std::uint64_t seed = 7;           // probe seed for the ledger
  bool keep_final_state = false;
};

struct Record {
  long step = 0;
  double dist = 0.0; // ||f - eq||
  EntropyReport r;
};

inline constexpr std::array<const char*, 8> kFlagNames = {"equiv", "t3", "t1", "t2n", "t2b", "t4", "t5", "gronwall"};

struct RunResult {
  ConstantsLedger ledger;
  std::vector<Record> records;
  double dt = 0.0;
  long steps = 0;
  double mass0 = 0.0;
  double max_mass_drift = 0.0;   // relative
  double max_wall_flux = 0.0;    // relative to ||f||, every step
  double max_monotone_excess = 0.0; // max relative increase of ||f - eq||^2 over one step
  long monotone_violations = 0;     // steps above 1e-8
  bool discrete_equilibrium = false;
  std::optional<FitResult> fit_norm;
  std::optional<FitResult> fit_H; // fitted on sqrt(H)
  std::string fit_notice;
  std::optional<OracleResult> oracle;
  std::array<long, 8> flag_failures{};
  std::vector<double> equilibrium;
  std::vector<double> final_state;
};

/// tau_h of the dense semi-discrete generator with global mass deflated.
OracleResult generator_oracle(const Model& m, const SolverConfig& cfg);

/// Evolves the model to t_end, recording diagnostics every `every` steps.
RunResult run_scenario(const Model& m, const RunOptions& opt, const InitSpec& init);

} // namespace hypo
