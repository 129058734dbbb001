#include "hypo/io.hpp"

#include "hypo/error.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <unistd.h>

namespace hypo {

namespace fs = std::filesystem;

void preflight_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
  const fs::path probe = fs::path(dir) / (".probe." + std::to_string(::getpid()));
  {
    std::ofstream out(probe);
    if (!out || !(out << "ok")) throw IoError("output directory '" + dir + "' is not writable");
  }
  fs::remove(probe, ec);
}

void write_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  const fs::path tmp = target.parent_path() / ("." + target.filename().string() + ".tmp." + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename into '" + path + "'");
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::json ledger_json(const ConstantsLedger& L) {
  nlohmann::json j;
  j["lambda"] = L.lambda;
  j["lambda_h"] = L.lambda_h;
  j["C_L"] = L.C_L;
  j["C_p"] = L.C_p;
  j["D"] = L.D;
  j["kappa"] = L.kappa;
  j["C_j"] = L.C_j;
  j["K"] = {{"value", L.K}, {"heuristic", true}, {"note", "max over 64 seeded probe densities"}};
  j["D_gamma"] = {{"value", L.D_gamma}, {"heuristic", true}, {"note", "max over 64 seeded probe densities"}};
  j["C_gamma"] = L.C_gamma;
  j["moment_defect"] = L.moment_defect;
  j["potential"] = L.potential;
  j["c_V"] = L.c_V;
  j["C_V"] = L.C_V;
  j["D_V"] = L.D_V;
  j["C_tilde_V"] = L.C_tilde_V;
  j["c"] = L.c;
  j["eta_tilde"] = L.eta_tilde;
  j["eta"] = L.eta;
  static const char* names[3] = {"collision", "boundary", "equivalence"};
  nlohmann::json b = nlohmann::json::object();
  for (int i = 0; i < 3; ++i) b[names[i]] = std::isfinite(L.eta_bound[i]) ? nlohmann::json(L.eta_bound[i]) : nlohmann::json("inf");
  j["eta_bounds"] = b;
  j["eta_binding"] = L.eta_binding >= 0 ? names[L.eta_binding] : "none";
  j["c_eta"] = L.c_eta;
  j["C_eta"] = L.C_eta;
  j["alpha"] = L.alpha;
  j["beta"] = L.beta;
  j["delta"] = L.delta;
  j["omega"] = L.omega;
  j["guaranteed_rate"] = L.C_eta > 0.0 ? L.omega / (2.0 * L.C_eta) : 0.0;
  return j;
}

const std::vector<std::string>& steps_columns() {
  static const std::vector<std::string> c = {
      "step", "t", "mass", "dist", "dist2", "perp2", "rho2", "H", "T1", "T2", "T3", "T4", "T5", "T6",
      "T2_boundary", "dHdt", "bd_left", "bd_right", "flux_left", "flux_right", "ok_equiv", "ok_t3", "ok_t1",
      "ok_t2n", "ok_t2b", "ok_t4", "ok_t5", "ok_gronwall"};
  return c;
}

std::string steps_csv(const RunResult& r) {
  std::string out;
  const auto& cols = steps_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
  out += "\n";
  for (const auto& rec : r.records) {
    const auto& e = rec.r;
    const double vals[] = {e.t,  e.mass, rec.dist, e.dist2, e.perp2, e.rho2,        e.H,    e.T1,      e.T2,
                           e.T3, e.T4,   e.T5,     e.T6,    e.T2_boundary, e.dHdt, e.bd_left, e.bd_right,
                           e.flux_left,  e.flux_right};
    out += std::to_string(rec.step);
    for (double v : vals) out += "," + fmt(v);
    const bool flags[] = {e.equiv_ok, e.t3_ok, e.t1_ok, e.t2n_ok, e.t2b_ok, e.t4_ok, e.t5_ok, e.gronwall_ok};
    for (bool b : flags) out += b ? ",1" : ",0";
    out += "\n";
  }
  return out;
}

namespace {

nlohmann::json fit_json(const std::optional<FitResult>& f) {
  if (!f) return nullptr;
  return {{"C", f->C}, {"tau", f->tau}, {"a", f->a}, {"r2", f->r2}, {"records", f->used}, {"truncated", f->truncated}};
}

} // namespace

nlohmann::json run_summary_json(const RunResult& r, const std::string& scenario) {
  nlohmann::json j;
  j["scenario"] = scenario;
  j["dt"] = r.dt;
  j["steps"] = r.steps;
  j["mass0"] = r.mass0;
  j["max_mass_drift"] = r.max_mass_drift;
  j["max_wall_flux"] = r.max_wall_flux;
  j["max_monotone_excess"] = r.max_monotone_excess;
  j["monotone_violations"] = r.monotone_violations;
  j["equilibrium"] = r.discrete_equilibrium ? "discrete fixed point" : "analytic";
  j["fit_norm"] = fit_json(r.fit_norm);
  j["fit_H"] = fit_json(r.fit_H);
  if (!r.fit_notice.empty()) j["fit_notice"] = r.fit_notice;
  if (r.oracle) {
    j["oracle"] = {{"tau_h", r.oracle->tau_h},
                   {"slowest_re", r.oracle->slowest.real()},
                   {"slowest_im", r.oracle->slowest.imag()}};
    if (r.fit_norm) j["fit_vs_oracle_rel"] = std::abs(r.fit_norm->tau - r.oracle->tau_h) / r.oracle->tau_h;
  } else {
    j["oracle"] = nullptr;
  }
  nlohmann::json fails = nlohmann::json::object();
  for (std::size_t i = 0; i < kFlagNames.size(); ++i) fails[kFlagNames[i]] = r.flag_failures[i];
  j["flag_failures"] = fails;
  j["records"] = r.records.size();
  return j;
}

void emit_run_outputs(const std::string& dir, const RunConfig& cfg, const RunResult& r, const std::string& scenario) {
  preflight_dir(dir);
  const fs::path d(dir);
  write_atomic((d / "steps.csv").string(), steps_csv(r));
  write_atomic((d / "summary.json").string(), run_summary_json(r, scenario).dump(2) + "\n");
  write_atomic((d / "ledger.json").string(), ledger_json(r.ledger).dump(2) + "\n");
  write_atomic((d / "config.echo").string(), echo(cfg));
  std::string plot = "# t log_dist log_sqrt_H\n";
  for (const auto& rec : r.records) {
    if (!(rec.dist > 0.0) || !(rec.r.H > 0.0)) continue;
    plot += fmt(rec.r.t) + " " + fmt(std::log(rec.dist)) + " " + fmt(0.5 * std::log(rec.r.H)) + "\n";
  }
  write_atomic((d / "plot.dat").string(), plot);
}

std::string levels_csv(const HierarchyResult& h) {
  std::string out = "t";
  const std::size_t L = h.norms.size();
  for (std::size_t l = 0; l < L; ++l) out += ",norm_" + std::to_string(l);
  for (std::size_t l = 0; l < L; ++l) out += ",mass_" + std::to_string(l);
  out += "\n";
  for (std::size_t i = 0; i < h.t.size(); ++i) {
    out += fmt(h.t[i]);
    for (std::size_t l = 0; l < L; ++l) out += "," + fmt(h.norms[l][i]);
    for (std::size_t l = 0; l < L; ++l) out += "," + fmt(h.masses[l][i]);
    out += "\n";
  }
  return out;
}

nlohmann::json uq_summary_json(const HierarchyResult& h, const std::optional<FdComparison>& fd) {
  nlohmann::json j;
  j["z"] = h.z;
  j["dt"] = h.dt;
  j["lmax"] = static_cast<int>(h.norms.size()) - 1;
  nlohmann::json levels = nlohmann::json::array();
  for (std::size_t l = 0; l < h.norms.size(); ++l) {
    const auto& c = h.checks[l];
    const auto& e = h.envelopes[l];
    levels.push_back({{"level", l},
                      {"envelope", {{"a_fit", e.a_fit}, {"c0", e.c0}, {"r2", e.r2}, {"positive", e.ok}}},
                      {"records", c.records},
                      {"t1_failures", c.t1_fail},
                      {"source_bound_failures", c.source_fail},
                      {"jsource_bound_failures", c.jsource_fail},
                      {"max_mass_drift", c.max_mass_drift}});
  }
  j["levels"] = levels;
  j["dz_op_norm"] = h.dz_op_norm;
  j["dz_C_L"] = h.dz_CL;
  j["recursion_a"] = h.a_paper;
  j["recursion_b"] = h.b_paper;
  if (fd) j["fd_check"] = {{"delta", fd->delta}, {"level", fd->level}, {"rel_gap", fd->rel_gap}};
  return j;
}

void emit_uq_outputs(const std::string& dir, const RunConfig& cfg, const HierarchyResult& h,
                     const std::optional<FdComparison>& fd) {
  preflight_dir(dir);
  const fs::path d(dir);
  write_atomic((d / "levels.csv").string(), levels_csv(h));
  write_atomic((d / "uq_summary.json").string(), uq_summary_json(h, fd).dump(2) + "\n");
  write_atomic((d / "ledger.json").string(), ledger_json(h.ledger).dump(2) + "\n");
  write_atomic((d / "config.echo").string(), echo(cfg));
}

void emit_kl_outputs(const std::string& dir, const RunConfig& cfg, const KLBasis& basis,
                     const OrthogonalityReport& gram) {
  preflight_dir(dir);
  const fs::path d(dir);
  std::string ev = "k,lambda,cumulative_fraction\n";
  double total = 0.0;
  for (Eigen::Index i = 0; i < basis.lambda.size(); ++i) total += std::max(basis.lambda(i), 0.0);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < basis.lambda.size(); ++i) {
    acc += std::max(basis.lambda(i), 0.0);
    ev += std::to_string(i + 1) + "," + fmt(basis.lambda(i)) + "," + fmt(acc / total) + "\n";
  }
  write_atomic((d / "eigenvalues.csv").string(), ev);
  std::string ef = "t";
  for (int i = 0; i < basis.d; ++i) ef += ",psi_" + std::to_string(i + 1);
  ef += "\n";
  for (Eigen::Index a = 0; a < basis.t.size(); ++a) {
    ef += fmt(basis.t(a));
    for (int i = 0; i < basis.d; ++i) ef += "," + fmt(basis.psi(a, i));
    ef += "\n";
  }
  write_atomic((d / "eigenfunctions.csv").string(), ef);
  nlohmann::json j;
  j["d"] = basis.d;
  j["energy_fraction"] = basis.energy_fraction;
  std::vector<std::vector<double>> g(gram.normalized.rows(), std::vector<double>(gram.normalized.cols()));
  for (Eigen::Index i = 0; i < gram.normalized.rows(); ++i)
    for (Eigen::Index k = 0; k < gram.normalized.cols(); ++k) g[i][k] = gram.normalized(i, k);
  j["gram_normalized"] = g;
  j["max_offdiag"] = gram.max_offdiag;
  j["threshold"] = gram.threshold;
  j["max_diag_z"] = gram.max_diag_z;
  j["offdiag_ok"] = gram.offdiag_ok;
  j["diag_ok"] = gram.diag_ok;
  write_atomic((d / "gram.json").string(), j.dump(2) + "\n");
  write_atomic((d / "config.echo").string(), echo(cfg));
}

} // namespace hypo
