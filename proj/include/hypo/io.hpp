#pragma once

#include "hypo/config.hpp"
#include "hypo/kl_expansion.hpp"
#include "hypo/runner.hpp"
#include "hypo/uq_hierarchy.hpp"

#include <json.hpp>

#include <optional>
#include <string>

namespace hypo {

/// Creates `dir` if needed and proves it writable; throws IoError otherwise.
void preflight_dir(const std::string& dir);

/// Writes to a temporary sibling then renames over `path`.
void write_atomic(const std::string& path, const std::string& content);

/// Shortest text that reads back to the same double.
std::string fmt(double v);

nlohmann::json ledger_json(const ConstantsLedger& L);

/// Header of steps.csv, in column order.
const std::vector<std::string>& steps_columns();
std::string steps_csv(const RunResult& r);
nlohmann::json run_summary_json(const RunResult& r, const std::string& scenario);

/// steps.csv, summary.json, ledger.json, config.echo and plot.dat.
void emit_run_outputs(const std::string& dir, const RunConfig& cfg, const RunResult& r, const std::string& scenario);

struct FdComparison {
  double delta = 0.0;
  int level = 1;
  double rel_gap = 0.0;
};

std::string levels_csv(const HierarchyResult& h);
nlohmann::json uq_summary_json(const HierarchyResult& h, const std::optional<FdComparison>& fd);
/// levels.csv, uq_summary.json, ledger.json and config.echo.
void emit_uq_outputs(const std::string& dir, const RunConfig& cfg, const HierarchyResult& h,
                     const std::optional<FdComparison>& fd);

/// eigenvalues.csv, eigenfunctions.csv (first d), gram.json and config.echo.
void emit_kl_outputs(const std::string& dir, const RunConfig& cfg, const KLBasis& basis,
                     const OrthogonalityReport& gram);

} // namespace hypo
