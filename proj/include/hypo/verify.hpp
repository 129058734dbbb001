#pragma once

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace hypo {

struct PropertyResult {
  std::string suite;
  std::string name;
  bool ok = false;
  std::string detail;
  double seconds = 0.0;
};

struct VerifyOptions {
  std::uint64_t seed = 7;
  bool flip_collision_sign = false; // negative control: L -> -L everywhere
};

const std::vector<std::string>& verify_suites();

/// Runs one suite, or every suite for "all". Unknown names throw InvalidConfig.
std::vector<PropertyResult> run_verify(const std::string& selector, const VerifyOptions& opt);

nlohmann::json verify_report_json(const std::vector<PropertyResult>& results);

} // namespace hypo
