#include "hypo/config.hpp"

#include "hypo/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace hypo {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto r = std::from_chars(v.data(), end, out);
  if (r.ec != std::errc() || r.ptr != end || !std::isfinite(out))
    throw InvalidConfig(key + ": expected a finite number, got '" + v + "'");
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto* end = v.data() + v.size();
  const auto r = std::from_chars(v.data(), end, out);
  if (r.ec != std::errc() || r.ptr != end) throw InvalidConfig(key + ": expected an integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw InvalidConfig(key + ": expected true or false, got '" + v + "'");
}

struct Field {
  std::string name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

Field dbl(const char* name, double RunConfig::*p) {
  return {name, [=](RunConfig& c, const std::string& v) { c.*p = to_double(name, v); },
          [=](const RunConfig& c) { return fmt_double(c.*p); }};
}

Field integer(const char* name, int RunConfig::*p) {
  return {name,
          [=](RunConfig& c, const std::string& v) {
            const long long x = to_int(name, v);
            if (x < -1000000000LL || x > 1000000000LL) throw InvalidConfig(std::string(name) + ": out of range");
            c.*p = static_cast<int>(x);
          },
          [=](const RunConfig& c) { return std::to_string(c.*p); }};
}

Field str(const char* name, std::string RunConfig::*p) {
  return {name, [=](RunConfig& c, const std::string& v) { c.*p = v; }, [=](const RunConfig& c) { return c.*p; }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      {"seed",
       [](RunConfig& c, const std::string& v) {
         const long long x = to_int("seed", v);
         if (x < 0) throw InvalidConfig("seed must be nonnegative");
         c.seed = static_cast<std::uint64_t>(x);
       },
       [](const RunConfig& c) { return std::to_string(c.seed); }},
      str("output.dir", &RunConfig::output_dir),
      integer("mesh.nx", &RunConfig::mesh_nx),
      dbl("mesh.Lx", &RunConfig::mesh_Lx),
      integer("velocity.dim", &RunConfig::velocity_dim),
      integer("velocity.n", &RunConfig::velocity_n),
      dbl("velocity.vmax", &RunConfig::velocity_vmax),
      str("velocity.kind", &RunConfig::velocity_kind),
      str("sigma.family", &RunConfig::sigma_family),
      dbl("sigma.base", &RunConfig::sigma_base),
      dbl("sigma.bump_amp", &RunConfig::sigma_bump_amp),
      dbl("sigma.bump_width", &RunConfig::sigma_bump_width),
      str("sigma.z_coupling", &RunConfig::sigma_z_coupling),
      dbl("sigma.z_coeff", &RunConfig::sigma_z_coeff),
      {"sigma.table",
       [](RunConfig& c, const std::string& v) {
         c.sigma_table.clear();
         std::string tok;
         std::istringstream is(v);
         while (is >> tok) {
           if (tok.back() == ',') tok.pop_back();
           if (!tok.empty()) c.sigma_table.push_back(to_double("sigma.table", tok));
         }
       },
       [](const RunConfig& c) {
         std::string s;
         for (std::size_t i = 0; i < c.sigma_table.size(); ++i) s += (i ? " " : "") + fmt_double(c.sigma_table[i]);
         return s;
       }},
      dbl("sigma.lambda", &RunConfig::sigma_lambda),
      dbl("sigma.c_tilde", &RunConfig::sigma_c_tilde),
      dbl("bc.c", &RunConfig::bc_c),
      str("potential.family", &RunConfig::potential_family),
      dbl("potential.amplitude", &RunConfig::potential_amplitude),
      dbl("solver.dt", &RunConfig::solver_dt),
      dbl("solver.cfl", &RunConfig::solver_cfl),
      dbl("solver.t_end", &RunConfig::solver_t_end),
      str("solver.collision", &RunConfig::solver_collision),
      {"solver.debug_checks",
       [](RunConfig& c, const std::string& v) { c.solver_debug_checks = to_bool("solver.debug_checks", v); },
       [](const RunConfig& c) { return std::string(c.solver_debug_checks ? "true" : "false"); }},
      integer("diagnostics.every", &RunConfig::diagnostics_every),
      dbl("diagnostics.fit_t0", &RunConfig::diagnostics_fit_t0),
      dbl("diagnostics.fit_t1", &RunConfig::diagnostics_fit_t1),
      dbl("diagnostics.transient", &RunConfig::diagnostics_transient),
      str("init.family", &RunConfig::init_family),
      dbl("init.amplitude", &RunConfig::init_amplitude),
      dbl("init.z_slope", &RunConfig::init_z_slope),
      integer("uq.lmax", &RunConfig::uq_lmax),
      dbl("uq.z", &RunConfig::uq_z),
      dbl("uq.fd_delta", &RunConfig::uq_fd_delta),
      str("kl.kernel", &RunConfig::kl_kernel),
      integer("kl.n", &RunConfig::kl_n),
      dbl("kl.T", &RunConfig::kl_T),
      dbl("kl.length", &RunConfig::kl_length),
      dbl("kl.energy", &RunConfig::kl_energy),
      integer("kl.samples", &RunConfig::kl_samples),
  };
  return f;
}

const Field* find_field(const std::string& key) {
  for (const auto& f : fields())
    if (f.name == key) return &f;
  return nullptr;
}

template <class F>
void check_parse(std::vector<std::string>& out, const std::string& where, F&& f) {
  try {
    f();
  } catch (const InvalidConfig& e) {
    out.push_back(where + e.what());
  }
}

[[noreturn]] void throw_all(const std::vector<std::string>& errs) {
  std::string msg = "invalid configuration:";
  for (const auto& e : errs) msg += "\n  " + e;
  throw InvalidConfig(msg);
}

} // namespace

void set_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  const Field* f = find_field(key);
  if (!f) throw InvalidConfig("unknown key '" + key + "'");
  f->set(cfg, value);
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::vector<std::string> errs;
  std::map<std::string, int> seen;
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') {
        errs.push_back(where + "unterminated section header");
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errs.push_back(where + "expected 'key = value'");
      continue;
    }
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!section.empty()) key = section + "." + key;
    if (seen.count(key)) {
      errs.push_back(where + "duplicate key '" + key + "' (first on line " + std::to_string(seen[key]) + ")");
      continue;
    }
    seen[key] = lineno;
    const Field* f = find_field(key);
    if (!f) {
      errs.push_back(where + "unknown key '" + key + "'");
      continue;
    }
    check_parse(errs, where, [&] { f->set(cfg, value); });
  }
  for (auto& e : validate(cfg)) errs.push_back(std::move(e));
  if (!errs.empty()) throw_all(errs);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::vector<std::string> validate(const RunConfig& c) {
  std::vector<std::string> e;
  if (c.mesh_nx < 4) e.push_back("mesh.nx must be at least 4");
  if (!(c.mesh_Lx > 0.0)) e.push_back("mesh.Lx must be positive");
  if (c.velocity_dim != 1 && c.velocity_dim != 2) e.push_back("velocity.dim must be 1 or 2");
  if (c.velocity_n < 4) e.push_back("velocity.n must be at least 4");
  if (c.velocity_n % 2 != 0)
    e.push_back("velocity.n must be even: odd counts put a node at v1 = 0 and break the v -> -v symmetry the "
                "boundary condition relies on");
  check_parse(e, "", [&] {
    if (parse_grid_kind(c.velocity_kind) == GridKind::UniformMidpoint && !(c.velocity_vmax > 0.0))
      throw InvalidConfig("velocity.vmax must be positive");
  });
  check_parse(e, "", [&] {
    if (parse_sigma_family(c.sigma_family) == SigmaFamily::GaussianBump && !(c.sigma_bump_width > 0.0))
      throw InvalidConfig("sigma.bump_width must be positive");
  });
  check_parse(e, "", [&] { parse_z_coupling(c.sigma_z_coupling); });
  if (!(c.bc_c >= 0.0 && c.bc_c <= 1.0)) e.push_back("bc.c must be in [0,1]");
  check_parse(e, "", [&] { parse_potential_family(c.potential_family); });
  if (!(c.solver_dt >= 0.0)) e.push_back("solver.dt must be nonnegative (0 picks the CFL step)");
  if (!(c.solver_cfl > 0.0 && c.solver_cfl <= 0.9)) e.push_back("solver.cfl must be in (0, 0.9]");
  if (!(c.solver_t_end > 0.0)) e.push_back("solver.t_end must be positive");
  check_parse(e, "", [&] { parse_collision_mode(c.solver_collision); });
  if (c.diagnostics_every < 1) e.push_back("diagnostics.every must be at least 1");
  if (!(c.diagnostics_fit_t0 < c.diagnostics_fit_t1)) e.push_back("diagnostics.fit_t0 must be below fit_t1");
  if (!(c.diagnostics_transient >= 0.0 && c.diagnostics_transient < 1.0))
    e.push_back("diagnostics.transient must be in [0, 1)");
  check_parse(e, "", [&] { parse_init_family(c.init_family); });
  if (c.uq_lmax < 0 || c.uq_lmax > 4) e.push_back("uq.lmax must be in [0, 4]");
  if (!(c.uq_fd_delta >= 1e-3 && c.uq_fd_delta <= 1e-1)) e.push_back("uq.fd_delta must be in [1e-3, 1e-1]");
  check_parse(e, "", [&] { parse_kernel_family(c.kl_kernel); });
  if (c.kl_n < 16) e.push_back("kl.n must be at least 16");
  if (!(c.kl_T > 0.0)) e.push_back("kl.T must be positive");
  if (!(c.kl_length > 0.0)) e.push_back("kl.length must be positive");
  if (!(c.kl_energy > 0.0 && c.kl_energy <= 1.0)) e.push_back("kl.energy must be in (0, 1]");
  if (c.kl_samples < 1) e.push_back("kl.samples must be at least 1");
  return e;
}

std::string echo(const RunConfig& cfg) {
  std::string out;
  for (const auto& f : fields()) out += f.name + " = " + f.get(cfg) + "\n";
  return out;
}

GridPtr grid_from(const RunConfig& c) {
  return make_grid(c.velocity_dim, c.velocity_n, c.velocity_vmax, parse_grid_kind(c.velocity_kind));
}

CrossSectionSpec sigma_from(const RunConfig& c) {
  CrossSectionSpec s;
  s.family = parse_sigma_family(c.sigma_family);
  s.base = c.sigma_base;
  s.bump_amp = c.sigma_bump_amp;
  s.bump_width = c.sigma_bump_width;
  s.z_coupling = parse_z_coupling(c.sigma_z_coupling);
  s.z_coeff = c.sigma_z_coeff;
  s.table = c.sigma_table;
  s.lambda = c.sigma_lambda;
  s.c_tilde = c.sigma_c_tilde;
  return s;
}

Model model_from(const RunConfig& c, bool with_potential, double z) {
  Model m;
  m.mesh = make_mesh(c.mesh_nx, c.mesh_Lx);
  m.grid = grid_from(c);
  m.kernel = assemble_kernel(sigma_from(c), m.grid, z);
  m.bc = make_bc(c.bc_c, *m.grid);
  const auto fam = parse_potential_family(c.potential_family);
  if (with_potential && fam != PotentialFamily::Zero) m.potential = make_potential(fam, c.potential_amplitude, m.mesh);
  return m;
}

SolverConfig solver_from(const RunConfig& c) {
  SolverConfig s;
  s.dt = c.solver_dt;
  s.cfl = c.solver_cfl;
  s.t_end = c.solver_t_end;
  s.mode = parse_collision_mode(c.solver_collision);
  s.debug_checks = c.solver_debug_checks;
  return s;
}

InitSpec init_from(const RunConfig& c) {
  InitSpec i;
  i.family = parse_init_family(c.init_family);
  i.amplitude = c.init_amplitude;
  i.z_slope = c.init_z_slope;
  i.seed = c.seed;
  return i;
}

RunOptions run_options_from(const RunConfig& c) {
  RunOptions o;
  o.solver = solver_from(c);
  o.every = c.diagnostics_every;
  o.fit_t0 = c.diagnostics_fit_t0;
  o.fit_t1 = c.diagnostics_fit_t1;
  o.transient = c.diagnostics_transient;
  o.seed = c.seed;
  return o;
}

HierarchyOptions hierarchy_from(const RunConfig& c) {
  HierarchyOptions h;
  h.lmax = c.uq_lmax;
  h.solver = solver_from(c);
  h.every = c.diagnostics_every;
  h.init = init_from(c);
  h.fit_t0 = c.diagnostics_fit_t0;
  h.transient = c.diagnostics_transient;
  h.seed = c.seed;
  return h;
}

CovarianceKernel kl_kernel_from(const RunConfig& c) {
  CovarianceKernel k;
  k.family = parse_kernel_family(c.kl_kernel);
  k.T = c.kl_T;
  k.length = c.kl_length;
  return k;
}

} // namespace hypo
