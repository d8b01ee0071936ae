#include "flatflow/run_config.hpp"

#include "flatflow/errors.hpp"
#include "flatflow/geometry.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace flatflow {

using json = nlohmann::ordered_json;

ViscosityModel ViscositySpec::build() const {
  switch (viscosity_family_from_string(family)) {
    case ViscosityFamily::power_sum: return ViscosityModel::power_sum(nu, d);
    case ViscosityFamily::power_shift: return ViscosityModel::power_shift(nu, d);
    case ViscosityFamily::newtonian: return ViscosityModel::newtonian(nu);
    case ViscosityFamily::table: return ViscosityModel::table(table_s, table_mu);
  }
  return {};
}

namespace {

void append(std::vector<std::string>& out, const std::vector<std::string>& more, const std::string& prefix = "") {
  for (const auto& m : more) out.push_back(prefix + m);
}

void viscosity_errors(const ViscositySpec& v, const std::string& where, std::vector<std::string>& errs) {
  ViscosityFamily fam;
  try {
    fam = viscosity_family_from_string(v.family);
  } catch (const ConfigError& e) {
    append(errs, e.rules(), where + ".");
    return;
  }
  if (fam != ViscosityFamily::table) {
    append(errs, ViscosityModel::admission_errors(fam, v.nu, v.d), where + ".");
    return;
  }
  try {
    const ViscosityModel m = v.build();
    if (!(m.mu0() > 0.0)) errs.push_back(where + ".viscosity.table must give mu(0) > 0");
  } catch (const ConfigError& e) {
    append(errs, e.rules(), where + ".");
  } catch (const DomainError& e) {
    errs.push_back(where + ".viscosity.table: " + e.what());
  }
}

void mode_errors(const std::array<int, 2>& k, const StripGrid& g, const std::string& where,
                 std::vector<std::string>& errs) {
  if (g.dim == 2 && k[1] != 0) errs.push_back(where + ".k[1] must be 0 for dim = 2");
  for (int j : k)
    if (std::abs(j) >= g.n_h / 2) {
      errs.push_back(where + ".k must satisfy |k| < n_h / 2");
      break;
    }
}

double mode_phase(const StripGrid& g, const std::array<int, 2>& k, int col) {
  double arg = k[0] * g.column_coord(col, 0);
  if (g.dim == 3) arg += k[1] * g.column_coord(col, 1);
  return arg / g.L_h;
}

}  // namespace

std::vector<std::string> RunConfig::errors() const {
  std::vector<std::string> errs;
  bool grid_ok = true;
  try {
    grid.validate();
  } catch (const ConfigError& e) {
    append(errs, e.rules());
    grid_ok = false;
  }
  try {
    time.validate();
  } catch (const ConfigError& e) {
    append(errs, e.rules());
  }
  if (!(lower.rho > 0.0)) errs.push_back("phase.1.rho must be > 0");
  if (!(upper.rho > 0.0)) errs.push_back("phase.2.rho must be > 0");
  viscosity_errors(lower.viscosity, "phase.1", errs);
  viscosity_errors(upper.viscosity, "phase.2", errs);
  if (!(sigma > 0.0)) errs.push_back("sigma must be > 0");
  if (!(gamma_a >= 0.0)) errs.push_back("gamma_a must be >= 0");
  append(errs, solver.errors());
  append(errs, norms.errors(grid.dim));
  if (output.cadence < 1) errs.push_back("output.cadence must be >= 1");
  for (const auto& f : output.formats)
    if (f != "csv" && f != "binary") errs.push_back("output.formats: unknown format '" + f + "' (csv, binary)");
  if (output.dir.empty()) errs.push_back("output.dir must not be empty");

  if (grid_ok) {
    for (std::size_t i = 0; i < initial.h0.size(); ++i)
      mode_errors(initial.h0[i].k, grid, "initial.h0[" + std::to_string(i) + "]", errs);
    for (std::size_t i = 0; i < initial.u0.size(); ++i)
      mode_errors(initial.u0[i].k, grid, "initial.u0[" + std::to_string(i) + "]", errs);
    const double hmax = initial_height().max_abs();
    if (!std::isfinite(hmax) || hmax >= grid.L_v) {
      std::ostringstream os;
      os << "initial.h0: interface must stay inside the strip, max|h0| = " << hmax << " >= grid.L_v = " << grid.L_v;
      errs.push_back(os.str());
    }
  }
  return errs;
}

void RunConfig::validate() const {
  if (auto e = errors(); !e.empty()) throw ConfigError(e);
}

PhasePair RunConfig::phases() const {
  PhasePair pp;
  pp.rho1 = lower.rho;
  pp.rho2 = upper.rho;
  pp.model1 = lower.viscosity.build();
  pp.model2 = upper.viscosity.build();
  pp.gamma_a = gamma_a;
  pp.sigma = sigma;
  return pp;
}

SurfaceField RunConfig::initial_height() const {
  SurfaceField h(grid, 1);
  for (const auto& m : initial.h0)
    for (int col = 0; col < grid.columns(); ++col) {
      const double arg = mode_phase(grid, m.k, col);
      h(0, col) += m.cos_amp * std::cos(arg) + m.sin_amp * std::sin(arg);
    }
  return h;
}

TwoPhaseField RunConfig::initial_velocity() const {
  const SurfaceField h0 = initial_height();
  TwoPhaseField u(grid, grid.dim);
  if (initial.u0.empty()) return u;
  const int vert = grid.dim - 1;
  const double ell = grid.L_v - h0.max_abs();
  for (Phase p : kPhases)
    for (int col = 0; col < grid.columns(); ++col)
      for (int i = 0; i < grid.n_v; ++i) {
        const double z = grid.xi(p, i) + h0(0, col);
        const double s = z / ell;
        if (std::abs(s) >= 1.0) continue;
        const double w = std::pow(1.0 - s * s, 3);
        const double dw = -6.0 * s / ell * (1.0 - s * s) * (1.0 - s * s);
        for (const auto& m : initial.u0) {
          const double arg = mode_phase(grid, m.k, col);
          u(p, 0, i, col) += m.amplitude * std::sin(arg) * dw;
          u(p, vert, i, col) -= m.amplitude * (m.k[0] / grid.L_h) * std::cos(arg) * w;
        }
      }
  return u;
}

namespace {

/// Reads known keys of one JSON object into typed fields and records every
/// problem instead of stopping at the first.
class Reader {
 public:
  explicit Reader(std::vector<std::string>& errs) : errs_(errs) {}

  bool object(const json& j, const std::string& path) {
    if (j.is_object()) return true;
    errs_.push_back(path + " must be an object");
    return false;
  }

  void known_keys(const json& j, const std::string& path, std::set<std::string> allowed) {
    for (auto it = j.begin(); it != j.end(); ++it)
      if (!allowed.count(it.key())) errs_.push_back("unknown key '" + join(path, it.key()) + "'");
  }

  template <class T>
  void get(const json& j, const std::string& path, const char* key, T& out) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    try {
      if constexpr (std::is_same_v<T, int>) {
        if (!v.is_number_integer()) throw std::invalid_argument("integer");
      } else if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw std::invalid_argument("number");
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw std::invalid_argument("boolean");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw std::invalid_argument("string");
      }
      out = v.get<T>();
    } catch (const std::exception& e) {
      errs_.push_back(join(path, key) + " has the wrong type (expected " + expected<T>() + ")");
    }
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

 private:
  template <class T>
  static std::string expected() {
    if constexpr (std::is_same_v<T, int>) return "integer";
    else if constexpr (std::is_same_v<T, double>) return "number";
    else if constexpr (std::is_same_v<T, bool>) return "boolean";
    else if constexpr (std::is_same_v<T, std::string>) return "string";
    else return "array";
  }

  std::vector<std::string>& errs_;
};

void read_mode_index(Reader& r, const json& j, const std::string& path, std::array<int, 2>& k,
                     std::vector<std::string>& errs) {
  if (!j.contains("k")) return;
  std::vector<int> v;
  r.get(j, path, "k", v);
  if (v.empty() || v.size() > 2) {
    errs.push_back(path + ".k must list 1 or 2 integers");
    return;
  }
  k = {v[0], v.size() > 1 ? v[1] : 0};
}

void read_phase(Reader& r, const json& j, const std::string& path, PhaseSpec& ph) {
  if (!r.object(j, path)) return;
  r.known_keys(j, path, {"rho", "viscosity"});
  r.get(j, path, "rho", ph.rho);
  if (!j.contains("viscosity")) return;
  const json& v = j.at("viscosity");
  const std::string vp = path + ".viscosity";
  if (!r.object(v, vp)) return;
  r.known_keys(v, vp, {"family", "nu", "d", "table_s", "table_mu"});
  r.get(v, vp, "family", ph.viscosity.family);
  r.get(v, vp, "nu", ph.viscosity.nu);
  r.get(v, vp, "d", ph.viscosity.d);
  r.get(v, vp, "table_s", ph.viscosity.table_s);
  r.get(v, vp, "table_mu", ph.viscosity.table_mu);
}

json phase_json(const PhaseSpec& ph) {
  json v;
  v["family"] = ph.viscosity.family;
  v["nu"] = ph.viscosity.nu;
  v["d"] = ph.viscosity.d;
  v["table_s"] = ph.viscosity.table_s;
  v["table_mu"] = ph.viscosity.table_mu;
  json j;
  j["rho"] = ph.rho;
  j["viscosity"] = v;
  return j;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("parse error: ") + e.what());
  }
  std::vector<std::string> errs;
  Reader r(errs);
  RunConfig cfg;
  if (!r.object(doc, "config")) throw ConfigError(errs);
  r.known_keys(doc, "", {"grid", "time", "phase", "sigma", "gamma_a", "initial", "solver", "norms", "output"});

  if (doc.contains("grid") && r.object(doc["grid"], "grid")) {
    const json& j = doc["grid"];
    r.known_keys(j, "grid", {"dim", "n_h", "n_v", "L_h", "L_v"});
    r.get(j, "grid", "dim", cfg.grid.dim);
    r.get(j, "grid", "n_h", cfg.grid.n_h);
    r.get(j, "grid", "n_v", cfg.grid.n_v);
    r.get(j, "grid", "L_h", cfg.grid.L_h);
    r.get(j, "grid", "L_v", cfg.grid.L_v);
  }
  if (doc.contains("time") && r.object(doc["time"], "time")) {
    const json& j = doc["time"];
    r.known_keys(j, "time", {"a", "n_t"});
    r.get(j, "time", "a", cfg.time.a);
    r.get(j, "time", "n_t", cfg.time.n_t);
  }
  if (doc.contains("phase") && r.object(doc["phase"], "phase")) {
    const json& j = doc["phase"];
    r.known_keys(j, "phase", {"1", "2"});
    if (j.contains("1")) read_phase(r, j["1"], "phase.1", cfg.lower);
    if (j.contains("2")) read_phase(r, j["2"], "phase.2", cfg.upper);
  }
  r.get(doc, "", "sigma", cfg.sigma);
  r.get(doc, "", "gamma_a", cfg.gamma_a);
  if (doc.contains("initial") && r.object(doc["initial"], "initial")) {
    const json& j = doc["initial"];
    r.known_keys(j, "initial", {"h0", "u0"});
    if (j.contains("h0")) {
      if (!j["h0"].is_array()) errs.push_back("initial.h0 must be an array of modes");
      else
        for (std::size_t i = 0; i < j["h0"].size(); ++i) {
          const std::string path = "initial.h0[" + std::to_string(i) + "]";
          const json& m = j["h0"][i];
          if (!r.object(m, path)) continue;
          r.known_keys(m, path, {"k", "cos", "sin"});
          HeightMode hm;
          read_mode_index(r, m, path, hm.k, errs);
          r.get(m, path, "cos", hm.cos_amp);
          r.get(m, path, "sin", hm.sin_amp);
          cfg.initial.h0.push_back(hm);
        }
    }
    if (j.contains("u0")) {
      if (!j["u0"].is_array()) errs.push_back("initial.u0 must be an array of stream-function modes");
      else
        for (std::size_t i = 0; i < j["u0"].size(); ++i) {
          const std::string path = "initial.u0[" + std::to_string(i) + "]";
          const json& m = j["u0"][i];
          if (!r.object(m, path)) continue;
          r.known_keys(m, path, {"k", "amplitude"});
          StreamMode sm;
          read_mode_index(r, m, path, sm.k, errs);
          r.get(m, path, "amplitude", sm.amplitude);
          cfg.initial.u0.push_back(sm);
        }
    }
  }
  if (doc.contains("solver") && r.object(doc["solver"], "solver")) {
    const json& j = doc["solver"];
    r.known_keys(j, "solver", {"max_iter", "tol", "delta0_guard", "compat_tol", "dealias"});
    r.get(j, "solver", "max_iter", cfg.solver.max_iter);
    r.get(j, "solver", "tol", cfg.solver.tol);
    r.get(j, "solver", "delta0_guard", cfg.solver.delta0_guard);
    r.get(j, "solver", "compat_tol", cfg.solver.compat_tol);
    r.get(j, "solver", "dealias", cfg.solver.dealias);
  }
  if (doc.contains("norms") && r.object(doc["norms"], "norms")) {
    const json& j = doc["norms"];
    r.known_keys(j, "norms", {"p"});
    r.get(j, "norms", "p", cfg.norms.p);
  }
  if (doc.contains("output") && r.object(doc["output"], "output")) {
    const json& j = doc["output"];
    r.known_keys(j, "output", {"dir", "cadence", "formats"});
    r.get(j, "output", "dir", cfg.output.dir);
    r.get(j, "output", "cadence", cfg.output.cadence);
    r.get(j, "output", "formats", cfg.output.formats);
  }

  append(errs, cfg.errors());
  if (!errs.empty()) throw ConfigError(errs);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& cfg) {
  json doc;
  doc["grid"] = {{"dim", cfg.grid.dim}, {"n_h", cfg.grid.n_h}, {"n_v", cfg.grid.n_v}, {"L_h", cfg.grid.L_h},
                 {"L_v", cfg.grid.L_v}};
  doc["time"] = {{"a", cfg.time.a}, {"n_t", cfg.time.n_t}};
  doc["phase"] = {{"1", phase_json(cfg.lower)}, {"2", phase_json(cfg.upper)}};
  doc["sigma"] = cfg.sigma;
  doc["gamma_a"] = cfg.gamma_a;
  json h0 = json::array();
  for (const auto& m : cfg.initial.h0) h0.push_back({{"k", m.k}, {"cos", m.cos_amp}, {"sin", m.sin_amp}});
  json u0 = json::array();
  for (const auto& m : cfg.initial.u0) u0.push_back({{"k", m.k}, {"amplitude", m.amplitude}});
  doc["initial"] = {{"h0", h0}, {"u0", u0}};
  doc["solver"] = {{"max_iter", cfg.solver.max_iter},
                   {"tol", cfg.solver.tol},
                   {"delta0_guard", cfg.solver.delta0_guard},
                   {"compat_tol", cfg.solver.compat_tol},
                   {"dealias", cfg.solver.dealias}};
  doc["norms"] = {{"p", cfg.norms.p}};
  doc["output"] = {{"dir", cfg.output.dir}, {"cadence", cfg.output.cadence}, {"formats", cfg.output.formats}};
  return doc.dump(2) + "\n";
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 digest failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

std::string config_hash(const RunConfig& cfg) { return sha256_hex(serialize_config(cfg)); }

}  // namespace flatflow
