#include "flatflow/run.hpp"

#include "flatflow/errors.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>

namespace flatflow {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string code_version() { return "0.1.0"; }

std::size_t Table::column(const std::string& name) const {
  for (std::size_t c = 0; c < columns.size(); ++c)
    if (columns[c].rfind(name, 0) == 0) return c;
  throw ConfigError("table has no column '" + name + "'");
}

void Table::add_row(std::initializer_list<double> row) { values.insert(values.end(), row.begin(), row.end()); }

void Table::add_row(const std::vector<double>& row) { values.insert(values.end(), row.begin(), row.end()); }

void write_text(const Table& t, const fs::path& path, char delimiter) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  for (std::size_t c = 0; c < t.columns.size(); ++c) out << (c ? std::string(1, delimiter) : "") << t.columns[c];
  out << '\n';
  char buf[32];
  for (std::size_t r = 0; r < t.rows(); ++r) {
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", t.at(r, c));
      if (c) out << delimiter;
      out << buf;
    }
    out << '\n';
  }
}

Table read_text(const fs::path& path, char delimiter) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
  Table t;
  std::string line;
  if (!std::getline(in, line)) return t;
  std::stringstream header(line);
  for (std::string cell; std::getline(header, cell, delimiter);) t.columns.push_back(cell);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::size_t count = 0;
    for (std::string cell; std::getline(row, cell, delimiter); ++count) t.values.push_back(std::strtod(cell.c_str(), nullptr));
    if (count != t.columns.size()) throw std::runtime_error("ragged row in '" + path.string() + "'");
  }
  return t;
}

namespace {

constexpr char kMagic[8] = {'F', 'F', 'T', 'A', 'B', 'L', 'E', '1'};

template <class T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T take(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw std::runtime_error("truncated binary table");
  return v;
}

}  // namespace

void write_binary(const Table& t, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(t.columns.size()));
  put<std::uint64_t>(out, t.rows());
  for (const auto& name : t.columns) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
  }
  out.write(reinterpret_cast<const char*>(t.values.data()), static_cast<std::streamsize>(t.values.size() * sizeof(double)));
}

Table read_binary(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
  char magic[sizeof kMagic];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw std::runtime_error("not a binary table: " + path.string());
  Table t;
  const auto ncols = take<std::uint32_t>(in);
  const auto nrows = take<std::uint64_t>(in);
  for (std::uint32_t c = 0; c < ncols; ++c) {
    std::string name(take<std::uint32_t>(in), '\0');
    in.read(name.data(), static_cast<std::streamsize>(name.size()));
    t.columns.push_back(name);
  }
  t.values.resize(static_cast<std::size_t>(nrows) * ncols);
  in.read(reinterpret_cast<char*>(t.values.data()), static_cast<std::streamsize>(t.values.size() * sizeof(double)));
  if (!in) throw std::runtime_error("truncated binary table: " + path.string());
  return t;
}

void write_records(const Table& t, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  for (std::size_t r = 0; r < t.rows(); ++r) {
    json rec;
    for (std::size_t c = 0; c < t.columns.size(); ++c) rec[t.columns[c]] = t.at(r, c);
    out << rec.dump() << '\n';
  }
}

namespace {

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_json(const json& j, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

std::vector<std::string> position_columns(const StripGrid& g) {
  std::vector<std::string> cols{"t [time]"};
  for (int d = 0; d < g.dim - 1; ++d) cols.push_back("x" + std::to_string(d) + " [length]");
  return cols;
}

std::vector<double> position_row(const StripGrid& g, double t, int col) {
  std::vector<double> row{t};
  for (int d = 0; d < g.dim - 1; ++d) row.push_back(g.column_coord(col, d));
  return row;
}

int first_mode_index(const StripGrid& g) {
  for (int m = 0; m < g.modes(); ++m) {
    bool hit = g.mode_index(m, 0) == 1;
    if (g.dim == 3) hit = hit && g.mode_index(m, 1) == 0;
    if (hit) return m;
  }
  return 1;
}

Table height_table(const StateZ& z) {
  const StripGrid& g = z.grid;
  Table t;
  t.columns = position_columns(g);
  t.columns.push_back("h [length]");
  for (int n = 0; n < z.time.nodes(); ++n)
    for (int col = 0; col < g.columns(); ++col) {
      auto row = position_row(g, z.time.t(n), col);
      row.push_back(z.h[n](0, col));
      t.add_row(row);
    }
  return t;
}

Table spectrum_table(const StateZ& z, bool first_only) {
  const StripGrid& g = z.grid;
  Table t;
  t.columns = {"t [time]"};
  for (int d = 0; d < g.dim - 1; ++d) t.columns.push_back("k" + std::to_string(d) + " [1/length]");
  t.columns.push_back("|h_hat| [length]");
  const int first = first_mode_index(g);
  for (int n = 0; n < z.time.nodes(); ++n) {
    const SurfaceSpectrum spec = surface_spectrum(z.h[n]);
    for (int m = 0; m < g.modes(); ++m) {
      if (first_only && m != first) continue;
      std::vector<double> row{z.time.t(n)};
      for (int d = 0; d < g.dim - 1; ++d) row.push_back(g.wavenumber(m, d));
      row.push_back(std::abs(spec[0][m]));
      t.add_row(row);
    }
  }
  return t;
}

Table interface_table(const PhasePair& phases, const StateZ& z, const NonlinearOptions& nl) {
  const StripGrid& g = z.grid;
  const int N = g.dim;
  const int vert = N - 1;
  Table t;
  t.columns = position_columns(g);
  t.columns.push_back("pressure_jump [stress]");
  for (int c = 0; c < N; ++c) t.columns.push_back("G" + std::to_string(c) + " [stress]");
  for (int c = 0; c < N; ++c) t.columns.push_back("stress_row_residual" + std::to_string(c) + " [stress]");
  t.columns.push_back("kinematic_residual [length/time]");
  const std::vector<SurfaceField> dh = time_derivative(z.h, z.time);
  for (int n = 0; n < z.time.nodes(); ++n) {
    const HeightField h(z.h[n]);
    SurfaceField G = eval_G(phases, z.u[n], z.pi[n], h);
    SurfaceField gh = eval_Gh(z.u[n], h);
    if (nl.dealias) {
      dealias(G);
      dealias(gh);
    }
    const SurfaceField R = interface_row_residual(phases, z.u[n], z.pi[n], z.h[n], nl);
    const SurfaceField kin = dh[n] - z.u[n].extract(vert).trace(Phase::lower) - gh;
    for (int col = 0; col < g.columns(); ++col) {
      auto row = position_row(g, z.time.t(n), col);
      row.push_back(z.pi[n](0, col));
      for (int c = 0; c < N; ++c) row.push_back(G(c, col));
      for (int c = 0; c < N; ++c) row.push_back(R(c, col));
      row.push_back(kin(0, col));
      t.add_row(row);
    }
  }
  return t;
}

Table velocity_table(const StateZ& z, int cadence) {
  const StripGrid& g = z.grid;
  const int N = g.dim;
  Table t;
  t.columns = position_columns(g);
  t.columns.insert(t.columns.begin() + 1, "phase [1]");
  t.columns.push_back("xi_N [length]");
  t.columns.push_back("x_N [length]");
  for (int c = 0; c < N; ++c) t.columns.push_back("u" + std::to_string(c) + " [length/time]");
  t.columns.push_back("theta [stress]");
  const int last = z.time.nodes() - 1;
  for (int n = 0; n <= last; ++n) {
    if (n % cadence != 0 && n != last) continue;
    for (Phase p : kPhases)
      for (int i = 0; i < g.n_v; ++i)
        for (int col = 0; col < g.columns(); ++col) {
          auto row = position_row(g, z.time.t(n), col);
          row.insert(row.begin() + 1, phase_index(p) + 1.0);
          row.push_back(g.xi(p, i));
          row.push_back(g.xi(p, i) + z.h[n](0, col));
          for (int c = 0; c < N; ++c) row.push_back(z.u[n](p, c, i, col));
          row.push_back(z.theta[n](p, 0, i, col));
          t.add_row(row);
        }
  }
  return t;
}

Table convergence_table(const ConvergenceReport& rep) {
  Table t;
  t.columns = {"iteration [1]", "residual [1]", "ratio [1]", "z_norm [E]", "n_norm [F]"};
  for (std::size_t m = 0; m < rep.iterations.size(); ++m) {
    const auto& it = rep.iterations[m];
    t.add_row({static_cast<double>(m + 1), it.residual, it.ratio, it.z_norm, it.n_norm});
  }
  return t;
}

void store(const Table& t, const fs::path& dir, const std::string& name, const std::vector<std::string>& formats) {
  for (const auto& f : formats) {
    if (f == "csv") write_text(t, dir / (name + ".csv"));
    if (f == "binary") write_binary(t, dir / (name + ".bin"));
  }
}

json compatibility_json(const CompatibilityReport& c) {
  return {{"pass", c.pass()},
          {"pass_interface_form", c.pass_conditions()},
          {"tangential_stress_jump", c.tangential_max},
          {"tangential_stress_jump_interface_form", c.tangential_from_conditions_max},
          {"stress_scale", c.stress_scale},
          {"divergence", c.divergence},
          {"velocity_jump", c.velocity_jump},
          {"max_pressure_jump", c.theta_jump.max_abs()}};
}

json e_json(const ENorms& e) {
  return {{"velocity", e.velocity},
          {"pressure", e.pressure},
          {"jump", e.jump},
          {"height_parts", e.height_parts},
          {"height", e.height},
          {"total", e.total()}};
}

json f_json(const FNorms& f) {
  return {{"momentum", f.momentum},
          {"divergence", f.divergence},
          {"interface", f.interface},
          {"kinematic", f.kinematic},
          {"total", f.total()}};
}

}  // namespace

RunOutcome run(const RunConfig& config, const fs::path& dir_in) {
  config.validate();
  const std::string started = utc_now();
  RunOutcome out;
  out.dir = dir_in.empty() ? fs::path(config.output.dir) : dir_in;
  fs::create_directories(out.dir);
  {
    std::ofstream cfg(out.dir / "config.json", std::ios::binary);
    cfg << serialize_config(config);
  }

  const PhasePair phases = config.phases();
  const SurfaceField h0 = config.initial_height();
  const TwoPhaseField u0 = config.initial_velocity();
  out.result = picard_solve(phases, u0, h0, config.time, config.solver, config.norms);
  out.status = out.result.report.status;
  const ConvergenceReport& rep = out.result.report;
  write_json(compatibility_json(out.result.compatibility), out.dir / "compatibility.json");

  json norms;
  if (out.status != SolveStatus::incompatible) {
    const StateZ& z = out.result.z;
    const NonlinearOptions nl{config.solver.dealias};
    store(height_table(z), out.dir, "h", config.output.formats);
    store(spectrum_table(z, false), out.dir, "spectrum", config.output.formats);
    store(spectrum_table(z, true), out.dir, "first_mode", config.output.formats);
    store(velocity_table(z, config.output.cadence), out.dir, "velocity", config.output.formats);
    store(convergence_table(rep), out.dir, "convergence", config.output.formats);
    try {
      store(interface_table(phases, z, nl), out.dir, "interface", config.output.formats);
      norms["nonlinearity"] = f_json(norm_F_spaces(eval_N(phases, z, nl), config.norms));
    } catch (const DomainError& e) {
      norms["nonlinearity"] = std::string("unavailable: ") + e.what();
    }
    norms["solution"] = e_json(norm_E_spaces(z, config.norms));
    const INorms in = norm_I(u0, h0, config.norms);
    norms["initial"] = {{"velocity", in.velocity}, {"height", in.height}, {"total", in.total()}};
    norms["linv_estimate"] = rep.linv_estimate;
    json desc = json::object();
    for (const auto& [name, meaning] : norm_surrogates()) desc[name] = meaning;
    norms["surrogates"] = desc;
    write_json(norms, out.dir / "norms.json");
  }

  json manifest;
  manifest["config_hash"] = config_hash(config);
  manifest["code_version"] = code_version();
  manifest["status"] = to_string(out.status);
  manifest["exit_code"] = exit_code(out.status);
  manifest["message"] = rep.message;
  manifest["iterations"] = rep.iterations.size();
  manifest["final_residual"] = rep.iterations.empty() ? 0.0 : rep.iterations.back().residual;
  manifest["linv_estimate"] = rep.linv_estimate;
  manifest["initial_norm"] = rep.initial_norm;
  manifest["interface_residuals"] = {{"tangential", rep.interface.tangential},
                                     {"normal", rep.interface.normal},
                                     {"kinematic", rep.interface.kinematic},
                                     {"tolerance", rep.interface_tolerance},
                                     {"consistent", rep.interface_consistent}};
  if (norms.contains("solution")) manifest["final_norms"] = norms["solution"];
  manifest["timestamps"] = {{"started", started}, {"finished", utc_now()}};
  write_json(manifest, out.dir / "manifest.json");
  return out;
}

std::vector<std::string> series_quantities() {
  return {"h", "spectrum", "first_mode", "interface", "velocity", "convergence"};
}

Table load_series(const fs::path& run_dir, const std::string& quantity) {
  bool known = false;
  for (const auto& q : series_quantities()) known = known || q == quantity;
  if (!known) {
    std::string list;
    for (const auto& q : series_quantities()) list += (list.empty() ? "" : ", ") + q;
    throw ConfigError("unknown quantity '" + quantity + "' (" + list + ")");
  }
  if (fs::exists(run_dir / (quantity + ".csv"))) return read_text(run_dir / (quantity + ".csv"));
  if (fs::exists(run_dir / (quantity + ".bin"))) return read_binary(run_dir / (quantity + ".bin"));
  throw std::runtime_error("run directory '" + run_dir.string() + "' has no stored '" + quantity + "' series");
}

fs::path export_series(const fs::path& run_dir, const std::string& quantity, const std::string& format,
                       const fs::path& out) {
  if (format != "csv" && format != "tsv" && format != "binary" && format != "jsonl")
    throw ConfigError("unknown export format '" + format + "' (csv, tsv, binary, jsonl)");
  const Table t = load_series(run_dir, quantity);
  const std::string ext = format == "binary" ? "bin" : format;
  const fs::path target = out.empty() ? run_dir / ("export_" + quantity + "." + ext) : out;
  if (format == "csv") write_text(t, target, ',');
  if (format == "tsv") write_text(t, target, '\t');
  if (format == "binary") write_binary(t, target);
  if (format == "jsonl") write_records(t, target);
  return target;
}

}  // namespace flatflow
