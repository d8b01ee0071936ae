/// @file run.hpp
/// @brief Run orchestration and the on-disk artifacts of a run.
///
/// A run directory holds config.json, manifest.json, compatibility.json,
/// norms.json and the numeric tables h, spectrum, first_mode, interface,
/// velocity and convergence as CSV (and optionally binary) files.
#pragma once

#include "flatflow/fixedpoint.hpp"
#include "flatflow/run_config.hpp"

#include <filesystem>
#include <initializer_list>
#include <string>
#include <vector>

namespace flatflow {

/// Column-named numeric table stored row-major.
struct Table {
  std::vector<std::string> columns;
  std::vector<double> values;

  std::size_t rows() const { return columns.empty() ? 0 : values.size() / columns.size(); }
  double at(std::size_t row, std::size_t col) const { return values[row * columns.size() + col]; }
  /// Index of the column whose name starts with `name`; throws ConfigError if absent.
  std::size_t column(const std::string& name) const;
  void add_row(std::initializer_list<double> row);
  void add_row(const std::vector<double>& row);
};

/// Delimiter-separated text, values printed with %.17g.
void write_text(const Table& t, const std::filesystem::path& path, char delimiter = ',');
Table read_text(const std::filesystem::path& path, char delimiter = ',');
/// Little-endian binary: magic, column names, row-major doubles.
void write_binary(const Table& t, const std::filesystem::path& path);
Table read_binary(const std::filesystem::path& path);
/// One JSON object per row.
void write_records(const Table& t, const std::filesystem::path& path);

struct RunOutcome {
  SolveStatus status = SolveStatus::max_iter;
  std::filesystem::path dir;
  PicardResult result;
};

/// Compatibility check, Picard solve and diagnostics; writes every artifact
/// under `dir` (config.output.dir when empty). The manifest is written last.
RunOutcome run(const RunConfig& config, const std::filesystem::path& dir = {});

/// Names accepted by load_series and export_series.
std::vector<std::string> series_quantities();

/// Reads a stored table of a run. Throws ConfigError for unknown quantities.
Table load_series(const std::filesystem::path& run_dir, const std::string& quantity);

/// Writes a stored table in `format` ("csv", "tsv", "binary" or "jsonl") and
/// returns the file written (`out` or a default name inside the run directory).
std::filesystem::path export_series(const std::filesystem::path& run_dir, const std::string& quantity,
                                    const std::string& format, const std::filesystem::path& out = {});

/// Code version recorded in manifests.
std::string code_version();

}  // namespace flatflow
