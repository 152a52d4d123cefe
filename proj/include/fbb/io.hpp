#pragma once

// CSV and JSON serialization of curves, series and kernels.
//
// Series CSV: optional '#' provenance lines, a header row tau_1,...,tau_T,
// then one curve per row at full precision. The grid lives in a JSON sidecar
// at <path>.grid.json; without a sidecar a uniform grid of width T is assumed.

#include "fbb/fdata.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace fbb {

struct Provenance {
  std::uint64_t seed = 0;
  std::string config_hash;  ///< 16 hex digits

  /// "# fbboot <version> seed=<seed> config_hash=<hash>"
  [[nodiscard]] std::string header_line() const;
  [[nodiscard]] nlohmann::json to_json() const;
};

/// FNV-1a 64-bit hash of `text`, as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view text);

/// Hash of the canonical (sorted-key, compact) dump of `config`.
std::string config_hash(const nlohmann::json& config);

/// Shortest decimal form that round-trips exactly.
std::string format_double(double x);

/// Rows of a numeric CSV. Lines starting with '#' and blank lines are skipped;
/// `has_header` drops the first remaining line. Throws InvalidArgument on
/// non-numeric cells or ragged rows, IoError when the file cannot be read.
std::vector<std::vector<double>> read_numeric_csv(const std::filesystem::path& path, bool has_header);

nlohmann::json grid_to_json(const Grid& grid);
GridPtr grid_from_json(const nlohmann::json& j);

std::filesystem::path grid_sidecar_path(const std::filesystem::path& csv);

/// Writes the CSV and its grid sidecar.
void write_series_csv(const std::filesystem::path& path, const FunctionalSeries& s,
                      const Provenance* provenance = nullptr);
/// Reads a series CSV. Uses the sidecar grid when present, else `fallback`,
/// else a uniform grid matching the column count.
FunctionalSeries read_series_csv(const std::filesystem::path& path, const GridPtr& fallback = nullptr);

void write_kernel_csv(const std::filesystem::path& path, const Kernel2D& k,
                      const Provenance* provenance = nullptr);
Kernel2D read_kernel_csv(const std::filesystem::path& path, const GridPtr& grid);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace fbb
