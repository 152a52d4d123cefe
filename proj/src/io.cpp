#include "fbb/io.hpp"

#include "fbb/error.hpp"
#include "fbb/version.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fbb {

namespace fs = std::filesystem;

std::string Provenance::header_line() const {
  return std::string("# fbboot ") + kVersion + " seed=" + std::to_string(seed) +
         " config_hash=" + config_hash;
}

nlohmann::json Provenance::to_json() const {
  return {{"version", kVersion}, {"seed", seed}, {"config_hash", config_hash}};
}

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_hash(const nlohmann::json& config) { return fnv1a_hex(config.dump()); }

std::string format_double(double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& cell, std::size_t line_no) {
  double x = 0.0;
  const char* begin = cell.data();
  if (!cell.empty() && cell.front() == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, cell.data() + cell.size(), x);
  if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size())
    throw InvalidArgument("non-numeric cell '" + cell + "' on line " + std::to_string(line_no));
  return x;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

std::string tau_header(std::size_t T) {
  std::string h;
  for (std::size_t j = 1; j <= T; ++j) h += (j > 1 ? ",tau_" : "tau_") + std::to_string(j);
  return h;
}

template <class Row>
void write_row(std::ostream& out, const Row& row) {
  for (Eigen::Index j = 0; j < row.size(); ++j) out << (j ? "," : "") << format_double(row[j]);
  out << '\n';
}

}  // namespace

std::vector<std::vector<double>> read_numeric_csv(const fs::path& path, bool has_header) {
  auto in = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  bool header_pending = has_header;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    std::vector<double> row;
    for (const auto& cell : split(t)) row.push_back(parse_cell(cell, line_no));
    if (!rows.empty() && row.size() != rows.front().size())
      throw InvalidArgument("ragged row on line " + std::to_string(line_no) + ": expected " +
                            std::to_string(rows.front().size()) + " cells, got " +
                            std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (in.bad()) throw IoError("read failure on '" + path.string() + "'");
  return rows;
}

nlohmann::json grid_to_json(const Grid& grid) {
  return {{"T", grid.size()},
          {"points", std::vector<double>(grid.points().begin(), grid.points().end())},
          {"weights", std::vector<double>(grid.weights().begin(), grid.weights().end())}};
}

GridPtr grid_from_json(const nlohmann::json& j) {
  try {
    return std::make_shared<const Grid>(j.at("points").get<std::vector<double>>(),
                                        j.at("weights").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed grid metadata: ") + e.what());
  }
}

fs::path grid_sidecar_path(const fs::path& csv) { return fs::path(csv.string() + ".grid.json"); }

void write_series_csv(const fs::path& path, const FunctionalSeries& s, const Provenance* provenance) {
  {
    auto out = open_out(path);
    if (provenance) out << provenance->header_line() << '\n';
    out << tau_header(s.grid_size()) << '\n';
    for (Eigen::Index t = 0; t < s.data().rows(); ++t) write_row(out, s.data().row(t));
    if (!out) throw IoError("write failure on '" + path.string() + "'");
  }
  write_text_file(grid_sidecar_path(path), grid_to_json(*s.grid()).dump(2) + "\n");
}

FunctionalSeries read_series_csv(const fs::path& path, const GridPtr& fallback) {
  const auto rows = read_numeric_csv(path, true);
  if (rows.empty()) throw InvalidArgument("'" + path.string() + "' contains no curves");
  GridPtr grid = fallback;
  if (fs::exists(grid_sidecar_path(path))) {
    auto in = open_in(grid_sidecar_path(path));
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw InvalidArgument(std::string("malformed grid sidecar: ") + e.what());
    }
    grid = grid_from_json(j);
  }
  if (!grid) grid = make_uniform_grid(rows.front().size());
  if (grid->size() != rows.front().size())
    throw GridMismatch("'" + path.string() + "' has " + std::to_string(rows.front().size()) +
                       " columns but the grid has " + std::to_string(grid->size()) + " points");
  RowMatrix data(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(grid->size()));
  for (std::size_t t = 0; t < rows.size(); ++t)
    for (std::size_t j = 0; j < rows[t].size(); ++j)
      data(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = rows[t][j];
  return FunctionalSeries(grid, std::move(data));
}

void write_kernel_csv(const fs::path& path, const Kernel2D& k, const Provenance* provenance) {
  auto out = open_out(path);
  if (provenance) out << provenance->header_line() << '\n';
  out << tau_header(k.grid()->size()) << '\n';
  for (Eigen::Index i = 0; i < k.values().rows(); ++i) write_row(out, k.values().row(i));
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

Kernel2D read_kernel_csv(const fs::path& path, const GridPtr& grid) {
  const auto rows = read_numeric_csv(path, true);
  const auto T = static_cast<Eigen::Index>(grid->size());
  if (static_cast<Eigen::Index>(rows.size()) != T || rows.front().size() != grid->size())
    throw GridMismatch("kernel CSV is not " + std::to_string(T) + " x " + std::to_string(T));
  Matrix m(T, T);
  for (Eigen::Index i = 0; i < T; ++i)
    for (Eigen::Index j = 0; j < T; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return Kernel2D(grid, std::move(m));
}

void write_text_file(const fs::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

}  // namespace fbb
