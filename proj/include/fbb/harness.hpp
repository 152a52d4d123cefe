#pragma once

// Monte Carlo size/power experiments, real-data ingestion and reporting.

#include "fbb/blockboot.hpp"
#include "fbb/io.hpp"
#include "fbb/meantest.hpp"
#include "fbb/simulate.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fbb {

/// A requested block length; std::nullopt stands for the ceil(n^(1/3)) rule.
using BlockChoice = std::optional<std::size_t>;

std::string block_label(const BlockChoice& b);
std::size_t resolve_block(const BlockChoice& b, std::size_t n);

struct ExperimentConfig {
  Model model = Model::FAR1;
  std::size_t n1 = 100;
  std::size_t n2 = 100;
  std::size_t T = 21;
  std::size_t burn_in = 100;
  std::vector<double> gammas{0.0, 0.2, 0.5, 0.8, 1.0};
  std::vector<BlockChoice> blocks{4, 6, 8, std::nullopt};
  std::vector<double> alphas{0.01, 0.05, 0.1};
  std::size_t B = 400;
  std::size_t R = 300;
  Method method = Method::TBB;
  TaperSpec taper;
  StatisticSpec statistic;
  std::uint64_t master_seed = 20170101;

  void validate() const;
  [[nodiscard]] nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
};

struct SizePowerRow {
  double gamma = 0.0;
  std::string block;       ///< "4", "b*", ...
  std::size_t b1 = 0;      ///< resolved block lengths
  std::size_t b2 = 0;
  std::size_t n1_used = 0; ///< sample lengths after truncation to a multiple of b
  std::size_t n2_used = 0;
  double alpha = 0.0;
  double rate = 0.0;
  double se = 0.0;
};

struct SizePowerTable {
  ExperimentConfig config;
  std::vector<SizePowerRow> rows;  ///< ordered gamma, block, alpha

  [[nodiscard]] const SizePowerRow& at(double gamma, const std::string& block, double alpha) const;
  [[nodiscard]] bool truncated() const;
};

/// Drops tail curves so that every sample length is a multiple of its block
/// length. Returns the possibly shortened samples.
MultiSample fit_to_blocks(const MultiSample& ms, std::span<const std::size_t> blocks);

/// For each repetition r the two error series are simulated from streams
/// (master, r, 0) and (master, r, 1) and the bootstrap uses seed (master, r, 2);
/// the same draws serve every gamma and block choice. Repetitions run in
/// parallel; the table does not depend on `threads`.
SizePowerTable run_size_power(const ExperimentConfig& cfg, unsigned threads = 0);

/// Wall-clock estimate from timing one bootstrap test.
double estimate_runtime_seconds(const ExperimentConfig& cfg, unsigned threads);

/// One raw curve per CSV row, `m_per_curve` columns, Fourier-smoothed with J
/// basis functions onto `grid`. Raw index j maps to tau = (j - 0.5)/m.
FunctionalSeries ingest_raw_csv(const std::filesystem::path& path, std::size_t m_per_curve,
                                std::size_t J, const GridPtr& grid, bool has_header = false);

struct AnalysisOptions {
  bool raw = false;         ///< inputs are raw measurement rows to smooth
  std::size_t J = 21;       ///< Fourier basis size for raw inputs
  std::size_t T = 21;       ///< analysis grid size for raw inputs
  bool has_header = false;  ///< raw CSVs carry a header row
  StatisticSpec statistic;
  Method method = Method::TBB;
  TaperSpec taper;
  std::vector<BlockChoice> blocks{std::nullopt, std::nullopt};
  std::size_t replicates = 1000;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

struct AnalysisReport {
  TestOutcome outcome;
  nlohmann::json json;  ///< outcome, config echo, provenance
};

/// ingest -> (smooth) -> truncate to block multiples -> bootstrap test.
AnalysisReport run_two_sample_analysis(const std::filesystem::path& sample1,
                                       const std::filesystem::path& sample2,
                                       const AnalysisOptions& options);

// Reporting ---------------------------------------------------------------------

nlohmann::json to_json(const TestOutcome& outcome);
nlohmann::json to_json(const SizePowerTable& table);
SizePowerTable size_power_from_json(const nlohmann::json& j);

enum class ReportFormat { Csv, Json, Markdown };
ReportFormat parse_format(std::string_view name);

/// Serialized table, starting with a provenance header.
std::string render_report(const SizePowerTable& table, ReportFormat format);
void emit_report(const SizePowerTable& table, ReportFormat format, const std::filesystem::path& path);
void emit_report(const nlohmann::json& outcome_report, const std::filesystem::path& path);

}  // namespace fbb
