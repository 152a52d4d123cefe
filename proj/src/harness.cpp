#include "fbb/harness.hpp"

#include "fbb/error.hpp"
#include "fbb/parallel.hpp"
#include "fbb/version.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace fbb {

namespace fs = std::filesystem;
using nlohmann::json;

std::string block_label(const BlockChoice& b) { return b ? std::to_string(*b) : "b*"; }

std::size_t resolve_block(const BlockChoice& b, std::size_t n) {
  return b ? *b : default_block_size(n);
}

// Configuration -------------------------------------------------------------------

void ExperimentConfig::validate() const {
  if (R < 1) throw InvalidArgument("R must be >= 1");
  if (B < 99) throw InvalidArgument("B must be >= 99");
  if (n1 < 2 || n2 < 2) throw InvalidArgument("sample lengths must be >= 2");
  if (T < 2) throw InvalidArgument("T must be >= 2");
  if (gammas.empty() || blocks.empty() || alphas.empty())
    throw InvalidArgument("gammas, blocks and alphas must be nonempty");
  for (double g : gammas)
    if (!(g >= 0.0) || !std::isfinite(g)) throw InvalidArgument("gammas must be finite and >= 0");
  for (double a : alphas)
    if (!(a > 0.0 && a < 1.0)) throw InvalidArgument("alphas must lie in (0,1)");
  for (const auto& b : blocks) {
    for (std::size_t n : {n1, n2}) {
      const std::size_t r = resolve_block(b, n);
      if (r < 1 || r >= n) throw InvalidBlock("block length " + block_label(b) + " invalid for n = " + std::to_string(n));
    }
  }
}

json ExperimentConfig::to_json() const {
  json blocks_json = json::array();
  for (const auto& b : blocks) {
    if (b)
      blocks_json.push_back(*b);
    else
      blocks_json.push_back("b*");
  }
  return {{"model", std::string(fbb::to_string(model))},
          {"n1", n1},
          {"n2", n2},
          {"T", T},
          {"burn_in", burn_in},
          {"gammas", gammas},
          {"blocks", blocks_json},
          {"alphas", alphas},
          {"B", B},
          {"R", R},
          {"method", std::string(fbb::to_string(method))},
          {"taper", taper.to_string()},
          {"statistic", statistic.to_string()},
          {"master_seed", master_seed}};
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig cfg;
  try {
    if (j.contains("model")) cfg.model = parse_model(j.at("model").get<std::string>());
    if (j.contains("n1")) cfg.n1 = j.at("n1").get<std::size_t>();
    if (j.contains("n2")) cfg.n2 = j.at("n2").get<std::size_t>();
    if (j.contains("T")) cfg.T = j.at("T").get<std::size_t>();
    if (j.contains("burn_in")) cfg.burn_in = j.at("burn_in").get<std::size_t>();
    if (j.contains("gammas")) cfg.gammas = j.at("gammas").get<std::vector<double>>();
    if (j.contains("alphas")) cfg.alphas = j.at("alphas").get<std::vector<double>>();
    if (j.contains("B")) cfg.B = j.at("B").get<std::size_t>();
    if (j.contains("R")) cfg.R = j.at("R").get<std::size_t>();
    if (j.contains("method")) cfg.method = parse_method(j.at("method").get<std::string>());
    if (j.contains("taper")) cfg.taper = TaperSpec::parse(j.at("taper").get<std::string>());
    if (j.contains("statistic")) cfg.statistic = StatisticSpec::parse(j.at("statistic").get<std::string>());
    if (j.contains("master_seed")) cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
    if (j.contains("blocks")) {
      cfg.blocks.clear();
      for (const auto& b : j.at("blocks")) {
        if (b.is_string()) {
          if (b.get<std::string>() != "b*") throw InvalidArgument("block entries are integers or \"b*\"");
          cfg.blocks.emplace_back(std::nullopt);
        } else {
          cfg.blocks.emplace_back(b.get<std::size_t>());
        }
      }
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed experiment config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

// Size / power ----------------------------------------------------------------------

const SizePowerRow& SizePowerTable::at(double gamma, const std::string& block, double alpha) const {
  for (const auto& r : rows)
    if (r.gamma == gamma && r.block == block && r.alpha == alpha) return r;
  throw InvalidArgument("no table row for gamma=" + format_double(gamma) + " b=" + block +
                        " alpha=" + format_double(alpha));
}

bool SizePowerTable::truncated() const {
  for (const auto& r : rows)
    if (r.n1_used != config.n1 || r.n2_used != config.n2) return true;
  return false;
}

MultiSample fit_to_blocks(const MultiSample& ms, std::span<const std::size_t> blocks) {
  if (blocks.size() != ms.count()) throw InvalidArgument("need one block size per sample");
  std::vector<FunctionalSeries> out;
  out.reserve(ms.count());
  for (std::size_t i = 0; i < ms.count(); ++i) {
    const std::size_t n = ms[i].length();
    const std::size_t b = blocks[i];
    if (b < 1 || b >= n)
      throw InvalidBlock("block length " + std::to_string(b) + " invalid for n = " + std::to_string(n));
    out.push_back(ms[i].head(n / b * b));
  }
  return MultiSample(std::move(out));
}

namespace {

struct ResolvedBlock {
  std::string label;
  std::size_t b1, b2;
};

std::vector<ResolvedBlock> resolve_blocks(const ExperimentConfig& cfg) {
  std::vector<ResolvedBlock> out;
  for (const auto& b : cfg.blocks)
    out.push_back({block_label(b), resolve_block(b, cfg.n1), resolve_block(b, cfg.n2)});
  return out;
}

struct RepetitionData {
  FunctionalSeries e1, e2;
  std::uint64_t test_seed;
};

RepetitionData simulate_repetition(const ExperimentConfig& cfg, const GridPtr& grid, std::size_t r) {
  const RngStream base = RngStream(cfg.master_seed).child(r);
  SimConfig s1{cfg.model, cfg.n1, cfg.burn_in, 0.0, base.child(0).key()};
  SimConfig s2{cfg.model, cfg.n2, cfg.burn_in, 0.0, base.child(1).key()};
  return {simulate(s1, grid), simulate(s2, grid), base.child(2).key()};
}

TestOutcome run_one(const ExperimentConfig& cfg, const RepetitionData& data, double gamma,
                    const ResolvedBlock& block) {
  const std::vector<std::size_t> sizes{block.b1, block.b2};
  const MultiSample ms = fit_to_blocks(MultiSample({data.e1, add_mean(data.e2, gamma)}), sizes);
  TestConfig tc;
  tc.statistic = cfg.statistic;
  tc.method = cfg.method;
  tc.taper = cfg.taper;
  tc.block_sizes = sizes;
  tc.replicates = cfg.B;
  tc.alpha = cfg.alphas.front();
  tc.seed = data.test_seed;
  tc.threads = 1;
  return bootstrap_test(ms, tc);
}

}  // namespace

SizePowerTable run_size_power(const ExperimentConfig& cfg, unsigned threads) {
  cfg.validate();
  const GridPtr grid = make_uniform_grid(cfg.T);
  const auto blocks = resolve_blocks(cfg);
  const std::size_t G = cfg.gammas.size(), NB = blocks.size(), A = cfg.alphas.size();

  // decisions[r][(g * NB + b) * A + a]
  std::vector<std::vector<unsigned char>> decisions(cfg.R);
  parallel_for(cfg.R, threads, [&](std::size_t r) {
    const RepetitionData data = simulate_repetition(cfg, grid, r);
    auto& d = decisions[r];
    d.assign(G * NB * A, 0);
    for (std::size_t g = 0; g < G; ++g)
      for (std::size_t b = 0; b < NB; ++b) {
        const TestOutcome out = run_one(cfg, data, cfg.gammas[g], blocks[b]);
        for (std::size_t a = 0; a < A; ++a) d[(g * NB + b) * A + a] = out.p_value <= cfg.alphas[a];
      }
  });

  SizePowerTable table;
  table.config = cfg;
  for (std::size_t g = 0; g < G; ++g)
    for (std::size_t b = 0; b < NB; ++b)
      for (std::size_t a = 0; a < A; ++a) {
        std::size_t hits = 0;
        for (const auto& d : decisions) hits += d[(g * NB + b) * A + a];
        SizePowerRow row;
        row.gamma = cfg.gammas[g];
        row.block = blocks[b].label;
        row.b1 = blocks[b].b1;
        row.b2 = blocks[b].b2;
        row.n1_used = cfg.n1 / row.b1 * row.b1;
        row.n2_used = cfg.n2 / row.b2 * row.b2;
        row.alpha = cfg.alphas[a];
        row.rate = static_cast<double>(hits) / static_cast<double>(cfg.R);
        row.se = std::sqrt(row.rate * (1.0 - row.rate) / static_cast<double>(cfg.R));
        table.rows.push_back(row);
      }
  return table;
}

double estimate_runtime_seconds(const ExperimentConfig& cfg, unsigned threads) {
  cfg.validate();
  if (threads == 0) threads = default_threads();
  const GridPtr grid = make_uniform_grid(cfg.T);
  const auto blocks = resolve_blocks(cfg);
  const auto start = std::chrono::steady_clock::now();
  const RepetitionData data = simulate_repetition(cfg, grid, 0);
  run_one(cfg, data, cfg.gammas.front(), blocks.front());
  const double one = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const double tests = static_cast<double>(cfg.R * cfg.gammas.size() * blocks.size());
  return one * tests / static_cast<double>(std::min<std::size_t>(threads, cfg.R));
}

// Real data ---------------------------------------------------------------------------

FunctionalSeries ingest_raw_csv(const fs::path& path, std::size_t m_per_curve, std::size_t J,
                                const GridPtr& grid, bool has_header) {
  const auto rows = read_numeric_csv(path, has_header);
  if (rows.empty()) throw InvalidArgument("'" + path.string() + "' contains no rows");
  RowMatrix data(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(grid->size()));
  for (std::size_t t = 0; t < rows.size(); ++t) {
    if (rows[t].size() != m_per_curve)
      throw InvalidArgument("row " + std::to_string(t + 1) + " has " + std::to_string(rows[t].size()) +
                            " measurements, expected " + std::to_string(m_per_curve));
    data.row(static_cast<Eigen::Index>(t)) = fourier_smooth(rows[t], J, grid).values().transpose();
  }
  return FunctionalSeries(grid, std::move(data));
}

namespace {

FunctionalSeries load_sample(const fs::path& path, const AnalysisOptions& opt, const GridPtr& grid) {
  if (!opt.raw) return read_series_csv(path, nullptr);
  const auto rows = read_numeric_csv(path, opt.has_header);
  if (rows.empty()) throw InvalidArgument("'" + path.string() + "' contains no rows");
  return ingest_raw_csv(path, rows.front().size(), opt.J, grid, opt.has_header);
}

json analysis_config_json(const AnalysisOptions& opt) {
  json blocks = json::array();
  for (const auto& b : opt.blocks) blocks.push_back(block_label(b));
  return {{"raw", opt.raw},
          {"J", opt.J},
          {"T", opt.T},
          {"statistic", opt.statistic.to_string()},
          {"method", std::string(to_string(opt.method))},
          {"taper", opt.taper.to_string()},
          {"blocks", blocks},
          {"B", opt.replicates},
          {"alpha", opt.alpha},
          {"seed", opt.seed}};
}

}  // namespace

AnalysisReport run_two_sample_analysis(const fs::path& sample1, const fs::path& sample2,
                                       const AnalysisOptions& options) {
  if (options.blocks.size() != 2) throw InvalidArgument("need two block choices");
  const GridPtr grid = options.raw ? make_uniform_grid(options.T) : nullptr;
  const MultiSample full({load_sample(sample1, options, grid), load_sample(sample2, options, grid)});
  const std::vector<std::size_t> blocks{resolve_block(options.blocks[0], full[0].length()),
                                        resolve_block(options.blocks[1], full[1].length())};
  const MultiSample ms = fit_to_blocks(full, blocks);

  TestConfig tc;
  tc.statistic = options.statistic;
  tc.method = options.method;
  tc.taper = options.taper;
  tc.block_sizes = blocks;
  tc.replicates = options.replicates;
  tc.alpha = options.alpha;
  tc.seed = options.seed;
  tc.threads = options.threads;

  AnalysisReport report;
  report.outcome = bootstrap_test(ms, tc);
  const json config = analysis_config_json(options);
  const bool truncated = ms[0].length() != full[0].length() || ms[1].length() != full[1].length();
  if (truncated) report.outcome.warnings.emplace_back("series tails truncated to a multiple of the block length");
  report.json = {{"provenance", Provenance{options.seed, config_hash(config)}.to_json()},
                 {"config", config},
                 {"inputs",
                  {{"sample1", sample1.string()},
                   {"sample2", sample2.string()},
                   {"n1", full[0].length()},
                   {"n2", full[1].length()},
                   {"n1_used", ms[0].length()},
                   {"n2_used", ms[1].length()},
                   {"truncated", truncated}}},
                 {"outcome", to_json(report.outcome)}};
  return report;
}

// Reporting -------------------------------------------------------------------------

json to_json(const TestOutcome& o) {
  return {{"statistic", o.statistic},
          {"boot_stats", o.boot_stats},
          {"p_value", o.p_value},
          {"alpha", o.alpha},
          {"reject", o.reject},
          {"seed", o.seed},
          {"method", std::string(to_string(o.method))},
          {"taper", o.taper.to_string()},
          {"test_statistic", o.spec.to_string()},
          {"block_sizes", o.block_sizes},
          {"warnings", o.warnings}};
}

json to_json(const SizePowerTable& table) {
  const json config = table.config.to_json();
  json rows = json::array();
  for (const auto& r : table.rows)
    rows.push_back({{"gamma", r.gamma},
                    {"block", r.block},
                    {"b1", r.b1},
                    {"b2", r.b2},
                    {"n1_used", r.n1_used},
                    {"n2_used", r.n2_used},
                    {"alpha", r.alpha},
                    {"rate", r.rate},
                    {"se", r.se}});
  return {{"provenance", Provenance{table.config.master_seed, config_hash(config)}.to_json()},
          {"config", config},
          {"truncated", table.truncated()},
          {"rows", rows}};
}

SizePowerTable size_power_from_json(const json& j) {
  SizePowerTable table;
  table.config = ExperimentConfig::from_json(j.at("config"));
  try {
    for (const auto& r : j.at("rows")) {
      SizePowerRow row;
      row.gamma = r.at("gamma").get<double>();
      row.block = r.at("block").get<std::string>();
      row.b1 = r.at("b1").get<std::size_t>();
      row.b2 = r.at("b2").get<std::size_t>();
      row.n1_used = r.at("n1_used").get<std::size_t>();
      row.n2_used = r.at("n2_used").get<std::size_t>();
      row.alpha = r.at("alpha").get<double>();
      row.rate = r.at("rate").get<double>();
      row.se = r.at("se").get<double>();
      table.rows.push_back(std::move(row));
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed size/power table: ") + e.what());
  }
  return table;
}

ReportFormat parse_format(std::string_view name) {
  if (name == "csv") return ReportFormat::Csv;
  if (name == "json") return ReportFormat::Json;
  if (name == "markdown" || name == "md") return ReportFormat::Markdown;
  throw InvalidArgument("unknown report format '" + std::string(name) + "'");
}

std::string render_report(const SizePowerTable& table, ReportFormat format) {
  const Provenance prov{table.config.master_seed, config_hash(table.config.to_json())};
  std::ostringstream os;
  switch (format) {
    case ReportFormat::Json:
      os << to_json(table).dump(2) << '\n';
      break;
    case ReportFormat::Csv:
      os << prov.header_line() << '\n';
      os << "gamma,block,b1,b2,n1_used,n2_used,alpha,rate,se\n";
      for (const auto& r : table.rows)
        os << format_double(r.gamma) << ',' << r.block << ',' << r.b1 << ',' << r.b2 << ',' << r.n1_used << ','
           << r.n2_used << ',' << format_double(r.alpha) << ',' << format_double(r.rate) << ','
           << format_double(r.se) << '\n';
      break;
    case ReportFormat::Markdown: {
      const auto& cfg = table.config;
      os << "<!-- " << prov.header_line().substr(2) << " -->\n\n";
      os << "| gamma | b |";
      for (double a : cfg.alphas) os << " alpha=" << format_double(a) << " |";
      os << "\n|---|---|";
      for (std::size_t a = 0; a < cfg.alphas.size(); ++a) os << "---|";
      os << '\n';
      for (double g : cfg.gammas)
        for (const auto& b : cfg.blocks) {
          os << "| " << format_double(g) << " | " << block_label(b) << " |";
          for (double a : cfg.alphas) {
            char cell[32];
            std::snprintf(cell, sizeof cell, " %.3f |", table.at(g, block_label(b), a).rate);
            os << cell;
          }
          os << '\n';
        }
      break;
    }
  }
  return os.str();
}

void emit_report(const SizePowerTable& table, ReportFormat format, const fs::path& path) {
  write_text_file(path, render_report(table, format));
}

void emit_report(const json& outcome_report, const fs::path& path) {
  write_text_file(path, outcome_report.dump(2) + "\n");
}

}  // namespace fbb
