// fbboot: command-line front end.
//
// Exit codes: 0 success, 2 validation error, 3 I/O error.

#include "fbb/blockboot.hpp"
#include "fbb/error.hpp"
#include "fbb/harness.hpp"
#include "fbb/io.hpp"
#include "fbb/meantest.hpp"
#include "fbb/simulate.hpp"
#include "fbb/version.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fbb;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;

std::size_t block_or_default(const std::optional<std::size_t>& b, std::size_t n) {
  return b ? *b : default_block_size(n);
}

fs::path replicate_path(const fs::path& out, std::size_t r, std::size_t total) {
  if (total == 1) return out;
  fs::path p = out;
  p.replace_filename(out.stem().string() + ".r" + std::to_string(r + 1) + out.extension().string());
  return p;
}

struct SimulateArgs {
  std::string model = "far1";
  std::size_t n = 100;
  double gamma = 0.0;
  std::uint64_t seed = 0;
  std::size_t T = 21;
  std::size_t burn_in = 100;
  fs::path out;
};

int run_simulate(const SimulateArgs& a) {
  const SimConfig cfg{parse_model(a.model), a.n, a.burn_in, a.gamma, a.seed};
  const json echo = {{"command", "simulate"}, {"model", a.model}, {"n", a.n},     {"gamma", a.gamma},
                     {"seed", a.seed},        {"T", a.T},         {"burn_in", a.burn_in}};
  const Provenance prov{a.seed, config_hash(echo)};
  write_series_csv(a.out, simulate(cfg, make_uniform_grid(a.T)), &prov);
  return kExitOk;
}

struct BootstrapArgs {
  std::string method = "tbb";
  std::optional<std::size_t> b;
  std::string taper = "trapezoid:0.43";
  std::size_t replicates = 1;
  std::uint64_t seed = 0;
  fs::path in, out;
};

int run_bootstrap(const BootstrapArgs& a) {
  const Method method = parse_method(a.method);
  const TaperSpec taper = TaperSpec::parse(a.taper);
  if (a.replicates < 1) throw InvalidArgument("--replicates must be >= 1");
  const FunctionalSeries s = read_series_csv(a.in);
  const std::size_t b = block_or_default(a.b, s.length());
  const json echo = {{"command", "bootstrap"}, {"method", a.method},         {"b", b},
                     {"taper", taper.to_string()}, {"replicates", a.replicates}, {"seed", a.seed}};
  const Provenance prov{a.seed, config_hash(echo)};
  const RngStream root(a.seed);
  const TaperWindow window = taper.window(b);
  for (std::size_t r = 0; r < a.replicates; ++r) {
    RngStream rng = root.child(r);
    const FunctionalSeries star =
        method == Method::MBB ? mbb_resample(s, b, rng) : tbb_resample(s, b, window, rng);
    write_series_csv(replicate_path(a.out, r, a.replicates), star, &prov);
  }
  return kExitOk;
}

struct LrcovArgs {
  std::string method = "tbb";
  std::optional<std::size_t> b;
  std::string taper = "trapezoid:0.43";
  fs::path in, out;
};

int run_lrcov(const LrcovArgs& a) {
  const Method method = parse_method(a.method);
  const TaperSpec taper = TaperSpec::parse(a.taper);
  const FunctionalSeries s = read_series_csv(a.in);
  const std::size_t b = block_or_default(a.b, s.length());
  const Kernel2D k = method == Method::MBB ? lrcov_mbb(s, b) : lrcov_tbb(s, b, taper.window(b));
  const json echo = {{"command", "lrcov"}, {"method", a.method}, {"b", b}, {"taper", taper.to_string()}};
  const Provenance prov{0, config_hash(echo)};
  write_kernel_csv(a.out, k, &prov);
  write_text_file(grid_sidecar_path(a.out), grid_to_json(*s.grid()).dump(2) + "\n");
  return kExitOk;
}

struct TestArgs {
  std::string stat = "um";
  std::string method = "tbb";
  std::optional<std::size_t> b1, b2;
  std::string taper = "trapezoid:0.43";
  std::size_t B = 1000;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  fs::path sample1, sample2;
  bool raw = false;
  std::size_t J = 21;
  std::size_t T = 21;
  bool header = false;
  unsigned threads = 0;
  fs::path out;
};

int run_test(const TestArgs& a) {
  AnalysisOptions opt;
  opt.raw = a.raw;
  opt.J = a.J;
  opt.T = a.T;
  opt.has_header = a.header;
  opt.statistic = StatisticSpec::parse(a.stat);
  opt.method = parse_method(a.method);
  opt.taper = TaperSpec::parse(a.taper);
  opt.blocks = {a.b1, a.b2};
  opt.replicates = a.B;
  opt.alpha = a.alpha;
  opt.seed = a.seed;
  opt.threads = a.threads;
  const AnalysisReport report = run_two_sample_analysis(a.sample1, a.sample2, opt);
  if (!a.out.empty()) emit_report(report.json, a.out);
  const auto& o = report.outcome;
  std::printf("statistic=%s value=%.6g p_value=%.4f reject=%s\n", o.spec.to_string().c_str(), o.statistic,
              o.p_value, o.reject ? "yes" : "no");
  for (const auto& w : o.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  return kExitOk;
}

struct McArgs {
  fs::path config;
  fs::path out;
  std::string format = "markdown";
  unsigned threads = 0;
  bool full_scale = false;
  std::optional<std::size_t> R, B;
};

int run_mc(const McArgs& a) {
  ExperimentConfig cfg;
  if (!a.config.empty()) {
    std::ifstream in(a.config);
    if (!in) throw IoError("cannot open config '" + a.config.string() + "'");
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw InvalidArgument("config '" + a.config.string() + "' is not valid JSON: " + e.what());
    }
    cfg = ExperimentConfig::from_json(j);
  }
  if (a.full_scale) cfg.R = cfg.B = 1000;
  if (a.R) cfg.R = *a.R;
  if (a.B) cfg.B = *a.B;
  cfg.validate();
  const ReportFormat format = parse_format(a.format);

  std::fprintf(stderr, "estimated runtime: %.0f s (R=%zu, B=%zu)\n", estimate_runtime_seconds(cfg, a.threads),
               cfg.R, cfg.B);
  const SizePowerTable table = run_size_power(cfg, a.threads);
  if (table.truncated())
    std::fprintf(stderr, "warning: some sample lengths were truncated to a multiple of the block length\n");
  if (a.out.empty())
    std::cout << render_report(table, format);
  else
    emit_report(table, format, a.out);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Block bootstrap for functional time series"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Simulate a functional time series");
  c_sim->add_option("--model", sim.model, "far1 | fma1 | iid")->capture_default_str();
  c_sim->add_option("--n", sim.n, "Number of curves")->capture_default_str();
  c_sim->add_option("--gamma", sim.gamma, "Mean shift gamma * tau(1 - tau)")->capture_default_str();
  c_sim->add_option("--seed", sim.seed)->capture_default_str();
  c_sim->add_option("--T", sim.T, "Grid points")->capture_default_str();
  c_sim->add_option("--burn-in", sim.burn_in)->capture_default_str();
  c_sim->add_option("--out", sim.out, "Output CSV")->required();

  BootstrapArgs boot;
  auto* c_boot = app.add_subcommand("bootstrap", "Draw block-bootstrap pseudo-series");
  c_boot->add_option("--method", boot.method, "mbb | tbb")->capture_default_str();
  c_boot->add_option("--b", boot.b, "Block length (default ceil(n^(1/3)))");
  c_boot->add_option("--taper", boot.taper, "flat | trapezoid[:c]")->capture_default_str();
  c_boot->add_option("--replicates", boot.replicates, "Pseudo-series to draw; >1 writes <out>.r<k>.csv")
      ->capture_default_str();
  c_boot->add_option("--seed", boot.seed)->capture_default_str();
  c_boot->add_option("--in", boot.in, "Input series CSV")->required();
  c_boot->add_option("--out", boot.out, "Output CSV")->required();

  LrcovArgs lr;
  auto* c_lr = app.add_subcommand("lrcov", "Estimate the long-run covariance kernel");
  c_lr->add_option("--method", lr.method, "mbb | tbb")->capture_default_str();
  c_lr->add_option("--b", lr.b, "Block length (default ceil(n^(1/3)))");
  c_lr->add_option("--taper", lr.taper, "flat | trapezoid[:c]")->capture_default_str();
  c_lr->add_option("--in", lr.in, "Input series CSV")->required();
  c_lr->add_option("--out", lr.out, "Output kernel CSV")->required();

  TestArgs test;
  auto* c_test = app.add_subcommand("test", "Two-sample bootstrap test of equal mean functions");
  c_test->add_option("--stat", test.stat, "um | umt[:greater|:less] | spm:<p>[:refit]")->capture_default_str();
  c_test->add_option("--method", test.method, "mbb | tbb")->capture_default_str();
  c_test->add_option("--b1", test.b1, "Block length, sample 1 (default ceil(n^(1/3)))");
  c_test->add_option("--b2", test.b2, "Block length, sample 2 (default ceil(n^(1/3)))");
  c_test->add_option("--taper", test.taper, "flat | trapezoid[:c]")->capture_default_str();
  c_test->add_option("--B", test.B, "Bootstrap replicates")->capture_default_str();
  c_test->add_option("--alpha", test.alpha)->capture_default_str();
  c_test->add_option("--seed", test.seed)->capture_default_str();
  c_test->add_option("--sample1", test.sample1, "Series CSV")->required();
  c_test->add_option("--sample2", test.sample2, "Series CSV")->required();
  c_test->add_flag("--raw", test.raw, "Inputs are raw measurements, one curve per row");
  c_test->add_option("--J", test.J, "Fourier basis size for --raw")->capture_default_str();
  c_test->add_option("--T", test.T, "Analysis grid size for --raw")->capture_default_str();
  c_test->add_flag("--header", test.header, "Raw CSVs have a header row");
  c_test->add_option("--threads", test.threads, "0 = hardware concurrency")->capture_default_str();
  c_test->add_option("--out", test.out, "Output JSON");

  McArgs mc;
  auto* c_mc = app.add_subcommand("mc", "Monte Carlo size/power table");
  c_mc->add_option("--config", mc.config, "ExperimentConfig JSON (defaults if omitted)");
  c_mc->add_option("--out", mc.out, "Output file (stdout if omitted)");
  c_mc->add_option("--format", mc.format, "csv | json | markdown")->capture_default_str();
  c_mc->add_option("--threads", mc.threads, "0 = hardware concurrency")->capture_default_str();
  c_mc->add_flag("--full-scale", mc.full_scale, "R = B = 1000");
  c_mc->add_option("--R", mc.R, "Override repetitions");
  c_mc->add_option("--B", mc.B, "Override bootstrap replicates");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (c_sim->parsed()) return run_simulate(sim);
    if (c_boot->parsed()) return run_bootstrap(boot);
    if (c_lr->parsed()) return run_lrcov(lr);
    if (c_test->parsed()) return run_test(test);
    if (c_mc->parsed()) return run_mc(mc);
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  }
  return kExitValidation;
}
