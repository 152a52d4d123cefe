#include "fbb/meantest.hpp"

#include "fbb/error.hpp"
#include "fbb/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <charconv>
#include <cmath>

namespace fbb {

MultiSample::MultiSample(std::vector<FunctionalSeries> samples) : samples_(std::move(samples)) {
  if (samples_.size() < 2) throw InvalidArgument("need at least two samples");
  for (const auto& s : samples_) {
    require_same_grid(samples_.front().grid(), s.grid());
    if (s.length() < 2) throw InvalidArgument("every sample needs at least two curves");
    total_ += s.length();
  }
}

Curve pooled_mean(const MultiSample& ms) {
  Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(ms.grid()->size()));
  for (const auto& s : ms.samples()) sum += s.data().colwise().sum();
  return Curve(ms.grid(), sum.transpose() / static_cast<double>(ms.total()));
}

std::vector<FunctionalSeries> sample_residuals(const MultiSample& ms) {
  std::vector<FunctionalSeries> out;
  out.reserve(ms.count());
  for (const auto& s : ms.samples()) out.push_back(center_series(s));
  return out;
}

namespace {

RowMatrix slot_mean_matrix(const FunctionalSeries& residuals, std::size_t b) {
  const BlockPlan layout = BlockPlan::layout(residuals.length(), b);
  const auto N = static_cast<Eigen::Index>(layout.N);
  RowMatrix means(static_cast<Eigen::Index>(b), residuals.data().cols());
  for (std::size_t xi = 0; xi < b; ++xi)
    means.row(static_cast<Eigen::Index>(xi)) =
        residuals.data().middleRows(static_cast<Eigen::Index>(xi), N).colwise().sum() /
        static_cast<double>(layout.N);
  return means;
}

}  // namespace

std::vector<Curve> slotwise_block_means(const FunctionalSeries& residuals, std::size_t b) {
  const RowMatrix m = slot_mean_matrix(residuals, b);
  std::vector<Curve> out;
  out.reserve(b);
  for (Eigen::Index xi = 0; xi < m.rows(); ++xi) out.emplace_back(residuals.grid(), m.row(xi).transpose());
  return out;
}

Method parse_method(std::string_view name) {
  if (name == "mbb" || name == "MBB") return Method::MBB;
  if (name == "tbb" || name == "TBB") return Method::TBB;
  throw InvalidArgument("unknown method '" + std::string(name) + "'");
}

std::string_view to_string(Method m) { return m == Method::MBB ? "mbb" : "tbb"; }

// Null-enforcing resampling -----------------------------------------------------

NullResamplePlan NullResamplePlan::build(const MultiSample& ms, std::span<const std::size_t> block_sizes,
                                         Method method, TaperSpec taper) {
  if (block_sizes.size() != ms.count())
    throw InvalidArgument("need one block size per sample");
  NullResamplePlan plan{method, taper, {block_sizes.begin(), block_sizes.end()}, pooled_mean(ms), {}, {}, {}};
  const auto residuals = sample_residuals(ms);
  for (std::size_t i = 0; i < ms.count(); ++i) {
    const std::size_t b = block_sizes[i];
    BlockPlan::layout(ms[i].length(), b);
    if (method == Method::MBB) {
      plan.sources.push_back(residuals[i]);
      plan.windows.push_back(TaperWindow::flat(b));
      plan.slot_means.push_back(slot_mean_matrix(residuals[i], b));
    } else {
      // Re-center the residuals, then taper the slot means with the same
      // factor that multiplies the resampled values.
      FunctionalSeries recentered = center_series(residuals[i]);
      TaperWindow window = taper.window(b);
      RowMatrix means = slot_mean_matrix(recentered, b);
      for (std::size_t xi = 0; xi < b; ++xi)
        means.row(static_cast<Eigen::Index>(xi)) *= window[xi] * window.inflation();
      plan.sources.push_back(std::move(recentered));
      plan.windows.push_back(std::move(window));
      plan.slot_means.push_back(std::move(means));
    }
  }
  return plan;
}

FunctionalSeries assemble_null_sample(const NullResamplePlan& plan, std::size_t i,
                                      std::span<const std::size_t> starts) {
  const FunctionalSeries& src = plan.sources.at(i);
  const TaperWindow& window = plan.windows.at(i);
  const RowMatrix& means = plan.slot_means.at(i);
  const std::size_t b = plan.block_sizes.at(i);
  const BlockPlan layout = BlockPlan::layout(src.length(), b);
  if (starts.size() != layout.k) throw InvalidBlock("expected one start per block");

  const Eigen::RowVectorXd pooled = plan.pooled.values().transpose();
  const double infl = window.inflation();
  RowMatrix out(src.data().rows(), src.data().cols());
  for (std::size_t q = 0; q < layout.k; ++q) {
    if (starts[q] >= layout.N) throw InvalidBlock("block start out of range");
    for (std::size_t xi = 0; xi < b; ++xi) {
      const auto row = static_cast<Eigen::Index>(q * b + xi);
      out.row(row) = pooled + (window[xi] * infl) * src.data().row(static_cast<Eigen::Index>(starts[q] + xi)) -
                     means.row(static_cast<Eigen::Index>(xi));
    }
  }
  return FunctionalSeries(src.grid(), std::move(out));
}

MultiSample null_resample(const MultiSample& ms, const NullResamplePlan& plan, RngStream& rng) {
  if (plan.sources.size() != ms.count()) throw InvalidArgument("plan does not match samples");
  std::vector<FunctionalSeries> out;
  out.reserve(ms.count());
  for (std::size_t i = 0; i < ms.count(); ++i) {
    const BlockPlan draw = BlockPlan::draw(ms[i].length(), plan.block_sizes[i], rng);
    out.push_back(assemble_null_sample(plan, i, draw.starts));
  }
  return MultiSample(std::move(out));
}

MultiSample mbb_null_resample(const MultiSample& ms, const NullResamplePlan& plan, RngStream& rng) {
  if (plan.method != Method::MBB) throw InvalidArgument("plan was built for TBB");
  return null_resample(ms, plan, rng);
}

MultiSample tbb_null_resample(const MultiSample& ms, const NullResamplePlan& plan, RngStream& rng) {
  if (plan.method != Method::TBB) throw InvalidArgument("plan was built for MBB");
  return null_resample(ms, plan, rng);
}

// Statistics ----------------------------------------------------------------------

namespace {

void require_two(const MultiSample& ms) {
  if (ms.count() != 2) throw Unsupported("statistic is defined for two samples only");
}

double size_factor(const MultiSample& ms) {
  const double n1 = static_cast<double>(ms[0].length());
  const double n2 = static_cast<double>(ms[1].length());
  return n1 * n2 / (n1 + n2);
}

Vector mean_difference(const MultiSample& ms) {
  return (ms[0].data().colwise().mean() - ms[1].data().colwise().mean()).transpose();
}

// Statistic from the mean-difference curve.
struct StatEvaluator {
  const Vector& weights;
  double factor;

  double um(const Vector& d) const { return factor * weights.dot(d.cwiseAbs2()); }
  double um_tilde(const Vector& d) const { return std::sqrt(factor) * weights.dot(d); }
  double spm(const Vector& d, std::span<const Curve> phi) const {
    const Vector wd = weights.cwiseProduct(d);
    double s = 0.0;
    for (const auto& f : phi) {
      const double c = wd.dot(f.values());
      s += c * c;
    }
    return factor * s;
  }
};

Kernel2D combined_lrcov(const MultiSample& ms, const NullResamplePlan& plan) {
  require_two(ms);
  const double theta = static_cast<double>(ms[0].length()) / static_cast<double>(ms.total());
  Matrix c = Matrix::Zero(static_cast<Eigen::Index>(ms.grid()->size()),
                          static_cast<Eigen::Index>(ms.grid()->size()));
  for (std::size_t i = 0; i < 2; ++i) {
    const std::size_t b = plan.block_sizes.at(i);
    const Kernel2D k = plan.method == Method::MBB ? lrcov_mbb(ms[i], b)
                                                  : lrcov_tbb(ms[i], b, plan.taper.window(b));
    c += (i == 0 ? 1.0 - theta : theta) * k.values();
  }
  return Kernel2D(ms.grid(), std::move(c), true);
}

}  // namespace

double stat_um(const MultiSample& ms) {
  require_two(ms);
  return StatEvaluator{ms.grid()->weight_vector(), size_factor(ms)}.um(mean_difference(ms));
}

double stat_um_tilde(const MultiSample& ms) {
  require_two(ms);
  return StatEvaluator{ms.grid()->weight_vector(), size_factor(ms)}.um_tilde(mean_difference(ms));
}

double stat_spm(const MultiSample& ms, std::span<const Curve> eigenfunctions) {
  require_two(ms);
  for (const auto& f : eigenfunctions) require_same_grid(ms.grid(), f.grid());
  return StatEvaluator{ms.grid()->weight_vector(), size_factor(ms)}.spm(mean_difference(ms), eigenfunctions);
}

Eigenfunctions eigen_decompose(const Kernel2D& k, std::size_t p) {
  const std::size_t T = k.grid()->size();
  if (p < 1 || p > T) throw InvalidArgument("number of eigenfunctions must lie in [1, T]");
  const Vector& w = k.grid()->weight_vector();
  if ((w.array() <= 0.0).any()) throw InvalidArgument("eigendecomposition needs positive weights");
  const Vector root = w.cwiseSqrt();
  const Matrix sym = 0.5 * (k.values() + k.values().transpose());
  const Matrix scaled = root.asDiagonal() * sym * root.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(scaled);
  if (solver.info() != Eigen::Success) throw InvalidArgument("eigendecomposition failed");

  Eigenfunctions out;
  const auto Ti = static_cast<Eigen::Index>(T);
  for (std::size_t r = 0; r < p; ++r) {
    const Eigen::Index col = Ti - 1 - static_cast<Eigen::Index>(r);
    Vector phi = solver.eigenvectors().col(col).cwiseQuotient(root);
    const double integral = w.dot(phi);
    Eigen::Index argmax = 0;
    phi.cwiseAbs().maxCoeff(&argmax);
    const bool flip = std::abs(integral) > 1e-12 ? integral < 0.0 : phi[argmax] < 0.0;
    if (flip) phi = -phi;
    out.functions.emplace_back(k.grid(), std::move(phi));
    out.values.push_back(solver.eigenvalues()[col]);
  }
  const double scale = std::max(1.0, std::abs(solver.eigenvalues()[Ti - 1]));
  for (std::size_t r = 0; r < p && r + 1 < T; ++r) {
    const double gap = solver.eigenvalues()[Ti - 1 - static_cast<Eigen::Index>(r)] -
                       solver.eigenvalues()[Ti - 2 - static_cast<Eigen::Index>(r)];
    if (gap <= 1e-10 * scale) out.degenerate = true;
  }
  return out;
}

Eigenfunctions estimate_eigenfunctions(const MultiSample& ms, const NullResamplePlan& plan, std::size_t p) {
  return eigen_decompose(combined_lrcov(ms, plan), p);
}

// Bootstrap test ------------------------------------------------------------------

StatisticSpec StatisticSpec::parse(std::string_view text) {
  StatisticSpec spec;
  if (text == "um") return spec;
  if (text == "umt" || text == "umt:greater") {
    spec.kind = StatKind::UMTilde;
    return spec;
  }
  if (text == "umt:less") {
    spec.kind = StatKind::UMTilde;
    spec.side = Side::Less;
    return spec;
  }
  if (text.starts_with("spm:")) {
    spec.kind = StatKind::SpM;
    auto rest = text.substr(4);
    if (rest.ends_with(":refit")) {
      spec.refit = true;
      rest.remove_suffix(6);
    }
    auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), spec.p);
    if (ec != std::errc{} || ptr != rest.data() + rest.size() || spec.p < 1)
      throw InvalidArgument("malformed projection count in '" + std::string(text) + "'");
    return spec;
  }
  throw InvalidArgument("unknown statistic '" + std::string(text) + "'");
}

std::string StatisticSpec::to_string() const {
  switch (kind) {
    case StatKind::UM: return "um";
    case StatKind::UMTilde: return side == Side::Greater ? "umt:greater" : "umt:less";
    case StatKind::SpM: return "spm:" + std::to_string(p) + (refit ? ":refit" : "");
  }
  return "?";
}

double bootstrap_p_value(double statistic, std::span<const double> boot, bool upper_tail) {
  const auto count = std::count_if(boot.begin(), boot.end(), [&](double x) {
    return upper_tail ? x >= statistic : x <= statistic;
  });
  return (1.0 + static_cast<double>(count)) / (static_cast<double>(boot.size()) + 1.0);
}

TestOutcome bootstrap_test(const MultiSample& ms, const TestConfig& cfg) {
  require_two(ms);
  if (cfg.replicates < 99) throw InvalidArgument("need at least 99 bootstrap replicates");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw InvalidArgument("alpha must lie in (0,1)");
  if (cfg.statistic.kind == StatKind::SpM && cfg.statistic.p > ms.grid()->size())
    throw InvalidArgument("projection count exceeds grid size");

  const NullResamplePlan plan = NullResamplePlan::build(ms, cfg.block_sizes, cfg.method, cfg.taper);
  const StatEvaluator eval{ms.grid()->weight_vector(), size_factor(ms)};

  TestOutcome out;
  out.alpha = cfg.alpha;
  out.seed = cfg.seed;
  out.method = cfg.method;
  out.taper = cfg.taper;
  out.spec = cfg.statistic;
  out.block_sizes = cfg.block_sizes;

  Eigenfunctions basis;
  if (cfg.statistic.kind == StatKind::SpM) {
    basis = estimate_eigenfunctions(ms, plan, cfg.statistic.p);
    if (basis.degenerate) out.warnings.emplace_back("leading eigenvalues are not distinct");
  }

  auto evaluate = [&](const MultiSample& sample, const Eigenfunctions& phi) {
    const Vector d = mean_difference(sample);
    switch (cfg.statistic.kind) {
      case StatKind::UM: return eval.um(d);
      case StatKind::UMTilde: return eval.um_tilde(d);
      case StatKind::SpM: return eval.spm(d, phi.functions);
    }
    return 0.0;
  };
  out.statistic = evaluate(ms, basis);

  out.boot_stats.assign(cfg.replicates, 0.0);
  const RngStream root(cfg.seed);
  parallel_for(cfg.replicates, cfg.threads, [&](std::size_t r) {
    RngStream rng = root.child(r);
    const MultiSample pseudo = null_resample(ms, plan, rng);
    if (cfg.statistic.kind == StatKind::SpM && cfg.statistic.refit) {
      out.boot_stats[r] = evaluate(pseudo, estimate_eigenfunctions(pseudo, plan, cfg.statistic.p));
    } else {
      out.boot_stats[r] = evaluate(pseudo, basis);
    }
  });

  const bool upper = !(cfg.statistic.kind == StatKind::UMTilde && cfg.statistic.side == Side::Less);
  out.p_value = bootstrap_p_value(out.statistic, out.boot_stats, upper);
  out.reject = out.p_value <= cfg.alpha;
  return out;
}

}  // namespace fbb
