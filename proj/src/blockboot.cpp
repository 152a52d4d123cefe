#include "fbb/blockboot.hpp"

#include "fbb/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

namespace fbb {

std::size_t default_block_size(std::size_t n) {
  if (n < 8) throw InvalidArgument("default block size rule needs n >= 8");
  std::size_t b = static_cast<std::size_t>(std::cbrt(static_cast<double>(n)));
  while (b * b * b < n) ++b;
  while (b > 1 && (b - 1) * (b - 1) * (b - 1) >= n) --b;
  return b;
}

BlockPlan BlockPlan::layout(std::size_t n, std::size_t b) {
  if (b < 1 || b >= n)
    throw InvalidBlock("block length " + std::to_string(b) + " must satisfy 1 <= b < n = " +
                       std::to_string(n));
  if (n % b != 0)
    throw InvalidBlock("block length " + std::to_string(b) + " does not divide n = " +
                       std::to_string(n));
  BlockPlan plan;
  plan.n = n;
  plan.b = b;
  plan.k = n / b;
  plan.N = n - b + 1;
  return plan;
}

BlockPlan BlockPlan::draw(std::size_t n, std::size_t b, RngStream& rng) {
  BlockPlan plan = layout(n, b);
  plan.starts.resize(plan.k);
  for (auto& s : plan.starts) s = rng.uniform_index(plan.N);
  return plan;
}

// Taper windows --------------------------------------------------------------

TaperWindow::TaperWindow(TaperShape shape, double c, std::vector<double> weights)
    : shape_(shape), c_(c), weights_(std::move(weights)) {
  l1_ = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  l2_sq_ = std::inner_product(weights_.begin(), weights_.end(), weights_.begin(), 0.0);
  inflation_ = std::sqrt(static_cast<double>(weights_.size()) / l2_sq_);
}

TaperWindow TaperWindow::flat(std::size_t b) {
  if (b < 1) throw InvalidArgument("taper window needs b >= 1");
  return TaperWindow(TaperShape::Flat, 0.0, std::vector<double>(b, 1.0));
}

TaperWindow TaperWindow::trapezoid(double c, std::size_t b) {
  if (b < 1) throw InvalidArgument("taper window needs b >= 1");
  if (!(c > 0.0 && c <= 0.5)) throw InvalidArgument("trapezoid taper needs c in (0, 0.5]");
  std::vector<double> w(b);
  for (std::size_t j = 0; j < b; ++j) {
    const double t = (static_cast<double>(j) + 0.5) / static_cast<double>(b);
    w[j] = std::clamp(std::min({t / c, 1.0, (1.0 - t) / c}), 0.0, 1.0);
  }
  // Exact mirror symmetry regardless of rounding in (1 - t).
  for (std::size_t j = 0; j < b / 2; ++j) w[b - 1 - j] = w[j];
  return TaperWindow(TaperShape::Trapezoid, c, std::move(w));
}

std::vector<double> TaperWindow::lag_products() const {
  const std::size_t b = weights_.size();
  std::vector<double> W(b, 0.0);
  for (std::size_t h = 0; h < b; ++h)
    for (std::size_t i = 0; i + h < b; ++i) W[h] += weights_[i] * weights_[i + h];
  return W;
}

TaperWindow TaperSpec::window(std::size_t b) const {
  return shape == TaperShape::Flat ? TaperWindow::flat(b) : TaperWindow::trapezoid(c, b);
}

TaperSpec TaperSpec::parse(std::string_view text) {
  if (text == "flat") return {TaperShape::Flat, 0.0};
  constexpr std::string_view prefix = "trapezoid";
  if (text.substr(0, prefix.size()) != prefix)
    throw InvalidArgument("unknown taper '" + std::string(text) + "'");
  TaperSpec spec{TaperShape::Trapezoid, 0.43};
  auto rest = text.substr(prefix.size());
  if (rest.empty()) return spec;
  if (rest.front() != ':') throw InvalidArgument("malformed taper '" + std::string(text) + "'");
  rest.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), spec.c);
  if (ec != std::errc{} || ptr != rest.data() + rest.size())
    throw InvalidArgument("malformed taper parameter '" + std::string(rest) + "'");
  if (!(spec.c > 0.0 && spec.c <= 0.5)) throw InvalidArgument("trapezoid taper needs c in (0, 0.5]");
  return spec;
}

std::string TaperSpec::to_string() const {
  if (shape == TaperShape::Flat) return "flat";
  std::ostringstream os;
  os << "trapezoid:" << c;
  return os.str();
}

// MBB --------------------------------------------------------------------------

namespace {

void check_starts(const BlockPlan& plan, std::span<const std::size_t> starts) {
  if (starts.size() != plan.k) throw InvalidBlock("expected one start per block");
  for (auto s : starts)
    if (s >= plan.N) throw InvalidBlock("block start out of range");
}

void check_window(const TaperWindow& window, std::size_t b) {
  if (window.b() != b) throw InvalidArgument("taper window length does not match block length");
}

}  // namespace

FunctionalSeries assemble_mbb(const FunctionalSeries& s, std::size_t b,
                              std::span<const std::size_t> starts) {
  const BlockPlan plan = BlockPlan::layout(s.length(), b);
  check_starts(plan, starts);
  const auto bi = static_cast<Eigen::Index>(b);
  RowMatrix out(s.data().rows(), s.data().cols());
  for (std::size_t q = 0; q < plan.k; ++q)
    out.middleRows(static_cast<Eigen::Index>(q) * bi, bi) =
        s.data().middleRows(static_cast<Eigen::Index>(starts[q]), bi);
  return FunctionalSeries(s.grid(), std::move(out));
}

FunctionalSeries mbb_resample(const FunctionalSeries& s, std::size_t b, RngStream& rng) {
  const BlockPlan plan = BlockPlan::draw(s.length(), b, rng);
  return assemble_mbb(s, b, plan.starts);
}

Curve mbb_conditional_mean(const FunctionalSeries& s, std::size_t b) {
  const BlockPlan plan = BlockPlan::layout(s.length(), b);
  const RowMatrix& X = s.data();
  const auto n = static_cast<Eigen::Index>(plan.n);
  Eigen::RowVectorXd acc = X.colwise().sum();
  for (std::size_t t = 1; t < b; ++t) {
    const double c = 1.0 - static_cast<double>(t) / static_cast<double>(b);
    const auto ti = static_cast<Eigen::Index>(t);
    acc -= c * (X.row(ti - 1) + X.row(n - ti));
  }
  return Curve(s.grid(), acc.transpose() / static_cast<double>(plan.N));
}

double mbb_block_variance(const FunctionalSeries& s, std::size_t b, const Curve& direction) {
  const BlockPlan plan = BlockPlan::layout(s.length(), b);
  require_same_grid(s.grid(), direction.grid());
  // Projections of every curve, then sliding block sums.
  const Vector proj = s.data() * s.grid()->weight_vector().cwiseProduct(direction.values());
  double mean = 0.0, second = 0.0;
  for (std::size_t start = 0; start < plan.N; ++start) {
    const double u = proj.segment(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(b)).sum() /
                     std::sqrt(static_cast<double>(b));
    mean += u;
    second += u * u;
  }
  mean /= static_cast<double>(plan.N);
  second /= static_cast<double>(plan.N);
  return second - mean * mean;
}

// TBB --------------------------------------------------------------------------

FunctionalSeries assemble_tbb(const FunctionalSeries& centered, const TaperWindow& window,
                              std::span<const std::size_t> starts) {
  const std::size_t b = window.b();
  const BlockPlan plan = BlockPlan::layout(centered.length(), b);
  check_starts(plan, starts);
  RowMatrix out(centered.data().rows(), centered.data().cols());
  const double infl = window.inflation();
  for (std::size_t q = 0; q < plan.k; ++q)
    for (std::size_t j = 0; j < b; ++j)
      out.row(static_cast<Eigen::Index>(q * b + j)) =
          (window[j] * infl) * centered.data().row(static_cast<Eigen::Index>(starts[q] + j));
  return FunctionalSeries(centered.grid(), std::move(out));
}

FunctionalSeries tbb_resample(const FunctionalSeries& raw, std::size_t b, const TaperWindow& window,
                              RngStream& rng) {
  check_window(window, b);
  const BlockPlan plan = BlockPlan::draw(raw.length(), b, rng);
  return assemble_tbb(center_series(raw), window, plan.starts);
}

Curve tbb_conditional_mean(const FunctionalSeries& raw, std::size_t b, const TaperWindow& window) {
  check_window(window, b);
  const BlockPlan plan = BlockPlan::layout(raw.length(), b);
  const FunctionalSeries centered = center_series(raw);
  const RowMatrix& X = centered.data();
  const auto n = static_cast<Eigen::Index>(plan.n);
  const double l1 = window.l1();

  Eigen::RowVectorXd acc = X.colwise().sum();
  double head = 0.0;  // sum_{s<=t} w_b(s)
  double tail = 0.0;  // sum_{s>b-j} w_b(s)
  for (std::size_t t = 1; t < b; ++t) {
    head += window[t - 1];
    tail += window[b - t];
    const auto ti = static_cast<Eigen::Index>(t);
    acc -= (1.0 - head / l1) * X.row(ti - 1);
    acc -= (1.0 - tail / l1) * X.row(n - ti);
  }
  // The k slots of length b each carry weight 1/n = 1/(k b); the inflation
  // factor sqrt(b)/||w||_2 therefore contributes ||w||_1/(sqrt(b) ||w||_2).
  const double scale =
      l1 / (std::sqrt(static_cast<double>(b)) * std::sqrt(window.l2_sq()) * static_cast<double>(plan.N));
  return Curve(raw.grid(), scale * acc.transpose());
}

// Long-run covariance ----------------------------------------------------------

Kernel2D lag_window_covariance(const FunctionalSeries& s, std::size_t b,
                               std::span<const double> lag_weights) {
  const std::size_t n = s.length();
  if (b < 1 || b > n)
    throw InvalidBlock("long-run covariance needs 1 <= b <= n, got b = " + std::to_string(b));
  if (lag_weights.size() < b) throw InvalidArgument("need one lag weight per lag 0..b-1");
  const RowMatrix& X = s.data();
  const double N = static_cast<double>(n - b + 1);

  Matrix c = X.transpose() * X;
  for (std::size_t h = 1; h < b; ++h) {
    const auto m = static_cast<Eigen::Index>(n - h);
    const Matrix cross = X.topRows(m).transpose() * X.bottomRows(m);
    c.noalias() += lag_weights[h] * (cross + cross.transpose());
  }
  c /= N;
  Matrix sym = 0.5 * (c + c.transpose());
  return Kernel2D(s.grid(), std::move(sym), true);
}

Kernel2D lrcov_mbb(const FunctionalSeries& s, std::size_t b, bool center) {
  std::vector<double> weights(b);
  for (std::size_t h = 0; h < b; ++h) weights[h] = 1.0 - static_cast<double>(h) / static_cast<double>(b);
  return lag_window_covariance(center ? center_series(s) : s, b, weights);
}

Kernel2D lrcov_tbb(const FunctionalSeries& s, std::size_t b, const TaperWindow& window, bool center) {
  check_window(window, b);
  std::vector<double> weights = window.lag_products();
  const double norm = window.l2_sq();
  for (auto& w : weights) w /= norm;
  return lag_window_covariance(center ? center_series(s) : s, b, weights);
}

}  // namespace fbb
