#pragma once

// Moving-block (MBB) and tapered-block (TBB) bootstrap for functional time
// series, their closed-form conditional means, and the lag-window long-run
// covariance estimators they induce.
//
// Block start indices are 0-based throughout: a start s in [0, N) selects the
// curves s, s+1, ..., s+b-1, with N = n - b + 1.

#include "fbb/fdata.hpp"
#include "fbb/rng.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fbb {

/// Smallest b with b^3 >= n, i.e. ceil(n^(1/3)). Requires n >= 8.
std::size_t default_block_size(std::size_t n);

/// Resampling layout for a series of length n = k * b.
struct BlockPlan {
  std::size_t n = 0;
  std::size_t b = 0;
  std::size_t k = 0;  ///< number of blocks joined
  std::size_t N = 0;  ///< number of overlapping blocks available
  std::vector<std::size_t> starts;

  /// Throws InvalidBlock unless 1 <= b < n and b divides n.
  static BlockPlan layout(std::size_t n, std::size_t b);
  /// Layout with k i.i.d. uniform starts drawn from `rng`.
  static BlockPlan draw(std::size_t n, std::size_t b, RngStream& rng);
};

enum class TaperShape { Flat, Trapezoid };

/// Discrete taper weights w_b(j) = w((j - 0.5)/b), j = 1..b.
class TaperWindow {
 public:
  static TaperWindow flat(std::size_t b);
  /// w(t) = min(t/c, 1, (1-t)/c) on [0,1]; c must lie in (0, 0.5].
  static TaperWindow trapezoid(double c, std::size_t b);

  [[nodiscard]] TaperShape shape() const noexcept { return shape_; }
  [[nodiscard]] double c() const noexcept { return c_; }
  [[nodiscard]] std::size_t b() const noexcept { return weights_.size(); }
  [[nodiscard]] std::span<const double> weights() const noexcept { return weights_; }
  [[nodiscard]] double operator[](std::size_t j) const { return weights_[j]; }

  [[nodiscard]] double l1() const noexcept { return l1_; }
  /// Squared l2 norm sum_j w_b(j)^2.
  [[nodiscard]] double l2_sq() const noexcept { return l2_sq_; }
  /// sqrt(b) / ||w_b||_2; equals 1 for the flat window.
  [[nodiscard]] double inflation() const noexcept { return inflation_; }
  /// Lag products W_h = sum_{i=1}^{b-h} w_b(i) w_b(i+h), h = 0..b-1.
  [[nodiscard]] std::vector<double> lag_products() const;

 private:
  TaperWindow(TaperShape shape, double c, std::vector<double> weights);

  TaperShape shape_;
  double c_;
  std::vector<double> weights_;
  double l1_;
  double l2_sq_;
  double inflation_;
};

/// Shape of a taper independent of block length; resolved per series.
struct TaperSpec {
  TaperShape shape = TaperShape::Trapezoid;
  double c = 0.43;

  [[nodiscard]] TaperWindow window(std::size_t b) const;
  /// "flat" or "trapezoid:<c>" (bare "trapezoid" uses c = 0.43).
  static TaperSpec parse(std::string_view text);
  [[nodiscard]] std::string to_string() const;
};

// Moving-block bootstrap ----------------------------------------------------

/// Concatenates the blocks named by `starts` (0-based) of length b.
FunctionalSeries assemble_mbb(const FunctionalSeries& s, std::size_t b,
                              std::span<const std::size_t> starts);

FunctionalSeries mbb_resample(const FunctionalSeries& s, std::size_t b, RngStream& rng);

/// E*(mean of the MBB pseudo series), in closed form.
Curve mbb_conditional_mean(const FunctionalSeries& s, std::size_t b);

/// Var*(<U_1, y>) / b where U_1 is the sum of one uniformly drawn block; this
/// is the exact bootstrap variance of <sqrt(n)(mean* - E* mean*), y> because
/// the k block sums are i.i.d.
double mbb_block_variance(const FunctionalSeries& s, std::size_t b, const Curve& direction);

// Tapered-block bootstrap ---------------------------------------------------

/// Tapers and inflates the blocks named by `starts` of an already centered
/// series: slot j of a block starting at s is w_b(j) * sqrt(b)/||w_b||_2 * X_{s+j}.
FunctionalSeries assemble_tbb(const FunctionalSeries& centered, const TaperWindow& window,
                              std::span<const std::size_t> starts);

/// Centers the raw series, then resamples tapered blocks.
FunctionalSeries tbb_resample(const FunctionalSeries& raw, std::size_t b, const TaperWindow& window,
                              RngStream& rng);

/// E*(mean of the TBB pseudo series) in closed form, on centered data.
Curve tbb_conditional_mean(const FunctionalSeries& raw, std::size_t b, const TaperWindow& window);

// Long-run covariance -------------------------------------------------------

/// sum_{|h|<b} lag_weights[|h|] * (1/N) sum_i X_i(u) X_{i+h}(v); the lag-0
/// weight is taken as 1. Input is used as given (no centering).
Kernel2D lag_window_covariance(const FunctionalSeries& s, std::size_t b,
                               std::span<const double> lag_weights);

/// Bartlett-window estimator c_N(u,v) with weights 1 - h/b, 1/N normalization.
/// Centers the series first unless `center` is false.
Kernel2D lrcov_mbb(const FunctionalSeries& s, std::size_t b, bool center = true);

/// Taper-induced estimator with lag weights W_h / ||w_b||_2^2.
Kernel2D lrcov_tbb(const FunctionalSeries& s, std::size_t b, const TaperWindow& window,
                   bool center = true);

}  // namespace fbb
