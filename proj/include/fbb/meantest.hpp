#pragma once

// Block-bootstrap tests of equality of mean functions across K independent
// functional time series. Pseudo-samples are generated so that every
// pseudo-observation has conditional mean equal to the pooled mean, which
// imposes the null hypothesis regardless of the observed means.

#include "fbb/blockboot.hpp"
#include "fbb/fdata.hpp"
#include "fbb/rng.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fbb {

/// K >= 2 independent samples on one grid, each of length >= 2.
class MultiSample {
 public:
  explicit MultiSample(std::vector<FunctionalSeries> samples);

  [[nodiscard]] std::size_t count() const noexcept { return samples_.size(); }
  [[nodiscard]] const FunctionalSeries& operator[](std::size_t i) const { return samples_[i]; }
  [[nodiscard]] const std::vector<FunctionalSeries>& samples() const noexcept { return samples_; }
  [[nodiscard]] const GridPtr& grid() const noexcept { return samples_.front().grid(); }
  [[nodiscard]] std::size_t total() const noexcept { return total_; }

 private:
  std::vector<FunctionalSeries> samples_;
  std::size_t total_ = 0;
};

Curve pooled_mean(const MultiSample& ms);

/// Per-sample residuals X_{i,t} - mean_i.
std::vector<FunctionalSeries> sample_residuals(const MultiSample& ms);

/// Mean of the xi-th entries over all N = n - b + 1 overlapping blocks, for
/// xi = 1..b. Requires b | n.
std::vector<Curve> slotwise_block_means(const FunctionalSeries& residuals, std::size_t b);

enum class Method { MBB, TBB };

Method parse_method(std::string_view name);
std::string_view to_string(Method m);

/// Everything needed to draw null-enforcing pseudo-samples.
///
/// For MBB the per-slot source values are the residuals; for TBB they are the
/// re-centered residuals multiplied by w_b(xi) sqrt(b)/||w_b||_2. In both
/// cases the slot means of the source values are subtracted, so every
/// pseudo-observation has conditional expectation equal to the pooled mean.
struct NullResamplePlan {
  Method method = Method::TBB;
  TaperSpec taper;
  std::vector<std::size_t> block_sizes;
  Curve pooled;
  std::vector<FunctionalSeries> sources;   ///< per-sample (re-centered) residuals
  std::vector<TaperWindow> windows;        ///< flat for MBB
  std::vector<RowMatrix> slot_means;       ///< per-sample b_i x T matrix

  /// Validates b_i | n_i and computes the centering terms.
  static NullResamplePlan build(const MultiSample& ms, std::span<const std::size_t> block_sizes,
                                Method method, TaperSpec taper = {});
};

/// Pseudo-sample i from explicit 0-based block starts.
FunctionalSeries assemble_null_sample(const NullResamplePlan& plan, std::size_t i,
                                      std::span<const std::size_t> starts);

/// Dispatches on plan.method.
MultiSample null_resample(const MultiSample& ms, const NullResamplePlan& plan, RngStream& rng);
MultiSample mbb_null_resample(const MultiSample& ms, const NullResamplePlan& plan, RngStream& rng);
MultiSample tbb_null_resample(const MultiSample& ms, const NullResamplePlan& plan, RngStream& rng);

// Statistics ------------------------------------------------------------------

/// (n1 n2 / M) * ||mean_1 - mean_2||^2.
double stat_um(const MultiSample& ms);
/// sqrt(n1 n2 / M) * int (mean_1 - mean_2); positive when sample 1 is larger.
double stat_um_tilde(const MultiSample& ms);

struct Eigenfunctions {
  std::vector<Curve> functions;  ///< orthonormal in the quadrature inner product
  std::vector<double> values;    ///< descending
  bool degenerate = false;       ///< leading eigenvalues not distinct within 1e-10
};

/// Leading p eigenpairs of the integral operator with kernel `k`.
Eigenfunctions eigen_decompose(const Kernel2D& k, std::size_t p);

/// Eigenpairs of (1 - theta) c_1 + theta c_2 with theta = n_1/M and c_i the
/// long-run covariance of sample i estimated by the plan's method.
Eigenfunctions estimate_eigenfunctions(const MultiSample& ms, const NullResamplePlan& plan,
                                       std::size_t p);

/// (n1 n2 / M) * sum_k <mean_1 - mean_2, phi_k>^2.
double stat_spm(const MultiSample& ms, std::span<const Curve> eigenfunctions);

// Bootstrap test --------------------------------------------------------------

enum class StatKind { UM, UMTilde, SpM };
enum class Side { Greater, Less };

struct StatisticSpec {
  StatKind kind = StatKind::UM;
  Side side = Side::Greater;  ///< UMTilde only
  std::size_t p = 3;          ///< SpM only
  bool refit = false;         ///< SpM only: re-estimate eigenfunctions per replicate

  /// "um", "umt:greater", "umt:less", "spm:<p>" or "spm:<p>:refit".
  static StatisticSpec parse(std::string_view text);
  [[nodiscard]] std::string to_string() const;
};

struct TestConfig {
  StatisticSpec statistic;
  Method method = Method::TBB;
  TaperSpec taper;
  std::vector<std::size_t> block_sizes;  ///< one per sample
  std::size_t replicates = 1000;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  unsigned threads = 1;  ///< 0 selects hardware concurrency
};

struct TestOutcome {
  double statistic = 0.0;
  std::vector<double> boot_stats;
  double p_value = 1.0;
  double alpha = 0.05;
  bool reject = false;
  std::uint64_t seed = 0;
  Method method = Method::TBB;
  TaperSpec taper;
  StatisticSpec spec;
  std::vector<std::size_t> block_sizes;
  std::vector<std::string> warnings;
};

/// (1 + #{boot >= stat}) / (B + 1) for upper-tail tests, with <= for lower.
double bootstrap_p_value(double statistic, std::span<const double> boot, bool upper_tail);

/// Replicate r draws its blocks from RngStream(seed).child(r); the output is
/// independent of the thread count.
TestOutcome bootstrap_test(const MultiSample& ms, const TestConfig& cfg);

}  // namespace fbb
