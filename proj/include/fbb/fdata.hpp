#pragma once

// Functional-data core: curves sampled on a shared quadrature grid over [0,1].

#include <Eigen/Dense>

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace fbb {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Quadrature grid on [0,1]: ascending abscissae with weights summing to one.
class Grid {
 public:
  /// Validates T >= 2, strictly increasing points in [0,1], nonnegative
  /// weights summing to 1 within 1e-12.
  Grid(std::vector<double> points, std::vector<double> weights);

  [[nodiscard]] std::size_t size() const noexcept { return points_.size(); }
  [[nodiscard]] std::span<const double> points() const noexcept { return points_; }
  [[nodiscard]] std::span<const double> weights() const noexcept { return weights_; }
  [[nodiscard]] const Vector& weight_vector() const noexcept { return weight_vec_; }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.points_ == b.points_ && a.weights_ == b.weights_;
  }

 private:
  std::vector<double> points_;
  std::vector<double> weights_;
  Vector weight_vec_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Endpoint-inclusive equidistant grid tau_j = (j-1)/(T-1) with trapezoid weights.
GridPtr make_uniform_grid(std::size_t T);

/// True when both handles refer to the same grid (by identity or by value).
bool same_grid(const GridPtr& a, const GridPtr& b);
void require_same_grid(const GridPtr& a, const GridPtr& b);

/// One functional observation: finite values at the grid points.
class Curve {
 public:
  Curve(GridPtr grid, Vector values);

  [[nodiscard]] const GridPtr& grid() const noexcept { return grid_; }
  [[nodiscard]] const Vector& values() const noexcept { return values_; }
  [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }
  [[nodiscard]] double operator[](std::size_t j) const { return values_[static_cast<Eigen::Index>(j)]; }

  static Curve constant(GridPtr grid, double c);

 private:
  GridPtr grid_;
  Vector values_;
};

/// n curves on one grid, stored as an n x T row-major matrix (row t = X_t).
class FunctionalSeries {
 public:
  FunctionalSeries(GridPtr grid, RowMatrix data);
  explicit FunctionalSeries(const std::vector<Curve>& curves);

  [[nodiscard]] const GridPtr& grid() const noexcept { return grid_; }
  [[nodiscard]] const RowMatrix& data() const noexcept { return data_; }
  [[nodiscard]] std::size_t length() const noexcept { return static_cast<std::size_t>(data_.rows()); }
  [[nodiscard]] std::size_t grid_size() const noexcept { return static_cast<std::size_t>(data_.cols()); }
  [[nodiscard]] Curve curve(std::size_t t) const;

  /// First `n` curves.
  [[nodiscard]] FunctionalSeries head(std::size_t n) const;

 private:
  GridPtr grid_;
  RowMatrix data_;
};

/// Kernel c(u,v) tabulated on grid x grid.
class Kernel2D {
 public:
  Kernel2D(GridPtr grid, Matrix values, bool symmetric = false);

  [[nodiscard]] const GridPtr& grid() const noexcept { return grid_; }
  [[nodiscard]] const Matrix& values() const noexcept { return values_; }
  [[nodiscard]] bool symmetric() const noexcept { return symmetric_; }
  [[nodiscard]] double operator()(std::size_t i, std::size_t j) const {
    return values_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

  template <class F>
  static Kernel2D tabulate(GridPtr grid, F&& f, bool symmetric = false) {
    const auto T = static_cast<Eigen::Index>(grid->size());
    Matrix m(T, T);
    const auto pts = grid->points();
    for (Eigen::Index i = 0; i < T; ++i)
      for (Eigen::Index j = 0; j < T; ++j) m(i, j) = f(pts[i], pts[j]);
    return Kernel2D(std::move(grid), std::move(m), symmetric);
  }

 private:
  GridPtr grid_;
  Matrix values_;
  bool symmetric_;
};

double inner_product(const Curve& f, const Curve& g);
double l2_norm(const Curve& f);

/// Squared discrete Hilbert-Schmidt distance sum_ij w_i w_j (K1_ij - K2_ij)^2.
double hs_distance_sq(const Kernel2D& a, const Kernel2D& b);

Curve mean_curve(const FunctionalSeries& s);
FunctionalSeries center_series(const FunctionalSeries& s);

// Fourier smoothing ---------------------------------------------------------

/// Basis {1, sqrt2 sin(2 pi k t), sqrt2 cos(2 pi k t)}, k = 1..(J-1)/2, in that
/// interleaved order, evaluated at `points`. Rows are points, columns basis.
Matrix fourier_basis(std::size_t J, std::span<const double> points);

/// Midpoint sample locations (j - 0.5)/m, j = 1..m, for m raw measurements.
std::vector<double> raw_sample_points(std::size_t m);

struct FourierFit {
  Vector coefficients;
  double rss = 0.0;  ///< residual sum of squares at the raw sample points
};

/// Least-squares projection of m equidistant raw samples onto J basis functions.
FourierFit fourier_fit(std::span<const double> raw_values, std::size_t J);

Curve fourier_evaluate(const Vector& coefficients, const GridPtr& grid);

/// fourier_fit followed by evaluation on `grid`.
Curve fourier_smooth(std::span<const double> raw_values, std::size_t J, const GridPtr& grid);

}  // namespace fbb
