#include "fbb/fdata.hpp"

#include "fbb/error.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace fbb {

namespace {

bool all_finite(const auto& m) { return m.allFinite(); }

}  // namespace

Grid::Grid(std::vector<double> points, std::vector<double> weights)
    : points_(std::move(points)), weights_(std::move(weights)) {
  if (points_.size() < 2) throw InvalidArgument("grid needs at least 2 points");
  if (points_.size() != weights_.size())
    throw InvalidArgument("grid points and weights differ in length");
  for (std::size_t j = 0; j < points_.size(); ++j) {
    if (!std::isfinite(points_[j]) || points_[j] < 0.0 || points_[j] > 1.0)
      throw InvalidArgument("grid point outside [0,1]");
    if (j > 0 && !(points_[j] > points_[j - 1]))
      throw InvalidArgument("grid points must be strictly increasing");
    if (!std::isfinite(weights_[j]) || weights_[j] < 0.0)
      throw InvalidArgument("grid weights must be finite and nonnegative");
  }
  const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-12)
    throw InvalidArgument("grid weights must sum to 1, got " + std::to_string(total));
  weight_vec_ = Eigen::Map<const Vector>(weights_.data(), static_cast<Eigen::Index>(weights_.size()));
}

GridPtr make_uniform_grid(std::size_t T) {
  if (T < 2) throw InvalidArgument("uniform grid needs T >= 2");
  std::vector<double> pts(T), w(T);
  const double h = 1.0 / static_cast<double>(T - 1);
  for (std::size_t j = 0; j < T; ++j) {
    pts[j] = static_cast<double>(j) * h;
    w[j] = (j == 0 || j + 1 == T) ? 0.5 * h : h;
  }
  pts.back() = 1.0;
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& x : w) x /= total;
  return std::make_shared<const Grid>(std::move(pts), std::move(w));
}

bool same_grid(const GridPtr& a, const GridPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return *a == *b;
}

void require_same_grid(const GridPtr& a, const GridPtr& b) {
  if (!same_grid(a, b)) throw GridMismatch();
}

Curve::Curve(GridPtr grid, Vector values) : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw InvalidArgument("curve without grid");
  if (static_cast<std::size_t>(values_.size()) != grid_->size())
    throw InvalidArgument("curve length does not match grid size");
  if (!all_finite(values_)) throw InvalidArgument("curve values must be finite");
}

Curve Curve::constant(GridPtr grid, double c) {
  const auto T = static_cast<Eigen::Index>(grid->size());
  return Curve(std::move(grid), Vector::Constant(T, c));
}

FunctionalSeries::FunctionalSeries(GridPtr grid, RowMatrix data)
    : grid_(std::move(grid)), data_(std::move(data)) {
  if (!grid_) throw InvalidArgument("series without grid");
  if (data_.rows() < 1) throw InvalidArgument("series needs at least one curve");
  if (static_cast<std::size_t>(data_.cols()) != grid_->size())
    throw InvalidArgument("series width does not match grid size");
  if (!all_finite(data_)) throw InvalidArgument("series values must be finite");
}

FunctionalSeries::FunctionalSeries(const std::vector<Curve>& curves)
    : FunctionalSeries(curves.empty() ? nullptr : curves.front().grid(), [&] {
        if (curves.empty()) throw InvalidArgument("series needs at least one curve");
        RowMatrix m(static_cast<Eigen::Index>(curves.size()),
                    static_cast<Eigen::Index>(curves.front().size()));
        for (std::size_t t = 0; t < curves.size(); ++t) {
          require_same_grid(curves.front().grid(), curves[t].grid());
          m.row(static_cast<Eigen::Index>(t)) = curves[t].values().transpose();
        }
        return m;
      }()) {}

Curve FunctionalSeries::curve(std::size_t t) const {
  return Curve(grid_, data_.row(static_cast<Eigen::Index>(t)).transpose());
}

FunctionalSeries FunctionalSeries::head(std::size_t n) const {
  if (n < 1 || n > length()) throw InvalidArgument("head length out of range");
  return FunctionalSeries(grid_, data_.topRows(static_cast<Eigen::Index>(n)));
}

Kernel2D::Kernel2D(GridPtr grid, Matrix values, bool symmetric)
    : grid_(std::move(grid)), values_(std::move(values)), symmetric_(symmetric) {
  if (!grid_) throw InvalidArgument("kernel without grid");
  const auto T = static_cast<Eigen::Index>(grid_->size());
  if (values_.rows() != T || values_.cols() != T)
    throw InvalidArgument("kernel must be T x T");
  if (!all_finite(values_)) throw InvalidArgument("kernel values must be finite");
  if (symmetric_) {
    for (Eigen::Index i = 0; i < T; ++i)
      for (Eigen::Index j = i + 1; j < T; ++j)
        if (std::abs(values_(i, j) - values_(j, i)) > 1e-10 * (1.0 + std::abs(values_(i, j))))
          throw InvalidArgument("kernel flagged symmetric is not symmetric");
  }
}

double inner_product(const Curve& f, const Curve& g) {
  require_same_grid(f.grid(), g.grid());
  return (f.grid()->weight_vector().array() * f.values().array() * g.values().array()).sum();
}

double l2_norm(const Curve& f) { return std::sqrt(std::max(0.0, inner_product(f, f))); }

double hs_distance_sq(const Kernel2D& a, const Kernel2D& b) {
  require_same_grid(a.grid(), b.grid());
  const Vector& w = a.grid()->weight_vector();
  const Matrix diff = a.values() - b.values();
  return (w.asDiagonal() * diff.array().square().matrix() * w.asDiagonal()).sum();
}

Curve mean_curve(const FunctionalSeries& s) {
  return Curve(s.grid(), s.data().colwise().mean().transpose());
}

FunctionalSeries center_series(const FunctionalSeries& s) {
  const Eigen::RowVectorXd mean = s.data().colwise().mean();
  RowMatrix centered = s.data().rowwise() - mean;
  return FunctionalSeries(s.grid(), std::move(centered));
}

Matrix fourier_basis(std::size_t J, std::span<const double> points) {
  if (J == 0 || J % 2 == 0) throw InvalidArgument("Fourier basis count must be odd");
  const auto m = static_cast<Eigen::Index>(points.size());
  Matrix basis(m, static_cast<Eigen::Index>(J));
  const double root2 = std::numbers::sqrt2;
  for (Eigen::Index r = 0; r < m; ++r) {
    const double t = points[static_cast<std::size_t>(r)];
    basis(r, 0) = 1.0;
    for (std::size_t k = 1; 2 * k < J + 1; ++k) {
      const double arg = 2.0 * std::numbers::pi * static_cast<double>(k) * t;
      basis(r, static_cast<Eigen::Index>(2 * k - 1)) = root2 * std::sin(arg);
      basis(r, static_cast<Eigen::Index>(2 * k)) = root2 * std::cos(arg);
    }
  }
  return basis;
}

std::vector<double> raw_sample_points(std::size_t m) {
  std::vector<double> pts(m);
  for (std::size_t j = 0; j < m; ++j)
    pts[j] = (static_cast<double>(j) + 0.5) / static_cast<double>(m);
  return pts;
}

FourierFit fourier_fit(std::span<const double> raw_values, std::size_t J) {
  if (J == 0 || J % 2 == 0) throw InvalidArgument("Fourier basis count must be odd");
  const std::size_t m = raw_values.size();
  if (m < J)
    throw Underdetermined("Fourier fit needs at least " + std::to_string(J) + " samples, got " +
                          std::to_string(m));
  const Matrix basis = fourier_basis(J, raw_sample_points(m));
  const Vector y = Eigen::Map<const Vector>(raw_values.data(), static_cast<Eigen::Index>(m));
  if (!y.allFinite()) throw InvalidArgument("raw values must be finite");
  FourierFit fit;
  fit.coefficients = basis.colPivHouseholderQr().solve(y);
  fit.rss = (y - basis * fit.coefficients).squaredNorm();
  return fit;
}

Curve fourier_evaluate(const Vector& coefficients, const GridPtr& grid) {
  const Matrix basis = fourier_basis(static_cast<std::size_t>(coefficients.size()), grid->points());
  return Curve(grid, basis * coefficients);
}

Curve fourier_smooth(std::span<const double> raw_values, std::size_t J, const GridPtr& grid) {
  return fourier_evaluate(fourier_fit(raw_values, J).coefficients, grid);
}

}  // namespace fbb
