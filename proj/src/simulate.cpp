#include "fbb/simulate.hpp"

#include "fbb/error.hpp"

#include <cmath>
#include <string>

namespace fbb {

double gaussian_integral_unit() {
  constexpr int intervals = 100000;
  const double h = 1.0 / intervals;
  double sum = 1.0 + std::exp(-1.0);
  for (int i = 1; i < intervals; ++i) {
    const double t = i * h;
    sum += (i % 2 == 1 ? 4.0 : 2.0) * std::exp(-t * t);
  }
  return sum * h / 3.0;
}

PsiKernel psi_kernel(const GridPtr& grid) {
  const double norm = 4.0 * gaussian_integral_unit();
  return PsiKernel{Kernel2D::tabulate(
      grid, [norm](double u, double v) { return std::exp(-(u * u + v * v) / 2.0) / norm; }, true)};
}

Curve apply_kernel(const Kernel2D& k, const Curve& f) {
  require_same_grid(k.grid(), f.grid());
  return Curve(f.grid(), k.values() * f.grid()->weight_vector().cwiseProduct(f.values()));
}

Curve brownian_bridge(const GridPtr& grid, RngStream& rng) {
  const auto pts = grid->points();
  const std::size_t T = pts.size();
  Vector w(static_cast<Eigen::Index>(T));
  double prev_t = 0.0, level = 0.0;
  for (std::size_t j = 0; j < T; ++j) {
    level += std::sqrt(pts[j] - prev_t) * rng.normal();
    w[static_cast<Eigen::Index>(j)] = level;
    prev_t = pts[j];
  }
  const double at_one = prev_t < 1.0 ? level + std::sqrt(1.0 - prev_t) * rng.normal() : level;
  for (std::size_t j = 0; j < T; ++j) {
    auto& x = w[static_cast<Eigen::Index>(j)];
    x = pts[j] == 1.0 ? 0.0 : x - pts[j] * at_one;
  }
  return Curve(grid, std::move(w));
}

Model parse_model(std::string_view name) {
  if (name == "far1" || name == "FAR1") return Model::FAR1;
  if (name == "fma1" || name == "FMA1") return Model::FMA1;
  if (name == "iid" || name == "IID_BRIDGE" || name == "iid_bridge") return Model::IID_BRIDGE;
  throw InvalidArgument("unknown model '" + std::string(name) + "'");
}

std::string_view to_string(Model m) {
  switch (m) {
    case Model::FAR1: return "far1";
    case Model::FMA1: return "fma1";
    case Model::IID_BRIDGE: return "iid";
  }
  return "?";
}

namespace {

void check_config(const SimConfig& cfg) {
  if (cfg.n < 1) throw InvalidArgument("simulation length must be >= 1");
  if (!std::isfinite(cfg.gamma)) throw InvalidArgument("gamma must be finite");
}

// Operator matrix acting on grid values: (A f)_i = sum_j K_ij w_j f_j.
Matrix operator_matrix(const Kernel2D& k) {
  return k.values() * k.grid()->weight_vector().asDiagonal();
}

}  // namespace

FunctionalSeries simulate_far1(const SimConfig& cfg, const GridPtr& grid,
                               const std::optional<Kernel2D>& kernel) {
  check_config(cfg);
  const Matrix A = operator_matrix(kernel ? *kernel : psi_kernel(grid).kernel);
  if (kernel) require_same_grid(kernel->grid(), grid);
  RngStream rng(cfg.seed);
  const auto T = static_cast<Eigen::Index>(grid->size());
  RowMatrix out(static_cast<Eigen::Index>(cfg.n), T);
  Vector eps = Vector::Zero(T);
  for (std::size_t t = 0; t < cfg.burn_in + cfg.n; ++t) {
    eps = A * eps + brownian_bridge(grid, rng).values();
    if (t >= cfg.burn_in) out.row(static_cast<Eigen::Index>(t - cfg.burn_in)) = eps.transpose();
  }
  return FunctionalSeries(grid, std::move(out));
}

FunctionalSeries simulate_fma1(const SimConfig& cfg, const GridPtr& grid,
                               const std::optional<Kernel2D>& kernel) {
  check_config(cfg);
  const Matrix A = operator_matrix(kernel ? *kernel : psi_kernel(grid).kernel);
  if (kernel) require_same_grid(kernel->grid(), grid);
  RngStream rng(cfg.seed);
  const auto T = static_cast<Eigen::Index>(grid->size());
  RowMatrix out(static_cast<Eigen::Index>(cfg.n), T);
  Vector previous = brownian_bridge(grid, rng).values();
  for (std::size_t t = 0; t < cfg.n; ++t) {
    Vector current = brownian_bridge(grid, rng).values();
    out.row(static_cast<Eigen::Index>(t)) = (A * previous + current).transpose();
    previous = std::move(current);
  }
  return FunctionalSeries(grid, std::move(out));
}

FunctionalSeries simulate(const SimConfig& cfg, const GridPtr& grid) {
  switch (cfg.model) {
    case Model::FAR1: return add_mean(simulate_far1(cfg, grid), cfg.gamma);
    case Model::FMA1: return add_mean(simulate_fma1(cfg, grid), cfg.gamma);
    case Model::IID_BRIDGE: {
      check_config(cfg);
      RngStream rng(cfg.seed);
      RowMatrix out(static_cast<Eigen::Index>(cfg.n), static_cast<Eigen::Index>(grid->size()));
      for (std::size_t t = 0; t < cfg.n; ++t)
        out.row(static_cast<Eigen::Index>(t)) = brownian_bridge(grid, rng).values().transpose();
      return add_mean(FunctionalSeries(grid, std::move(out)), cfg.gamma);
    }
  }
  throw InvalidArgument("unknown model");
}

FunctionalSeries add_mean(const FunctionalSeries& s, double gamma) {
  if (gamma == 0.0) return s;
  const auto pts = s.grid()->points();
  Eigen::RowVectorXd shift(static_cast<Eigen::Index>(pts.size()));
  for (std::size_t j = 0; j < pts.size(); ++j)
    shift[static_cast<Eigen::Index>(j)] = gamma * pts[j] * (1.0 - pts[j]);
  RowMatrix data = s.data().rowwise() + shift;
  return FunctionalSeries(s.grid(), std::move(data));
}

}  // namespace fbb
