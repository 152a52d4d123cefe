#include "fbb/error.hpp"
#include "fbb/simulate.hpp"
#include "oracles.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace fbb;
using Catch::Approx;

namespace {

// Empirical lag-h cross-covariance E[X_{t+h}(u) X_t(v)] of a (near) zero-mean series.
Matrix lag_cov(const FunctionalSeries& s, std::size_t h) {
  const auto m = static_cast<Eigen::Index>(s.length() - h);
  const RowMatrix X = center_series(s).data();
  return X.bottomRows(m).transpose() * X.topRows(m) / static_cast<double>(m);
}

const double kGaussIntegral = std::sqrt(M_PI) / 2.0 * std::erf(1.0);

}  // namespace

TEST_CASE("brownian bridge pinning and covariance") {
  auto g = make_uniform_grid(21);
  RngStream rng(1);

  const Curve one = brownian_bridge(g, rng);
  CHECK(one[0] == 0.0);
  CHECK(one[20] == 0.0);

  constexpr int draws = 50000;
  RowMatrix X(draws, 21);
  for (int i = 0; i < draws; ++i) X.row(i) = brownian_bridge(g, rng).values().transpose();
  REQUIRE(X.col(0).isZero(0.0));
  REQUIRE(X.col(20).isZero(0.0));

  const double var_mid = X.topRows(20000).col(10).squaredNorm() / 20000.0;
  CHECK(std::abs(var_mid - 0.25) < 0.01);

  const Matrix cov = X.transpose() * X / static_cast<double>(draws);
  double worst = 0.0;
  for (int i = 0; i < 21; ++i)
    for (int j = 0; j < 21; ++j) {
      const double u = g->points()[i], v = g->points()[j];
      worst = std::max(worst, std::abs(cov(i, j) - (std::min(u, v) - u * v)));
    }
  CHECK(worst < 0.01);
}

TEST_CASE("bridge on a grid without endpoints") {
  auto g = std::make_shared<const Grid>(std::vector<double>{0.25, 0.75}, std::vector<double>{0.5, 0.5});
  RngStream rng(2);
  double acc = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const Curve c = brownian_bridge(g, rng);
    acc += c[0] * c[0];
  }
  CHECK(std::abs(acc / 20000 - 0.1875) < 0.01);
}

TEST_CASE("psi kernel") {
  auto g = make_uniform_grid(21);
  CHECK(gaussian_integral_unit() == Approx(kGaussIntegral).margin(1e-12));

  const PsiKernel psi = psi_kernel(g);
  CHECK(psi.kernel(0, 0) == Approx(1.0 / (4.0 * kGaussIntegral)).margin(1e-10));
  CHECK(psi.kernel(0, 0) == Approx(0.33475).margin(1e-5));
  CHECK((psi.kernel.values() - psi.kernel.values().transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((psi.kernel.values().array() > 0.0).all());

  const double discrete_hs = std::sqrt(hs_distance_sq(psi.kernel, Kernel2D(g, Matrix::Zero(21, 21))));
  const double dense_hs = std::sqrt(oracle::riemann2(
      [](double u, double v) { return std::exp(-(u * u + v * v)) / std::pow(4.0 * kGaussIntegral, 2); }, 1000));
  CHECK(dense_hs == Approx(0.25).margin(1e-6));
  CHECK(discrete_hs < 1.0);
  CHECK(discrete_hs == Approx(dense_hs).margin(2e-3));
}

TEST_CASE("apply kernel") {
  auto g = make_uniform_grid(21);
  const auto f = Curve::constant(g, 1.0);
  CHECK(apply_kernel(Kernel2D(g, Matrix::Zero(21, 21)), f).values().isZero(0.0));
  CHECK(apply_kernel(Kernel2D(g, Matrix::Ones(21, 21)), f).values().isApproxToConstant(1.0, 1e-14));

  const Curve out = apply_kernel(psi_kernel(g).kernel, f);
  for (std::size_t i = 0; i < 21; ++i) {
    const double u = g->points()[i];
    const double dense = oracle::riemann(
        [u](double v) { return std::exp(-(u * u + v * v) / 2.0) / (4.0 * kGaussIntegral); }, 0.0, 1.0, 100000);
    CHECK(std::abs(out[i] - dense) < 1e-3);
  }
  CHECK_THROWS_AS(apply_kernel(Kernel2D(make_uniform_grid(5), Matrix::Zero(5, 5)), f), GridMismatch);
}

TEST_CASE("FAR(1) with zero kernel is i.i.d. bridges") {
  auto g = make_uniform_grid(21);
  SimConfig cfg{Model::FAR1, 30, 100, 0.0, 77};
  const auto s = simulate_far1(cfg, g, Kernel2D(g, Matrix::Zero(21, 21)));
  RngStream rng(77);
  for (int i = 0; i < 100; ++i) brownian_bridge(g, rng);
  for (std::size_t t = 0; t < 30; ++t) CHECK(s.curve(t).values() == brownian_bridge(g, rng).values());
}

TEST_CASE("FMA(1) with zero kernel is i.i.d. bridges") {
  auto g = make_uniform_grid(21);
  SimConfig cfg{Model::FMA1, 30, 0, 0.0, 78};
  const auto s = simulate_fma1(cfg, g, Kernel2D(g, Matrix::Zero(21, 21)));
  RngStream rng(78);
  brownian_bridge(g, rng);
  for (std::size_t t = 0; t < 30; ++t) CHECK(s.curve(t).values() == brownian_bridge(g, rng).values());
}

TEST_CASE("generators are deterministic in the seed") {
  auto g = make_uniform_grid(21);
  for (Model m : {Model::FAR1, Model::FMA1, Model::IID_BRIDGE}) {
    SimConfig cfg{m, 50, 100, 0.3, 123};
    CHECK(simulate(cfg, g).data() == simulate(cfg, g).data());
    SimConfig other = cfg;
    other.seed = 124;
    CHECK(simulate(cfg, g).data() != simulate(other, g).data());
  }
}

TEST_CASE("FAR(1) lag-one autocovariance follows the recursion") {
  auto g = make_uniform_grid(21);
  const auto s = simulate_far1({Model::FAR1, 50000, 100, 0.0, 2024}, g);
  const Matrix A = psi_kernel(g).kernel.values() * g->weight_vector().asDiagonal();
  const Matrix c0 = lag_cov(s, 0);
  const Matrix c1 = lag_cov(s, 1);
  CHECK((c1 - A * c0).cwiseAbs().maxCoeff() < 0.01);
  CHECK(l2_norm(mean_curve(s.head(10000))) < 0.05);
}

TEST_CASE("FMA(1) autocovariance cuts off after lag one") {
  auto g = make_uniform_grid(21);
  const auto s = simulate_fma1({Model::FMA1, 50000, 0, 0.0, 99}, g);
  CHECK(lag_cov(s, 2).cwiseAbs().maxCoeff() < 0.01);
  CHECK(lag_cov(s, 1).cwiseAbs().maxCoeff() > 0.005);
}

TEST_CASE("add_mean") {
  auto g = make_uniform_grid(21);
  const auto s = simulate({Model::FAR1, 20, 100, 0.0, 5}, g);
  CHECK(add_mean(s, 0.0).data() == s.data());
  const auto shifted = add_mean(s, 1.0);
  CHECK(shifted.data()(3, 10) - s.data()(3, 10) == Approx(0.25).margin(1e-14));
  const Vector diff = mean_curve(add_mean(s, 0.5)).values() - mean_curve(s).values();
  for (std::size_t j = 0; j < 21; ++j) {
    const double t = g->points()[j];
    CHECK(std::abs(diff[static_cast<Eigen::Index>(j)] - 0.5 * t * (1 - t)) < 1e-12);
  }
}

TEST_CASE("model names") {
  CHECK(parse_model("far1") == Model::FAR1);
  CHECK(parse_model("FMA1") == Model::FMA1);
  CHECK(to_string(Model::IID_BRIDGE) == "iid");
  CHECK_THROWS_AS(parse_model("arma"), InvalidArgument);
  CHECK_THROWS_AS(simulate({Model::FAR1, 0, 100, 0.0, 1}, make_uniform_grid(5)), InvalidArgument);
}
