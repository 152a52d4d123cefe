#include "fbb/error.hpp"
#include "fbb/fdata.hpp"
#include "fbb/rng.hpp"
#include "oracles.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

using namespace fbb;
using Catch::Approx;

namespace {

Curve from_fn(const GridPtr& g, auto&& f) {
  Vector v(static_cast<Eigen::Index>(g->size()));
  for (std::size_t j = 0; j < g->size(); ++j) v[static_cast<Eigen::Index>(j)] = f(g->points()[j]);
  return Curve(g, v);
}

Curve random_curve(const GridPtr& g, RngStream& rng) {
  Vector v(static_cast<Eigen::Index>(g->size()));
  for (auto& x : v) x = rng.normal();
  return Curve(g, v);
}

}  // namespace

TEST_CASE("uniform grid construction") {
  auto g2 = make_uniform_grid(2);
  CHECK(g2->points()[0] == 0.0);
  CHECK(g2->points()[1] == 1.0);
  CHECK(g2->weights()[0] == 0.5);
  CHECK(g2->weights()[1] == 0.5);

  auto g3 = make_uniform_grid(3);
  CHECK(g3->weights()[0] == Approx(0.25).margin(1e-15));
  CHECK(g3->weights()[1] == Approx(0.5).margin(1e-15));
  CHECK(g3->weights()[2] == Approx(0.25).margin(1e-15));

  auto g21 = make_uniform_grid(21);
  REQUIRE(g21->size() == 21);
  for (std::size_t j = 0; j < 21; ++j) CHECK(g21->points()[j] == Approx(j / 20.0).margin(1e-15));
  CHECK(g21->weight_vector().sum() == Approx(1.0).margin(1e-12));

  CHECK_THROWS_AS(make_uniform_grid(1), InvalidArgument);
  CHECK_THROWS_AS(make_uniform_grid(0), InvalidArgument);
}

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(Grid({0.0}, {1.0}), InvalidArgument);
  CHECK_THROWS_AS(Grid({0.0, 0.0}, {0.5, 0.5}), InvalidArgument);
  CHECK_THROWS_AS(Grid({0.0, 1.5}, {0.5, 0.5}), InvalidArgument);
  CHECK_THROWS_AS(Grid({0.0, 1.0}, {0.5, 0.6}), InvalidArgument);
  CHECK_THROWS_AS(Grid({0.0, 1.0}, {-0.5, 1.5}), InvalidArgument);
  CHECK_NOTHROW(Grid({0.25, 0.75}, {0.5, 0.5}));
}

TEST_CASE("curve and series reject non-finite values") {
  auto g = make_uniform_grid(3);
  CHECK_THROWS_AS(Curve(g, Vector::Constant(3, NAN)), InvalidArgument);
  CHECK_THROWS_AS(Curve(g, Vector::Zero(4)), InvalidArgument);
  RowMatrix m = RowMatrix::Zero(2, 3);
  m(1, 1) = INFINITY;
  CHECK_THROWS_AS(FunctionalSeries(g, m), InvalidArgument);
}

TEST_CASE("inner product examples") {
  for (std::size_t T : {2u, 5u, 21u, 64u}) {
    auto g = make_uniform_grid(T);
    const auto one = Curve::constant(g, 1.0);
    const auto tau = from_fn(g, [](double t) { return t; });
    CHECK(inner_product(one, one) == Approx(1.0).margin(1e-14));
    CHECK(inner_product(tau, one) == Approx(0.5).margin(1e-14));
  }

  auto g = make_uniform_grid(21);
  const auto tau = from_fn(g, [](double t) { return t; });
  const double dense = oracle::riemann([](double t) { return t * t; }, 0.0, 1.0, 1'000'000);
  CHECK(std::abs(inner_product(tau, tau) - dense) <= 1.0 / (4.0 * 20.0 * 20.0));
}

TEST_CASE("inner product rejects mismatched grids") {
  const auto f = Curve::constant(make_uniform_grid(5), 1.0);
  const auto g = Curve::constant(make_uniform_grid(6), 1.0);
  CHECK_THROWS_AS(inner_product(f, g), GridMismatch);
  // Equal-by-value grids are the same grid.
  const auto h = Curve::constant(make_uniform_grid(5), 2.0);
  CHECK(inner_product(f, h) == Approx(2.0));
}

TEST_CASE("l2 norm examples") {
  auto g = make_uniform_grid(21);
  CHECK(l2_norm(Curve::constant(g, 0.0)) == 0.0);
  CHECK(l2_norm(Curve::constant(g, 2.0)) == Approx(2.0).margin(1e-14));
  const auto tau = from_fn(g, [](double t) { return t; });
  CHECK(l2_norm(tau) == Approx(std::sqrt(inner_product(tau, tau))));
}

TEST_CASE("hs distance examples") {
  auto g = make_uniform_grid(21);
  const auto ones = Kernel2D::tabulate(g, [](double, double) { return 1.0; });
  const auto zeros = Kernel2D::tabulate(g, [](double, double) { return 0.0; });
  CHECK(hs_distance_sq(ones, ones) == 0.0);
  CHECK(hs_distance_sq(ones, zeros) == Approx(1.0).margin(1e-14));

  auto bridge = [](double u, double v) { return std::min(u, v) - u * v; };
  const auto k = Kernel2D::tabulate(g, bridge, true);
  const double dense = oracle::riemann2([&](double u, double v) { return std::pow(bridge(u, v), 2); }, 2000);
  CHECK(dense == Approx(1.0 / 90.0).margin(1e-6));
  CHECK(std::abs(hs_distance_sq(k, zeros) - dense) < 1e-3);

  CHECK_THROWS_AS(hs_distance_sq(k, Kernel2D::tabulate(make_uniform_grid(5), bridge)), GridMismatch);
}

TEST_CASE("kernel symmetry flag is validated") {
  auto g = make_uniform_grid(4);
  CHECK_THROWS_AS(Kernel2D::tabulate(g, [](double u, double v) { return u - v; }, true), InvalidArgument);
  CHECK_NOTHROW(Kernel2D::tabulate(g, [](double u, double v) { return u - v; }, false));
}

TEST_CASE("mean curve and centering") {
  auto g = make_uniform_grid(4);
  RowMatrix m(3, 4);
  m.row(0).setConstant(1.0);
  m.row(1).setConstant(2.0);
  m.row(2).setConstant(3.0);
  const FunctionalSeries s(g, m);
  CHECK(mean_curve(s).values().isApproxToConstant(2.0));

  const FunctionalSeries single(g, m.topRows(1));
  CHECK(mean_curve(single).values().isApprox(m.row(0).transpose()));
  CHECK(center_series(single).data().isZero(0.0));

  RngStream rng(7);
  RowMatrix r(5, 21);
  for (auto& x : r.reshaped()) x = rng.normal();
  const FunctionalSeries rs(make_uniform_grid(21), r);
  const Curve mc = mean_curve(rs);
  for (Eigen::Index j = 0; j < 21; ++j) {
    double acc = 0.0;
    for (Eigen::Index t = 0; t < 5; ++t) acc += r(t, j);
    CHECK(mc.values()[j] == Approx(acc / 5.0).margin(1e-14));
  }
  CHECK(mean_curve(center_series(rs)).values().cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("fourier smoothing") {
  auto g = make_uniform_grid(21);

  SECTION("constant raw data") {
    const std::vector<double> raw(96, 3.5);
    for (std::size_t J : {1u, 5u, 21u}) {
      const Curve c = fourier_smooth(raw, J, g);
      CHECK((c.values().array() - 3.5).abs().maxCoeff() < 1e-10);
    }
  }

  SECTION("basis element reproduction") {
    const auto pts = raw_sample_points(96);
    std::vector<double> raw(96);
    for (std::size_t j = 0; j < 96; ++j) raw[j] = std::numbers::sqrt2 * std::sin(2 * std::numbers::pi * pts[j]);
    const Curve c = fourier_smooth(raw, 21, g);
    for (std::size_t j = 0; j < g->size(); ++j)
      CHECK(std::abs(c[j] - std::numbers::sqrt2 * std::sin(2 * std::numbers::pi * g->points()[j])) < 1e-8);
  }

  SECTION("white noise residual sum of squares matches normal equations") {
    RngStream rng(11);
    std::vector<double> raw(96);
    for (auto& x : raw) x = rng.normal();
    const FourierFit fit = fourier_fit(raw, 21);

    const auto pts = raw_sample_points(96);
    std::vector<std::vector<double>> A(96, std::vector<double>(21));
    for (std::size_t r = 0; r < 96; ++r) {
      A[r][0] = 1.0;
      for (std::size_t k = 1; k <= 10; ++k) {
        A[r][2 * k - 1] = std::sqrt(2.0) * std::sin(2 * M_PI * k * pts[r]);
        A[r][2 * k] = std::sqrt(2.0) * std::cos(2 * M_PI * k * pts[r]);
      }
    }
    const auto x = oracle::normal_equations(A, raw);
    double rss = 0.0;
    for (std::size_t r = 0; r < 96; ++r) {
      double pred = 0.0;
      for (std::size_t k = 0; k < 21; ++k) pred += A[r][k] * x[k];
      rss += (raw[r] - pred) * (raw[r] - pred);
    }
    CHECK(fit.rss == Approx(rss).epsilon(1e-10));
    for (std::size_t k = 0; k < 21; ++k) CHECK(fit.coefficients[static_cast<Eigen::Index>(k)] == Approx(x[k]).margin(1e-10));
  }

  SECTION("errors") {
    CHECK_THROWS_AS(fourier_fit(std::vector<double>(10, 0.0), 21), Underdetermined);
    CHECK_THROWS_AS(fourier_fit(std::vector<double>(30, 0.0), 20), InvalidArgument);
  }
}

TEST_CASE("property: quadrature exact for piecewise-linear products") {
  // A piecewise-linear f times a constant g: the trapezoid rule integrates
  // the linear interpolant exactly, compared here against dense quadrature
  // of that interpolant.
  auto g = make_uniform_grid(11);
  RngStream rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Curve f = random_curve(g, rng);
    auto interp = [&](double t) {
      const double pos = t * 10.0;
      const auto i = std::min<std::size_t>(9, static_cast<std::size_t>(pos));
      const double frac = pos - static_cast<double>(i);
      return (1 - frac) * f[i] + frac * f[i + 1];
    };
    const double exact = oracle::riemann(interp, 0.0, 1.0, 200000);
    CHECK(inner_product(f, Curve::constant(g, 1.0)) == Approx(exact).margin(1e-9));
  }
}

TEST_CASE("property: Cauchy-Schwarz") {
  auto g = make_uniform_grid(21);
  RngStream rng(5);
  for (int trial = 0; trial < 1000; ++trial) {
    const Curve f = random_curve(g, rng), h = random_curve(g, rng);
    REQUIRE(std::abs(inner_product(f, h)) <= l2_norm(f) * l2_norm(h) + 1e-12);
    REQUIRE(inner_product(f, h) == Approx(inner_product(h, f)).margin(1e-14));
  }
}

TEST_CASE("property: Parseval on the Fourier span") {
  RngStream rng(9);
  for (auto [T, J] : {std::pair<std::size_t, std::size_t>{101, 21}, {21, 19}, {21, 11}}) {
    auto g = make_uniform_grid(T);
    for (int trial = 0; trial < 50; ++trial) {
      Vector coef(static_cast<Eigen::Index>(J));
      for (auto& c : coef) c = rng.normal();
      const Curve f = fourier_evaluate(coef, g);
      CHECK(std::abs(coef.squaredNorm() - inner_product(f, f)) < 1e-8);
    }
  }
}

TEST_CASE("property: hs distance is a squared metric") {
  auto g = make_uniform_grid(9);
  RngStream rng(13);
  auto random_kernel = [&] {
    Matrix m(9, 9);
    for (auto& x : m.reshaped()) x = rng.normal();
    return Kernel2D(g, m);
  };
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = random_kernel(), b = random_kernel(), c = random_kernel();
    const double ab = hs_distance_sq(a, b);
    REQUIRE(ab >= 0.0);
    REQUIRE(ab == Approx(hs_distance_sq(b, a)).epsilon(1e-14));
    REQUIRE(std::sqrt(hs_distance_sq(a, c)) <= std::sqrt(ab) + std::sqrt(hs_distance_sq(b, c)) + 1e-12);
  }
}
