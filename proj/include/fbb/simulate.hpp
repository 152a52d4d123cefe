#pragma once

// Data-generating processes: Brownian bridges and first-order functional
// autoregressive / moving-average processes driven by an integral kernel.

#include "fbb/fdata.hpp"
#include "fbb/rng.hpp"

#include <cstdint>
#include <optional>
#include <string_view>

namespace fbb {

/// Kernel psi(u,v) = exp(-(u^2+v^2)/2) / (4 * int_0^1 exp(-t^2) dt).
struct PsiKernel {
  Kernel2D kernel;
};

/// int_0^1 exp(-t^2) dt by composite Simpson on 10^5 intervals.
double gaussian_integral_unit();

PsiKernel psi_kernel(const GridPtr& grid);

/// g(u_i) = sum_j w_j K_ij f_j.
Curve apply_kernel(const Kernel2D& k, const Curve& f);

/// Standard Brownian motion by cumulative Gaussian increments, pinned as
/// W(t) - t W(1). Exactly zero at 0 and 1 when those are grid points.
Curve brownian_bridge(const GridPtr& grid, RngStream& rng);

enum class Model { FAR1, FMA1, IID_BRIDGE };

Model parse_model(std::string_view name);
std::string_view to_string(Model m);

struct SimConfig {
  Model model = Model::FAR1;
  std::size_t n = 100;
  std::size_t burn_in = 100;
  double gamma = 0.0;
  std::uint64_t seed = 0;
};

/// eps_t = Psi eps_{t-1} + B_t from eps_0 = 0, discarding `burn_in` draws.
/// `kernel` overrides psi (e.g. the zero kernel).
FunctionalSeries simulate_far1(const SimConfig& cfg, const GridPtr& grid,
                               const std::optional<Kernel2D>& kernel = std::nullopt);

/// eps_t = Psi B_{t-1} + B_t with one pre-sample innovation B_0.
FunctionalSeries simulate_fma1(const SimConfig& cfg, const GridPtr& grid,
                               const std::optional<Kernel2D>& kernel = std::nullopt);

/// Dispatches on cfg.model, then adds the gamma mean shift.
FunctionalSeries simulate(const SimConfig& cfg, const GridPtr& grid);

/// Adds gamma * tau (1 - tau) to every curve.
FunctionalSeries add_mean(const FunctionalSeries& s, double gamma);

}  // namespace fbb
