#include <doctest.h>

#include <cmath>
#include <random>

#include "nlwave/convolution.hpp"
#include "nlwave/errors.hpp"

using namespace nlwave;

TEST_SUITE("convolution") {
  TEST_CASE("constants are reproduced") {
    const auto k = DispersalKernel::gaussian(1);
    const Grid grid = Grid::make(20, 0.1, k.truncation_radius());
    const Samples one(grid.n, 1.0);
    for (auto method : {ConvolutionMethod::direct, ConvolutionMethod::fft}) {
      const auto out = convolve(k, grid, one, {1.0, 1.0}, method);
      for (double v : out) CHECK(v == doctest::Approx(1.0).epsilon(1e-10));
    }
  }

  TEST_CASE("spike returns kernel samples") {
    const auto k = DispersalKernel::gaussian(1);
    for (double dx : {0.1, 0.05}) {
      const Grid grid = Grid::make(20, dx, k.truncation_radius());
      Samples spike(grid.n, 0.0);
      spike[grid.center()] = 1.0 / dx;
      const auto out = convolve(k, grid, spike, {});
      double err = 0.0;
      for (std::size_t j = 0; j < grid.n; ++j) err = std::max(err, std::abs(out[j] - k(grid.z(j))));
      CHECK(err < 2.0 * dx * dx);
    }
  }

  TEST_CASE("direct and fft agree on smooth random data") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> amp(-1, 1);
    for (const auto& k : {DispersalKernel::gaussian(1), DispersalKernel::laplace(2), DispersalKernel::compact_bump(3)}) {
      const Grid grid = Grid::make(50, 0.1, k.truncation_radius());
      Samples u(grid.n);
      double a[4];
      for (double& x : a) x = amp(rng);
      for (std::size_t j = 0; j < grid.n; ++j) {
        const double z = grid.z(j);
        u[j] = a[0] * std::sin(0.3 * z) + a[1] * std::cos(1.1 * z) + a[2] * std::tanh(z) + a[3];
      }
      const FarField ff{u.front(), u.back()};
      const auto d = convolve(k, grid, u, ff, ConvolutionMethod::direct);
      const auto f = convolve(k, grid, u, ff, ConvolutionMethod::fft);
      double diff = 0.0;
      for (std::size_t j = 0; j < grid.n; ++j) diff = std::max(diff, std::abs(d[j] - f[j]));
      CHECK(diff <= 1e-12);
    }
  }

  TEST_CASE("smooth data: J*u matches the analytic convolution") {
    // gaussian{s} * cos(w z) = exp(-s^2 w^2 / 2) cos(w z)
    const auto k = DispersalKernel::gaussian(1);
    const Grid grid = Grid::make(30, 0.05, k.truncation_radius());
    const double w = 0.7;
    Samples u(grid.n);
    for (std::size_t j = 0; j < grid.n; ++j) u[j] = std::cos(w * grid.z(j));
    // Far field does not matter away from the ends.
    const auto out = convolve(k, grid, u, {});
    for (std::size_t j = grid.ghost; j + grid.ghost < grid.n; j += 7)
      CHECK(out[j] == doctest::Approx(std::exp(-0.5 * w * w) * u[j]).epsilon(1e-9));
  }

  TEST_CASE("tail continuation of the right far field") {
    const auto k = DispersalKernel::gaussian(1);
    const Grid grid = Grid::make(20, 0.1, k.truncation_radius());
    const double lam = 0.8;
    Samples u(grid.n);
    for (std::size_t j = 0; j < grid.n; ++j) u[j] = std::exp(-lam * grid.z(j)) * 1e-6;
    const FarField ff{u.front(), 0.0, lam};
    const auto out = convolve(k, grid, u, ff);
    // Continuing the exponential past the end leaves it an eigenfunction with
    // eigenvalue M(-lam) = M(lam), up to the discrete stencil.
    const std::size_t j = grid.n - 1;
    CHECK(out[j] / u[j] == doctest::Approx(k.mgf(lam)).epsilon(1e-6));
  }

  TEST_CASE("grid that does not cover the kernel") {
    const auto k = DispersalKernel::gaussian(1);
    Grid grid = Grid::make(20, 0.1, k.truncation_radius());
    grid.ghost = 3;
    CHECK_THROWS_AS(Convolver(k, grid), GridMismatch);
  }
}
