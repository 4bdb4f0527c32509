#include <doctest.h>

#include <cmath>
#include <sstream>

#include "nlwave/errors.hpp"
#include "nlwave/spectral.hpp"
#include "nlwave/waves.hpp"

using namespace nlwave;

namespace {

double bump(double x) { return std::abs(x) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - x * x)) : 0.0; }

WaveProfile constant_profile(const Grid& g, const std::vector<double>& value, double c) {
  WaveProfile p;
  p.c = c;
  p.grid = g;
  p.E_plus = p.E_minus = value;
  for (double v : value) p.phi.push_back(Samples(g.n, v));
  return p;
}

const WaveProfile& pp2_profile() {
  static const WaveProfile p = [] {
    const auto m = make_model("pp2");
    const auto k = DispersalKernel::gaussian(1);
    const Grid g = Grid::make(150, 0.1, k.truncation_radius());
    return compute_profile(m, k, 1.1 * c_star(m, k), g);
  }();
  return p;
}

}  // namespace

TEST_SUITE("waves") {
  TEST_CASE("equilibrium has zero residual and a bump raises it") {
    const auto m = make_model("pp2");
    const auto k = DispersalKernel::gaussian(1);
    const Grid g = Grid::make(30, 0.1, k.truncation_radius());
    auto p = constant_profile(g, m.E_minus, 1.7);
    CHECK(wave_residual(p, k, m).sup <= 1e-10);
    for (std::size_t j = 0; j < g.n; ++j) p.phi[0][j] += 0.01 * bump(g.z(j) / 3.0);
    const double r = wave_residual(p, k, m).sup;
    CHECK(r > 1e-3);
    CHECK(r < 1e-1);
  }

  TEST_CASE("central differences converge at their order") {
    for (int order : {4, 6, 8}) {
      double err[2];
      for (int level = 0; level < 2; ++level) {
        const double dx = level == 0 ? 0.2 : 0.1;
        const Grid g = Grid::make(10, dx, 1.0);
        Samples u(g.n);
        for (std::size_t j = 0; j < g.n; ++j) u[j] = std::sin(g.z(j));
        const auto d = central_difference(u, {}, dx, order);
        err[level] = 0.0;
        for (std::size_t j = 10; j + 10 < g.n; ++j) err[level] = std::max(err[level], std::abs(d[j] - std::cos(g.z(j))));
      }
      CHECK(std::log2(err[0] / err[1]) == doctest::Approx(order).epsilon(0.1));
    }
  }

  TEST_CASE("translation") {
    const Grid g = Grid::make(20, 0.1, 1.0);
    Samples u(g.n);
    for (std::size_t j = 0; j < g.n; ++j) u[j] = std::tanh(g.z(j));
    const FarField ff{-1.0, 1.0};
    const auto whole = translate(u, g, 3 * g.dx, ff);
    for (std::size_t j = 0; j + 3 < g.n; ++j) CHECK(whole[j] == doctest::Approx(u[j + 3]).epsilon(1e-12));
    const auto part = translate(u, g, 0.25, ff);
    for (std::size_t j = 50; j + 50 < g.n; ++j)
      CHECK(part[j] == doctest::Approx(std::tanh(g.z(j) + 0.25)).epsilon(1e-2));
  }

  TEST_CASE("pp2 profile") {
    const auto& p = pp2_profile();
    const auto m = make_model("pp2");
    const auto k = DispersalKernel::gaussian(1);
    CHECK(p.residual_sup <= 1e-6);
    CHECK(wave_residual(p, k, m).sup == doctest::Approx(p.residual_sup).epsilon(1e-6));
    CHECK(p.phi[0].front() == doctest::Approx(7.0 / 9.0).epsilon(1e-4));
    CHECK(p.phi[1].front() == doctest::Approx(5.0 / 9.0).epsilon(1e-4));
    CHECK(std::abs(p.phi[0].back() - 1.0) <= 1e-4);
    CHECK(std::abs(p.phi[1].back()) <= 1e-4);
    CHECK(R_check(m, p).ok);
    for (const auto& comp : p.phi)
      for (double v : comp) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
      }
  }

  TEST_CASE("profile file round trip") {
    const auto& p = pp2_profile();
    std::stringstream ss;
    write_profile(ss, p);
    const auto q = read_profile(ss, DispersalKernel::gaussian(1).truncation_radius());
    CHECK(q.grid == p.grid);
    CHECK(q.c == p.c);
    CHECK(q.phi == p.phi);
    CHECK(q.E_minus == p.E_minus);
    CHECK(q.tail_rate == p.tail_rate);
    CHECK(q.pin_component == p.pin_component);
  }

  TEST_CASE("refinement from a coarse guess") {
    const auto m = make_model("pp2");
    const auto k = DispersalKernel::gaussian(1);
    const Grid coarse = Grid::make(100, 0.2, k.truncation_radius());
    const Grid fine = Grid::make(100, 0.1, k.truncation_radius());
    const double c = 1.1 * c_star(m, k);
    RelaxOptions opt;
    opt.tol = 1e-10;
    const auto a = compute_profile(m, k, c, coarse, opt);
    opt.guess = a;
    const auto b = compute_profile(m, k, c, fine, opt);
    // Residuals of the discrete solutions measured with an 8th-order
    // derivative shrink with the spatial truncation error.
    CHECK(a.residual_sup / b.residual_sup >= 4.0);
  }

  TEST_CASE("below the minimal speed no front is found") {
    const auto m = make_model("pp2");
    const auto k = DispersalKernel::gaussian(1);
    const Grid g = Grid::make(60, 0.2, k.truncation_radius());
    RelaxOptions opt;
    opt.max_time = 400;
    bool failed = false;
    try {
      (void)compute_profile(m, k, 0.5 * c_star(m, k), g, opt);
    } catch (const NoConvergence&) {
      failed = true;
    } catch (const CollapseToEquilibrium&) {
      failed = true;
    }
    CHECK(failed);
  }

  TEST_CASE("epidemic profile") {
    const auto m = make_model("epidemic");
    const auto k = DispersalKernel::gaussian(1);
    const Grid g = Grid::make(120, 0.2, k.truncation_radius());
    const auto p = compute_profile(m, k, 1.2 * c_star(m, k), g);
    CHECK(p.residual_sup <= 1e-6);
    const double s0 = p.E_minus[0];
    CHECK(s0 < 1.0);
    CHECK(s0 > 0.0);
    CHECK(std::abs(p.phi[0].back() - 1.0) <= 1e-4);
    for (std::size_t j = 0; j < g.n; ++j) CHECK(p.phi[1][j] >= 0.0);
    // s increases towards the unaffected population ahead of the front.
    for (std::size_t j = 1; j < g.n; ++j) CHECK(p.phi[0][j] >= p.phi[0][j - 1] - 1e-9);
    CHECK(*std::max_element(p.phi[1].begin(), p.phi[1].end()) > 0.01);
  }
}
