#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "nlwave/errors.hpp"
#include "nlwave/kernels.hpp"

using namespace nlwave;

namespace {

// Plain composite Simpson rule, used as an independent quadrature oracle.
template <class F>
double simpson(F f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
  return s * h / 3.0;
}

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("point values") {
    CHECK(DispersalKernel::gaussian(1)(0.0) == doctest::Approx(1.0 / std::sqrt(2 * std::numbers::pi)).epsilon(1e-14));
    CHECK(DispersalKernel::laplace(2)(0.0) == doctest::Approx(1.0).epsilon(1e-14));
    for (const auto& k : {DispersalKernel::gaussian(1), DispersalKernel::laplace(2), DispersalKernel::compact_bump(1)})
      CHECK(k(2.0 * k.truncation_radius()) == 0.0);
  }

  TEST_CASE("symmetric and nonnegative") {
    for (const auto& k : {DispersalKernel::gaussian(0.7), DispersalKernel::laplace(3), DispersalKernel::compact_bump(2)})
      for (double y = 0.0; y < k.truncation_radius(); y += 0.137) {
        CHECK(k(y) >= 0.0);
        CHECK(k(y) == k(-y));
      }
  }

  TEST_CASE("unit mass against Simpson") {
    for (const auto& k : {DispersalKernel::gaussian(1), DispersalKernel::laplace(2), DispersalKernel::compact_bump(1.5)}) {
      const double r = k.truncation_radius();
      // laplace has a kink at 0: integrate the halves separately.
      const double mass = simpson(k, -r, 0.0, 20000) + simpson(k, 0.0, r, 20000);
      CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(k.numerical_mass() == doctest::Approx(1.0).epsilon(1e-10));
    }
  }

  TEST_CASE("mgf closed forms agree with quadrature") {
    const auto lap = DispersalKernel::laplace(2);
    CHECK(lap.mgf(1.0) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
    CHECK(lap.mgf_quadrature(1.0) == doctest::Approx(4.0 / 3.0).epsilon(1e-9));
    const auto g = DispersalKernel::gaussian(1);
    CHECK(g.mgf(2.0) == doctest::Approx(std::exp(2.0)).epsilon(1e-14));
    CHECK(g.mgf_quadrature(2.0) == doctest::Approx(std::exp(2.0)).epsilon(1e-9));
    for (const auto& k : {g, lap, DispersalKernel::compact_bump(1)}) CHECK(k.mgf(0.0) == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("compact bump mgf against Simpson") {
    const auto k = DispersalKernel::compact_bump(1);
    for (double lam : {0.5, 2.0, 7.0}) {
      const double oracle = simpson([&](double y) { return k(y) * std::exp(lam * y); }, -1.0, 1.0, 40000);
      CHECK(k.mgf(lam) == doctest::Approx(oracle).epsilon(1e-9));
    }
  }

  TEST_CASE("mgf derivative matches a difference quotient") {
    for (const auto& k : {DispersalKernel::gaussian(1.3), DispersalKernel::laplace(2), DispersalKernel::compact_bump(1)}) {
      const double lam = 0.8, h = 1e-5;
      const double fd = (k.mgf(lam + h) - k.mgf(lam - h)) / (2 * h);
      CHECK(k.mgf_derivative(lam) == doctest::Approx(fd).epsilon(1e-7));
    }
  }

  TEST_CASE("mgf is convex and increasing on (0, lambda_hat)") {
    const auto k = DispersalKernel::laplace(2);
    double prev = 1.0, prev_slope = 0.0;
    for (double lam = 0.05; lam < 1.95; lam += 0.05) {
      const double m = k.mgf(lam);
      CHECK(m > prev);
      CHECK(m - prev >= prev_slope - 1e-12);
      prev_slope = m - prev;
      prev = m;
    }
  }

  TEST_CASE("abscissa of convergence") {
    CHECK(std::isinf(DispersalKernel::gaussian(1).lambda_hat()));
    CHECK(DispersalKernel::laplace(2).lambda_hat() == 2.0);
    CHECK(std::isinf(DispersalKernel::compact_bump(1).lambda_hat()));
    CHECK_THROWS_AS(DispersalKernel::laplace(2).mgf(2.5), DomainError);
  }

  TEST_CASE("invalid parameters") {
    CHECK_THROWS_AS(DispersalKernel::gaussian(0), ParamError);
    CHECK_THROWS_AS(DispersalKernel::laplace(-1), ParamError);
    CHECK_THROWS_AS(DispersalKernel::compact_bump(0), ParamError);
  }

  TEST_CASE("tabulated kernel reproduces the gaussian it samples") {
    std::ostringstream os;
    os << "# y J\n";
    for (int k = -800; k <= 800; ++k) {
      const double y = k * 0.01;
      os << y << ' ' << std::exp(-0.5 * y * y) << '\n';  // unnormalised on purpose
    }
    std::istringstream in(os.str());
    const auto t = DispersalKernel::load_tabulated(in);
    CHECK(t.kind() == KernelKind::tabulated);
    CHECK(t(0.3) == doctest::Approx(DispersalKernel::gaussian(1)(0.3)).epsilon(1e-6));
    CHECK(t.mgf(1.0) == doctest::Approx(std::exp(0.5)).epsilon(1e-6));
  }
}
