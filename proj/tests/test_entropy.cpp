#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "nlwave/entropy.hpp"
#include "nlwave/errors.hpp"
#include "nlwave/spectral.hpp"

using namespace nlwave;

namespace {

EntropyConfig scalar_config(const Grid& g, Samples phi, double lambda = 0.5, double c = 0.0, double R = 0.0) {
  EntropyConfig cfg{.reference = {}, .kernel = DispersalKernel::gaussian(1), .sigma = {}};
  cfg.reference.grid = g;
  cfg.reference.c = c;
  cfg.reference.phi = {std::move(phi)};
  cfg.reference.E_plus = cfg.reference.E_minus = {1.0};
  cfg.sigma = {1.0};
  cfg.lambda_c = lambda;
  cfg.R = R;
  cfg.window = g.half_width / 4;
  return cfg;
}

const WaveProfile& small_pp2_profile() {
  static const WaveProfile p = [] {
    const auto m = make_model("pp2");
    const auto k = DispersalKernel::gaussian(1);
    const Grid g = Grid::make(100, 0.2, k.truncation_radius());
    RelaxOptions opt;
    opt.tol = 1e-10;
    return compute_profile(m, k, 1.1 * c_star(m, k), g, opt);
  }();
  return p;
}

ConvergenceReport monitor_run(const Field& u0, double t_end, double dt_scale = 1.0) {
  const auto m = make_model("pp2");
  const auto k = DispersalKernel::gaussian(1);
  const auto& p = small_pp2_profile();
  ConvergenceMonitor mon(EntropyConfig::make(p, m, k));
  SimState s;
  s.frame = Frame::moving;
  s.c = p.c;
  s.u = u0;
  s.far_field = p.far_fields();
  const std::vector<Observer> obs{mon.observer()};
  auto ctl = StepControl::automatic(p.grid, m, p.c);
  ctl.dt *= dt_scale;
  run(s, m, k, p.grid, ctl, t_end, obs);
  return mon.report();
}

}  // namespace

TEST_SUITE("entropy") {
  TEST_CASE("density values") {
    const Grid g = Grid::make(5, 0.5, 1.0);
    const auto cfg = scalar_config(g, Samples(g.n, 1.0));
    const auto same = relative_entropy({Samples(g.n, 1.0)}, cfg);
    for (double w : same.W) CHECK(w == 0.0);
    const auto two = relative_entropy({Samples(g.n, 2.0)}, cfg);
    for (double w : two.W) CHECK(w == doctest::Approx(1.0 - std::log(2.0)).epsilon(1e-15));
  }

  TEST_CASE("second-order contact") {
    const Grid g = Grid::make(5, 0.5, 1.0);
    Samples phi(g.n);
    for (std::size_t j = 0; j < g.n; ++j) phi[j] = 0.3 + 0.1 * std::sin(g.z(j));
    const auto cfg = scalar_config(g, phi);
    for (double eps : {1e-4, 1e-7}) {
      Samples u(g.n);
      for (std::size_t j = 0; j < g.n; ++j) u[j] = phi[j] * (1.0 + eps);
      const auto d = relative_entropy({u}, cfg);
      // h(1+e) = e^2/2 - e^3/3 + ...
      for (std::size_t j = 0; j < g.n; ++j)
        CHECK(d.W[j] == doctest::Approx(phi[j] * (0.5 * eps * eps - eps * eps * eps / 3.0)).epsilon(1e-8));
    }
  }

  TEST_CASE("density is nonnegative") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> pos(1e-6, 3.0);
    const Grid g = Grid::make(50, 0.5, 1.0);
    Samples phi(g.n), u(g.n);
    for (std::size_t j = 0; j < g.n; ++j) {
      phi[j] = pos(rng);
      u[j] = pos(rng);
    }
    for (double w : relative_entropy({u}, scalar_config(g, phi)).W) CHECK(w >= 0.0);
  }

  TEST_CASE("weight cancels the exponential") {
    const Grid g = Grid::make(10, 0.1, 1.0);
    const auto cfg = scalar_config(g, Samples(g.n, 1.0), 0.8);
    Samples W(g.n);
    for (std::size_t j = 0; j < g.n; ++j) W[j] = std::exp(-0.8 * g.z(j));
    const auto v = weighted_entropy(W, cfg);
    for (double x : v.V) CHECK(x == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(v.sup == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(v.l1 == doctest::Approx(20.0).epsilon(1e-12));
    const auto zero = weighted_entropy(Samples(g.n, 0.0), cfg);
    CHECK(zero.sup == 0.0);
    CHECK(zero.l1 == 0.0);
  }

  TEST_CASE("log inequality") {
    CHECK(log_inequality_check(std::vector<LogPair>{{1, 2, 1, 2}}) == 0.0);
    CHECK(log_inequality_check(std::vector<LogPair>{{1, std::exp(1.0), 1, 1}}) ==
          doctest::Approx(1.0 - (std::exp(1.0) - 1.0)).epsilon(1e-14));
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> d(1e-3, 10.0);
    std::vector<LogPair> pairs(100000);
    for (auto& p : pairs) p = {d(rng), d(rng), d(rng), d(rng)};
    CHECK(log_inequality_check(pairs) <= 1e-15);
  }

  TEST_CASE("sub-solution residual of a manufactured entropy") {
    // W = e^{-lambda z + k t} with lambda solving the weight identity makes
    // the spatial operator vanish, so rho = W_t = k W.
    const auto kernel = DispersalKernel::gaussian(1);
    const double R = 1.0, c = 2.0;
    const double lam = lambda_c(SpeedProblem::make(kernel, R), c);
    const Grid g = Grid::make(15, 0.05, kernel.truncation_radius());
    auto cfg = scalar_config(g, Samples(g.n, 1.0), lam, c, R);
    cfg.kernel = kernel;
    const double k = 0.3, dt = 1e-3;
    EntropyHistory h;
    for (int s = 0; s < 3; ++s) {
      Samples W(g.n);
      for (std::size_t j = 0; j < g.n; ++j) W[j] = std::exp(-lam * g.z(j) + k * s * dt);
      h.push(s * dt, W);
    }
    const auto r = subsolution_residual(h, cfg, TimeStencil::centered);
    CHECK(r.time == doctest::Approx(dt));
    const std::size_t band = g.ghost + 2;
    for (std::size_t j = band; j + band < g.n; j += 11) {
      const double W = std::exp(-lam * g.z(j) + k * dt);
      CHECK(r.rho[j] == doctest::Approx(k * W).epsilon(1e-4));
    }
    CHECK(r.rho[0] == 0.0);
  }

  TEST_CASE("residual needs three snapshots") {
    const Grid g = Grid::make(15, 0.1, DispersalKernel::gaussian(1).truncation_radius());
    const auto cfg = scalar_config(g, Samples(g.n, 1.0));
    EntropyHistory h;
    h.push(0.0, Samples(g.n, 0.0));
    h.push(0.1, Samples(g.n, 0.0));
    CHECK_THROWS_AS(subsolution_residual(h, cfg), InsufficientHistory);
    h.push(0.2, Samples(g.n, 0.0));
    const auto r = subsolution_residual(h, cfg);
    CHECK(r.positive_sup == 0.0);
  }

  TEST_CASE("weight identity at construction") {
    const auto m = make_model("pp2");
    const auto k = DispersalKernel::gaussian(1);
    const auto cfg = EntropyConfig::make(small_pp2_profile(), m, k);
    CHECK(cfg.weight_identity <= 1e-10);
    CHECK(cfg.window == doctest::Approx(25.0));
  }

  TEST_CASE("unperturbed wave converges at once") {
    const auto r = monitor_run(small_pp2_profile().phi, 5.0);
    CHECK(r.verdict == Verdict::converged);
    for (const auto& rec : r.trace.records) {
      // The profile is stationary up to the relaxation tolerance.
      CHECK(rec.W_sup <= 1e-16);
      CHECK(rec.V_sup <= 1e-16);
    }
  }

  TEST_CASE("bump perturbation converges") {
    const auto m = make_model("pp2");
    const auto& p = small_pp2_profile();
    const auto r = monitor_run(perturbed_profile(p, m, 0.2, 0.0, 5.0), 30.0);
    CHECK(r.verdict == Verdict::converged);
    CHECK(r.V_monotone);
    CHECK(r.trace.records.size() == 31);
    // Away from the one-sided start-up difference the residual is rounding.
    for (std::size_t i = 1; i < r.trace.records.size(); ++i) CHECK(r.trace.records[i].residual_positive <= 1e-20);
    // At t = 0 the forward difference in time leaves an O(dt^2) positive part.
    const double first = r.trace.records[0].residual_positive;
    const double halved = monitor_run(perturbed_profile(p, m, 0.2, 0.0, 5.0), 1.0, 0.5).trace.records[0].residual_positive;
    CHECK(halved <= first / 3.0);
  }

  TEST_CASE("offset to the right end is out of hypothesis") {
    const auto m = make_model("pp2");
    const auto& p = small_pp2_profile();
    const auto r = monitor_run(offset_profile(p, m, 0.1, 0.0), 3.0);
    CHECK(r.verdict == Verdict::out_of_hypothesis);
    CHECK_FALSE(r.hypothesis_ok);
  }

  TEST_CASE("trace lines") {
    EntropyTrace t;
    t.records.push_back({.t = 1.5, .W_sup = 0.1});
    std::ostringstream os;
    t.write_ndjson(os);
    const std::string line = os.str();
    CHECK(line.find("\"t\":1.5") != std::string::npos);
    CHECK(line.find("\"W_sup\":0.10000000000000001") != std::string::npos);
    CHECK(line.back() == '\n');
    CHECK(std::string(to_string(Verdict::out_of_hypothesis)) == "OUT_OF_HYPOTHESIS");
  }
}
