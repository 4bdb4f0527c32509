#include "nlwave/spectral.hpp"

#include <cmath>
#include <sstream>

#include "nlwave/errors.hpp"

namespace nlwave {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(15);
  os << v;
  return os.str();
}

// Numerator of G'(lambda); increasing in lambda because M is convex.
double stationarity(const SpeedProblem& p, double lambda) {
  return lambda * p.kernel.mgf_derivative(lambda) - p.kernel.mgf(lambda) + 1.0 - p.R;
}

}  // namespace

SpeedProblem SpeedProblem::make(DispersalKernel kernel, double R, double configured_cap) {
  if (!(R > 0.0) || !std::isfinite(R)) throw DomainError("speed problem needs R > 0, got " + num(R));
  const double lhat = kernel.lambda_hat();
  const double cap = std::isfinite(lhat) ? std::min(0.999 * lhat, configured_cap) : configured_cap;
  return SpeedProblem{std::move(kernel), R, cap};
}

double G(const SpeedProblem& p, double lambda) {
  if (!(lambda > 0.0) || !(lambda <= p.lambda_cap))
    throw DomainError("G needs lambda in (0, " + num(p.lambda_cap) + "], got " + num(lambda));
  return (p.kernel.mgf(lambda) - 1.0 + p.R) / lambda;
}

SpeedMinimum c_R(const SpeedProblem& p) {
  auto g = [&p](double l) {
    const double v = G(p, l);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };
  // Bracket: walk geometrically until G turns up.
  double lo = 0.0, mid = std::min(1e-4, 0.5 * p.lambda_cap);
  double g_mid = g(mid);
  double hi = 0.0;
  for (;;) {
    const double next = std::min(2.0 * mid, p.lambda_cap);
    if (next <= mid) {
      std::ostringstream os;
      os << "G is still decreasing at lambda_cap=" << p.lambda_cap
         << " (infimum pushed against lambda_hat; boundary value " << num(g_mid) << ")";
      throw SearchFailure(os.str());
    }
    const double g_next = g(next);
    if (g_next > g_mid) {
      hi = next;
      break;
    }
    lo = mid;
    mid = next;
    g_mid = g_next;
  }
  if (lo == 0.0) lo = 0.5 * mid;  // minimiser below the first probe
  while (g(lo) < g_mid && lo > 1e-300) {
    mid = lo;
    g_mid = g(lo);
    lo *= 0.5;
  }

  // Golden section on [lo, hi].
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
  double f1 = g(x1), f2 = g(x2);
  while (b - a > 1e-12 * std::abs(x1 + x2) * 0.5) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = g(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = g(x2);
    }
  }
  double best = 0.5 * (a + b);

  // G is flat at its minimum, so value comparisons only resolve lambda to
  // ~sqrt(eps). Bisect the sign of G' on the original bracket instead.
  try {
    double l = lo, h = hi;
    if (stationarity(p, l) < 0.0 && stationarity(p, h) > 0.0) {
      for (int it = 0; it < 200 && h - l > 2e-16 * h; ++it) {
        const double c = 0.5 * (l + h);
        (stationarity(p, c) < 0.0 ? l : h) = c;
      }
      best = 0.5 * (l + h);
    }
  } catch (const Error&) {
    // Derivative unavailable (quadrature trouble): keep the golden result.
  }
  return SpeedMinimum{g(best), best};
}

double lambda_c(const SpeedProblem& p, double c) { return lambda_c(p, c_R(p), c); }

double lambda_c(const SpeedProblem& p, const SpeedMinimum& minimum, double c) {
  if (c < minimum.c_R - 1e-12)
    throw NoRoot("G(lambda)=" + num(c) + " has no root: c is below c_R=" + num(minimum.c_R));
  if (c <= minimum.c_R + 1e-12) return minimum.lambda_min;
  double lo = minimum.lambda_min;
  while (G(p, lo) <= c) lo *= 0.5;
  double hi = minimum.lambda_min;
  // G(lo) > c >= G(hi): the smallest root lies in between.
  double best = hi, best_err = std::abs(G(p, hi) - c);
  for (int it = 0; it < 300 && hi - lo > 4e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double gm = G(p, mid);
    const double err = std::abs(gm - c);
    if (err < best_err) {
      best = mid;
      best_err = err;
    }
    (gm > c ? lo : hi) = mid;
  }
  return best;
}

double c_star(const ReactionModel& model, const DispersalKernel& kernel) {
  if (!(model.rho > 0.0))
    throw DomainError(model.name + " has nonpositive linear spreading rate rho=" + num(model.rho) +
                      " (standing assumptions violated)");
  return c_R(SpeedProblem::make(kernel, model.rho)).c_R;
}

}  // namespace nlwave
