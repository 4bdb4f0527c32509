#pragma once

#include "nlwave/kernels.hpp"
#include "nlwave/models.hpp"

namespace nlwave {

/// G(lambda) = (M(lambda) - 1 + R) / lambda for one kernel and growth bound R.
struct SpeedProblem {
  DispersalKernel kernel;
  double R = 1.0;
  double lambda_cap = 0.0;  // min(0.999 lambda_hat, configured cap)

  static constexpr double kDefaultCap = 50.0;
  static SpeedProblem make(DispersalKernel kernel, double R, double configured_cap = kDefaultCap);
};

/// Throws DomainError for lambda outside (0, lambda_cap].
double G(const SpeedProblem& problem, double lambda);

struct SpeedMinimum {
  double c_R = 0.0;
  double lambda_min = 0.0;
};

/// inf G over (0, lambda_cap): geometric bracketing from 1e-4, golden
/// section, then bisection on the sign of G' to pin the minimiser.
/// Throws SearchFailure when G is still decreasing at the cap.
SpeedMinimum c_R(const SpeedProblem& problem);

/// Smallest positive root of G(lambda) = c. Returns the minimiser when c is
/// within 1e-12 of c_R; throws NoRoot below c_R.
double lambda_c(const SpeedProblem& problem, double c);
double lambda_c(const SpeedProblem& problem, const SpeedMinimum& minimum, double c);

/// c* = c_R evaluated with R = rho(model). Throws DomainError if rho <= 0.
double c_star(const ReactionModel& model, const DispersalKernel& kernel);

}  // namespace nlwave
