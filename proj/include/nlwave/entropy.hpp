#pragma once

#include <array>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "nlwave/convolution.hpp"
#include "nlwave/kernels.hpp"
#include "nlwave/models.hpp"
#include "nlwave/simulate.hpp"
#include "nlwave/waves.hpp"

namespace nlwave {

/// Everything the relative-entropy diagnostics need about one wave.
struct EntropyConfig {
  WaveProfile reference;
  DispersalKernel kernel;
  std::vector<double> sigma;
  double lambda_c = 0.0;
  double R = 0.0;
  double floor_epsilon = 1e-12;  // u_i is raised to floor_epsilon * phi_i inside the logarithm
  double window = 0.0;  // local convergence on |z| <= window
  /// |M(lambda_c) - 1 - c lambda_c + R| at construction.
  double weight_identity = 0.0;

  /// lambda_c from G(lambda) = c with R = model.R_bound; window defaults to
  /// L/4. Throws NoRoot when c < c_R and DomainError if the weight identity
  /// misses by more than 1e-8.
  static EntropyConfig make(const WaveProfile& reference, const ReactionModel& model, const DispersalKernel& kernel,
                            std::optional<std::vector<double>> sigma = std::nullopt, double window = 0.0);
};

struct EntropyDensity {
  Samples W;
  Field parts;  // sigma_i [u_i - phi_i - phi_i ln(u_i / phi_i)]
  std::size_t floor_count = 0;  // nodes where u_i was raised to the floor
};

/// W = sum_i sigma_i phi_i h(u_i / phi_i) with h(x) = x - 1 - ln x, evaluated
/// without cancellation near x = 1. Where phi_i = 0 (a far-field node of a
/// vanishing component) the part reduces to sigma_i u_i.
EntropyDensity relative_entropy(const Field& u, const EntropyConfig& config);

struct WeightedEntropy {
  Samples V;
  double sup = 0.0;
  double l1 = 0.0;
};

/// V = e^{lambda_c z} W with sup and trapezoidal L1 norms. Throws Overflow
/// when V is not finite.
WeightedEntropy weighted_entropy(std::span<const double> W, const EntropyConfig& config);

/// The last three snapshots of W at consecutive steps.
class EntropyHistory {
 public:
  void push(double t, Samples W);
  std::size_t size() const { return count_; }
  /// i = 0 is the oldest of the stored snapshots.
  double time(std::size_t i) const;
  const Samples& W(std::size_t i) const;
  void clear() { count_ = 0; }

 private:
  std::array<double, 3> t_{};
  std::array<Samples, 3> W_;
  std::size_t head_ = 0;
  std::size_t count_ = 0;
};

enum class TimeStencil { forward, centered, backward };

struct SubsolutionResidual {
  Samples rho;  // zero in the excluded boundary bands
  double positive_sup = 0.0;
  double time = 0.0;  // where W_t is evaluated
};

/// rho = W_t - (J*W - W) - c W_z - R W with W_t from the three stored
/// snapshots (second-order differences, the stencil picking the evaluation
/// time) and W_z by 4th-order central differences. Nodes within ghost + 2 of
/// either end are excluded. Throws InsufficientHistory with fewer than three
/// snapshots.
SubsolutionResidual subsolution_residual(const EntropyHistory& history, const EntropyConfig& config,
                                         TimeStencil stencil = TimeStencil::centered);

/// max over the pairs of ln X - (X - 1), X = u_y phi_z / (u_z phi_y).
struct LogPair {
  double u_z, u_y, phi_z, phi_y;
};
double log_inequality_check(std::span<const LogPair> pairs);

struct EntropyRecord {
  double t = 0.0;
  double W_sup = 0.0;
  double W_l1 = 0.0;
  double V_sup = 0.0;
  double V_l1 = 0.0;
  double residual_positive = 0.0;
  double local_sup = 0.0;  // sup_{|z| <= window} max_i |u_i - phi_i|
  std::size_t clamp_count = 0;
  std::size_t floor_count = 0;
};

struct EntropyTrace {
  std::vector<EntropyRecord> records;
  /// One JSON object per line; numbers printed with 17 significant digits.
  void write_ndjson(std::ostream& out) const;
};

enum class Verdict { converged, not_converged, out_of_hypothesis };
const char* to_string(Verdict v);

struct MonitorOptions {
  double tolerance = 1e-4;  // local sup distance
  double transient = 5.0;   // V_sup monotonicity is checked after this time
  double wobble = 0.01;
  double cadence = 1.0;
  /// V_sup values below noise_floor * V_sup(t0) are rounding noise; growth
  /// among them is not counted and they are left out of the decay fit.
  double noise_floor = 1e-12;
};

struct ConvergenceReport {
  Verdict verdict = Verdict::not_converged;
  EntropyTrace trace;
  double final_local_sup = 0.0;
  /// max over records after the transient of V_sup / (running minimum); <= 1 + wobble passes.
  double V_growth = 1.0;
  bool V_monotone = true;
  double residual_positive_max = 0.0;  // over all records
  /// slope of log V_sup against log(1 + tau), tau = M(lambda_c) t
  double decay_slope = 0.0;
  bool hypothesis_ok = true;
  std::size_t floor_count = 0;
  std::string diagnostics;
};

/// Observer for a moving-frame run. W is evaluated every step (the residual
/// needs consecutive snapshots); a record is written at each cadence mark.
class ConvergenceMonitor {
 public:
  ConvergenceMonitor(EntropyConfig config, MonitorOptions options = {});

  void observe(const SimState& state);
  Observer observer();
  ConvergenceReport report() const;
  const EntropyConfig& config() const { return config_; }

 private:
  void finish_pending(TimeStencil stencil);

  EntropyConfig config_;
  MonitorOptions options_;
  Cadence cadence_;
  bool started_ = false;
  EntropyHistory history_;
  std::vector<EntropyRecord> records_;
  // Record awaiting its residual, and how many snapshots have arrived since.
  std::optional<std::size_t> pending_;
  std::size_t since_pending_ = 0;
  bool hypothesis_ok_ = true;
  double hypothesis_ratio_ = 0.0;
};

/// Profile plus a compact bump of height amplitude * scale_i in every
/// component (scale_i: the box bound, or sup phi_i for unbounded sides),
/// supported on |z - center| < width / 2, then clamped into the box.
Field perturbed_profile(const WaveProfile& profile, const ReactionModel& model, double amplitude, double center,
                        double width);

/// Profile shifted by amplitude * (E_minus_i - E_plus_i) at every z >= center,
/// clamped into the box. The offset reaches the right end of the grid, so
/// e^{lambda_c z} W is not small there.
Field offset_profile(const WaveProfile& profile, const ReactionModel& model, double amplitude, double center);

}  // namespace nlwave
