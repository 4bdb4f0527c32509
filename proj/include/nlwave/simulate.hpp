#pragma once

#include <functional>
#include <span>
#include <vector>

#include "nlwave/convolution.hpp"
#include "nlwave/grid.hpp"
#include "nlwave/kernels.hpp"
#include "nlwave/models.hpp"

namespace nlwave {

enum class Frame { lab, moving };

/// Solution of u_t = J*u - u + c u_z + u f(u) at time t. In the lab frame c = 0.
struct SimState {
  double t = 0.0;
  Field u;
  Frame frame = Frame::lab;
  double c = 0.0;
  std::vector<FarField> far_field;  // one per component
  std::size_t clamp_count = 0;      // negative values reset to zero so far

  double speed() const { return frame == Frame::moving ? c : 0.0; }
};

/// Discretisation of c u_z. The upwind-biased 5th-order stencil (wind from
/// the side c points to) is the default: the 4th-order central stencil lets
/// odd-even modes grow in exponentially decaying front tails.
enum class Advection { upwind5, central4 };

/// Classic RK4 with a fixed step. `dt` is an upper bound; run() shrinks it
/// so the interval is covered by equal steps.
struct StepControl {
  double dt = 0.0;
  double cfl_advection = 0.8;
  double cfl_reaction = 0.5;
  std::size_t clamp_width = 5;  // outermost nodes reset to the far field
  bool clamp_far_field = true;
  bool clamp_negative = true;  // off for signed linear problems
  Advection advection = Advection::upwind5;

  /// Largest dt allowed by both CFL limits.
  static double max_dt(const Grid& grid, const ReactionModel& model, double c, double cfl_advection = 0.8,
                       double cfl_reaction = 0.5);
  static StepControl automatic(const Grid& grid, const ReactionModel& model, double c);
  /// Throws DomainError when dt violates a CFL limit.
  void validate(const Grid& grid, const ReactionModel& model, double c) const;
};

/// Max |f_i| over the corners of the invariant box (unbounded sides use box_scale).
double max_per_capita_rate(const ReactionModel& model);

/// Fourth-order central first derivative with constant ghost values.
void central_derivative(std::span<const double> u, FarField ff, double dx, std::span<double> out);

/// c * du/dz with the chosen stencil and constant ghost values.
void advection_term(std::span<const double> u, FarField ff, double dx, double c, Advection scheme,
                    std::span<double> out);

/// Owns the convolution stencil and stage buffers for one (model, kernel, grid).
class Stepper {
 public:
  Stepper(const ReactionModel& model, const DispersalKernel& kernel, const Grid& grid);

  /// One RK4 step of length dt, then far-field clamping and the positivity
  /// clamp. Throws BlowUp (with the failing time) on runaway values.
  void step(SimState& state, double dt, const StepControl& control);
  /// Right-hand side of the semi-discrete system.
  void rhs(const SimState& frame, const Field& u, Field& du, Advection scheme = Advection::upwind5) const;
  /// sup |u_t| over nodes outside the clamped bands.
  double rate_sup(const SimState& state, std::size_t band, Advection scheme = Advection::upwind5) const;

  const Convolver& convolver() const { return conv_; }
  const Grid& grid() const { return grid_; }
  const ReactionModel& model() const { return model_; }

 private:
  ReactionModel model_;
  Grid grid_;
  Convolver conv_;
  double blowup_limit_ = 0.0;
  std::vector<double> component_limit_;
  Field k1_, k2_, k3_, k4_, tmp_;
  mutable Samples scratch_;
  mutable std::vector<double> node_u_;
};

/// Free-function form of a single step (builds a Stepper each call).
SimState step(SimState state, const ReactionModel& model, const DispersalKernel& kernel, const Grid& grid,
              const StepControl& control);

/// Called with the initial state and after every step.
using Observer = std::function<void(const SimState&)>;

struct RunResult {
  SimState state;
  std::size_t steps = 0;
  double dt = 0.0;
};

/// Fixed-step integration to t_end. Observers decide their own cadence.
RunResult run(SimState initial, const ReactionModel& model, const DispersalKernel& kernel, const Grid& grid,
              const StepControl& control, double t_end, std::span<const Observer> observers = {});

/// Fires at t0, t0 + period, ... (first step at or after each mark).
class Cadence {
 public:
  Cadence(double t0, double period) : t0_(t0), period_(period) {}
  bool due(double t);

 private:
  double t0_;
  double period_;
  std::size_t next_ = 0;
};

struct DecayResult {
  double slope = 0.0;
  std::vector<double> t;
  std::vector<double> sup;
  double outside_mass = 0.0;  // mass outside [-L/2, L/2] at t_end
  double fit_start = 0.0;
};

/// v_t = J*v - v in the lab frame with zero far field; fits the slope of
/// log ||v||_inf against log(1+t) over [fit_start, t_end] (default: the last
/// decade, t_end/10). Throws DegenerateInput for v0 = 0 and DomainTooSmall
/// if the spread reaches outside [-L/2, L/2].
DecayResult linear_decay_experiment(const DispersalKernel& kernel, const Grid& grid, const Samples& v0,
                                    double t_end, double dt = 0.0, double fit_start = -1.0);

}  // namespace nlwave
