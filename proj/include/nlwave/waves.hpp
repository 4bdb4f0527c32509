#pragma once

#include <filesystem>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <vector>

#include "nlwave/grid.hpp"
#include "nlwave/kernels.hpp"
#include "nlwave/models.hpp"

namespace nlwave {

/// Stationary solution of the moving-frame system on a truncated grid,
/// pinned so the pin component sits at the midpoint of its far-field values
/// at z = 0.
struct WaveProfile {
  double c = 0.0;
  Grid grid;
  Field phi;
  std::vector<double> E_plus;
  std::vector<double> E_minus;
  double residual_sup = 0.0;
  double tail_rate = 0.0;  // lambda_c of the right far field, 0 for a constant one
  std::size_t pin_component = 0;
  double relax_time = 0.0;
  std::size_t clamp_count = 0;
  /// c within 1e-6 of c* (or below it): relaxation there is slow and the
  /// result is reported without guarantees.
  bool best_effort = false;

  std::vector<FarField> far_fields() const;
};

/// Component with the largest |E-_i - E+_i|; ties go to the lowest index.
std::size_t pin_component(const ReactionModel& model);

struct WaveResidual {
  double sup = 0.0;
  Samples per_node;  // max over components
  Field per_component;
};

/// N[phi_i] + c phi_i' + phi_i f_i(Phi) on every node, with constant
/// far-field extension. `derivative_order` selects the central difference
/// for phi' (4, 6 or 8). The default 8 keeps the derivative error well below
/// that of the 4th-order stepper, so the residual measures how far the
/// profile is from the continuum equation.
WaveResidual wave_residual(const WaveProfile& profile, const DispersalKernel& kernel, const ReactionModel& model,
                           int derivative_order = 8);

/// Central first derivative of order 4, 6 or 8 with constant extension.
Samples central_difference(std::span<const double> u, FarField ff, double dx, int order);

/// out(z_j) = in(z_j + shift) by linear interpolation, constant extension.
Samples translate(std::span<const double> u, const Grid& grid, double shift, FarField ff);

/// Cubic Lagrange interpolation of a profile onto another grid (constant
/// extension beyond the source domain). Keeps c, far fields and pin.
WaveProfile resample(const WaveProfile& profile, const Grid& grid);

struct RelaxOptions {
  double tol = 1e-8;              // sup |u_t| at convergence
  double max_time = 4000.0;
  double output_interval = 5.0;   // re-pinning cadence
  /// Give up early when sup |u_t| has not halved over this much time; 0 disables.
  double stall_window = 200.0;
  double dt = 0.0;                // 0 picks the largest admissible step
  double far_field_tol = 1e-4;
  std::size_t clamp_width = 5;
  std::optional<WaveProfile> guess;  // resampled onto the grid when given
  /// Called after each re-pinning with (t, sup |u_t|, applied shift).
  std::function<void(double, double, double)> progress;
};

/// Relaxes the moving-frame system at speed c from a logistic front between
/// E- and E+ (tail e^{-lambda_c z}) until it is stationary. Throws
/// NoConvergence when the time derivative stalls (typical for c < c*) and
/// CollapseToEquilibrium when the pin component loses its transition.
WaveProfile compute_profile(const ReactionModel& model, const DispersalKernel& kernel, double c, const Grid& grid,
                            const RelaxOptions& options = {});

/// Multi-column text: comment header with c and far fields, then rows z phi_1 .. phi_m.
void write_profile(std::ostream& out, const WaveProfile& profile);
void write_profile(const std::filesystem::path& path, const WaveProfile& profile);
/// The grid's ghost width is set from `truncation_radius`.
WaveProfile read_profile(std::istream& in, double truncation_radius);
WaveProfile read_profile(const std::filesystem::path& path, double truncation_radius);

}  // namespace nlwave
