#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nlwave/kernels.hpp"
#include "nlwave/models.hpp"

namespace nlwave {

struct KernelSpec {
  KernelKind kind = KernelKind::gaussian;
  double parameter = 1.0;  // s, alpha or radius
  std::string file;        // tabulated kernels

  DispersalKernel build() const;
  bool operator==(const KernelSpec&) const = default;
};

enum class SpeedReference { c_star, c_R };

struct SpeedSpec {
  std::optional<double> c;  // explicit speed wins over the multiplier
  double multiplier = 1.1;
  SpeedReference reference = SpeedReference::c_star;
  bool operator==(const SpeedSpec&) const = default;
};

enum class PerturbationKind { none, bump, offset };

struct PerturbationSpec {
  PerturbationKind kind = PerturbationKind::bump;
  double amplitude = 0.2;  // fraction of the box width per component
  double center = 0.0;
  double width = 5.0;
  double jitter = 0.0;  // uniform random shift of the centre in [-jitter, jitter]
  bool operator==(const PerturbationSpec&) const = default;
};

/// One experiment, fully specified. Text form is line-oriented `key = value`
/// with '#' comments; see parse_config for the keys.
struct ExperimentConfig {
  KernelSpec kernel;
  std::string model;
  std::map<std::string, double> model_params;
  std::optional<std::vector<double>> sigma;
  double L = 200.0;  // grid is [-L, L]
  double dx = 0.1;
  SpeedSpec speed;
  PerturbationSpec perturbation;
  double dt = 0.0;  // 0: largest admissible step
  double t_end = 200.0;
  double cadence = 1.0;
  double relax_tol = 1e-10;
  std::string output_dir = "out";
  std::uint64_t seed = 0;
  std::string profile_load;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Strict parse: unknown or repeated keys and malformed values throw
/// ParseError naming the line; constraint violations throw ValidationError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical text: every key, fixed order, shortest round-trip numbers.
std::string emit_config(const ExperimentConfig& config);

/// Checks every field against module preconditions (builds the model and
/// kernel once). Throws ValidationError.
void validate(const ExperimentConfig& config);

ReactionModel build_model(const ExperimentConfig& config);

}  // namespace nlwave
