#pragma once

#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nlwave/grid.hpp"

namespace nlwave {

struct WaveProfile;

/// Reaction system u_i f_i(u) with affine per-capita rates f(u) = A u + b0.
///
/// Holds everything the stability argument needs about the model: entropy
/// weights sigma, the invariant box [0, B_i], the growth bound R, the linear
/// spreading rate rho of the invading component, and the far-field states.
struct ReactionModel {
  std::string name;
  std::size_t m = 0;
  std::vector<double> A;   // row-major m x m
  std::vector<double> b0;  // intercepts
  std::vector<double> sigma;
  std::vector<double> box_upper;  // +inf allowed
  double R_bound = 0.0;
  double rho = 0.0;  // linear spreading rate used in c*
  std::vector<double> E_plus;
  std::vector<double> E_minus;
  /// E_minus is only an estimate (e.g. the epidemic's s0) and is measured
  /// from the computed profile.
  bool E_minus_measured = false;
  std::map<std::string, double> params;

  double a(std::size_t i, std::size_t j) const { return A[i * m + j]; }
  double per_capita(std::size_t i, std::span<const double> u) const;
  std::vector<double> f(std::span<const double> u) const;
  /// Finite stand-in for unbounded box sides (10 s* for the epidemic).
  double box_scale(std::size_t i) const;
  /// sup of f_i over the invariant box (exact for affine f).
  double sup_f_on_box(std::size_t i) const;
  bool in_box(std::span<const double> u, double tol = 0.0) const;
};

enum class CheckConstraints { yes, no };

struct ParamSpec {
  std::string name;
  double default_value;
};

struct ModelCatalogEntry {
  std::string name;
  std::string description;
  std::vector<ParamSpec> params;
  std::vector<std::string> constraints;
  bool sigma_required = false;
};

const std::vector<ModelCatalogEntry>& model_catalog();
const ModelCatalogEntry& catalog_entry(const std::string& name);

/// Builds a catalog model. Missing parameters take catalog defaults;
/// unknown names throw ParamError. `sigma` overrides the built-in weights and
/// is mandatory for competitors3 and preys3_tyj.
ReactionModel make_model(const std::string& name, const std::map<std::string, double>& params = {},
                         std::optional<std::vector<double>> sigma = std::nullopt,
                         CheckConstraints check = CheckConstraints::yes);

/// (u_i f_i(u))_i
std::vector<double> reaction(const ReactionModel& model, std::span<const double> u);

/// sum_i sigma_i (u_i - phi_i)(f_i(u) - f_i(phi))
double cross_term_I(const ReactionModel& model, std::span<const double> u, std::span<const double> phi);

struct SigmaValidity {
  bool valid = false;
  double max_eigenvalue = 0.0;
  std::vector<double> eigenvalues;  // ascending
};

/// Sign test of the symmetric part of diag(sigma) A. Equivalent to
/// cross_term_I <= 0 for all states because f is affine.
SigmaValidity sigma_validity(const ReactionModel& model);

struct RCheck {
  bool ok = false;
  std::vector<double> sup_f;
};

/// sup_z f_i(Phi(z)) against R. Throws DomainError if the profile leaves the
/// invariant box.
RCheck R_check(const ReactionModel& model, const WaveProfile& profile);

}  // namespace nlwave
