#pragma once

#include <filesystem>
#include <istream>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace nlwave {

enum class KernelKind { gaussian, laplace, compact_bump, tabulated };

const char* to_string(KernelKind kind);

/// Symmetric, nonnegative, unit-mass dispersal kernel J.
///
/// Closed-form kinds carry an analytic moment generating function where one
/// exists (gaussian, laplace). The compact bump and tabulated kernels
/// evaluate M(lambda) by quadrature. Instances are immutable.
class DispersalKernel {
 public:
  static DispersalKernel gaussian(double s);
  static DispersalKernel laplace(double alpha);
  static DispersalKernel compact_bump(double radius);
  /// Samples must sit on a uniform grid symmetric about 0; they are
  /// symmetrised and renormalised to unit trapezoidal mass.
  static DispersalKernel tabulated(std::vector<double> y, std::vector<double> density);
  /// Two-column text (y, J(y)), '#' starts a comment.
  static DispersalKernel load_tabulated(std::istream& in);
  static DispersalKernel load_tabulated(const std::filesystem::path& path);

  KernelKind kind() const { return kind_; }
  /// s, alpha or radius; 0 for tabulated kernels.
  double parameter() const { return param_; }
  std::string describe() const;

  /// J(y); zero beyond the truncation radius.
  double operator()(double y) const;
  double truncation_radius() const { return truncation_radius_; }
  bool analytic_mgf() const { return kind_ == KernelKind::gaussian || kind_ == KernelKind::laplace; }

  /// Abscissa of convergence of the MGF, possibly +infinity.
  double lambda_hat() const { return lambda_hat_; }

  /// M(lambda) = \int J(y) e^{lambda y} dy. Closed form when available,
  /// quadrature otherwise. Throws DomainError for lambda outside [0, lambda_hat).
  double mgf(double lambda) const;
  /// dM/dlambda, same dispatch as mgf().
  double mgf_derivative(double lambda) const;
  /// Quadrature route regardless of kind. Throws QuadratureDivergence when
  /// doubling the window keeps moving the value by more than 1%.
  double mgf_quadrature(double lambda) const;
  double mgf_derivative_quadrature(double lambda) const;

  /// \int J over the truncation window by trapezoidal quadrature (with
  /// Richardson acceleration).
  double numerical_mass() const;

  const std::vector<double>& table_y() const { return table_y_; }
  const std::vector<double>& table_density() const { return table_j_; }

 private:
  DispersalKernel() = default;
  /// log J(y) without truncation; -inf outside the support.
  double log_density(double y) const;
  double moment_quadrature(double lambda, int power) const;
  double tabulated_moment(double lambda, int power, double window) const;
  double search_lambda_hat() const;

  KernelKind kind_ = KernelKind::gaussian;
  double param_ = 0.0;
  double norm_ = 1.0;  // compact bump normalisation constant
  double truncation_radius_ = 0.0;
  double lambda_hat_ = std::numeric_limits<double>::infinity();
  std::vector<double> table_y_;
  std::vector<double> table_j_;
  double table_dy_ = 0.0;
};

/// Free-function spellings of the kernel operations.
inline double evaluate(const DispersalKernel& k, double y) { return k(y); }
inline double mgf(const DispersalKernel& k, double lambda) { return k.mgf(lambda); }
inline double lambda_hat(const DispersalKernel& k) { return k.lambda_hat(); }

/// Romberg-accelerated composite trapezoid on [a, b]. The midpoint of
/// [a, b] is always a node, so a kink there does not spoil extrapolation.
template <class F>
double romberg(F&& f, double a, double b, double rel_tol = 1e-14, int min_level = 6,
               int max_level = 22);

}  // namespace nlwave

#include "nlwave/detail/romberg.ipp"
