#include "nlwave/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "nlwave/errors.hpp"

namespace nlwave {

namespace {

constexpr double kNegligibleDensity = 1e-16;
constexpr int kMaxWindowDoublings = 12;
constexpr double kDivergenceJump = 0.01;
constexpr double kLambdaHatCap = 64.0;

double bump_shape(double x) {
  return std::abs(x) < 1.0 ? std::exp(-1.0 / (1.0 - x * x)) : 0.0;
}

}  // namespace

const char* to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::gaussian: return "gaussian";
    case KernelKind::laplace: return "laplace";
    case KernelKind::compact_bump: return "compact_bump";
    case KernelKind::tabulated: return "tabulated";
  }
  return "?";
}

DispersalKernel DispersalKernel::gaussian(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw ParamError("gaussian kernel needs s > 0");
  DispersalKernel k;
  k.kind_ = KernelKind::gaussian;
  k.param_ = s;
  const double peak = 1.0 / (s * std::sqrt(2.0 * std::numbers::pi));
  k.truncation_radius_ = peak > kNegligibleDensity ? s * std::sqrt(2.0 * std::log(peak / kNegligibleDensity)) : 0.0;
  return k;
}

DispersalKernel DispersalKernel::laplace(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ParamError("laplace kernel needs alpha > 0");
  DispersalKernel k;
  k.kind_ = KernelKind::laplace;
  k.param_ = alpha;
  const double peak = alpha / 2.0;
  k.truncation_radius_ = peak > kNegligibleDensity ? std::log(peak / kNegligibleDensity) / alpha : 0.0;
  k.lambda_hat_ = alpha;
  return k;
}

DispersalKernel DispersalKernel::compact_bump(double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw ParamError("compact_bump kernel needs radius > 0");
  DispersalKernel k;
  k.kind_ = KernelKind::compact_bump;
  k.param_ = radius;
  k.truncation_radius_ = radius;
  const double mass = romberg([radius](double y) { return bump_shape(y / radius); }, -radius, radius, 1e-15, 8);
  k.norm_ = 1.0 / mass;
  return k;
}

DispersalKernel DispersalKernel::tabulated(std::vector<double> y, std::vector<double> density) {
  if (y.size() != density.size()) throw ParamError("tabulated kernel: column lengths differ");
  if (y.size() < 3 || y.size() % 2 == 0)
    throw ParamError("tabulated kernel needs an odd number (>= 3) of samples on a symmetric grid");
  const std::size_t n = y.size();
  const double dy = (y.back() - y.front()) / static_cast<double>(n - 1);
  if (!(dy > 0.0)) throw ParamError("tabulated kernel: abscissae must increase");
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(y[i] - (y.front() + dy * static_cast<double>(i))) > 1e-9 * (1.0 + std::abs(y[i])))
      throw ParamError("tabulated kernel: abscissae are not uniformly spaced");
    if (std::abs(y[i] + y[n - 1 - i]) > 1e-9 * (1.0 + std::abs(y[i])))
      throw ParamError("tabulated kernel: abscissae are not symmetric about 0");
    if (!(density[i] >= 0.0) || !std::isfinite(density[i]))
      throw ParamError("tabulated kernel: density must be finite and nonnegative");
  }
  DispersalKernel k;
  k.kind_ = KernelKind::tabulated;
  k.table_dy_ = dy;
  k.table_y_.resize(n);
  k.table_j_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    k.table_y_[i] = (static_cast<double>(i) - static_cast<double>(n / 2)) * dy;
    k.table_j_[i] = 0.5 * (density[i] + density[n - 1 - i]);
  }
  double mass = 0.0;
  for (std::size_t i = 0; i < n; ++i) mass += (i == 0 || i == n - 1 ? 0.5 : 1.0) * k.table_j_[i];
  mass *= dy;
  if (!(mass > 0.0)) throw ParamError("tabulated kernel has zero mass");
  for (double& v : k.table_j_) v /= mass;

  k.truncation_radius_ = 0.0;
  for (std::size_t i = n / 2; i < n; ++i)
    if (k.table_j_[i] >= kNegligibleDensity) k.truncation_radius_ = std::min(k.table_y_[i] + dy, k.table_y_.back());
  k.lambda_hat_ = k.search_lambda_hat();
  return k;
}

DispersalKernel DispersalKernel::load_tabulated(std::istream& in) {
  std::vector<double> y, j;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    double a = 0.0, b = 0.0;
    if (!(fields >> a)) continue;
    if (!(fields >> b)) throw ParseError("kernel table line " + std::to_string(lineno) + ": expected two columns");
    std::string extra;
    if (fields >> extra) throw ParseError("kernel table line " + std::to_string(lineno) + ": trailing text");
    y.push_back(a);
    j.push_back(b);
  }
  return tabulated(std::move(y), std::move(j));
}

DispersalKernel DispersalKernel::load_tabulated(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open kernel table " + path.string());
  return load_tabulated(in);
}

std::string DispersalKernel::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case KernelKind::gaussian: os << "gaussian{s=" << param_ << "}"; break;
    case KernelKind::laplace: os << "laplace{alpha=" << param_ << "}"; break;
    case KernelKind::compact_bump: os << "compact_bump{radius=" << param_ << "}"; break;
    case KernelKind::tabulated: os << "tabulated{samples=" << table_y_.size() << ", dy=" << table_dy_ << "}"; break;
  }
  return os.str();
}

double DispersalKernel::log_density(double y) const {
  switch (kind_) {
    case KernelKind::gaussian:
      return -0.5 * (y / param_) * (y / param_) - std::log(param_ * std::sqrt(2.0 * std::numbers::pi));
    case KernelKind::laplace:
      return std::log(param_ / 2.0) - param_ * std::abs(y);
    case KernelKind::compact_bump: {
      const double x = y / param_;
      if (std::abs(x) >= 1.0) return -std::numeric_limits<double>::infinity();
      return std::log(norm_) - 1.0 / (1.0 - x * x);
    }
    case KernelKind::tabulated: {
      const double v = (*this)(y);
      return v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity();
    }
  }
  return -std::numeric_limits<double>::infinity();
}

double DispersalKernel::operator()(double y) const {
  if (std::abs(y) > truncation_radius_) return 0.0;
  if (kind_ == KernelKind::tabulated) {
    const double pos = (y - table_y_.front()) / table_dy_;
    const auto i = static_cast<std::size_t>(std::clamp(std::floor(pos), 0.0, static_cast<double>(table_y_.size() - 2)));
    const double t = pos - static_cast<double>(i);
    return (1.0 - t) * table_j_[i] + t * table_j_[i + 1];
  }
  return std::exp(log_density(y));
}

double DispersalKernel::tabulated_moment(double lambda, int power, double window) const {
  const std::size_t n = table_y_.size();
  double sum = 0.0;
  std::size_t first = n, last = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(table_y_[i]) <= window + 1e-12 * table_dy_) {
      first = std::min(first, i);
      last = std::max(last, i);
    }
  }
  for (std::size_t i = first; i <= last && first < n; ++i) {
    const double w = (i == first || i == last) ? 0.5 : 1.0;
    const double y = table_y_[i];
    sum += w * table_j_[i] * std::exp(lambda * y) * (power == 1 ? y : 1.0);
  }
  return sum * table_dy_;
}

double DispersalKernel::moment_quadrature(double lambda, int power) const {
  if (kind_ == KernelKind::tabulated) {
    const double extent = table_y_.back();
    const double full = tabulated_moment(lambda, power, extent);
    const double half = tabulated_moment(lambda, power, 0.5 * extent);
    if (!std::isfinite(full) || std::abs(full - half) > kDivergenceJump * std::abs(full))
      throw QuadratureDivergence("tabulated MGF at lambda=" + std::to_string(lambda) +
                                 " is not stable under window doubling");
    return full;
  }
  auto integrand = [this, lambda, power](double y) {
    const double v = std::exp(log_density(y) + lambda * y);
    return power == 1 ? y * v : v;
  };
  double window = std::max(truncation_radius_, 1.0);
  double prev = romberg(integrand, -window, window);
  double change = 0.0;
  for (int k = 0; k < kMaxWindowDoublings; ++k) {
    window *= 2.0;
    const double cur = romberg(integrand, -window, window);
    if (!std::isfinite(cur))
      throw QuadratureDivergence("MGF quadrature overflowed at lambda=" + std::to_string(lambda));
    change = std::abs(cur - prev);
    const double scale = std::max(std::abs(cur), 1e-300);
    if (change <= 1e-14 * scale || (power == 1 && change <= 1e-15 * std::abs(prev) + 1e-300)) return cur;
    prev = cur;
    if (kind_ == KernelKind::compact_bump) return cur;  // support already covered
  }
  if (change > kDivergenceJump * std::abs(prev))
    throw QuadratureDivergence("MGF quadrature did not stabilise under window doubling at lambda=" +
                               std::to_string(lambda));
  return prev;
}

double DispersalKernel::search_lambda_hat() const {
  auto diverges = [this](double lambda) {
    try {
      (void)moment_quadrature(lambda, 0);
      return false;
    } catch (const QuadratureDivergence&) {
      return true;
    }
  };
  double lo = 0.0;
  for (double lambda = 0.125; lambda <= kLambdaHatCap; lambda *= 2.0) {
    if (diverges(lambda)) {
      double hi = lambda;
      while (hi - lo > 1e-3 * hi) {
        const double mid = 0.5 * (lo + hi);
        (diverges(mid) ? hi : lo) = mid;
      }
      return hi;
    }
    lo = lambda;
  }
  return std::numeric_limits<double>::infinity();
}

double DispersalKernel::mgf(double lambda) const {
  if (!(lambda >= 0.0) || !(lambda < lambda_hat_))
    throw DomainError("mgf needs 0 <= lambda < lambda_hat (" + std::to_string(lambda_hat_) + "), got " +
                      std::to_string(lambda));
  switch (kind_) {
    case KernelKind::gaussian: return std::exp(0.5 * param_ * param_ * lambda * lambda);
    case KernelKind::laplace: return param_ * param_ / (param_ * param_ - lambda * lambda);
    default: return lambda == 0.0 ? 1.0 : moment_quadrature(lambda, 0);
  }
}

double DispersalKernel::mgf_derivative(double lambda) const {
  if (!(lambda >= 0.0) || !(lambda < lambda_hat_))
    throw DomainError("mgf derivative needs 0 <= lambda < lambda_hat, got " + std::to_string(lambda));
  switch (kind_) {
    case KernelKind::gaussian: {
      const double s2 = param_ * param_;
      return s2 * lambda * std::exp(0.5 * s2 * lambda * lambda);
    }
    case KernelKind::laplace: {
      const double a2 = param_ * param_;
      const double d = a2 - lambda * lambda;
      return 2.0 * a2 * lambda / (d * d);
    }
    default: return lambda == 0.0 ? 0.0 : moment_quadrature(lambda, 1);
  }
}

double DispersalKernel::mgf_quadrature(double lambda) const { return moment_quadrature(lambda, 0); }
double DispersalKernel::mgf_derivative_quadrature(double lambda) const { return moment_quadrature(lambda, 1); }

double DispersalKernel::numerical_mass() const {
  if (kind_ == KernelKind::tabulated) return tabulated_moment(0.0, 0, table_y_.back());
  const double w = truncation_radius_;
  return romberg([this](double y) { return (*this)(y); }, -w, w, 1e-15, 8);
}

}  // namespace nlwave
