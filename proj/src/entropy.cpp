#include "nlwave/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "nlwave/errors.hpp"
#include "nlwave/spectral.hpp"

namespace nlwave {

namespace {

// x - 1 - ln x, with a series near x = 1 where the direct form cancels.
double entropy_kernel(double x) {
  const double d = x - 1.0;
  if (std::abs(d) < 1e-2) {
    // sum_{k>=2} (-1)^k d^k / k
    double term = d * d, acc = 0.0;
    for (int k = 2; k <= 12; ++k) {
      acc += (k % 2 == 0 ? term : -term) / k;
      term *= d;
    }
    return acc;
  }
  return d - std::log(x);
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

}  // namespace

EntropyConfig EntropyConfig::make(const WaveProfile& reference, const ReactionModel& model,
                                  const DispersalKernel& kernel, std::optional<std::vector<double>> sigma,
                                  double window) {
  if (reference.phi.size() != model.m) throw DomainError("profile and model have different component counts");
  EntropyConfig cfg{reference, kernel, sigma ? *sigma : model.sigma};
  if (cfg.sigma.size() != model.m) throw DomainError("sigma needs one weight per component");
  for (double s : cfg.sigma)
    if (!(s > 0.0)) throw DomainError("entropy weights must be positive");
  cfg.R = model.R_bound;
  const auto problem = SpeedProblem::make(kernel, cfg.R);
  cfg.lambda_c = nlwave::lambda_c(problem, reference.c);
  cfg.weight_identity = std::abs(kernel.mgf(cfg.lambda_c) - 1.0 - reference.c * cfg.lambda_c + cfg.R);
  if (cfg.weight_identity > 1e-8)
    throw DomainError("lambda_c=" + fmt(cfg.lambda_c) + " misses the weight identity by " + fmt(cfg.weight_identity));
  cfg.window = window > 0.0 ? window : reference.grid.half_width / 4.0;
  return cfg;
}

EntropyDensity relative_entropy(const Field& u, const EntropyConfig& config) {
  const auto& phi = config.reference.phi;
  const std::size_t m = phi.size();
  if (u.size() != m) throw DomainError("state and reference have different component counts");
  const std::size_t n = config.reference.grid.n;
  EntropyDensity out;
  out.W.assign(n, 0.0);
  out.parts.assign(m, Samples(n));
  for (std::size_t i = 0; i < m; ++i) {
    if (u[i].size() != n) throw GridMismatch("state does not match the reference grid");
    const double s = config.sigma[i];
    for (std::size_t j = 0; j < n; ++j) {
      double ui = u[i][j];
      const double pi = phi[i][j];
      double part;
      if (pi <= 0.0) {
        part = s * std::max(ui, 0.0);
      } else {
        // Relative floor: a tail value of 1e-50 is legitimate, a zero is not.
        if (ui < config.floor_epsilon * pi) {
          ui = config.floor_epsilon * pi;
          ++out.floor_count;
        }
        part = s * pi * entropy_kernel(ui / pi);
      }
      out.parts[i][j] = part;
      out.W[j] += part;
    }
  }
  return out;
}

WeightedEntropy weighted_entropy(std::span<const double> W, const EntropyConfig& config) {
  const Grid& g = config.reference.grid;
  if (W.size() != g.n) throw GridMismatch("W does not match the reference grid");
  WeightedEntropy out;
  out.V.resize(g.n);
  for (std::size_t j = 0; j < g.n; ++j) {
    const double v = W[j] == 0.0 ? 0.0 : W[j] * std::exp(config.lambda_c * g.z(j));
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "e^{lambda_c z} W is not finite at z=" << g.z(j) << " (lambda_c=" << config.lambda_c
         << ", L=" << g.half_width << "); shrink the domain";
      throw Overflow(os.str());
    }
    out.V[j] = v;
    out.sup = std::max(out.sup, std::abs(v));
    out.l1 += (j == 0 || j + 1 == g.n ? 0.5 : 1.0) * std::abs(v) * g.dx;
  }
  if (!std::isfinite(out.l1)) throw Overflow("L1 norm of e^{lambda_c z} W overflowed");
  return out;
}

void EntropyHistory::push(double t, Samples W) {
  t_[head_] = t;
  W_[head_] = std::move(W);
  head_ = (head_ + 1) % 3;
  count_ = std::min<std::size_t>(count_ + 1, 3);
}

double EntropyHistory::time(std::size_t i) const { return t_[(head_ + 3 - count_ + i) % 3]; }
const Samples& EntropyHistory::W(std::size_t i) const { return W_[(head_ + 3 - count_ + i) % 3]; }

SubsolutionResidual subsolution_residual(const EntropyHistory& history, const EntropyConfig& config,
                                         TimeStencil stencil) {
  if (history.size() < 3) throw InsufficientHistory("sub-solution residual needs three consecutive snapshots");
  const Grid& g = config.reference.grid;
  const double t0 = history.time(0), t1 = history.time(1), t2 = history.time(2);
  const double h = 0.5 * (t2 - t0);
  if (!(h > 0.0) || std::abs((t1 - t0) - (t2 - t1)) > 1e-9 * h)
    throw InsufficientHistory("snapshots are not equally spaced in time");
  const Samples& W0 = history.W(0);
  const Samples& W1 = history.W(1);
  const Samples& W2 = history.W(2);
  std::size_t mid = 1;
  if (stencil == TimeStencil::forward) mid = 0;
  if (stencil == TimeStencil::backward) mid = 2;
  const Samples& W = history.W(mid);

  Convolver conv(config.kernel, g);
  const FarField zero{};
  const Samples JW = conv.apply(W, zero);
  Samples Wz(g.n);
  central_derivative(W, zero, g.dx, Wz);

  SubsolutionResidual out;
  out.time = history.time(mid);
  out.rho.assign(g.n, 0.0);
  const std::size_t band = g.ghost + 2;
  const double c = config.reference.c;
  for (std::size_t j = band; j + band < g.n; ++j) {
    double Wt;
    switch (stencil) {
      case TimeStencil::forward: Wt = (-3.0 * W0[j] + 4.0 * W1[j] - W2[j]) / (2.0 * h); break;
      case TimeStencil::backward: Wt = (W0[j] - 4.0 * W1[j] + 3.0 * W2[j]) / (2.0 * h); break;
      default: Wt = (W2[j] - W0[j]) / (2.0 * h); break;
    }
    const double r = Wt - (JW[j] - W[j]) - c * Wz[j] - config.R * W[j];
    out.rho[j] = r;
    out.positive_sup = std::max(out.positive_sup, r);
  }
  return out;
}

double log_inequality_check(std::span<const LogPair> pairs) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& p : pairs) {
    const double X = (p.u_y * p.phi_z) / (p.u_z * p.phi_y);
    worst = std::max(worst, -entropy_kernel(X));
  }
  return worst;
}

void EntropyTrace::write_ndjson(std::ostream& out) const {
  const auto flags = out.flags();
  const auto prec = out.precision();
  out << std::setprecision(17);
  for (const auto& r : records) {
    out << "{\"t\":" << r.t << ",\"W_sup\":" << r.W_sup << ",\"W_L1\":" << r.W_l1 << ",\"V_sup\":" << r.V_sup
        << ",\"V_L1\":" << r.V_l1 << ",\"residual_positive\":" << r.residual_positive
        << ",\"local_sup\":" << r.local_sup << ",\"clamp_count\":" << r.clamp_count
        << ",\"floor_count\":" << r.floor_count << "}\n";
  }
  out.flags(flags);
  out.precision(prec);
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::converged: return "CONVERGED";
    case Verdict::not_converged: return "NOT_CONVERGED";
    case Verdict::out_of_hypothesis: return "OUT_OF_HYPOTHESIS";
  }
  return "?";
}

ConvergenceMonitor::ConvergenceMonitor(EntropyConfig config, MonitorOptions options)
    : config_(std::move(config)), options_(options), cadence_(0.0, options.cadence) {}

void ConvergenceMonitor::observe(const SimState& state) {
  const Grid& g = config_.reference.grid;
  if (!started_) {
    cadence_ = Cadence(state.t, options_.cadence);
    started_ = true;
  }
  const auto density = relative_entropy(state.u, config_);
  history_.push(state.t, density.W);
  if (pending_) {
    ++since_pending_;
    if (since_pending_ == 1 && history_.size() == 3) finish_pending(TimeStencil::centered);
    else if (since_pending_ == 2) finish_pending(TimeStencil::forward);
  }
  if (!cadence_.due(state.t)) return;

  EntropyRecord rec;
  rec.t = state.t;
  const auto V = weighted_entropy(density.W, config_);
  for (std::size_t j = 0; j < g.n; ++j) {
    rec.W_sup = std::max(rec.W_sup, density.W[j]);
    rec.W_l1 += (j == 0 || j + 1 == g.n ? 0.5 : 1.0) * density.W[j] * g.dx;
    if (std::abs(g.z(j)) <= config_.window)
      for (std::size_t i = 0; i < state.u.size(); ++i)
        rec.local_sup = std::max(rec.local_sup, std::abs(state.u[i][j] - config_.reference.phi[i][j]));
  }
  rec.V_sup = V.sup;
  rec.V_l1 = V.l1;
  rec.clamp_count = state.clamp_count;
  rec.floor_count = density.floor_count;

  if (records_.empty()) {
    // The weight condition: V must not be carried by the right end of the grid.
    double inner = 0.0, outer = 0.0;
    for (std::size_t j = 0; j < g.n; ++j) {
      double& side = g.z(j) >= 0.5 * g.half_width ? outer : inner;
      side = std::max(side, V.V[j]);
    }
    hypothesis_ratio_ = outer / std::max(1.0, inner);
    hypothesis_ok_ = outer <= 1e-6 * std::max(1.0, inner);
  }
  records_.push_back(rec);
  pending_ = records_.size() - 1;
  since_pending_ = 0;
}

void ConvergenceMonitor::finish_pending(TimeStencil stencil) {
  const auto r = subsolution_residual(history_, config_, stencil);
  records_[*pending_].residual_positive = r.positive_sup;
  pending_.reset();
}

Observer ConvergenceMonitor::observer() {
  return [this](const SimState& s) { observe(s); };
}

ConvergenceReport ConvergenceMonitor::report() const {
  ConvergenceReport rep;
  rep.trace.records = records_;
  if (pending_ && since_pending_ == 0 && history_.size() == 3) {
    // The run ended on a record: difference backwards.
    const auto r = subsolution_residual(history_, config_, TimeStencil::backward);
    rep.trace.records[*pending_].residual_positive = r.positive_sup;
  }
  const auto& recs = rep.trace.records;
  rep.hypothesis_ok = hypothesis_ok_;
  if (recs.empty()) {
    rep.diagnostics = "no records";
    return rep;
  }
  rep.final_local_sup = recs.back().local_sup;
  const double floor = options_.noise_floor * recs.front().V_sup;
  double running_min = std::numeric_limits<double>::infinity();
  for (const auto& r : recs) {
    rep.floor_count = std::max(rep.floor_count, r.floor_count);
    if (r.t < options_.transient - 1e-9) continue;
    const double v = std::max(r.V_sup, floor);
    if (std::isfinite(running_min) && running_min > 0.0) rep.V_growth = std::max(rep.V_growth, v / running_min);
    else if (std::isfinite(running_min) && v > 0.0) rep.V_growth = std::numeric_limits<double>::infinity();
    running_min = std::min(running_min, v);
  }
  for (const auto& r : recs) rep.residual_positive_max = std::max(rep.residual_positive_max, r.residual_positive);
  rep.V_monotone = rep.V_growth <= 1.0 + options_.wobble;

  const double M = config_.kernel.mgf(config_.lambda_c);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t count = 0;
  for (const auto& r : recs) {
    if (r.t < options_.transient - 1e-9 || !(r.V_sup > 0.0) || r.V_sup <= floor) continue;
    const double x = std::log1p(M * r.t), y = std::log(r.V_sup);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count >= 2) {
    const double cn = static_cast<double>(count);
    rep.decay_slope = (cn * sxy - sx * sy) / (cn * sxx - sx * sx);
  }

  std::ostringstream os;
  os << "final local sup " << fmt(rep.final_local_sup) << " (tol " << fmt(options_.tolerance) << "), V_sup growth "
     << fmt(rep.V_growth) << " (allowed " << fmt(1.0 + options_.wobble) << "), V decay slope vs log(1+tau) "
     << fmt(rep.decay_slope);
  if (!rep.hypothesis_ok)
    os << "; initial V at z >= L/2 is " << fmt(hypothesis_ratio_) << " of the interior sup (weight condition unmet)";
  rep.diagnostics = os.str();

  if (!rep.hypothesis_ok)
    rep.verdict = Verdict::out_of_hypothesis;
  else if (rep.final_local_sup <= options_.tolerance && rep.V_monotone)
    rep.verdict = Verdict::converged;
  else
    rep.verdict = Verdict::not_converged;
  return rep;
}

Field perturbed_profile(const WaveProfile& profile, const ReactionModel& model, double amplitude, double center,
                        double width) {
  Field u = profile.phi;
  const double half = 0.5 * width;
  for (std::size_t i = 0; i < u.size(); ++i) {
    double scale = model.box_upper[i];
    if (!std::isfinite(scale)) scale = *std::max_element(profile.phi[i].begin(), profile.phi[i].end());
    for (std::size_t j = 0; j < profile.grid.n; ++j) {
      const double x = (profile.grid.z(j) - center) / half;
      if (std::abs(x) >= 1.0) continue;
      const double bump = std::exp(1.0 - 1.0 / (1.0 - x * x));
      u[i][j] = std::clamp(u[i][j] + amplitude * scale * bump, 0.0, model.box_upper[i]);
    }
  }
  return u;
}

Field offset_profile(const WaveProfile& profile, const ReactionModel& model, double amplitude, double center) {
  Field u = profile.phi;
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = 0; j < profile.grid.n; ++j)
      if (profile.grid.z(j) >= center)
        u[i][j] = std::clamp(u[i][j] + amplitude * (model.E_minus[i] - model.E_plus[i]), 0.0, model.box_upper[i]);
  return u;
}

}  // namespace nlwave
