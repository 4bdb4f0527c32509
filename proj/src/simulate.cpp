#include "nlwave/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "nlwave/errors.hpp"

namespace nlwave {

double max_per_capita_rate(const ReactionModel& model) {
  const std::size_t m = model.m;
  double best = 0.0;
  std::vector<double> corner(m);
  for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) {
    for (std::size_t j = 0; j < m; ++j) corner[j] = (mask >> j & 1) ? model.box_scale(j) : 0.0;
    for (std::size_t i = 0; i < m; ++i) best = std::max(best, std::abs(model.per_capita(i, corner)));
  }
  return best;
}

double StepControl::max_dt(const Grid& grid, const ReactionModel& model, double c, double cfl_advection,
                           double cfl_reaction) {
  double dt = cfl_reaction / (1.0 + max_per_capita_rate(model));
  if (c != 0.0) dt = std::min(dt, cfl_advection * grid.dx / std::abs(c));
  return dt;
}

StepControl StepControl::automatic(const Grid& grid, const ReactionModel& model, double c) {
  StepControl sc;
  sc.dt = max_dt(grid, model, c, sc.cfl_advection, sc.cfl_reaction);
  return sc;
}

void StepControl::validate(const Grid& grid, const ReactionModel& model, double c) const {
  const double limit = max_dt(grid, model, c, cfl_advection, cfl_reaction);
  if (!(dt > 0.0) || dt > limit * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "dt=" << dt << " violates the step limit " << limit << " (cfl_advection=" << cfl_advection
       << ", cfl_reaction=" << cfl_reaction << ")";
    throw DomainError(os.str());
  }
  if (2 * clamp_width + 5 > grid.n) throw DomainError("grid too small for the far-field clamp band");
}

void central_derivative(std::span<const double> u, FarField ff, double dx, std::span<double> out) {
  const std::size_t n = u.size();
  auto at = [&](long j) {
    if (j < 0) return ff.left;
    if (j >= static_cast<long>(n)) return ff.right_value(u[n - 1], static_cast<double>(j - static_cast<long>(n) + 1) * dx);
    return u[static_cast<std::size_t>(j)];
  };
  const double s = 1.0 / (12.0 * dx);
  for (std::size_t j = 0; j < n; ++j) {
    const long jj = static_cast<long>(j);
    if (j >= 2 && j + 2 < n)
      out[j] = (-u[j + 2] + 8.0 * u[j + 1] - 8.0 * u[j - 1] + u[j - 2]) * s;
    else
      out[j] = (-at(jj + 2) + 8.0 * at(jj + 1) - 8.0 * at(jj - 1) + at(jj - 2)) * s;
  }
}

void advection_term(std::span<const double> u, FarField ff, double dx, double c, Advection scheme,
                    std::span<double> out) {
  if (scheme == Advection::central4) {
    central_derivative(u, ff, dx, out);
    for (double& v : out) v *= c;
    return;
  }
  const std::size_t n = u.size();
  auto at = [&](long j) {
    if (j < 0) return ff.left;
    if (j >= static_cast<long>(n)) return ff.right_value(u[n - 1], static_cast<double>(j - static_cast<long>(n) + 1) * dx);
    return u[static_cast<std::size_t>(j)];
  };
  // Offsets s = -2..3 towards the upwind side, whose sign is that of c.
  static constexpr double w[6] = {3.0, -30.0, -20.0, 60.0, -15.0, 2.0};
  const long dir = c >= 0.0 ? 1 : -1;
  const double scale = std::abs(c) / (60.0 * dx);
  for (std::size_t j = 0; j < n; ++j) {
    const long jj = static_cast<long>(j);
    double acc = 0.0;
    if (j >= 3 && j + 3 < n) {
      for (long s = -2; s <= 3; ++s) acc += w[s + 2] * u[static_cast<std::size_t>(jj + dir * s)];
    } else {
      for (long s = -2; s <= 3; ++s) acc += w[s + 2] * at(jj + dir * s);
    }
    out[j] = scale * acc;
  }
}

Stepper::Stepper(const ReactionModel& model, const DispersalKernel& kernel, const Grid& grid)
    : model_(model), grid_(grid), conv_(kernel, grid) {
  const std::size_t m = model.m;
  component_limit_.resize(m);
  for (std::size_t i = 0; i < m; ++i) component_limit_[i] = 1e3 * std::max(model.box_scale(i), 1e-300);
  for (Field* f : {&k1_, &k2_, &k3_, &k4_, &tmp_}) f->assign(m, Samples(grid.n));
  scratch_.resize(grid.n);
  node_u_.resize(m);
}

void Stepper::rhs(const SimState& frame, const Field& u, Field& du, Advection scheme) const {
  const std::size_t m = model_.m, n = grid_.n;
  const double c = frame.speed();
  for (std::size_t i = 0; i < m; ++i) {
    conv_.apply(u[i], frame.far_field[i], du[i]);
    if (c != 0.0) {
      advection_term(u[i], frame.far_field[i], grid_.dx, c, scheme, scratch_);
      for (std::size_t j = 0; j < n; ++j) du[i][j] += scratch_[j] - u[i][j];
    } else {
      for (std::size_t j = 0; j < n; ++j) du[i][j] -= u[i][j];
    }
  }
  // Reaction: u_i (b0_i + sum_j A_ij u_j).
  for (std::size_t i = 0; i < m; ++i) {
    const double bi = model_.b0[i];
    for (std::size_t j = 0; j < n; ++j) {
      double rate = bi;
      for (std::size_t l = 0; l < m; ++l) rate += model_.A[i * m + l] * u[l][j];
      du[i][j] += u[i][j] * rate;
    }
  }
}

void Stepper::step(SimState& s, double dt, const StepControl& control) {
  const std::size_t m = model_.m, n = grid_.n;
  auto stage = [&](const Field& k, double h) {
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) tmp_[i][j] = s.u[i][j] + h * k[i][j];
  };
  const Advection a = control.advection;
  rhs(s, s.u, k1_, a);
  stage(k1_, 0.5 * dt);
  rhs(s, tmp_, k2_, a);
  stage(k2_, 0.5 * dt);
  rhs(s, tmp_, k3_, a);
  stage(k3_, dt);
  rhs(s, tmp_, k4_, a);
  const double w = dt / 6.0;
  for (std::size_t i = 0; i < m; ++i) {
    auto& ui = s.u[i];
    for (std::size_t j = 0; j < n; ++j) ui[j] += w * (k1_[i][j] + 2.0 * k2_[i][j] + 2.0 * k3_[i][j] + k4_[i][j]);
  }
  s.t += dt;

  const std::size_t band = control.clamp_far_field ? std::min(control.clamp_width, n / 2) : 0;
  for (std::size_t i = 0; i < m; ++i) {
    auto& ui = s.u[i];
    const double anchor = ui[n - 1 - band];
    for (std::size_t j = 0; j < band; ++j) {
      ui[j] = s.far_field[i].left;
      ui[n - 1 - j] = s.far_field[i].right_value(anchor, static_cast<double>(band - j) * grid_.dx);
    }
    for (std::size_t j = 0; j < n; ++j) {
      const double v = ui[j];
      if (!(std::abs(v) <= component_limit_[i])) {
        std::ostringstream os;
        os << "component " << i + 1 << " reached " << v << " at z=" << grid_.z(j) << ", t=" << s.t
           << " (reduce dt)";
        throw BlowUp(os.str());
      }
      if (v < 0.0 && control.clamp_negative) {
        ui[j] = 0.0;
        ++s.clamp_count;
      }
    }
  }
}

double Stepper::rate_sup(const SimState& state, std::size_t band, Advection scheme) const {
  Field du(model_.m, Samples(grid_.n));
  rhs(state, state.u, du, scheme);
  double sup = 0.0;
  for (const auto& d : du)
    for (std::size_t j = band; j + band < grid_.n; ++j) sup = std::max(sup, std::abs(d[j]));
  return sup;
}

SimState step(SimState state, const ReactionModel& model, const DispersalKernel& kernel, const Grid& grid,
              const StepControl& control) {
  control.validate(grid, model, state.speed());
  Stepper stepper(model, kernel, grid);
  stepper.step(state, control.dt, control);
  return state;
}

RunResult run(SimState initial, const ReactionModel& model, const DispersalKernel& kernel, const Grid& grid,
              const StepControl& control, double t_end, std::span<const Observer> observers) {
  if (t_end < initial.t) throw DomainError("run needs t_end >= t0");
  if (initial.u.size() != model.m || initial.far_field.size() != model.m)
    throw DomainError("state has the wrong number of components");
  for (const auto& ui : initial.u)
    if (ui.size() != grid.n) throw GridMismatch("state size does not match the grid");
  RunResult result{std::move(initial), 0, 0.0};
  if (t_end == result.state.t) return result;
  control.validate(grid, model, result.state.speed());

  const double t0 = result.state.t;
  const auto steps = static_cast<std::size_t>(std::ceil((t_end - t0) / control.dt - 1e-9));
  const double dt = (t_end - t0) / static_cast<double>(steps);
  result.dt = dt;
  Stepper stepper(model, kernel, grid);
  for (const auto& obs : observers) obs(result.state);
  for (std::size_t k = 1; k <= steps; ++k) {
    stepper.step(result.state, dt, control);
    result.state.t = k == steps ? t_end : t0 + static_cast<double>(k) * dt;
    ++result.steps;
    for (const auto& obs : observers) obs(result.state);
  }
  return result;
}

bool Cadence::due(double t) {
  const double mark = t0_ + static_cast<double>(next_) * period_;
  if (t + 1e-9 * period_ < mark) return false;
  while (t0_ + static_cast<double>(next_) * period_ <= t + 1e-9 * period_) ++next_;
  return true;
}

DecayResult linear_decay_experiment(const DispersalKernel& kernel, const Grid& grid, const Samples& v0,
                                    double t_end, double dt, double fit_start) {
  if (v0.size() != grid.n) throw GridMismatch("initial data does not match the grid");
  if (std::all_of(v0.begin(), v0.end(), [](double v) { return v == 0.0; }))
    throw DegenerateInput("v0 is identically zero; the decay exponent is undefined");
  if (!(t_end > 0.0)) throw DomainError("decay experiment needs t_end > 0");

  // Pure dispersal: a one-component model with f = 0.
  ReactionModel pure;
  pure.name = "pure_dispersal";
  pure.m = 1;
  pure.A = {0.0};
  pure.b0 = {0.0};
  pure.sigma = {1.0};
  pure.box_upper = {std::numeric_limits<double>::infinity()};
  pure.params["s_star"] = *std::max_element(v0.begin(), v0.end(), [](double a, double b) {
    return std::abs(a) < std::abs(b);
  });
  pure.params["s_star"] = std::abs(pure.params["s_star"]);
  pure.E_plus = pure.E_minus = {0.0};

  StepControl control = StepControl::automatic(grid, pure, 0.0);
  if (dt > 0.0) control.dt = dt;
  control.clamp_far_field = false;
  control.clamp_negative = false;

  SimState s;
  s.u = {v0};
  s.far_field = {FarField{0.0, 0.0}};
  DecayResult out;
  out.fit_start = fit_start > 0.0 ? fit_start : t_end / 10.0;
  Cadence cadence(0.0, 1.0);
  std::vector<Observer> obs{[&](const SimState& st) {
    if (!cadence.due(st.t) && st.t != t_end) return;
    double sup = 0.0;
    for (double v : st.u[0]) sup = std::max(sup, std::abs(v));
    out.t.push_back(st.t);
    out.sup.push_back(sup);
  }};
  const auto res = run(std::move(s), pure, kernel, grid, control, t_end, obs);

  double outside = 0.0;
  for (std::size_t j = 0; j < grid.n; ++j) {
    const double mass = std::abs(res.state.u[0][j]) * grid.dx;
    if (std::abs(grid.z(j)) > 0.5 * grid.half_width) outside += mass;
  }
  out.outside_mass = outside;
  if (outside >= 1e-6) {
    std::ostringstream os;
    os << "mass " << outside << " escaped [-L/2, L/2] by t=" << t_end << "; widen the grid";
    throw DomainTooSmall(os.str());
  }

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < out.t.size(); ++k) {
    if (out.t[k] < out.fit_start - 1e-9 || !(out.sup[k] > 0.0)) continue;
    const double x = std::log1p(out.t[k]), y = std::log(out.sup[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count < 2) throw DegenerateInput("too few samples in the fit window");
  const double cn = static_cast<double>(count);
  out.slope = (cn * sxy - sx * sy) / (cn * sxx - sx * sx);
  return out;
}

}  // namespace nlwave
