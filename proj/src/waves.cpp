#include "nlwave/waves.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "nlwave/convolution.hpp"
#include "nlwave/errors.hpp"
#include "nlwave/simulate.hpp"
#include "nlwave/spectral.hpp"

namespace nlwave {

namespace {

// One-sided halves of the antisymmetric central stencils, divided by the
// common denominator.
std::span<const double> stencil(int order) {
  static const std::array<double, 2> s4{8.0 / 12.0, -1.0 / 12.0};
  static const std::array<double, 3> s6{45.0 / 60.0, -9.0 / 60.0, 1.0 / 60.0};
  static const std::array<double, 4> s8{672.0 / 840.0, -168.0 / 840.0, 32.0 / 840.0, -3.0 / 840.0};
  switch (order) {
    case 4: return s4;
    case 6: return s6;
    case 8: return s8;
    default: throw DomainError("derivative order must be 4, 6 or 8, got " + std::to_string(order));
  }
}

std::string join(const std::vector<double>& v) {
  std::ostringstream os;
  os << std::setprecision(17);
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? " " : "") << v[i];
  return os.str();
}

// Crossing of u with level nearest to the centre node, by linear interpolation.
std::optional<double> crossing(const Samples& u, const Grid& grid, double level) {
  std::optional<double> best;
  for (std::size_t j = 0; j + 1 < u.size(); ++j) {
    const double a = u[j] - level, b = u[j + 1] - level;
    if (a == 0.0 && b == 0.0) continue;
    if ((a <= 0.0 && b >= 0.0) || (a >= 0.0 && b <= 0.0)) {
      const double z = grid.z(j) + grid.dx * a / (a - b);
      if (!best || std::abs(z) < std::abs(*best)) best = z;
    }
  }
  return best;
}

// Decay rate of the e^{-lam z} mode that the discrete moving-frame operator
// keeps stationary at E+ (the grid's counterpart of lambda_c). Using it for
// the far-field tail removes a slow O(dx^5) drift of the pinned front.
double discrete_tail_rate(const Convolver& conv, double c, double rho, double lam) {
  const auto w = conv.weights();
  const long r = static_cast<long>(conv.radius());
  const double h = conv.grid().dx;
  static constexpr double up[6] = {3.0, -30.0, -20.0, 60.0, -15.0, 2.0};
  auto growth = [&](double l) {
    double m = 0.0;
    for (long k = -r; k <= r; ++k) m += w[static_cast<std::size_t>(k + r)] * std::exp(l * static_cast<double>(k) * h);
    double d = 0.0;
    for (long s = -2; s <= 3; ++s) d += up[s + 2] * std::exp(-l * static_cast<double>(s) * h);
    return m - 1.0 + rho + c * d / (60.0 * h);
  };
  double lo = 0.98 * lam, hi = 1.02 * lam;
  double glo = growth(lo), ghi = growth(hi);
  if (!(glo > 0.0 && ghi < 0.0)) return lam;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * lam; ++it) {
    const double mid = 0.5 * (lo + hi);
    (growth(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double logistic(double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

}  // namespace

std::vector<FarField> WaveProfile::far_fields() const {
  std::vector<FarField> ff(phi.size());
  for (std::size_t i = 0; i < ff.size(); ++i) ff[i] = {E_minus[i], E_plus[i], tail_rate};
  return ff;
}

std::size_t pin_component(const ReactionModel& model) {
  std::size_t best = 0;
  double gap = -1.0;
  for (std::size_t i = 0; i < model.m; ++i) {
    const double g = std::abs(model.E_minus[i] - model.E_plus[i]);
    if (g > gap + 1e-15) {
      gap = g;
      best = i;
    }
  }
  return best;
}

Samples central_difference(std::span<const double> u, FarField ff, double dx, int order) {
  const auto w = stencil(order);
  const long n = static_cast<long>(u.size());
  const long r = static_cast<long>(w.size());
  auto at = [&](long j) {
    if (j < 0) return ff.left;
    if (j >= n) return ff.right_value(u.back(), static_cast<double>(j - n + 1) * dx);
    return u[static_cast<std::size_t>(j)];
  };
  Samples out(u.size());
  for (long j = 0; j < n; ++j) {
    double acc = 0.0;
    if (j >= r && j + r < n) {
      for (long k = 1; k <= r; ++k)
        acc += w[static_cast<std::size_t>(k - 1)] * (u[static_cast<std::size_t>(j + k)] - u[static_cast<std::size_t>(j - k)]);
    } else {
      for (long k = 1; k <= r; ++k) acc += w[static_cast<std::size_t>(k - 1)] * (at(j + k) - at(j - k));
    }
    out[static_cast<std::size_t>(j)] = acc / dx;
  }
  return out;
}

WaveResidual wave_residual(const WaveProfile& profile, const DispersalKernel& kernel, const ReactionModel& model,
                           int derivative_order) {
  const Grid& grid = profile.grid;
  if (profile.phi.size() != model.m) throw DomainError("profile and model have different component counts");
  Convolver conv(kernel, grid);
  const auto ff = profile.far_fields();
  WaveResidual out;
  out.per_component.assign(model.m, Samples(grid.n));
  out.per_node.assign(grid.n, 0.0);
  std::vector<double> u(model.m);
  for (std::size_t i = 0; i < model.m; ++i) {
    const Samples j_phi = conv.apply(profile.phi[i], ff[i]);
    const Samples d = central_difference(profile.phi[i], ff[i], grid.dx, derivative_order);
    for (std::size_t j = 0; j < grid.n; ++j) out.per_component[i][j] = j_phi[j] - profile.phi[i][j] + profile.c * d[j];
  }
  for (std::size_t j = 0; j < grid.n; ++j) {
    for (std::size_t i = 0; i < model.m; ++i) u[i] = profile.phi[i][j];
    for (std::size_t i = 0; i < model.m; ++i) {
      double& r = out.per_component[i][j];
      r += u[i] * model.per_capita(i, u);
      out.per_node[j] = std::max(out.per_node[j], std::abs(r));
    }
    out.sup = std::max(out.sup, out.per_node[j]);
  }
  return out;
}

Samples translate(std::span<const double> u, const Grid& grid, double shift, FarField ff) {
  const long n = static_cast<long>(u.size());
  const double s = shift / grid.dx;
  const double whole = std::floor(s);
  const double frac = s - whole;
  const long k = static_cast<long>(whole);
  auto at = [&](long j) {
    if (j < 0) return ff.left;
    if (j >= n) return ff.right_value(u.back(), static_cast<double>(j - n + 1) * grid.dx);
    return u[static_cast<std::size_t>(j)];
  };
  Samples out(u.size());
  for (long j = 0; j < n; ++j) out[static_cast<std::size_t>(j)] = (1.0 - frac) * at(j + k) + frac * at(j + k + 1);
  return out;
}

WaveProfile resample(const WaveProfile& profile, const Grid& grid) {
  WaveProfile out = profile;
  out.grid = grid;
  const Grid& src = profile.grid;
  const auto ff = profile.far_fields();
  const long n = static_cast<long>(src.n);
  for (std::size_t i = 0; i < profile.phi.size(); ++i) {
    const auto& u = profile.phi[i];
    auto at = [&](long j) {
      if (j < 0) return ff[i].left;
      if (j >= n) return ff[i].right_value(u.back(), static_cast<double>(j - n + 1) * src.dx);
      return u[static_cast<std::size_t>(j)];
    };
    Samples v(grid.n);
    for (std::size_t j = 0; j < grid.n; ++j) {
      const double x = grid.z(j) / src.dx + static_cast<double>(src.center());
      const long j0 = static_cast<long>(std::floor(x));
      const double t = x - static_cast<double>(j0);
      // Cubic through nodes j0-1 .. j0+2.
      const double p0 = at(j0 - 1), p1 = at(j0), p2 = at(j0 + 1), p3 = at(j0 + 2);
      v[j] = p0 * (-t * (t - 1.0) * (t - 2.0) / 6.0) + p1 * ((t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0) +
             p2 * (-(t + 1.0) * t * (t - 2.0) / 2.0) + p3 * ((t + 1.0) * t * (t - 1.0) / 6.0);
    }
    out.phi[i] = std::move(v);
  }
  return out;
}

WaveProfile compute_profile(const ReactionModel& model, const DispersalKernel& kernel, double c, const Grid& grid,
                            const RelaxOptions& opt) {
  if (!(c > 0.0)) throw DomainError("wave speed must be positive");
  const std::size_t m = model.m;
  const std::size_t band = opt.clamp_width;
  if (2 * band + 8 > grid.n) throw DomainError("grid too small for relaxation");

  const double cs = c_star(model, kernel);
  const auto problem = SpeedProblem::make(kernel, model.rho);
  const auto minimum = c_R(problem);
  const double lam = c >= minimum.c_R ? lambda_c(problem, minimum, c) : minimum.lambda_min;
  const std::size_t pin = pin_component(model);
  const double mid = 0.5 * (model.E_minus[pin] + model.E_plus[pin]);

  // Ahead of a front faster than c* the far field carries the e^{-lam z}
  // tail; at or below c* it is the constant E+.
  const double tail = c >= minimum.c_R ? discrete_tail_rate(Convolver(kernel, grid), c, model.rho, lam) : 0.0;
  SimState state;
  state.frame = Frame::moving;
  state.c = c;
  state.far_field.resize(m);
  for (std::size_t i = 0; i < m; ++i) state.far_field[i] = {model.E_minus[i], model.E_plus[i], tail};
  if (opt.guess) {
    const WaveProfile g = resample(*opt.guess, grid);
    state.u = g.phi;
    for (std::size_t i = 0; i < m; ++i) state.far_field[i].left = g.E_minus[i];
    if (tail > 0.0) {
      // Replace the interpolated leading edge by this grid's stationary tail;
      // otherwise the small rate mismatch has to be advected out through
      // the whole domain.
      const double gap = std::abs(model.E_minus[pin] - model.E_plus[pin]);
      std::size_t j0 = grid.center();
      while (j0 + 1 < grid.n && std::abs(state.u[pin][j0] - model.E_plus[pin]) > 1e-8 * gap) ++j0;
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = j0 + 1; j < grid.n; ++j)
          state.u[i][j] = model.E_plus[i] + (state.u[i][j0] - model.E_plus[i]) *
                                                std::exp(-tail * static_cast<double>(j - j0) * grid.dx);
    }
  } else {
    // Logistic ramp with the stationary tail; components without a
    // far-field gap get a bump so the invasion has something to carry.
    double gap = 0.0;
    for (std::size_t i = 0; i < m; ++i) gap = std::max(gap, std::abs(model.E_minus[i] - model.E_plus[i]));
    state.u.assign(m, Samples(grid.n));
    for (std::size_t j = 0; j < grid.n; ++j) {
      // Written from the E+ side so a vanishing E+ component keeps its tail
      // to full relative precision.
      const double x = (tail > 0.0 ? tail : lam) * grid.z(j);
      const double s = logistic(x), r = logistic(-x);
      for (std::size_t i = 0; i < m; ++i) {
        const double d = model.E_minus[i] - model.E_plus[i];
        state.u[i][j] = model.E_plus[i] + (std::abs(d) > 1e-12 ? d * r : gap * s * r);
      }
    }
  }

  StepControl control = StepControl::automatic(grid, model, c);
  if (opt.dt > 0.0) control.dt = opt.dt;
  control.clamp_width = band;
  control.validate(grid, model, c);
  const auto per_interval = static_cast<std::size_t>(std::ceil(opt.output_interval / control.dt - 1e-9));
  const double dt = opt.output_interval / static_cast<double>(per_interval);

  Stepper stepper(model, kernel, grid);
  auto repin = [&]() {
    const auto z0 = crossing(state.u[pin], grid, mid);
    double lo = state.u[pin].front(), hi = lo;
    for (double v : state.u[pin]) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (!z0 || hi - lo < 0.05 * std::abs(model.E_minus[pin] - model.E_plus[pin])) {
      std::ostringstream os;
      os << "component " << pin + 1 << " flattened to [" << lo << ", " << hi << "] at t=" << state.t << " (c=" << c
         << ", c*=" << cs << ")";
      throw CollapseToEquilibrium(os.str());
    }
    for (std::size_t i = 0; i < m; ++i) state.u[i] = translate(state.u[i], grid, *z0, state.far_field[i]);
    return *z0;
  };

  double shift = repin();
  std::vector<double> history;  // rate at each output time
  for (std::size_t k = 1;; ++k) {
    for (std::size_t s = 0; s < per_interval; ++s) {
      stepper.step(state, dt, control);
      if (model.E_minus_measured) {
        // The left state is not known in advance; let it float.
        for (std::size_t i = 0; i < m; ++i) {
          const double v = state.u[i][band];
          state.far_field[i].left = v;
          std::fill(state.u[i].begin(), state.u[i].begin() + static_cast<long>(band), v);
        }
      }
    }
    state.t = static_cast<double>(k) * opt.output_interval;
    shift = repin();
    const double rate = stepper.rate_sup(state, band);
    history.push_back(rate);
    if (opt.progress) opt.progress(state.t, rate, shift);
    if (!std::isfinite(rate)) throw NoConvergence("relaxation produced non-finite values");
    if (rate < opt.tol) break;

    const auto lag = static_cast<std::size_t>(std::ceil(opt.stall_window / opt.output_interval));
    // Stalled: far from tolerance and less than halved over the window, or
    // sitting on a plateau (typically a domain too short for the far fields).
    const double before = history.size() > lag ? history[history.size() - 1 - lag] : 0.0;
    const bool stalled = opt.stall_window > 0.0 && history.size() > lag &&
                         ((rate > 1e3 * opt.tol && rate > 0.5 * before) || rate > 0.99 * before);
    if (stalled || state.t >= opt.max_time) {
      std::ostringstream os;
      os << "relaxation at c=" << c << " (c*=" << cs << ") " << (stalled ? "stalled" : "hit max time")
         << " at t=" << state.t << " with sup|u_t|=" << rate << " (tol " << opt.tol << "), last shift " << shift;
      throw NoConvergence(os.str());
    }
  }

  WaveProfile out;
  out.c = c;
  out.grid = grid;
  out.phi = std::move(state.u);
  out.E_plus = model.E_plus;
  out.E_minus.resize(m);
  for (std::size_t i = 0; i < m; ++i) out.E_minus[i] = state.far_field[i].left;
  out.tail_rate = tail;
  out.pin_component = pin;
  out.relax_time = state.t;
  out.clamp_count = state.clamp_count;
  out.best_effort = c < cs * (1.0 + 1e-6);

  for (std::size_t i = 0; i < m; ++i) {
    const double left = std::abs(out.phi[i][band] - out.E_minus[i]);
    const double right = std::abs(out.phi[i][grid.n - 1 - band] - out.E_plus[i]);
    if (left > opt.far_field_tol || right > opt.far_field_tol) {
      std::ostringstream os;
      os << "component " << i + 1 << " misses its far field by " << std::max(left, right)
         << "; the domain is too short for c=" << c;
      throw NoConvergence(os.str());
    }
  }
  out.residual_sup = wave_residual(out, kernel, model).sup;
  return out;
}

void write_profile(std::ostream& out, const WaveProfile& p) {
  out << std::setprecision(17);
  out << "# c = " << p.c << "\n";
  out << "# E_minus = " << join(p.E_minus) << "\n";
  out << "# E_plus = " << join(p.E_plus) << "\n";
  out << "# tail_rate = " << p.tail_rate << "\n";
  out << "# pin = " << p.pin_component << "\n";
  out << "# residual = " << p.residual_sup << "\n";
  out << "# z";
  for (std::size_t i = 0; i < p.phi.size(); ++i) out << " phi" << i + 1;
  out << "\n";
  for (std::size_t j = 0; j < p.grid.n; ++j) {
    out << p.grid.z(j);
    for (const auto& comp : p.phi) out << ' ' << comp[j];
    out << '\n';
  }
}

void write_profile(const std::filesystem::path& path, const WaveProfile& profile) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path.string());
  write_profile(f, profile);
  if (!f) throw IoError("failed writing " + path.string());
}

WaveProfile read_profile(std::istream& in, double truncation_radius) {
  WaveProfile p;
  std::vector<double> zs;
  std::string line;
  std::size_t lineno = 0;
  auto numbers = [](const std::string& s) {
    std::istringstream is(s);
    std::vector<double> v;
    double x;
    while (is >> x) v.push_back(x);
    return v;
  };
  bool have_c = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(1, eq - 1);
      key.erase(std::remove(key.begin(), key.end(), ' '), key.end());
      const auto vals = numbers(line.substr(eq + 1));
      if (key == "c" && vals.size() == 1) {
        p.c = vals[0];
        have_c = true;
      } else if (key == "E_minus") {
        p.E_minus = vals;
      } else if (key == "E_plus") {
        p.E_plus = vals;
      } else if (key == "tail_rate" && vals.size() == 1) {
        p.tail_rate = vals[0];
      } else if (key == "pin" && vals.size() == 1) {
        p.pin_component = static_cast<std::size_t>(vals[0]);
      } else if (key == "residual" && vals.size() == 1) {
        p.residual_sup = vals[0];
      }
      continue;
    }
    const auto row = numbers(line);
    if (row.size() < 2) throw ParseError("profile line " + std::to_string(lineno) + ": expected z and values");
    if (p.phi.empty()) p.phi.resize(row.size() - 1);
    if (row.size() != p.phi.size() + 1)
      throw ParseError("profile line " + std::to_string(lineno) + ": inconsistent column count");
    zs.push_back(row[0]);
    for (std::size_t i = 0; i + 1 < row.size(); ++i) p.phi[i].push_back(row[i + 1]);
  }
  if (!have_c || p.E_minus.size() != p.phi.size() || p.E_plus.size() != p.phi.size())
    throw ParseError("profile header lacks c or far-field states");
  if (zs.size() < 5 || zs.size() % 2 == 0) throw ParseError("profile needs an odd number (>= 5) of rows");
  const double dx = (zs.back() - zs.front()) / static_cast<double>(zs.size() - 1);
  p.grid = Grid::make(0.5 * (zs.back() - zs.front()), dx, truncation_radius);
  if (p.grid.n != zs.size() || std::abs(zs[zs.size() / 2]) > 1e-9 * dx)
    throw ParseError("profile rows are not a uniform grid centred on z = 0");
  return p;
}

WaveProfile read_profile(const std::filesystem::path& path, double truncation_radius) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read " + path.string());
  return read_profile(f, truncation_radius);
}

}  // namespace nlwave
