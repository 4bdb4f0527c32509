#include "nlwave/models.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nlwave/errors.hpp"
#include "nlwave/waves.hpp"

namespace nlwave {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

void require(bool cond, CheckConstraints check, const std::string& model, const std::string& what) {
  if (check == CheckConstraints::yes && !cond) throw ParamError(model + " requires " + what);
}

void require_positive(const std::map<std::string, double>& p, std::initializer_list<const char*> names,
                      CheckConstraints check, const std::string& model) {
  for (const char* n : names) require(p.at(n) > 0.0, check, model, std::string(n) + ">0, got " + fmt(p.at(n)));
}

// Coexistence state: the root of A u + b0 = 0.
std::vector<double> interior_equilibrium(const ReactionModel& m) {
  Eigen::MatrixXd A(m.m, m.m);
  Eigen::VectorXd b(m.m);
  for (std::size_t i = 0; i < m.m; ++i) {
    b(static_cast<long>(i)) = -m.b0[i];
    for (std::size_t j = 0; j < m.m; ++j) A(static_cast<long>(i), static_cast<long>(j)) = m.a(i, j);
  }
  const Eigen::VectorXd x = A.fullPivLu().solve(b);
  return {x.data(), x.data() + x.size()};
}

// s0 from the spatially homogeneous final-size relation
// s* - s0 = (gamma/beta) ln(s*/s0); used only as the relaxation seed.
double final_size_estimate(double beta, double gamma, double s_star) {
  double lo = 1e-14 * s_star, hi = std::min(gamma / beta, s_star);
  auto g = [&](double s) { return s_star - s - gamma / beta * std::log(s_star / s); };
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double ReactionModel::per_capita(std::size_t i, std::span<const double> u) const {
  double acc = b0[i];
  for (std::size_t j = 0; j < m; ++j) acc += A[i * m + j] * u[j];
  return acc;
}

std::vector<double> ReactionModel::f(std::span<const double> u) const {
  std::vector<double> out(m);
  for (std::size_t i = 0; i < m; ++i) out[i] = per_capita(i, u);
  return out;
}

double ReactionModel::box_scale(std::size_t i) const {
  if (std::isfinite(box_upper[i])) return box_upper[i];
  const auto it = params.find("s_star");
  return 10.0 * (it != params.end() ? it->second : 1.0);
}

double ReactionModel::sup_f_on_box(std::size_t i) const {
  double acc = b0[i];
  for (std::size_t j = 0; j < m; ++j) {
    const double aij = a(i, j);
    if (aij > 0.0) acc += std::isfinite(box_upper[j]) ? aij * box_upper[j] : kInf;
  }
  return acc;
}

bool ReactionModel::in_box(std::span<const double> u, double tol) const {
  for (std::size_t i = 0; i < m; ++i)
    if (u[i] < -tol || u[i] > box_upper[i] + tol) return false;
  return true;
}

const std::vector<ModelCatalogEntry>& model_catalog() {
  static const std::vector<ModelCatalogEntry> catalog = {
      {"pp2",
       "predator-prey: f1=r1(1-u1-a u2), f2=r2(-1+b u1-u2)",
       {{"r1", 1.0}, {"r2", 1.0}, {"a", 0.4}, {"b", 2.0}},
       {"r1,r2,a,b > 0", "b > 1", "a b < 1"},
       false},
      {"competitors3",
       "two weak competing predators u1,u2 and prey u3: f1=r1(-1-u1-h u2+b u3), f2=r2(-1-k u1-u2+b u3), "
       "f3=r3(1-a u1-a u2-u3)",
       {{"r1", 1.0}, {"r2", 1.0}, {"r3", 1.0}, {"a", 0.4}, {"b", 2.0}, {"h", 0.5}, {"k", 0.5}},
       {"r1,r2,r3 > 0", "b > 1", "0 < a < 1/(2(b-1))", "0 < h < 1", "0 < k < 1", "sigma supplied"},
       true},
      {"preys3_tyj",
       "two weak competing preys u1,u2 and predator u3: f1=r1(1-u1-h u2-a u3), f2=r2(1-k u1-u2-a u3), "
       "f3=r3(-1+b u1+b u2-u3)",
       {{"r1", 1.0}, {"r2", 1.0}, {"r3", 1.0}, {"a", 0.5}, {"b", 1.0}, {"h", 0.5}, {"k", 0.5}},
       {"r1,r2,r3,a,b > 0", "0 < h < 1", "0 < k < 1", "b(u_p+v_p) > 1", "positive coexistence state",
        "sigma supplied"},
       true},
      {"preys3_zyl",
       "two non-competing preys u1,u2 and predator u3: f1=r1(1-u1-a1 u3), f2=r2(1-u2-a2 u3), "
       "f3=r3(-1+b1 u1+b2 u2-gamma u3)",
       {{"r1", 1.0}, {"r2", 1.0}, {"r3", 1.0}, {"a1", 0.5}, {"a2", 0.5}, {"b1", 1.0}, {"b2", 1.0}, {"gamma", 0.5}},
       {"r1,r2,r3,a1,a2,b1,b2 > 0", "b1 + b2 > 1", "gamma >= 0", "positive coexistence state"},
       false},
      {"epidemic",
       "Kermack-McKendrick: f1=-beta u2, f2=beta u1-gamma",
       {{"beta", 2.0}, {"gamma", 1.0}, {"s_star", 1.0}},
       {"beta,gamma,s_star > 0", "beta s_star > gamma"},
       false},
  };
  return catalog;
}

const ModelCatalogEntry& catalog_entry(const std::string& name) {
  for (const auto& e : model_catalog())
    if (e.name == name) return e;
  throw ParamError("unknown model '" + name + "' (expected pp2, competitors3, preys3_tyj, preys3_zyl, epidemic)");
}

ReactionModel make_model(const std::string& name, const std::map<std::string, double>& given,
                         std::optional<std::vector<double>> sigma, CheckConstraints check) {
  const auto& entry = catalog_entry(name);
  std::map<std::string, double> p;
  for (const auto& spec : entry.params) p[spec.name] = spec.default_value;
  for (const auto& [key, value] : given) {
    if (!p.contains(key)) throw ParamError(name + " has no parameter '" + key + "'");
    if (!std::isfinite(value)) throw ParamError(name + " parameter '" + key + "' must be finite");
    p[key] = value;
  }

  ReactionModel m;
  m.name = name;
  m.params = p;
  std::vector<double> default_sigma;

  if (name == "pp2") {
    const double r1 = p["r1"], r2 = p["r2"], a = p["a"], b = p["b"];
    require_positive(p, {"r1", "r2", "a", "b"}, check, name);
    require(b > 1.0, check, name, "b>1, got b=" + fmt(b));
    require(a * b < 1.0, check, name, "ab<1, got " + fmt(a * b));
    m.m = 2;
    m.A = {-r1, -r1 * a, r2 * b, -r2};
    m.b0 = {r1, -r2};
    default_sigma = {1.0 / r1, a / (r2 * b)};
    m.box_upper = {1.0, b - 1.0};
    m.R_bound = std::max(r1, r2 * (b - 1.0));
    m.rho = r2 * (b - 1.0);
    m.E_plus = {1.0, 0.0};
    m.E_minus = {(1.0 + a) / (1.0 + a * b), (b - 1.0) / (1.0 + a * b)};
  } else if (name == "competitors3") {
    const double r1 = p["r1"], r2 = p["r2"], r3 = p["r3"], a = p["a"], b = p["b"], h = p["h"], k = p["k"];
    require_positive(p, {"r1", "r2", "r3"}, check, name);
    require(b > 1.0, check, name, "b>1, got b=" + fmt(b));
    require(a > 0.0 && a < 1.0 / (2.0 * (b - 1.0)), check, name, "0<a<1/[2(b-1)], got a=" + fmt(a));
    require(h > 0.0 && h < 1.0, check, name, "0<h<1, got h=" + fmt(h));
    require(k > 0.0 && k < 1.0, check, name, "0<k<1, got k=" + fmt(k));
    m.m = 3;
    m.A = {-r1, -r1 * h, r1 * b, -r2 * k, -r2, r2 * b, -r3 * a, -r3 * a, -r3};
    m.b0 = {-r1, -r2, r3};
    m.box_upper = {b - 1.0, b - 1.0, 1.0};
    m.R_bound = std::max({r1 * (b - 1.0), r2 * (b - 1.0), r3});
    m.rho = std::max(r1, r2) * (b - 1.0);
    m.E_plus = {0.0, 0.0, 1.0};
    m.E_minus = interior_equilibrium(m);
  } else if (name == "preys3_tyj") {
    const double r1 = p["r1"], r2 = p["r2"], r3 = p["r3"], a = p["a"], b = p["b"], h = p["h"], k = p["k"];
    require_positive(p, {"r1", "r2", "r3", "a", "b"}, check, name);
    require(h > 0.0 && h < 1.0, check, name, "0<h<1, got h=" + fmt(h));
    require(k > 0.0 && k < 1.0, check, name, "0<k<1, got k=" + fmt(k));
    const double up = (1.0 - h) / (1.0 - h * k), vp = (1.0 - k) / (1.0 - h * k);
    require(b * (up + vp) > 1.0, check, name, "b(u_p+v_p)>1, got " + fmt(b * (up + vp)));
    m.m = 3;
    m.A = {-r1, -r1 * h, -r1 * a, -r2 * k, -r2, -r2 * a, r3 * b, r3 * b, -r3};
    m.b0 = {r1, r2, -r3};
    m.box_upper = {1.0, 1.0, 2.0 * b - 1.0};
    m.R_bound = std::max({r1, r2, r3 * (2.0 * b - 1.0)});
    m.rho = r3 * (b * (up + vp) - 1.0);
    m.E_plus = {up, vp, 0.0};
    m.E_minus = interior_equilibrium(m);
  } else if (name == "preys3_zyl") {
    const double r1 = p["r1"], r2 = p["r2"], r3 = p["r3"], a1 = p["a1"], a2 = p["a2"], b1 = p["b1"], b2 = p["b2"],
                 g = p["gamma"];
    require_positive(p, {"r1", "r2", "r3", "a1", "a2", "b1", "b2"}, check, name);
    require(b1 + b2 > 1.0, check, name, "b1+b2>1, got " + fmt(b1 + b2));
    require(g >= 0.0, check, name, "gamma>=0, got " + fmt(g));
    m.m = 3;
    m.A = {-r1, 0.0, -r1 * a1, 0.0, -r2, -r2 * a2, r3 * b1, r3 * b2, -r3 * g};
    m.b0 = {r1, r2, -r3};
    default_sigma = {1.0 / r1, a1 * b2 / (r2 * a2 * b1), a1 / (r3 * b1)};
    m.box_upper = {1.0, 1.0, b1 + b2 - 1.0};
    m.R_bound = std::max({r1, r2, r3 * (b1 + b2 - 1.0)});
    m.rho = r3 * (b1 + b2 - 1.0);
    m.E_plus = {1.0, 1.0, 0.0};
    m.E_minus = interior_equilibrium(m);
  } else if (name == "epidemic") {
    const double beta = p["beta"], gamma = p["gamma"], s = p["s_star"];
    require_positive(p, {"beta", "gamma", "s_star"}, check, name);
    require(beta * s > gamma, check, name, "beta*s_star>gamma, got " + fmt(beta * s) + " <= " + fmt(gamma));
    m.m = 2;
    m.A = {0.0, -beta, beta, 0.0};
    m.b0 = {0.0, -gamma};
    default_sigma = {1.0, 1.0};
    m.box_upper = {s, kInf};
    m.R_bound = beta * s - gamma;
    m.rho = beta * s - gamma;
    m.E_plus = {s, 0.0};
    m.E_minus = {beta * s > gamma ? final_size_estimate(beta, gamma, s) : s, 0.0};
    m.E_minus_measured = true;
  }

  if (sigma) {
    if (sigma->size() != m.m)
      throw ParamError(name + " needs " + std::to_string(m.m) + " sigma weights, got " + std::to_string(sigma->size()));
    m.sigma = *sigma;
  } else if (entry.sigma_required) {
    throw ParamError(name + " requires explicit sigma weights (no built-in choice)");
  } else {
    m.sigma = default_sigma;
  }
  for (double s : m.sigma)
    if (!(s > 0.0) || !std::isfinite(s)) throw ParamError(name + " requires all sigma_i > 0");

  if (check == CheckConstraints::yes) {
    for (std::size_t i = 0; i < m.m; ++i) {
      require(m.E_minus[i] > 0.0 || name == "epidemic", check, name,
              "a positive coexistence state, got component " + std::to_string(i + 1) + " = " + fmt(m.E_minus[i]));
    }
    require(m.in_box(m.E_plus, 1e-12) && m.in_box(m.E_minus, 1e-12), check, name,
            "both equilibria inside the invariant box");
    for (std::size_t i = 0; i < m.m; ++i)
      require(m.sup_f_on_box(i) <= m.R_bound + 1e-12, check, name,
              "R >= sup f_" + std::to_string(i + 1) + " on the box");
  }
  return m;
}

std::vector<double> reaction(const ReactionModel& model, std::span<const double> u) {
  std::vector<double> out(model.m);
  for (std::size_t i = 0; i < model.m; ++i) out[i] = u[i] * model.per_capita(i, u);
  return out;
}

double cross_term_I(const ReactionModel& model, std::span<const double> u, std::span<const double> phi) {
  double acc = 0.0;
  for (std::size_t i = 0; i < model.m; ++i)
    acc += model.sigma[i] * (u[i] - phi[i]) * (model.per_capita(i, u) - model.per_capita(i, phi));
  return acc;
}

SigmaValidity sigma_validity(const ReactionModel& model) {
  const auto n = static_cast<long>(model.m);
  Eigen::MatrixXd S(n, n);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) {
      const auto ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j);
      S(i, j) = 0.5 * (model.sigma[ui] * model.a(ui, uj) + model.sigma[uj] * model.a(uj, ui));
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(S, Eigen::EigenvaluesOnly);
  SigmaValidity out;
  const auto& ev = solver.eigenvalues();
  out.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  out.max_eigenvalue = out.eigenvalues.back();
  out.valid = out.max_eigenvalue <= 1e-12;
  return out;
}

RCheck R_check(const ReactionModel& model, const WaveProfile& profile) {
  RCheck out;
  out.sup_f.assign(model.m, -kInf);
  const std::size_t n = profile.grid.n;
  std::vector<double> u(model.m);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < model.m; ++i) u[i] = profile.phi[i][j];
    if (!model.in_box(u, 1e-6)) {
      std::ostringstream os;
      os << "profile leaves the invariant box at z=" << profile.grid.z(j);
      throw DomainError(os.str());
    }
    for (std::size_t i = 0; i < model.m; ++i) out.sup_f[i] = std::max(out.sup_f[i], model.per_capita(i, u));
  }
  out.ok = std::all_of(out.sup_f.begin(), out.sup_f.end(), [&](double s) { return s <= model.R_bound + 1e-8; });
  return out;
}

}  // namespace nlwave
