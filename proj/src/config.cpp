#include "nlwave/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "nlwave/errors.hpp"

namespace nlwave {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

class LineError {
 public:
  LineError(std::size_t line, std::string key) : line_(line), key_(std::move(key)) {}
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("line " + std::to_string(line_) + ", key '" + key_ + "': " + what);
  }

 private:
  std::size_t line_;
  std::string key_;
};

double parse_double(const std::string& v, const LineError& err) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(out))
    err.fail("expected a finite number, got '" + v + "'");
  return out;
}

std::vector<double> parse_list(const std::string& v, const LineError& err) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(trim(item), err));
  if (out.empty()) err.fail("expected a comma-separated list");
  return out;
}

KernelKind parse_kind(const std::string& v, const LineError& err) {
  for (auto k : {KernelKind::gaussian, KernelKind::laplace, KernelKind::compact_bump, KernelKind::tabulated})
    if (v == to_string(k)) return k;
  err.fail("unknown kernel '" + v + "' (gaussian, laplace, compact_bump, tabulated)");
}

const char* kernel_param_name(KernelKind k) {
  switch (k) {
    case KernelKind::gaussian: return "s";
    case KernelKind::laplace: return "alpha";
    case KernelKind::compact_bump: return "radius";
    case KernelKind::tabulated: return "file";
  }
  return "";
}

const char* to_string(PerturbationKind k) {
  switch (k) {
    case PerturbationKind::none: return "none";
    case PerturbationKind::bump: return "bump";
    case PerturbationKind::offset: return "offset";
  }
  return "";
}

}  // namespace

DispersalKernel KernelSpec::build() const {
  switch (kind) {
    case KernelKind::gaussian: return DispersalKernel::gaussian(parameter);
    case KernelKind::laplace: return DispersalKernel::laplace(parameter);
    case KernelKind::compact_bump: return DispersalKernel::compact_bump(parameter);
    case KernelKind::tabulated: return DispersalKernel::load_tabulated(std::filesystem::path(file));
  }
  throw DomainError("unknown kernel kind");
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string raw;
  std::size_t lineno = 0;
  std::set<std::string> seen;
  std::optional<double> kernel_s, kernel_alpha, kernel_radius;
  bool have_model = false;

  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const LineError err(lineno, key);
    if (key.empty()) err.fail("empty key");
    if (value.empty()) err.fail("empty value");
    if (!seen.insert(key).second) err.fail("repeated key");

    if (key == "model") {
      cfg.model = value;
      have_model = true;
    } else if (key == "model.sigma") {
      cfg.sigma = parse_list(value, err);
    } else if (key.rfind("model.", 0) == 0) {
      cfg.model_params[key.substr(6)] = parse_double(value, err);
    } else if (key == "kernel" || key == "kernel.kind") {
      if (seen.count("kernel") && seen.count("kernel.kind")) err.fail("kernel given twice");
      cfg.kernel.kind = parse_kind(value, err);
    } else if (key == "kernel.s") {
      kernel_s = parse_double(value, err);
    } else if (key == "kernel.alpha") {
      kernel_alpha = parse_double(value, err);
    } else if (key == "kernel.radius") {
      kernel_radius = parse_double(value, err);
    } else if (key == "kernel.file") {
      cfg.kernel.file = value;
    } else if (key == "grid.L") {
      cfg.L = parse_double(value, err);
    } else if (key == "grid.dx") {
      cfg.dx = parse_double(value, err);
    } else if (key == "speed.c") {
      cfg.speed.c = parse_double(value, err);
    } else if (key == "speed.multiplier") {
      cfg.speed.multiplier = parse_double(value, err);
    } else if (key == "speed.reference") {
      if (value == "c_star") cfg.speed.reference = SpeedReference::c_star;
      else if (value == "c_R") cfg.speed.reference = SpeedReference::c_R;
      else err.fail("expected c_star or c_R, got '" + value + "'");
    } else if (key == "perturbation" || key == "perturbation.kind") {
      if (value == "none") cfg.perturbation.kind = PerturbationKind::none;
      else if (value == "bump") cfg.perturbation.kind = PerturbationKind::bump;
      else if (value == "offset") cfg.perturbation.kind = PerturbationKind::offset;
      else err.fail("expected none, bump or offset, got '" + value + "'");
    } else if (key == "perturbation.amplitude") {
      cfg.perturbation.amplitude = parse_double(value, err);
    } else if (key == "perturbation.center") {
      cfg.perturbation.center = parse_double(value, err);
    } else if (key == "perturbation.width") {
      cfg.perturbation.width = parse_double(value, err);
    } else if (key == "perturbation.jitter") {
      cfg.perturbation.jitter = parse_double(value, err);
    } else if (key == "step.dt") {
      cfg.dt = parse_double(value, err);
    } else if (key == "t_end") {
      cfg.t_end = parse_double(value, err);
    } else if (key == "observe.cadence") {
      cfg.cadence = parse_double(value, err);
    } else if (key == "relax.tol") {
      cfg.relax_tol = parse_double(value, err);
    } else if (key == "output.dir") {
      cfg.output_dir = value;
    } else if (key == "seed") {
      std::uint64_t s = 0;
      const auto res = std::from_chars(value.data(), value.data() + value.size(), s);
      if (res.ec != std::errc() || res.ptr != value.data() + value.size())
        err.fail("expected a nonnegative integer, got '" + value + "'");
      cfg.seed = s;
    } else if (key == "profile.load") {
      cfg.profile_load = value;
    } else {
      err.fail("unknown key");
    }
  }
  if (!have_model) throw ParseError("missing required key 'model'");

  const char* want = kernel_param_name(cfg.kernel.kind);
  auto set_param = [&](const std::optional<double>& v, const char* name) {
    if (!v) return;
    if (std::string(want) != name)
      throw ParseError(std::string("kernel.") + name + " does not apply to a " + to_string(cfg.kernel.kind) +
                       " kernel");
    cfg.kernel.parameter = *v;
  };
  set_param(kernel_s, "s");
  set_param(kernel_alpha, "alpha");
  set_param(kernel_radius, "radius");
  if (cfg.kernel.kind == KernelKind::tabulated) {
    if (cfg.kernel.file.empty()) throw ParseError("tabulated kernel needs kernel.file");
    cfg.kernel.parameter = 0.0;
  } else if (!cfg.kernel.file.empty()) {
    throw ParseError("kernel.file only applies to a tabulated kernel");
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string emit_config(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "model = " << c.model << "\n";
  for (const auto& [k, v] : c.model_params) os << "model." << k << " = " << number(v) << "\n";
  if (c.sigma) {
    os << "model.sigma = ";
    for (std::size_t i = 0; i < c.sigma->size(); ++i) os << (i ? ", " : "") << number((*c.sigma)[i]);
    os << "\n";
  }
  os << "kernel = " << to_string(c.kernel.kind) << "\n";
  if (c.kernel.kind == KernelKind::tabulated)
    os << "kernel.file = " << c.kernel.file << "\n";
  else
    os << "kernel." << kernel_param_name(c.kernel.kind) << " = " << number(c.kernel.parameter) << "\n";
  os << "grid.L = " << number(c.L) << "\n";
  os << "grid.dx = " << number(c.dx) << "\n";
  if (c.speed.c) os << "speed.c = " << number(*c.speed.c) << "\n";
  os << "speed.multiplier = " << number(c.speed.multiplier) << "\n";
  os << "speed.reference = " << (c.speed.reference == SpeedReference::c_R ? "c_R" : "c_star") << "\n";
  os << "perturbation = " << to_string(c.perturbation.kind) << "\n";
  os << "perturbation.amplitude = " << number(c.perturbation.amplitude) << "\n";
  os << "perturbation.center = " << number(c.perturbation.center) << "\n";
  os << "perturbation.width = " << number(c.perturbation.width) << "\n";
  os << "perturbation.jitter = " << number(c.perturbation.jitter) << "\n";
  os << "step.dt = " << number(c.dt) << "\n";
  os << "t_end = " << number(c.t_end) << "\n";
  os << "observe.cadence = " << number(c.cadence) << "\n";
  os << "relax.tol = " << number(c.relax_tol) << "\n";
  os << "output.dir = " << c.output_dir << "\n";
  os << "seed = " << c.seed << "\n";
  if (!c.profile_load.empty()) os << "profile.load = " << c.profile_load << "\n";
  return os.str();
}

ReactionModel build_model(const ExperimentConfig& config) {
  try {
    return make_model(config.model, config.model_params, config.sigma);
  } catch (const ParamError& e) {
    throw ValidationError(e.message());
  }
}

void validate(const ExperimentConfig& c) {
  auto fail = [](const std::string& what) { throw ValidationError(what); };
  const ReactionModel model = build_model(c);
  if (c.sigma && c.sigma->size() != model.m)
    fail(c.model + " needs " + std::to_string(model.m) + " sigma weights, got " + std::to_string(c.sigma->size()));
  if (c.kernel.kind != KernelKind::tabulated && !(c.kernel.parameter > 0.0))
    fail(std::string("kernel.") + kernel_param_name(c.kernel.kind) + " must be positive, got " +
         number(c.kernel.parameter));
  if (!(c.L > 0.0)) fail("grid.L must be positive, got " + number(c.L));
  if (!(c.dx > 0.0) || c.dx > c.L / 4.0) fail("grid.dx must be in (0, L/4], got " + number(c.dx));
  if (std::abs(c.L / c.dx - std::round(c.L / c.dx)) > 1e-9 * (c.L / c.dx))
    fail("grid.L must be a multiple of grid.dx");
  if (c.speed.c && !(*c.speed.c > 0.0)) fail("speed.c must be positive, got " + number(*c.speed.c));
  if (!(c.speed.multiplier > 0.0)) fail("speed.multiplier must be positive, got " + number(c.speed.multiplier));
  if (!(c.perturbation.amplitude >= 0.0)) fail("perturbation.amplitude must be nonnegative");
  if (!(c.perturbation.width > 0.0)) fail("perturbation.width must be positive");
  if (!(c.perturbation.jitter >= 0.0)) fail("perturbation.jitter must be nonnegative");
  if (!(c.dt >= 0.0)) fail("step.dt must be nonnegative (0 selects the largest admissible step)");
  if (!(c.t_end > 0.0)) fail("t_end must be positive, got " + number(c.t_end));
  if (!(c.cadence > 0.0)) fail("observe.cadence must be positive");
  if (!(c.relax_tol > 0.0)) fail("relax.tol must be positive");
  if (c.output_dir.empty()) fail("output.dir must not be empty");
  try {
    (void)c.kernel.build();
  } catch (const Error& e) {
    throw ValidationError("kernel: " + e.message());
  }
}

}  // namespace nlwave
