#include "nlwave/experiment.hpp"

#include <fftw3.h>

#include <Eigen/Core>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <random>
#include <sstream>
#include <thread>

#include "nlwave/errors.hpp"
#include "nlwave/simulate.hpp"
#include "nlwave/spectral.hpp"
#include "nlwave/waves.hpp"

namespace nlwave {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr const char* kVersion = "1.0.0";

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void write_text(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw IoError("cannot write " + tmp.string());
    f << text;
    if (!f) throw IoError("failed writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

void write_snapshot(const fs::path& path, const Grid& grid, const Field& u, double t) {
  std::ostringstream os;
  os << std::setprecision(17) << "# t = " << t << "\n# z";
  for (std::size_t i = 0; i < u.size(); ++i) os << " u" << i + 1;
  os << "\n";
  for (std::size_t j = 0; j < grid.n; ++j) {
    os << grid.z(j);
    for (const auto& comp : u) os << ' ' << comp[j];
    os << '\n';
  }
  write_text(path, os.str());
}

json versions() {
  std::ostringstream eigen;
  eigen << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION;
  return json{{"artifact", std::string(kVersion)}, {"compiler", std::string(__VERSION__)}, {"eigen", eigen.str()}, {"fftw", std::string(fftw_version)}};
}

json config_json(const ExperimentConfig& c) {
  json params = json::object();
  for (const auto& [k, v] : c.model_params) params[k] = v;
  return json{{"text", emit_config(c)},
              {"model", c.model},
              {"model_params", params},
              {"sigma_override", c.sigma ? json(*c.sigma) : json(nullptr)},
              {"kernel", {{"kind", to_string(c.kernel.kind)}, {"parameter", c.kernel.parameter}, {"file", c.kernel.file}}},
              {"grid", {{"L", c.L}, {"dx", c.dx}}},
              {"t_end", c.t_end},
              {"seed", c.seed}};
}

// Unit-height compact bump used as initial data for the decay experiment.
Samples unit_bump(const Grid& grid, double center, double width) {
  Samples v(grid.n, 0.0);
  for (std::size_t j = 0; j < grid.n; ++j) {
    const double x = (grid.z(j) - center) / (0.5 * width);
    if (std::abs(x) < 1.0) v[j] = std::exp(1.0 - 1.0 / (1.0 - x * x));
  }
  return v;
}

struct Pipeline {
  const ExperimentConfig& cfg;
  ExperimentKind kind;
  fs::path dir;
  json manifest;
  RunManifest result;

  void flush() {
    result.json = manifest.dump(2) + "\n";
    write_text(dir / "manifest.json", result.json);
  }

  void run_decay(const DispersalKernel& kernel) {
    const Grid grid = Grid::make(cfg.L, cfg.dx, kernel.truncation_radius());
    const Samples v0 = unit_bump(grid, cfg.perturbation.center, cfg.perturbation.width);
    const auto d = linear_decay_experiment(kernel, grid, v0, cfg.t_end, cfg.dt);
    std::ostringstream os;
    os << std::setprecision(17);
    for (std::size_t k = 0; k < d.t.size(); ++k) os << "{\"t\":" << d.t[k] << ",\"sup\":" << d.sup[k] << "}\n";
    write_text(dir / "trace.ndjson", os.str());
    result.pass = d.slope >= -0.6 && d.slope <= -0.4;
    manifest["derived"] = {{"grid", {{"L", grid.half_width}, {"dx", grid.dx}, {"n", grid.n}, {"ghost", grid.ghost}}}};
    manifest["verdict"] = {{"slope", d.slope},
                           {"fit_start", d.fit_start},
                           {"fit_end", cfg.t_end},
                           {"outside_mass", d.outside_mass},
                           {"expected", -0.5},
                           {"pass", result.pass}};
  }

  void run_wave_family(const DispersalKernel& kernel) {
    const ReactionModel model = build_model(cfg);
    json derived;
    derived["R"] = model.R_bound;
    derived["rho"] = model.rho;
    derived["sigma"] = model.sigma;
    const auto sv = sigma_validity(model);
    derived["sigma_validity"] = {{"valid", sv.valid}, {"max_eigenvalue", sv.max_eigenvalue}, {"eigenvalues", sv.eigenvalues}};
    derived["E_plus"] = model.E_plus;
    derived["E_minus_model"] = model.E_minus;

    const double cs = c_star(model, kernel);
    const auto problem = SpeedProblem::make(kernel, model.R_bound);
    const auto minimum = c_R(problem);
    derived["c_star"] = cs;
    derived["c_R"] = minimum.c_R;
    derived["lambda_min"] = minimum.lambda_min;
    const double c = cfg.speed.c ? *cfg.speed.c
                                 : cfg.speed.multiplier * (cfg.speed.reference == SpeedReference::c_R ? minimum.c_R : cs);
    derived["c"] = c;
    derived["c_over_c_R"] = c / minimum.c_R;
    manifest["derived"] = derived;
    flush();

    std::optional<double> lam;
    try {
      lam = lambda_c(problem, minimum, c);
      manifest["derived"]["lambda_c"] = *lam;
      manifest["derived"]["weight_identity"] = std::abs(kernel.mgf(*lam) - 1.0 - c * *lam + model.R_bound);
    } catch (const NoRoot& e) {
      manifest["derived"]["lambda_c"] = nullptr;
      manifest["derived"]["lambda_c_error"] = e.what();
      if (kind == ExperimentKind::verify) throw;
    }

    const Grid grid = Grid::make(cfg.L, cfg.dx, kernel.truncation_radius());
    manifest["derived"]["grid"] = {{"L", grid.half_width}, {"dx", grid.dx}, {"n", grid.n}, {"ghost", grid.ghost}};
    WaveProfile profile;
    if (!cfg.profile_load.empty()) {
      profile = read_profile(fs::path(cfg.profile_load), kernel.truncation_radius());
      if (!(profile.grid.dx == grid.dx && profile.grid.n == grid.n))
        profile = resample(profile, grid);
      profile.residual_sup = wave_residual(profile, kernel, model).sup;
    } else {
      RelaxOptions opt;
      opt.tol = cfg.relax_tol;
      profile = compute_profile(model, kernel, c, grid, opt);
    }
    write_profile(dir / "profile.dat", profile);
    const auto rc = R_check(model, profile);
    manifest["profile"] = {{"residual_sup", profile.residual_sup},
                           {"relax_time", profile.relax_time},
                           {"pin_component", profile.pin_component + 1},
                           {"tail_rate", profile.tail_rate},
                           {"E_minus", profile.E_minus},
                           {"best_effort", profile.best_effort},
                           {"R_check", {{"ok", rc.ok}, {"sup_f", rc.sup_f}}}};
    flush();
    if (kind == ExperimentKind::wave) {
      result.pass = rc.ok;
      manifest["verdict"] = {{"profile_ok", rc.ok}, {"pass", result.pass}};
      return;
    }

    // Initial state: the profile plus the configured perturbation.
    double center = cfg.perturbation.center;
    if (cfg.perturbation.jitter > 0.0) {
      std::mt19937_64 rng(cfg.seed);
      std::uniform_real_distribution<double> u(-cfg.perturbation.jitter, cfg.perturbation.jitter);
      center += u(rng);
    }
    manifest["derived"]["perturbation_center"] = center;
    SimState state;
    state.frame = Frame::moving;
    state.c = c;
    state.far_field = profile.far_fields();
    switch (cfg.perturbation.kind) {
      case PerturbationKind::none: state.u = profile.phi; break;
      case PerturbationKind::bump:
        state.u = perturbed_profile(profile, model, cfg.perturbation.amplitude, center, cfg.perturbation.width);
        break;
      case PerturbationKind::offset:
        state.u = offset_profile(profile, model, cfg.perturbation.amplitude, center);
        break;
    }
    write_snapshot(dir / "snapshot_initial.dat", grid, state.u, 0.0);

    StepControl control = StepControl::automatic(grid, model, c);
    if (cfg.dt > 0.0) control.dt = cfg.dt;
    manifest["derived"]["dt_max"] = control.dt;

    std::vector<Observer> observers;
    std::optional<ConvergenceMonitor> monitor;
    std::ostringstream sim_trace;
    sim_trace << std::setprecision(17);
    if (kind == ExperimentKind::verify) {
      auto ec = EntropyConfig::make(profile, model, kernel);
      monitor.emplace(std::move(ec), MonitorOptions{.cadence = cfg.cadence});
      observers.push_back(monitor->observer());
    } else {
      auto cadence = std::make_shared<Cadence>(0.0, cfg.cadence);
      const double window = grid.half_width / 4.0;
      observers.push_back([&, cadence, window](const SimState& s) {
        if (!cadence->due(s.t)) return;
        double dist = 0.0, local = 0.0;
        std::vector<double> sup(s.u.size(), 0.0);
        for (std::size_t i = 0; i < s.u.size(); ++i)
          for (std::size_t j = 0; j < grid.n; ++j) {
            const double d = std::abs(s.u[i][j] - profile.phi[i][j]);
            dist = std::max(dist, d);
            if (std::abs(grid.z(j)) <= window) local = std::max(local, d);
            sup[i] = std::max(sup[i], std::abs(s.u[i][j]));
          }
        sim_trace << "{\"t\":" << s.t << ",\"sup_distance\":" << dist << ",\"local_sup\":" << local << ",\"sup_u\":[";
        for (std::size_t i = 0; i < sup.size(); ++i) sim_trace << (i ? "," : "") << sup[i];
        sim_trace << "],\"clamp_count\":" << s.clamp_count << "}\n";
      });
    }

    const auto run_result = run(std::move(state), model, kernel, grid, control, cfg.t_end, observers);
    write_snapshot(dir / "snapshot_final.dat", grid, run_result.state.u, run_result.state.t);
    manifest["derived"]["dt"] = run_result.dt;
    manifest["derived"]["steps"] = run_result.steps;
    manifest["derived"]["clamp_count"] = run_result.state.clamp_count;

    if (kind == ExperimentKind::simulate) {
      write_text(dir / "trace.ndjson", sim_trace.str());
      result.pass = run_result.state.clamp_count == 0;
      manifest["verdict"] = {{"clamp_count", run_result.state.clamp_count}, {"pass", result.pass}};
      return;
    }

    const auto rep = monitor->report();
    std::ostringstream trace;
    rep.trace.write_ndjson(trace);
    write_text(dir / "trace.ndjson", trace.str());
    result.verdict = rep.verdict;
    result.pass = rep.verdict == Verdict::converged;
    json verdict = {{"verdict", to_string(rep.verdict)},
                    {"pass", result.pass},
                    {"final_local_sup", rep.final_local_sup},
                    {"tolerance", MonitorOptions{}.tolerance},
                    {"window", monitor->config().window},
                    {"V_growth", number_or_null(rep.V_growth)},
                    {"V_monotone", rep.V_monotone},
                    {"residual_positive_max", rep.residual_positive_max},
                    {"decay_slope_vs_log1p_tau", rep.decay_slope},
                    {"lambda_c", monitor->config().lambda_c},
                    {"weight_identity", monitor->config().weight_identity},
                    {"hypothesis_ok", rep.hypothesis_ok},
                    {"floor_count", rep.floor_count},
                    {"diagnostics", rep.diagnostics}};
    if (!rep.trace.records.empty()) {
      const auto& last = rep.trace.records.back();
      verdict["final"] = {{"t", last.t}, {"W_sup", last.W_sup}, {"W_L1", last.W_l1}, {"V_sup", last.V_sup}, {"V_L1", last.V_l1}};
    }
    manifest["verdict"] = verdict;
    write_text(dir / "verdict.json", verdict.dump(2) + "\n");
  }
};

}  // namespace

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::wave: return "wave";
    case ExperimentKind::simulate: return "simulate";
    case ExperimentKind::verify: return "verify";
    case ExperimentKind::decay: return "decay";
  }
  return "?";
}

RunManifest run_experiment(const ExperimentConfig& config, ExperimentKind kind) {
  const auto start = std::chrono::steady_clock::now();
  Pipeline p{config, kind, fs::path(config.output_dir), {}, {}};
  p.result.dir = p.dir;
  std::error_code ec;
  fs::create_directories(p.dir, ec);
  if (ec) throw IoError("cannot create " + p.dir.string() + ": " + ec.message());
  p.manifest["status"] = "RUNNING";
  p.manifest["kind"] = to_string(kind);
  p.manifest["seed"] = config.seed;
  p.manifest["config"] = config_json(config);
  p.manifest["versions"] = versions();
  p.flush();

  auto finish = [&](const char* status) {
    p.result.status = status;
    p.manifest["status"] = status;
    p.manifest["wall_clock_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    p.flush();
  };
  try {
    validate(config);
    const DispersalKernel kernel = config.kernel.build();
    p.manifest["kernel"] = {{"description", kernel.describe()},
                            {"truncation_radius", kernel.truncation_radius()},
                            {"lambda_hat", number_or_null(kernel.lambda_hat())}};
    if (kind == ExperimentKind::decay)
      p.run_decay(kernel);
    else
      p.run_wave_family(kernel);
  } catch (const Error& e) {
    p.result.error_kind = e.kind();
    p.result.error = e.what();
    p.manifest["error"] = {{"kind", e.kind()}, {"message", e.what()}};
    finish("FAILED");
    throw;
  } catch (const std::exception& e) {
    p.result.error_kind = "Error";
    p.result.error = e.what();
    p.manifest["error"] = {{"kind", "Error"}, {"message", e.what()}};
    finish("FAILED");
    throw;
  }
  finish("COMPLETED");
  return p.result;
}

std::vector<SweepRow> sweep(const std::vector<ExperimentConfig>& configs, std::size_t parallelism,
                            const fs::path& out_dir, ExperimentKind kind) {
  std::vector<SweepRow> rows(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t k = next++; k < configs.size(); k = next++) {
      ExperimentConfig cfg = configs[k];
      std::ostringstream name;
      name << "run_" << std::setw(3) << std::setfill('0') << k;
      cfg.output_dir = (out_dir / name.str()).string();
      SweepRow& row = rows[k];
      row.run = name.str();
      row.model = cfg.model;
      try {
        const auto m = run_experiment(cfg, kind);
        const auto doc = json::parse(m.json);
        row.c = doc["derived"].value("c", 0.0);
        row.c_over_cR = doc["derived"].value("c_over_c_R", 0.0);
        const auto& v = doc["verdict"];
        row.verdict = v.contains("verdict") ? v["verdict"].get<std::string>() : (m.pass ? "PASS" : "FAIL");
        row.final_local_sup = v.value("final_local_sup", 0.0);
        row.V_growth = v.contains("V_growth") && v["V_growth"].is_number() ? v["V_growth"].get<double>() : 0.0;
        row.residual_positive = v.value("residual_positive_max", 0.0);
      } catch (const std::exception& e) {
        row.verdict = "FAILED";
        row.error = e.what();
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(parallelism, configs.size()));
  std::vector<std::jthread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  pool.clear();
  return rows;
}

void write_summary(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "run\tmodel\tc\tc_over_c_R\tverdict\tfinal_local_sup\tV_growth\tresidual_positive\terror\n";
  out << std::setprecision(10);
  for (const auto& r : rows) {
    std::string err = r.error;
    for (char& ch : err)
      if (ch == '\t' || ch == '\n') ch = ' ';
    out << r.run << '\t' << r.model << '\t' << r.c << '\t' << r.c_over_cR << '\t' << r.verdict << '\t'
        << r.final_local_sup << '\t' << r.V_growth << '\t' << r.residual_positive << '\t' << err << '\n';
  }
}

}  // namespace nlwave
