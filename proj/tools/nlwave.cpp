// Command-line front end: speed, models list, wave, simulate, verify, decay, sweep.
#include <CLI11.hpp>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "nlwave/config.hpp"
#include "nlwave/errors.hpp"
#include "nlwave/experiment.hpp"
#include "nlwave/models.hpp"
#include "nlwave/spectral.hpp"

namespace {

using namespace nlwave;

constexpr int kPass = 0;
constexpr int kError = 1;
constexpr int kFail = 2;

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

ExperimentConfig load(const Common& o) {
  ExperimentConfig cfg = load_config(o.config);
  if (!o.out.empty()) cfg.output_dir = o.out;
  if (o.seed) cfg.seed = *o.seed;
  return cfg;
}

int speed(const Common& o, int samples) {
  const ExperimentConfig cfg = load(o);
  validate(cfg);
  const ReactionModel model = build_model(cfg);
  const DispersalKernel kernel = cfg.kernel.build();
  const auto problem = SpeedProblem::make(kernel, model.R_bound);
  const auto minimum = c_R(problem);
  const double cs = c_star(model, kernel);
  const double c = cfg.speed.c ? *cfg.speed.c
                               : cfg.speed.multiplier * (cfg.speed.reference == SpeedReference::c_R ? minimum.c_R : cs);
  std::cout << std::setprecision(12);
  std::cout << "# kernel " << kernel.describe() << ", R = " << model.R_bound << "\n";
  std::cout << "# lambda G(lambda)\n";
  // Samples cover (0, min(3 lambda_min, cap)] on a uniform grid.
  const double top = std::min(3.0 * minimum.lambda_min, problem.lambda_cap);
  for (int k = 1; k <= samples; ++k) {
    const double lam = top * k / samples;
    std::cout << lam << ' ' << G(problem, lam) << '\n';
  }
  std::cout << "c_star " << cs << '\n';
  std::cout << "c_R " << minimum.c_R << '\n';
  std::cout << "lambda_min " << minimum.lambda_min << '\n';
  std::cout << "c " << c << '\n';
  try {
    std::cout << "lambda_c " << lambda_c(problem, minimum, c) << '\n';
  } catch (const NoRoot& e) {
    std::cout << "lambda_c none\n";
    std::cerr << e.what() << '\n';
    return kFail;
  }
  return kPass;
}

int models_list() {
  for (const auto& e : model_catalog()) {
    std::cout << e.name << ": " << e.description << '\n';
    std::cout << "  parameters:";
    for (const auto& p : e.params) std::cout << ' ' << p.name << '=' << p.default_value;
    std::cout << '\n';
    for (const auto& c : e.constraints) std::cout << "  requires " << c << '\n';
  }
  return kPass;
}

int experiment(const Common& o, ExperimentKind kind) {
  const auto m = run_experiment(load(o), kind);
  std::cout << "status " << m.status << '\n';
  if (m.verdict) std::cout << "verdict " << to_string(*m.verdict) << '\n';
  std::cout << "output " << m.dir.string() << '\n';
  return m.pass ? kPass : kFail;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find(',', pos), text.size());
    double v = 0.0;
    const auto [p, ec] = std::from_chars(text.data() + pos, text.data() + end, v);
    if (ec != std::errc() || p != text.data() + end) throw ParseError("bad number list '" + text + "'");
    out.push_back(v);
    pos = end + 1;
  }
  return out;
}

int sweep_cmd(const std::vector<std::string>& files, const std::string& multipliers, const std::string& out,
              std::optional<std::uint64_t> seed, std::size_t parallel, ExperimentKind kind) {
  std::vector<ExperimentConfig> configs;
  for (const auto& f : files) {
    ExperimentConfig cfg = load_config(f);
    if (seed) cfg.seed = *seed;
    if (multipliers.empty()) {
      configs.push_back(cfg);
      continue;
    }
    for (double mult : parse_list(multipliers)) {
      ExperimentConfig v = cfg;
      v.speed.c.reset();
      v.speed.multiplier = mult;
      configs.push_back(v);
    }
  }
  const std::filesystem::path dir = out.empty() ? "sweep" : out;
  std::filesystem::create_directories(dir);
  const auto rows = sweep(configs, parallel, dir, kind);
  std::ofstream f(dir / "summary.tsv");
  write_summary(f, rows);
  write_summary(std::cout, rows);
  for (const auto& r : rows)
    if (!r.error.empty() || (r.verdict != "CONVERGED" && r.verdict != "PASS")) return kFail;
  return kPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Traveling waves under nonlocal dispersal: speeds, profiles and entropy stability checks"};
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App* sub, bool config_required = true) {
    auto* opt = sub->add_option("--config", common.config, "experiment config file");
    if (config_required) opt->required()->check(CLI::ExistingFile);
    sub->add_option("--out", common.out, "output directory (overrides output.dir)");
    sub->add_option("--seed", common.seed, "random seed (overrides seed)");
  };

  int samples = 40;
  auto* speed_cmd = app.add_subcommand("speed", "print G(lambda) samples, c_R and lambda_c");
  add_common(speed_cmd);
  speed_cmd->add_option("--samples", samples, "number of G samples")->check(CLI::PositiveNumber);

  auto* models_cmd = app.add_subcommand("models", "model catalog");
  models_cmd->add_subcommand("list", "print the model catalog with constraints");
  models_cmd->require_subcommand(1);

  auto* wave_cmd = app.add_subcommand("wave", "compute a traveling wave profile");
  add_common(wave_cmd);
  auto* sim_cmd = app.add_subcommand("simulate", "perturb the wave and evolve it in the moving frame");
  add_common(sim_cmd);
  auto* verify_cmd = app.add_subcommand("verify", "full entropy stability check with verdict");
  add_common(verify_cmd);
  auto* decay_cmd = app.add_subcommand("decay", "linear decay experiment for pure dispersal");
  add_common(decay_cmd);

  std::vector<std::string> sweep_files;
  std::string multipliers;
  std::size_t parallel = 1;
  std::string sweep_kind = "verify";
  auto* sweep_sub = app.add_subcommand("sweep", "run several experiments and write summary.tsv");
  sweep_sub->add_option("--config", sweep_files, "config files (repeatable)")->required()->check(CLI::ExistingFile);
  sweep_sub->add_option("--out", common.out, "sweep directory");
  sweep_sub->add_option("--seed", common.seed, "random seed for every run");
  sweep_sub->add_option("--parallel", parallel, "concurrent runs")->check(CLI::PositiveNumber);
  sweep_sub->add_option("--multipliers", multipliers, "comma list of speed multipliers applied to each config");
  sweep_sub->add_option("--kind", sweep_kind, "experiment per run")
      ->check(CLI::IsMember({"wave", "simulate", "verify", "decay"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kPass : kError;
  }

  try {
    if (speed_cmd->parsed()) return speed(common, samples);
    if (models_cmd->parsed()) return models_list();
    if (wave_cmd->parsed()) return experiment(common, ExperimentKind::wave);
    if (sim_cmd->parsed()) return experiment(common, ExperimentKind::simulate);
    if (verify_cmd->parsed()) return experiment(common, ExperimentKind::verify);
    if (decay_cmd->parsed()) return experiment(common, ExperimentKind::decay);
    if (sweep_sub->parsed()) {
      const ExperimentKind kind = sweep_kind == "wave"       ? ExperimentKind::wave
                                  : sweep_kind == "simulate" ? ExperimentKind::simulate
                                  : sweep_kind == "decay"    ? ExperimentKind::decay
                                                             : ExperimentKind::verify;
      return sweep_cmd(sweep_files, multipliers, common.out, common.seed, parallel, kind);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kError;
  }
  return kError;
}
