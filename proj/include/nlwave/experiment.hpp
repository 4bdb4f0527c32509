#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "nlwave/config.hpp"
#include "nlwave/entropy.hpp"

namespace nlwave {

enum class ExperimentKind { wave, simulate, verify, decay };
const char* to_string(ExperimentKind kind);

/// Outcome of run_experiment. The full record lives in <dir>/manifest.json.
struct RunManifest {
  std::filesystem::path dir;
  std::string status;  // COMPLETED or FAILED
  bool pass = false;
  std::optional<Verdict> verdict;
  std::string error_kind;
  std::string error;
  std::string json;  // manifest text as written
};

/// Runs the pipeline for one config: kernel -> model -> speeds -> profile ->
/// moving-frame run with observers -> entropy verdict, writing manifest.json
/// (RUNNING first, then COMPLETED or FAILED), trace.ndjson, profile.dat and
/// snapshots into config.output_dir. Module errors are rethrown after the
/// FAILED manifest is on disk.
RunManifest run_experiment(const ExperimentConfig& config, ExperimentKind kind = ExperimentKind::verify);

struct SweepRow {
  std::string run;
  std::string model;
  double c = 0.0;
  double c_over_cR = 0.0;
  std::string verdict;  // verdict name, or FAILED
  double final_local_sup = 0.0;
  double V_growth = 0.0;
  double residual_positive = 0.0;
  std::string error;
};

/// Runs every config (output dirs become out_dir/run_NNN) on up to
/// `parallelism` threads. Failures are isolated into their rows.
std::vector<SweepRow> sweep(const std::vector<ExperimentConfig>& configs, std::size_t parallelism,
                            const std::filesystem::path& out_dir, ExperimentKind kind = ExperimentKind::verify);

/// Tab-separated table with a header line.
void write_summary(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace nlwave
