#pragma once

#include <optional>
#include <string>

#include "homog/config.hpp"

namespace homog {

/// Exit-code contract of the pipeline stages:
///   0 pass, 1 config/schema error, 2 assumption-validation failure,
///   3 numerical-tolerance failure.
enum PipelineExit {
  kExitOk = 0,
  kExitConfig = 1,
  kExitValidation = 2,
  kExitNumerics = 3,
};

struct StageResult {
  int exit_code = 0;
  std::string message;
};

/// Runs one stage (validate | invariant | corrector | homogenize | verify |
/// all), reusing artifacts found in out_dir and writing its own. Stage seeds
/// derive from (seed_base, stage name), so artifact reuse reproduces the
/// one-shot pipeline bit for bit.
StageResult run_stage(const ExperimentConfig& cfg, const std::string& stage,
                      const std::string& out_dir);

// artifact IO (exposed for tests and cross-stage reuse)
void write_invariant_csv(const std::string& path, const EmpiricalMeasure& mu,
                         const std::string& hash, std::uint64_t seed_base);
EmpiricalMeasure load_invariant_csv(const std::string& path);

void write_corrector_csv(const std::string& path, const Corrector& corr, int d,
                         const std::string& hash, std::uint64_t seed_base);
Corrector load_corrector_csv(const std::string& path, int d);

void write_triplet_json(const std::string& path, const HomogenizedTriplet& trip,
                        const std::string& hash, std::uint64_t seed_base);
HomogenizedTriplet load_triplet_json(const std::string& path);

void write_verify_outputs(const std::string& json_path, const std::string& csv_path,
                          const ConvergenceReport& rep, const std::string& hash,
                          std::uint64_t seed_base);

/// Trajectory dump: one row per event, columns (t, x_1..x_d, jump flag).
void write_path_csv(const std::string& path, const PathRecord& record);

bool file_exists(const std::string& path);

}  // namespace homog
