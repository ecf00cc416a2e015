#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "daverpg/analysis.hpp"
#include "daverpg/runtime.hpp"
#include "daverpg/simulator.hpp"
#include "daverpg/types.hpp"

namespace daverpg {

/// Flat experiment description. Mirrors the key-value config file schema
/// one to one; the run manifest echoes these keys back and is itself a
/// loadable config.
struct ExperimentConfig {
  std::string mode = "simulate";  // simulate | run
  std::string algo = "daverpg";   // daverpg | piag | syncpg
  std::string problem = "quadratic-sum";  // quadratic-sum | logistic-synthetic | libsvm
  std::string data;               // libsvm: dataset path
  int workers = 5;
  std::string reps = "1";         // "P" | "P1,P2,..." | "budget:T"
  std::string delay_model = "constant:1";
  double lambda1 = 0;
  double lambda2 = 0;
  std::int64_t feature_cap = 0;
  std::uint64_t seed = 0;
  std::int64_t budget_iters = 1000;
  double budget_time = 0;
  std::int64_t dim = 2;           // synthetic problems
  std::int64_t examples = 200;    // logistic-synthetic
  double spread = 1.0;            // quadratic-sum center spread
  double condition = 10.0;        // quadratic-sum condition number
  double density = 0.2;           // logistic-synthetic feature density
  double noise = 0.5;             // logistic-synthetic label noise
  std::string init;               // "" = zeros | single value | comma list
  std::string piag_delay = "auto";  // auto | integer delay bound
  double stop_residual = 0;       // run mode: residual stop rule
  std::string slowdown;           // run mode: comma list of per-worker sleeps (s)
  double ref_tol = 1e-10;
  std::int64_t ref_cap = 2000000;
  std::string out = ".";
};

ExperimentConfig load_config(const std::string& path);
void set_config_key(ExperimentConfig& config, const std::string& key,
                    const std::string& value);
std::string config_to_text(const ExperimentConfig& config);

struct ExperimentOutputs {
  std::string trace_csv_path;
  std::string report_csv_path;
  std::string manifest_path;
  Trace trace;
  ConvergenceReport report;
  VecD output;
};

/// Runs one experiment end to end and writes trace.csv, report.csv and
/// manifest.txt under config.out. Validates everything it can before
/// writing any file; throws on failure.
ExperimentOutputs run_experiment(const ExperimentConfig& config);

std::uint64_t hash_problem(const ProblemD& problem);

DelayModel parse_delay_model(const std::string& text);
RepetitionPolicy parse_repetition_policy(const std::string& text, int workers);

}  // namespace daverpg
