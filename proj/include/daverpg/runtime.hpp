#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "daverpg/algorithm.hpp"
#include "daverpg/steps.hpp"
#include "daverpg/trace.hpp"
#include "daverpg/types.hpp"

namespace daverpg {

using ProblemD = CompositeProblem<double>;
using StepConfigD = StepConfig<double>;
using MasterStateD = MasterState<double>;

/// When the master interrupts the workers. At least one rule must be active;
/// several may be combined (first to trigger wins).
struct StopRule {
  std::int64_t max_iterations = 0;   // 0 = inactive
  double residual_threshold = 0;     // 0 = inactive; min-norm subgradient of the output
  double wall_clock_seconds = 0;     // 0 = inactive

  void validate() const;
};

struct ClusterConfig {
  int workers = 1;
  StepConfigD steps;
  RepetitionPolicy reps = RepetitionPolicy::fixed(1);
  StopRule stop;
  std::vector<double> slowdown;  // optional per-worker sleep per repetition, seconds
  std::optional<VecD> x_bar_init;
  std::optional<std::vector<VecD>> worker_init;
};

struct RunResult {
  VecD output;
  MasterStateD master;
  Trace trace;
  bool failed = false;
  std::string error;
};

/// Runs the protocol on M worker threads with the calling thread as master.
/// The master commits adjustments strictly one at a time (the commit order
/// defines the iteration numbering); each worker blocks on the returned
/// master variable before starting its next round. On stop the master
/// interrupts the workers and discards adjustments that arrive afterwards.
/// A worker failure surfaces as failed = true with the partial trace.
RunResult run_cluster(const ProblemD& problem, const ClusterConfig& config);

}  // namespace daverpg
