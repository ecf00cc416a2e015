#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "daverpg/algorithm.hpp"
#include "daverpg/problem.hpp"
#include "daverpg/rng.hpp"
#include "daverpg/steps.hpp"
#include "daverpg/trace.hpp"
#include "daverpg/types.hpp"

namespace daverpg {

using ProblemD = CompositeProblem<double>;
using StepConfigD = StepConfig<double>;
using MasterStateD = MasterState<double>;

/// Distribution of per-repetition compute durations (communication latency
/// is folded in: one sample covers compute plus the round trip).
struct DelayModel {
  enum class Kind { constant, uniform, exponential, slow_worker };
  Kind kind = Kind::constant;
  double duration = 1.0;   // constant
  double min = 0, max = 0; // uniform
  double mean = 0;         // exponential
  double base = 1.0;       // slow_worker
  int slow_index = 0;
  double factor = 1.0;

  static DelayModel constant(double duration);
  static DelayModel uniform(double min, double max);
  static DelayModel exponential(double mean);
  static DelayModel slow_worker(int slow_index, double factor, double base = 1.0);

  void validate(int workers) const;
  std::string describe() const;
};

/// One duration draw for the given worker; strictly positive, consuming
/// exactly one state advance of the worker's substream.
double sample_compute_time(const DelayModel& model, int worker, CounterRng& rng);

struct SimBudget {
  std::int64_t max_iterations = 0;  // 0 = unbounded
  double max_sim_time = 0;          // 0 = unbounded

  void validate() const;
};

struct SimOptions {
  Algo algo = Algo::dave_rpg;
  StepConfigD steps;
  RepetitionPolicy reps = RepetitionPolicy::fixed(1);
  DelayModel model = DelayModel::constant(1.0);
  std::uint64_t seed = 0;
  SimBudget budget;
  std::optional<VecD> x_bar_init;                 // default: zeros
  std::optional<std::vector<VecD>> worker_init;   // default: all equal to x_bar_init
  double piag_gamma = 0;                          // required when algo == piag
  std::optional<bool> snapshots;                  // default: dim <= 1000
  // Verification aid: every N commits, replace the incrementally maintained
  // master variable with the recomputed weighted worker average. 0 keeps the
  // pure incremental protocol.
  std::int64_t reanchor_interval = 0;
};

struct SimResult {
  Trace trace;
  MasterStateD master;  // for piag/sync_pg, x_bar holds the final iterate
  VecD output;          // prox of the final master variable
};

/// Deterministic event-driven run: workers alternate compute (durations
/// sampled per repetition from their own substream) and instantaneous
/// exchange; exchanges are numbered in commit order with simultaneous
/// completions committing in ascending worker index. Identical inputs give
/// bit-identical traces.
SimResult simulate(const ProblemD& problem, const SimOptions& options);

/// Update order only, without any iterate math. Because every worker draws
/// from its own substream, the order matches what simulate() realizes for
/// the same (model, seed, policy, budget) regardless of the algorithm.
std::vector<int> simulate_schedule(const DelayModel& model, int workers,
                                   std::uint64_t seed, const RepetitionPolicy& reps,
                                   const SimBudget& budget);

}  // namespace daverpg
